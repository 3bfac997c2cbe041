#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace mlab::similarity {

using EmbeddingVector = std::vector<double>;

struct StockDescription {
  std::string ticker;
  std::string text;
};

// Text-to-vector contract. Implementations must return the identical vector
// for identical text within a session and be safe to call concurrently.
class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  virtual EmbeddingVector embed(const std::string& text) = 0;
  virtual std::string name() const = 0;
};

// Deterministic offline provider: hashed bag-of-words with signed buckets,
// L2-normalized. No model weights, no network; the ranking machinery can be
// tested bit-for-bit against it.
class HashedBowProvider final : public EmbeddingProvider {
 public:
  explicit HashedBowProvider(std::size_t dimension = 256)
      : dimension_(dimension) {}
  EmbeddingVector embed(const std::string& text) override;
  std::string name() const override;

 private:
  std::size_t dimension_;
};

// Memoizes an inner provider keyed by content hash. Pairwise ranking over a
// universe reuses each description's embedding many times.
class CachingProvider final : public EmbeddingProvider {
 public:
  explicit CachingProvider(EmbeddingProvider& inner) : inner_(inner) {}
  EmbeddingVector embed(const std::string& text) override;
  std::string name() const override { return inner_.name(); }
  std::size_t cache_size() const;

 private:
  EmbeddingProvider& inner_;
  mutable std::mutex mu_;
  std::unordered_map<std::uint64_t, EmbeddingVector> cache_;
};

// dot(a,b) / (|a| |b|). Equal dimensions required; all-zero vectors have no
// defined similarity.
double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b);

struct ScoredTicker {
  std::string ticker;
  double similarity;
};

// The n tickers most similar to the target's description, target excluded,
// ordered by descending similarity with lexicographic tie-breaks.
std::vector<ScoredTicker> stock_universe(
    const std::string& target, const std::vector<StockDescription>& descriptions,
    std::size_t n, EmbeddingProvider& provider);

}  // namespace mlab::similarity
