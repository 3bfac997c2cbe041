#include "mlab/similarity.hpp"

#include <algorithm>
#include <cmath>

#include "mlab/errors.hpp"
#include "mlab/util.hpp"

namespace mlab::similarity {

EmbeddingVector HashedBowProvider::embed(const std::string& text) {
  EmbeddingVector v(dimension_, 0.0);
  std::string token;
  auto flush = [&] {
    if (token.empty()) return;
    std::uint64_t h = fnv1a64(token);
    std::size_t bucket = h % dimension_;
    double sign = ((h >> 32) & 1) ? 1.0 : -1.0;
    v[bucket] += sign;
    token.clear();
  };
  for (char c : lower(text)) {
    if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9'))
      token.push_back(c);
    else
      flush();
  }
  flush();
  double norm_sq = 0.0;
  for (double x : v) norm_sq += x * x;
  if (norm_sq > 0.0) {
    double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : v) x *= inv;
  }
  return v;
}

std::string HashedBowProvider::name() const {
  return "hashed-bow-" + std::to_string(dimension_);
}

EmbeddingVector CachingProvider::embed(const std::string& text) {
  std::uint64_t key = fnv1a64(text);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = cache_.find(key);
    if (it != cache_.end()) return it->second;
  }
  EmbeddingVector v = inner_.embed(text);
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.emplace(key, std::move(v)).first->second;
}

std::size_t CachingProvider::cache_size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return cache_.size();
}

double cosine_similarity(const EmbeddingVector& a, const EmbeddingVector& b) {
  if (a.size() != b.size())
    throw InvalidInputError("embedding dimension mismatch: " +
                            std::to_string(a.size()) + " vs " +
                            std::to_string(b.size()));
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0)
    throw InvalidInputError("cosine similarity undefined for zero vector");
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::vector<ScoredTicker> stock_universe(
    const std::string& target, const std::vector<StockDescription>& descriptions,
    std::size_t n, EmbeddingProvider& provider) {
  if (n >= descriptions.size())
    throw InvalidInputError("universe size " + std::to_string(n) +
                            " must be smaller than the description count " +
                            std::to_string(descriptions.size()));
  const StockDescription* target_desc = nullptr;
  for (const auto& d : descriptions) {
    if (d.ticker == target) {
      if (target_desc)
        throw IntegrityError("duplicate ticker '" + target + "' in descriptions");
      target_desc = &d;
    }
    if (d.text.empty())
      throw InvalidInputError("empty description for ticker '" + d.ticker + "'");
  }
  if (!target_desc)
    throw NotFoundError("target '" + target + "' not in descriptions");

  EmbeddingVector target_vec = provider.embed(target_desc->text);
  std::vector<ScoredTicker> scored;
  scored.reserve(descriptions.size() - 1);
  for (const auto& d : descriptions) {
    if (d.ticker == target) continue;
    scored.push_back({d.ticker, cosine_similarity(target_vec, provider.embed(d.text))});
  }
  std::sort(scored.begin(), scored.end(), [](const ScoredTicker& a, const ScoredTicker& b) {
    if (a.similarity != b.similarity) return a.similarity > b.similarity;
    return a.ticker < b.ticker;
  });
  scored.resize(n);
  return scored;
}

}  // namespace mlab::similarity
