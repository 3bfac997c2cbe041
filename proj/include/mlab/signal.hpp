#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlab/calendar.hpp"
#include "mlab/event_log.hpp"
#include "mlab/llm.hpp"
#include "mlab/similarity.hpp"

namespace mlab::signal {

enum class Decision : int { kSell = -1, kHold = 0, kBuy = +1 };

const char* decision_name(Decision d);       // "buy" / "hold" / "sell"
int decision_value(Decision d);              // +1 / 0 / -1
Decision decision_from_value(int v);         // rejects values outside {-1,0,+1}

// Everything the signal prompt draws on for one stock and one month. News,
// price dynamics and fundamentals are mandatory (fundamentals may have been
// carried forward from the last reported quarter upstream); the macro
// summary can be absent.
struct SignalContext {
  std::string ticker;
  YearMonth as_of;
  std::string news;
  std::string fundamentals;
  std::string dynamics;
  std::optional<std::string> macro;
  std::string horizon = "one month";
};

struct Signal {
  std::string ticker;
  YearMonth as_of;
  Decision decision = Decision::kHold;
  std::string explanation;
  std::string raw_completion;
};

struct RankedSignal {
  Signal signal;
  int score = 0;  // 0..10
};

// Assembles the chain-of-thought prompt: the four analyses in the order
// news, price dynamics, macro, fundamentals, then step-by-step reasoning
// instructions and a request for a structured final "Decision: <token>"
// line. When macro is absent its section is omitted and the absence stated.
llm::LLMRequest build_signal_prompt(const SignalContext& ctx);

// Extracts the {buy, hold, sell} verdict. Structured "Decision: <token>"
// lines win; without one, the last sentence is scanned for a single decision
// token. Zero or conflicting tokens raise ParseError; the result is never
// silently defaulted.
Decision parse_decision(const std::string& completion);

Signal generate_signal(const SignalContext& ctx, llm::LLMClient& client,
                       const llm::RetryPolicy& retry = {}, EventLog* log = nullptr);

struct RankOptions {
  // Explanations are presented under numeric ids; tickers stay out of the
  // prompt unless explicitly enabled.
  bool include_ticker_names = false;
  llm::RetryPolicy retry;
};

// Scores all of one month's buy explanations in a single call on the 0..10
// scale (10 = strong buy). Presentation order is shuffled under the seed to
// guard position bias; scores are tied to per-signal ids so output order
// matches input order. Ids the client fails to score are re-requested once,
// then it is an error.
std::vector<RankedSignal> rank_buy_explanations(const std::vector<Signal>& signals,
                                                llm::LLMClient& client,
                                                std::uint64_t seed,
                                                const RankOptions& opts = {},
                                                EventLog* log = nullptr);

struct SimilarityStats {
  double mean = 0.0;
  double stddev = 0.0;  // sample, 0 when fewer than two observations
  double min = 0.0;
  double max = 0.0;
  int count = 0;
};

struct ComponentSimilarityReport {
  SimilarityStats news;
  SimilarityStats dynamics;
  SimilarityStats fundamentals;
  SimilarityStats macro;

  nlohmann::ordered_json to_json() const;
};

// Cosine similarity between each signal explanation and the component texts
// it was built from, aggregated per component. Signals and contexts must be
// aligned one-to-one (same ticker and month at each position). Pairs whose
// macro text is absent are skipped for the macro statistic.
ComponentSimilarityReport signal_component_similarity(
    const std::vector<Signal>& signals, const std::vector<SignalContext>& contexts,
    similarity::EmbeddingProvider& provider);

}  // namespace mlab::signal
