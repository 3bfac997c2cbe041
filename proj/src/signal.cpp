#include "mlab/signal.hpp"

#include <algorithm>
#include <cctype>
#include <cstdio>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mlab/errors.hpp"
#include "mlab/rng.hpp"
#include "mlab/util.hpp"

namespace mlab::signal {

const char* decision_name(Decision d) {
  switch (d) {
    case Decision::kBuy: return "buy";
    case Decision::kHold: return "hold";
    case Decision::kSell: return "sell";
  }
  return "?";
}

int decision_value(Decision d) { return static_cast<int>(d); }

Decision decision_from_value(int v) {
  if (v < -1 || v > 1)
    throw InvalidInputError("decision value " + std::to_string(v) +
                            " outside {-1, 0, +1}");
  return static_cast<Decision>(v);
}

// ---------------------------------------------------------------------------
// Prompt assembly
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kSignalSystem =
    "You are an expert financial analyst advising on monthly portfolio "
    "positioning, one stock at a time.";

void require_section(const std::string& text, const char* name,
                     const std::string& ticker) {
  if (util::trim(text).empty())
    throw InvalidInputError(std::string("signal context for ") + ticker +
                            " is missing its " + name + " section");
}

}  // namespace

llm::LLMRequest build_signal_prompt(const SignalContext& ctx) {
  if (util::trim(ctx.ticker).empty())
    throw InvalidInputError("signal context has no ticker");
  require_section(ctx.news, "news", ctx.ticker);
  require_section(ctx.dynamics, "price dynamics", ctx.ticker);
  require_section(ctx.fundamentals, "fundamentals", ctx.ticker);
  if (ctx.macro && util::trim(*ctx.macro).empty())
    throw InvalidInputError("signal context for " + ctx.ticker +
                            " carries an empty macro section");
  if (util::trim(ctx.horizon).empty())
    throw InvalidInputError("signal context for " + ctx.ticker + " has no horizon");

  std::ostringstream os;
  os << "Stock: " << ctx.ticker << "\nMonth: " << ctx.as_of.to_string()
     << "\nInvestment horizon: " << ctx.horizon << "\n";
  os << "\nNews Analysis:\n" << ctx.news << "\n";
  os << "\nPrice Dynamics Analysis:\n" << ctx.dynamics << "\n";
  if (ctx.macro)
    os << "\nMacroeconomic Environment Analysis:\n" << *ctx.macro << "\n";
  else
    os << "\n(No macroeconomic summary is available for this month.)\n";
  os << "\nFundamentals Analysis:\n" << ctx.fundamentals << "\n";
  os << "\nWeigh the evidence step by step: the news flow, the stock's price "
        "dynamics relative to its peers and the index, the macroeconomic "
        "environment, and the company's fundamentals. Explain your reasoning, "
        "then end with a single final line formatted exactly as "
        "\"Decision: buy\", \"Decision: hold\", or \"Decision: sell\". The "
        "decision concerns positioning for the coming "
     << ctx.horizon
     << ": \"buy\" means add or keep a long position, \"sell\" means reduce "
        "or exit it.";

  llm::LLMRequest req;
  req.system = kSignalSystem;
  req.user = os.str();
  return req;
}

// ---------------------------------------------------------------------------
// Decision parsing
// ---------------------------------------------------------------------------

namespace {

// Distinct decision words (buy/hold/sell) appearing as whole tokens, in order
// of first appearance.
std::vector<std::string> decision_words(const std::string& text) {
  std::vector<std::string> found;
  std::size_t i = 0;
  while (i < text.size()) {
    if (!std::isalpha(static_cast<unsigned char>(text[i]))) {
      ++i;
      continue;
    }
    std::size_t j = i;
    while (j < text.size() && std::isalpha(static_cast<unsigned char>(text[j]))) ++j;
    std::string word = util::lower(text.substr(i, j - i));
    if (word == "buy" || word == "hold" || word == "sell")
      if (std::find(found.begin(), found.end(), word) == found.end())
        found.push_back(word);
    i = j;
  }
  return found;
}

// A structured decision line: optional markdown clutter, the word
// "decision", then the verdict somewhere after it on the same line.
bool structured_decision_line(const std::string& line, std::string* token) {
  std::size_t i = 0;
  while (i < line.size() && !std::isalpha(static_cast<unsigned char>(line[i]))) ++i;
  std::size_t j = i;
  while (j < line.size() && std::isalpha(static_cast<unsigned char>(line[j]))) ++j;
  if (util::lower(line.substr(i, j - i)) != "decision") return false;
  std::vector<std::string> words = decision_words(line.substr(j));
  if (words.empty()) return false;
  if (words.size() > 1)
    throw ParseError("conflicting decision tokens on one line: " +
                     std::string(util::trim(line)));
  *token = words.front();
  return true;
}

Decision token_to_decision(const std::string& token) {
  if (token == "buy") return Decision::kBuy;
  if (token == "sell") return Decision::kSell;
  return Decision::kHold;
}

std::string last_sentence(const std::string& text) {
  std::string current, last;
  auto has_alpha = [](const std::string& s) {
    return std::any_of(s.begin(), s.end(), [](unsigned char c) {
      return std::isalpha(c) != 0;
    });
  };
  for (char c : text) {
    if (c == '.' || c == '!' || c == '?' || c == '\n') {
      if (has_alpha(current)) last = current;
      current.clear();
    } else {
      current.push_back(c);
    }
  }
  if (has_alpha(current)) last = current;
  return last;
}

}  // namespace

Decision parse_decision(const std::string& completion) {
  std::vector<std::string> structured;
  std::istringstream is(completion);
  std::string line;
  while (std::getline(is, line)) {
    std::string token;
    if (structured_decision_line(line, &token))
      if (std::find(structured.begin(), structured.end(), token) == structured.end())
        structured.push_back(token);
  }
  if (structured.size() == 1) return token_to_decision(structured.front());
  if (structured.size() > 1)
    throw ParseError("conflicting decision lines: " + structured[0] + " vs " +
                     structured[1]);

  std::vector<std::string> words = decision_words(last_sentence(completion));
  if (words.size() == 1) return token_to_decision(words.front());
  if (words.empty()) throw ParseError("no decision token found");
  throw ParseError("conflicting decision tokens in final sentence: " + words[0] +
                   " vs " + words[1]);
}

// ---------------------------------------------------------------------------
// Signal generation
// ---------------------------------------------------------------------------

namespace {

std::string strip_decision_lines(const std::string& completion) {
  std::ostringstream out;
  std::istringstream is(completion);
  std::string line;
  bool first = true;
  while (std::getline(is, line)) {
    std::string token;
    bool is_decision = false;
    try {
      is_decision = structured_decision_line(line, &token);
    } catch (const ParseError&) {
      is_decision = true;  // conflicted line is still a decision line
    }
    if (is_decision) continue;
    if (!first) out << '\n';
    out << line;
    first = false;
  }
  return out.str();
}

}  // namespace

Signal generate_signal(const SignalContext& ctx, llm::LLMClient& client,
                       const llm::RetryPolicy& retry, EventLog* log) {
  llm::LLMRequest req = build_signal_prompt(ctx);
  const std::string raw = llm::complete_with_retry(client, req, retry, log);

  Decision decision;
  try {
    decision = parse_decision(raw);
  } catch (const ParseError& e) {
    throw ParseError(ctx.ticker + " " + ctx.as_of.to_string() + ": " + e.what() +
                     "; raw completion: " + raw);
  }

  Signal s;
  s.ticker = ctx.ticker;
  s.as_of = ctx.as_of;
  s.decision = decision;
  s.raw_completion = raw;
  s.explanation = util::trim(strip_decision_lines(raw));
  if (s.explanation.empty()) s.explanation = util::trim(raw);
  if (decision != Decision::kHold && s.explanation.empty())
    throw ParseError(ctx.ticker + " " + ctx.as_of.to_string() +
                     ": empty explanation for an active decision");
  return s;
}

// ---------------------------------------------------------------------------
// Ex-post ranking of buy explanations
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kRankSystem =
    "You review buy recommendations after the fact and grade how convincing "
    "each underlying explanation is.";

std::string build_rank_prompt(const std::vector<Signal>& signals,
                              const std::vector<std::size_t>& order,
                              const YearMonth& month, bool include_names) {
  std::ostringstream os;
  os << "Month: " << month.to_string() << "\n";
  os << "You are given " << order.size()
     << " buy recommendations, each identified by a numeric id. Rank each "
        "explanation on a scale of 0 to 10, with 10 indicating a strong buy.\n";
  for (std::size_t idx : order) {
    os << "\nExplanation " << (idx + 1) << ":\n";
    if (include_names) os << "Ticker: " << signals[idx].ticker << "\n";
    os << signals[idx].explanation << "\n";
  }
  os << "\nReply with one line per id, formatted exactly as "
        "\"<id>: <score>/10\", using an integer score from 0 to 10.";
  return os.str();
}

// Accepts lines shaped "<id>: <score>/10" with arbitrary spacing.
void parse_score_lines(const std::string& completion, std::size_t n_ids,
                       std::map<std::size_t, int>* scores, EventLog* log) {
  std::istringstream is(completion);
  std::string line;
  while (std::getline(is, line)) {
    long id = 0, score = 0, denom = 0;
    int consumed = 0;
    if (std::sscanf(line.c_str(), " %ld : %ld / %ld %n", &id, &score, &denom,
                    &consumed) != 3)
      continue;
    if (static_cast<std::size_t>(consumed) != line.size() || denom != 10) continue;
    if (id < 1 || static_cast<std::size_t>(id) > n_ids) {
      log_warn(log, "ranking response scored unknown id " + std::to_string(id));
      continue;
    }
    if (score < 0 || score > 10)
      throw InvalidInputError("score " + std::to_string(score) + " for id " +
                              std::to_string(id) + " outside 0..10");
    auto [it, inserted] = scores->emplace(static_cast<std::size_t>(id),
                                          static_cast<int>(score));
    if (!inserted && it->second != score)
      log_warn(log, "ranking response scored id " + std::to_string(id) +
                        " twice; keeping the first value");
  }
}

}  // namespace

std::vector<RankedSignal> rank_buy_explanations(const std::vector<Signal>& signals,
                                                llm::LLMClient& client,
                                                std::uint64_t seed,
                                                const RankOptions& opts,
                                                EventLog* log) {
  if (signals.empty()) return {};
  const YearMonth month = signals.front().as_of;
  for (const Signal& s : signals) {
    if (s.as_of != month)
      throw InvalidInputError("ranking batch mixes months " + month.to_string() +
                              " and " + s.as_of.to_string());
    if (s.decision != Decision::kBuy)
      throw InvalidInputError("only buy signals are rankable; " + s.ticker +
                              " is " + decision_name(s.decision));
    if (util::trim(s.explanation).empty())
      throw InvalidInputError("buy signal for " + s.ticker +
                              " has no explanation to rank");
  }

  std::vector<std::size_t> order(signals.size());
  std::iota(order.begin(), order.end(), 0u);
  Rng rng(derive_seed(seed, static_cast<std::uint64_t>(month.index())));
  rng.shuffle(order);

  std::map<std::size_t, int> scores;  // 1-based id -> score
  llm::LLMRequest req;
  req.system = kRankSystem;
  req.user = build_rank_prompt(signals, order, month, opts.include_ticker_names);
  parse_score_lines(llm::complete_with_retry(client, req, opts.retry, log),
                    signals.size(), &scores, log);

  std::vector<std::size_t> missing;
  for (std::size_t i = 0; i < signals.size(); ++i)
    if (!scores.count(i + 1)) missing.push_back(i);
  if (!missing.empty()) {
    log_warn(log, "ranking left " + std::to_string(missing.size()) +
                      " explanations unscored; re-requesting once");
    llm::LLMRequest retry_req;
    retry_req.system = kRankSystem;
    retry_req.user = build_rank_prompt(signals, missing, month,
                                       opts.include_ticker_names);
    parse_score_lines(llm::complete_with_retry(client, retry_req, opts.retry, log),
                      signals.size(), &scores, log);
  }
  for (std::size_t i = 0; i < signals.size(); ++i)
    if (!scores.count(i + 1))
      throw ParseError("ranking failed to score id " + std::to_string(i + 1) +
                       " (" + signals[i].ticker + ") after one retry");

  std::vector<RankedSignal> out;
  out.reserve(signals.size());
  for (std::size_t i = 0; i < signals.size(); ++i)
    out.push_back(RankedSignal{signals[i], scores.at(i + 1)});
  return out;
}

// ---------------------------------------------------------------------------
// Component similarity
// ---------------------------------------------------------------------------

namespace {

SimilarityStats make_stats(const std::vector<double>& xs) {
  SimilarityStats st;
  st.count = static_cast<int>(xs.size());
  if (xs.empty()) return st;
  st.min = xs.front();
  st.max = xs.front();
  double sum = 0.0;
  for (double x : xs) {
    sum += x;
    st.min = std::min(st.min, x);
    st.max = std::max(st.max, x);
  }
  st.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - st.mean) * (x - st.mean);
    st.stddev = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return st;
}

nlohmann::ordered_json stats_json(const SimilarityStats& st) {
  return nlohmann::ordered_json{{"mean", st.mean},
                                {"stddev", st.stddev},
                                {"min", st.min},
                                {"max", st.max},
                                {"count", st.count}};
}

}  // namespace

nlohmann::ordered_json ComponentSimilarityReport::to_json() const {
  return nlohmann::ordered_json{{"news", stats_json(news)},
                                {"dynamics", stats_json(dynamics)},
                                {"fundamentals", stats_json(fundamentals)},
                                {"macro", stats_json(macro)}};
}

ComponentSimilarityReport signal_component_similarity(
    const std::vector<Signal>& signals, const std::vector<SignalContext>& contexts,
    similarity::EmbeddingProvider& provider) {
  if (signals.size() != contexts.size())
    throw InvalidInputError("signals and contexts are misaligned: " +
                            std::to_string(signals.size()) + " vs " +
                            std::to_string(contexts.size()));
  std::vector<double> news, dynamics, fundamentals, macro;
  for (std::size_t i = 0; i < signals.size(); ++i) {
    const Signal& s = signals[i];
    const SignalContext& c = contexts[i];
    if (s.ticker != c.ticker || s.as_of != c.as_of)
      throw InvalidInputError("signal/context mismatch at position " +
                              std::to_string(i) + ": " + s.ticker + " " +
                              s.as_of.to_string() + " vs " + c.ticker + " " +
                              c.as_of.to_string());
    const similarity::EmbeddingVector expl = provider.embed(s.explanation);
    auto push = [&](std::vector<double>& sink, const std::string& text) {
      if (util::trim(text).empty()) return;
      sink.push_back(similarity::cosine_similarity(expl, provider.embed(text)));
    };
    push(news, c.news);
    push(dynamics, c.dynamics);
    push(fundamentals, c.fundamentals);
    if (c.macro) push(macro, *c.macro);
  }
  ComponentSimilarityReport report;
  report.news = make_stats(news);
  report.dynamics = make_stats(dynamics);
  report.fundamentals = make_stats(fundamentals);
  report.macro = make_stats(macro);
  return report;
}

}  // namespace mlab::signal
