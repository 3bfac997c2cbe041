#include "mlab/backtest.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mlab/errors.hpp"
#include "mlab/metrics.hpp"
#include "mlab/util.hpp"

namespace mlab::backtest {

const std::vector<std::string>& strategy_names() {
  static const std::vector<std::string> names = {
      "MS",    "MS-L",        "MS-L-Cap",    "MS-Top10-SR",
      "SP100-Eq", "SP100",    "Naive",       "Naive-Top10",
      "MS-TopN-GPT", "MS-High-GPT", "MS-Low-GPT", "MS-TopN-Cap-GPT"};
  return names;
}

StrategySpec make_spec(const std::string& name, double cost_bps) {
  const auto& names = strategy_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw InvalidInputError("unknown strategy '" + name + "'");
  if (cost_bps < 0) throw InvalidInputError("cost_bps must be nonnegative");
  StrategySpec spec;
  spec.name = name;
  spec.cost_bps = cost_bps;
  return spec;
}

std::vector<StrategySpec> default_strategies(double cost_bps) {
  std::vector<StrategySpec> out;
  for (const std::string& n : strategy_names()) out.push_back(make_spec(n, cost_bps));
  return out;
}

double CapWeights::at(const YearMonth& month, const std::string& ticker) const {
  auto mit = std::find(months.begin(), months.end(), month);
  if (mit == months.end()) return kMissing;
  auto tit = std::find(tickers.begin(), tickers.end(), ticker);
  if (tit == tickers.end()) return kMissing;
  return caps.at(static_cast<std::size_t>(mit - months.begin()),
                 static_cast<std::size_t>(tit - tickers.begin()));
}

// ---------------------------------------------------------------------------
// Selection helpers
// ---------------------------------------------------------------------------

std::vector<std::string> moving_average_filter(const PricePanel& panel, int window,
                                               const Date& as_of, EventLog* log) {
  if (window < 1) throw InvalidInputError("moving-average window must be positive");
  const std::size_t idx = panel.index_on_or_before(as_of);
  std::vector<std::string> eligible;
  if (idx == PricePanel::npos) {
    log_warn(log, "no trading day on or before " + as_of.to_string());
    return eligible;
  }
  for (std::size_t j = 0; j < panel.tickers.size(); ++j) {
    const double last = panel.prices.at(idx, j);
    if (is_missing(last)) {
      log_warn(log, panel.tickers[j] + " has no close at " +
                        panel.calendar[idx].to_string() + "; excluded from filter");
      continue;
    }
    double sum = 0.0;
    int n = 0;
    for (std::size_t t = idx + 1; t-- > 0 && n < window;) {
      const double p = panel.prices.at(t, j);
      if (is_missing(p)) continue;
      sum += p;
      ++n;
    }
    if (n < window) {
      log_warn(log, panel.tickers[j] + " has " + std::to_string(n) + " of " +
                        std::to_string(window) +
                        " closes needed for the moving average; excluded");
      continue;
    }
    if (last > sum / static_cast<double>(window)) eligible.push_back(panel.tickers[j]);
  }
  return eligible;
}

std::vector<std::string> top_n_by_trailing_sharpe(
    const std::vector<std::string>& candidates, const PricePanel& panel,
    const Date& as_of, std::size_t n, int lookback_days, EventLog* log) {
  if (lookback_days < 2) throw InvalidInputError("Sharpe lookback must be >= 2 days");
  const std::size_t idx = panel.index_on_or_before(as_of);
  if (idx == PricePanel::npos) {
    log_warn(log, "no trading day on or before " + as_of.to_string());
    return {};
  }

  struct Row {
    std::string ticker;
    std::optional<double> sharpe;
  };
  std::vector<Row> rows;
  rows.reserve(candidates.size());
  for (const std::string& c : candidates) {
    const std::size_t j = panel.ticker_index(c);
    const std::size_t start =
        idx >= static_cast<std::size_t>(lookback_days) ? idx - lookback_days : 0;
    std::vector<double> rets;
    for (std::size_t t = start + 1; t <= idx; ++t) {
      const double p0 = panel.prices.at(t - 1, j);
      const double p1 = panel.prices.at(t, j);
      if (is_missing(p0) || is_missing(p1)) continue;
      rets.push_back(p1 / p0 - 1.0);
    }
    Row row{c, std::nullopt};
    if (rets.size() >= 2)
      row.sharpe = metrics::risk_metrics(rets).sharpe;
    else
      log_warn(log, c + " lacks return history for the Sharpe ranking at " +
                        as_of.to_string());
    rows.push_back(std::move(row));
  }

  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.sharpe.has_value() != b.sharpe.has_value()) return a.sharpe.has_value();
    if (a.sharpe && b.sharpe && *a.sharpe != *b.sharpe) return *a.sharpe > *b.sharpe;
    return a.ticker < b.ticker;
  });

  if (rows.size() < n)
    log_warn(log, "only " + std::to_string(rows.size()) + " candidates for a top-" +
                      std::to_string(n) + " selection at " + as_of.to_string());
  if (rows.size() > n) rows.resize(n);
  std::vector<std::string> out;
  out.reserve(rows.size());
  for (Row& r : rows) out.push_back(std::move(r.ticker));
  return out;
}

// ---------------------------------------------------------------------------
// Weight construction
// ---------------------------------------------------------------------------

namespace {

bool needs_caps(const std::string& name) {
  return name == "MS-L-Cap" || name == "SP100" || name == "MS-TopN-Cap-GPT";
}

bool needs_scores(const std::string& name) {
  return name == "MS-TopN-GPT" || name == "MS-High-GPT" || name == "MS-Low-GPT" ||
         name == "MS-TopN-Cap-GPT";
}

bool needs_panel_asof(const std::string& name) {
  return name == "MS-Top10-SR" || name == "Naive" || name == "Naive-Top10";
}

}  // namespace

WeightSchedule build_weights(const StrategySpec& spec, const eval::SignalMatrix& signals,
                             const ScoreMatrix* scores, const PricePanel& panel,
                             const CapWeights* caps, EventLog* log) {
  signals.validate();
  const auto& names = strategy_names();
  if (std::find(names.begin(), names.end(), spec.name) == names.end())
    throw InvalidInputError("unknown strategy '" + spec.name + "'");
  if (needs_caps(spec.name) && caps == nullptr)
    throw ConfigError(spec.name + " requires market capitalizations");
  if (needs_scores(spec.name)) {
    if (scores == nullptr) throw ConfigError(spec.name + " requires ranking scores");
    if (scores->months != signals.months || scores->tickers != signals.tickers)
      throw ConfigError("score matrix is not aligned with the signal matrix");
  }

  const std::size_t n_months = signals.months.size();
  const std::size_t n_tickers = signals.tickers.size();
  WeightSchedule ws;
  ws.months = signals.months;
  ws.tickers = signals.tickers;
  ws.w = Grid(n_months, n_tickers, 0.0);

  auto warn = [&](const std::string& msg) {
    ws.warnings.push_back(msg);
    log_warn(log, msg);
  };

  auto ticker_col = [&](const std::string& t) {
    auto it = std::find(signals.tickers.begin(), signals.tickers.end(), t);
    if (it == signals.tickers.end())
      throw IntegrityError("selection produced unknown ticker " + t);
    return static_cast<std::size_t>(it - signals.tickers.begin());
  };

  for (std::size_t i = 0; i < n_months; ++i) {
    const YearMonth& month = signals.months[i];

    auto score_of = [&](std::size_t j) {
      const double s = scores->s.at(i, j);
      if (is_missing(s))
        throw ConfigError(spec.name + " needs a score for " + signals.tickers[j] +
                          " in " + month.to_string());
      return s;
    };
    auto buys = [&]() {
      std::vector<std::size_t> out;
      for (std::size_t j = 0; j < n_tickers; ++j)
        if (signals.at(i, j) == 1) out.push_back(j);
      return out;
    };
    auto top_by_score = [&](std::size_t n) {
      std::vector<std::size_t> sel = buys();
      std::sort(sel.begin(), sel.end(), [&](std::size_t a, std::size_t b) {
        const double sa = score_of(a), sb = score_of(b);
        if (sa != sb) return sa > sb;
        return signals.tickers[a] < signals.tickers[b];
      });
      if (sel.size() < n)
        warn(month.to_string() + ": only " + std::to_string(sel.size()) +
             " buys for a top-" + std::to_string(n) + " selection");
      if (sel.size() > n) sel.resize(n);
      return sel;
    };
    auto month_end_date = [&]() {
      const std::size_t idx = panel.month_end_index(month);
      if (idx == PricePanel::npos)
        throw InvalidInputError("no trading day in " + month.to_string() +
                                " to rebalance on");
      return panel.calendar[idx];
    };

    std::vector<std::size_t> longs, shorts;
    bool cap_weighted = false;
    bool scale_to_one = true;

    if (spec.name == "MS") {
      for (std::size_t j = 0; j < n_tickers; ++j) {
        if (signals.at(i, j) == 1) longs.push_back(j);
        if (signals.at(i, j) == -1) shorts.push_back(j);
      }
    } else if (spec.name == "MS-L") {
      longs = buys();
    } else if (spec.name == "MS-L-Cap") {
      longs = buys();
      cap_weighted = true;
    } else if (spec.name == "MS-Top10-SR") {
      std::vector<std::string> cand;
      for (std::size_t j : buys()) cand.push_back(signals.tickers[j]);
      EventLog sub;
      for (const std::string& t : top_n_by_trailing_sharpe(
               cand, panel, month_end_date(), static_cast<std::size_t>(spec.top_n),
               spec.sharpe_lookback_days, &sub))
        longs.push_back(ticker_col(t));
      for (const auto& e : sub.events()) warn(month.to_string() + ": " + e.message);
    } else if (spec.name == "SP100-Eq") {
      for (std::size_t j = 0; j < n_tickers; ++j) longs.push_back(j);
    } else if (spec.name == "SP100") {
      for (std::size_t j = 0; j < n_tickers; ++j) longs.push_back(j);
      cap_weighted = true;
    } else if (spec.name == "Naive" || spec.name == "Naive-Top10") {
      EventLog sub;
      std::vector<std::string> eligible = moving_average_filter(
          panel, spec.ma_window_days, month_end_date(), &sub);
      // keep only names in the schedule universe
      eligible.erase(std::remove_if(eligible.begin(), eligible.end(),
                                    [&](const std::string& t) {
                                      return std::find(signals.tickers.begin(),
                                                       signals.tickers.end(),
                                                       t) == signals.tickers.end();
                                    }),
                     eligible.end());
      if (spec.name == "Naive-Top10") {
        eligible = top_n_by_trailing_sharpe(eligible, panel, month_end_date(),
                                            static_cast<std::size_t>(spec.top_n),
                                            spec.sharpe_lookback_days, &sub);
      }
      for (const std::string& t : eligible) longs.push_back(ticker_col(t));
      for (const auto& e : sub.events()) warn(month.to_string() + ": " + e.message);
      if (spec.name == "Naive") scale_to_one = spec.fully_allocated;
    } else if (spec.name == "MS-TopN-GPT") {
      longs = top_by_score(static_cast<std::size_t>(spec.top_n));
    } else if (spec.name == "MS-High-GPT") {
      for (std::size_t j : buys())
        if (score_of(j) > spec.score_threshold) longs.push_back(j);
    } else if (spec.name == "MS-Low-GPT") {
      for (std::size_t j : buys())
        if (score_of(j) <= spec.score_threshold) longs.push_back(j);
    } else if (spec.name == "MS-TopN-Cap-GPT") {
      longs = top_by_score(static_cast<std::size_t>(spec.top_n));
      cap_weighted = true;
    }

    const std::size_t active = longs.size() + shorts.size();
    if (active == 0) {
      warn(month.to_string() + ": empty selection for " + spec.name +
           "; holding cash");
      continue;
    }

    if (cap_weighted) {
      if (!shorts.empty())
        throw ConfigError(spec.name + " cannot cap-weight short positions");
      double total = 0.0;
      std::vector<double> cap(longs.size());
      for (std::size_t k = 0; k < longs.size(); ++k) {
        const double c = caps->at(month, signals.tickers[longs[k]]);
        if (is_missing(c) || c <= 0)
          throw ConfigError(spec.name + " needs a market cap for " +
                            signals.tickers[longs[k]] + " in " + month.to_string());
        cap[k] = c;
        total += c;
      }
      for (std::size_t k = 0; k < longs.size(); ++k)
        ws.w.at(i, longs[k]) = cap[k] / total;
    } else {
      const double denom = scale_to_one ? static_cast<double>(active)
                                        : static_cast<double>(n_tickers);
      for (std::size_t j : longs) ws.w.at(i, j) = 1.0 / denom;
      for (std::size_t j : shorts) ws.w.at(i, j) = -1.0 / denom;
    }
  }
  return ws;
}

// ---------------------------------------------------------------------------
// Simulation
// ---------------------------------------------------------------------------

namespace {

struct Book {
  double rate;  // cost per unit of turnover
  double cash = 1.0;
  std::vector<double> shares;
  Book(std::size_t n, double rate) : rate(rate), shares(n, 0.0) {}

  double value(const std::vector<double>& px, const Date& date) const {
    double w = cash;
    for (std::size_t k = 0; k < shares.size(); ++k) {
      if (shares[k] == 0.0) continue;
      if (is_missing(px[k]))
        throw IntegrityError("no price to mark position on " + date.to_string());
      w += shares[k] * px[k];
    }
    return w;
  }
};

struct Episode {
  double flows = 0.0;
  bool open = false;
};

}  // namespace

PerformanceReport run_backtest(const StrategySpec& spec, const WeightSchedule& weights,
                               const PricePanel& panel, EventLog* log) {
  if (weights.months.empty()) throw InvalidInputError("empty weight schedule");
  if (weights.w.rows() != weights.months.size() ||
      weights.w.cols() != weights.tickers.size())
    throw IntegrityError("weight schedule shape mismatch");
  for (std::size_t i = 1; i < weights.months.size(); ++i)
    if (!(weights.months[i - 1] < weights.months[i]))
      throw IntegrityError("weight schedule months not strictly increasing at " +
                           weights.months[i].to_string());

  PerformanceReport report;
  report.strategy = spec.name;
  report.cost_bps = spec.cost_bps;
  auto warn = [&](const std::string& msg) {
    report.warnings.push_back(msg);
    log_warn(log, msg);
  };

  const std::size_t K = weights.tickers.size();
  std::vector<std::size_t> col(K);
  for (std::size_t k = 0; k < K; ++k) col[k] = panel.ticker_index(weights.tickers[k]);

  std::vector<std::size_t> rebal(weights.months.size());
  for (std::size_t i = 0; i < weights.months.size(); ++i) {
    rebal[i] = panel.month_end_index(weights.months[i]);
    if (rebal[i] == PricePanel::npos)
      throw InvalidInputError("backtest is misaligned with the panel: no trading day in " +
                              weights.months[i].to_string());
  }
  const YearMonth end_month = weights.months.back().next();
  const std::size_t final_idx = panel.month_end_index(end_month);
  if (final_idx == PricePanel::npos)
    throw InvalidInputError("backtest is misaligned with the panel: no trading day in " +
                            end_month.to_string() + " to close the last month");

  Book net(K, spec.cost_bps / 10000.0);
  Book gross(K, 0.0);
  std::vector<double> last_px(K, kMissing);
  std::vector<bool> in_gap(K, false);
  std::vector<double> px(K, kMissing);
  std::vector<Episode> ep(K);
  int closed = 0, wins = 0;

  auto rebalance = [&](Book& b, std::size_t i, const Date& date, bool record) {
    const double w_pre = b.value(px, date);
    std::vector<double> drifted(K, 0.0);
    for (std::size_t k = 0; k < K; ++k)
      if (b.shares[k] != 0.0) drifted[k] = b.shares[k] * px[k] / w_pre;

    double turnover = 0.0;
    for (std::size_t k = 0; k < K; ++k)
      turnover += std::fabs(weights.w.at(i, k) - drifted[k]);
    const double w_post = w_pre * (1.0 - b.rate * turnover);

    double invested = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double target = weights.w.at(i, k);
      if (target != 0.0 && is_missing(px[k]))
        throw InvalidInputError("no price available for " + weights.tickers[k] +
                                " at " + date.to_string() + " to take a position");
      const double ns = target == 0.0 ? 0.0 : target * w_post / px[k];

      if (record) {
        const double delta_w = target - drifted[k];
        if (std::fabs(delta_w) > 1e-12)
          report.trade_log.push_back(TradeLogEntry{date, weights.tickers[k], delta_w});
        const double old = b.shares[k];
        if (old != 0.0 || ns != 0.0) {
          const double p = px[k];
          if (old != 0.0 && ns != 0.0 && old * ns < 0.0) {
            // sign flip closes the old episode and opens a new one; the cost
            // of the combined trade splits across the two segments
            ep[k].flows += old * p - b.rate * std::fabs(drifted[k]) * w_pre;
            ++closed;
            if (ep[k].flows > 0.0) ++wins;
            ep[k] = Episode{-ns * p - b.rate * std::fabs(target) * w_pre, true};
          } else {
            const double cost_k = b.rate * std::fabs(delta_w) * w_pre;
            if (!ep[k].open) ep[k] = Episode{0.0, true};
            ep[k].flows += (old - ns) * p - cost_k;
            if (ns == 0.0) {
              ++closed;
              if (ep[k].flows > 0.0) ++wins;
              ep[k] = Episode{};
            }
          }
        }
      }

      b.shares[k] = ns;
      if (ns != 0.0) invested += ns * px[k];
    }
    b.cash = w_post - invested;
  };

  std::size_t next_reb = 0;
  for (std::size_t t = rebal[0]; t <= final_idx; ++t) {
    const Date& date = panel.calendar[t];
    for (std::size_t k = 0; k < K; ++k) {
      const double p = panel.prices.at(t, col[k]);
      if (!is_missing(p)) {
        last_px[k] = p;
        in_gap[k] = false;
      } else if (!is_missing(last_px[k]) && !in_gap[k]) {
        warn(weights.tickers[k] + " has no close on " + date.to_string() +
             "; marked to the last available price");
        in_gap[k] = true;
      }
      px[k] = last_px[k];
    }

    const double w_net = net.value(px, date);
    const double w_gross = gross.value(px, date);
    if (w_net <= 0.0 || w_gross <= 0.0)
      throw IntegrityError("portfolio wealth is non-positive on " + date.to_string());
    report.dates.push_back(date);
    report.wealth_net.push_back(w_net);
    report.wealth_gross.push_back(w_gross);

    if (next_reb < rebal.size() && t == rebal[next_reb]) {
      rebalance(net, next_reb, date, true);
      rebalance(gross, next_reb, date, false);
      ++next_reb;
    }
  }

  for (std::size_t k = 0; k < K; ++k) {
    if (!ep[k].open) continue;
    if (is_missing(px[k]))
      throw IntegrityError("no final price to close " + weights.tickers[k]);
    ep[k].flows += net.shares[k] * px[k];
    ++closed;
    if (ep[k].flows > 0.0) ++wins;
  }
  report.n_trades = closed;
  if (closed > 0)
    report.win_rate = static_cast<double>(wins) / static_cast<double>(closed);

  report.total_return_net = report.wealth_net.back() / report.wealth_net.front() - 1.0;
  report.total_return_gross =
      report.wealth_gross.back() / report.wealth_gross.front() - 1.0;

  std::vector<double> rets;
  rets.reserve(report.wealth_net.size());
  for (std::size_t t = 1; t < report.wealth_net.size(); ++t)
    rets.push_back(report.wealth_net[t] / report.wealth_net[t - 1] - 1.0);
  if (rets.size() >= 2) {
    const metrics::RiskMetrics rm = metrics::risk_metrics(rets);
    report.volatility = rm.volatility;
    report.sharpe = rm.sharpe;
    report.sortino = rm.sortino;
  } else {
    warn("too few daily returns for risk metrics");
  }
  report.max_drawdown = metrics::max_drawdown(report.wealth_net);
  return report;
}

nlohmann::ordered_json PerformanceReport::to_json(bool include_curve) const {
  nlohmann::ordered_json j;
  j["strategy"] = strategy;
  j["cost_bps"] = cost_bps;
  j["total_return_gross"] = total_return_gross;
  j["total_return_net"] = total_return_net;
  j["volatility"] = volatility;
  j["sharpe"] = sharpe ? nlohmann::ordered_json(*sharpe) : nlohmann::ordered_json(nullptr);
  j["sortino"] = sortino ? nlohmann::ordered_json(*sortino) : nlohmann::ordered_json(nullptr);
  j["win_rate"] = win_rate ? nlohmann::ordered_json(*win_rate) : nlohmann::ordered_json(nullptr);
  j["n_trades"] = n_trades;
  j["max_drawdown"] = max_drawdown;
  j["warnings"] = warnings;
  if (include_curve) {
    nlohmann::ordered_json curve = nlohmann::ordered_json::array();
    for (std::size_t t = 0; t < dates.size(); ++t)
      curve.push_back(nlohmann::ordered_json{{"date", dates[t].to_string()},
                                             {"net", wealth_net[t]},
                                             {"gross", wealth_gross[t]}});
    j["wealth_curve"] = curve;
    nlohmann::ordered_json trades = nlohmann::ordered_json::array();
    for (const TradeLogEntry& e : trade_log)
      trades.push_back(nlohmann::ordered_json{{"date", e.date.to_string()},
                                              {"ticker", e.ticker},
                                              {"weight_delta", e.weight_delta}});
    j["trade_log"] = trades;
  }
  return j;
}

}  // namespace mlab::backtest
