#pragma once

#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlab/calendar.hpp"
#include "mlab/event_log.hpp"
#include "mlab/evaluation.hpp"
#include "mlab/panel.hpp"

namespace mlab::backtest {

// The twelve strategy names accepted by build_weights.
const std::vector<std::string>& strategy_names();

struct StrategySpec {
  std::string name;
  double cost_bps = 5.0;          // per unit of turnover, at each rebalance
  int top_n = 10;                 // Top-N selections
  int score_threshold = 7;        // High-GPT: score > threshold; Low-GPT: <=
  int sharpe_lookback_days = 252; // trailing window for Sharpe ranking
  int ma_window_days = 200;       // Naive eligibility filter
  // "Fully allocated" reading of the Naive strategies: eligible names are
  // scaled to sum 1. With false, each eligible name gets 1/universe and the
  // rest stays in cash.
  bool fully_allocated = true;
};

StrategySpec make_spec(const std::string& name, double cost_bps = 5.0);
std::vector<StrategySpec> default_strategies(double cost_bps = 5.0);

// Market capitalizations per (month, ticker); positive where present.
struct CapWeights {
  std::vector<YearMonth> months;
  std::vector<std::string> tickers;
  Grid caps;

  // NaN when absent.
  double at(const YearMonth& month, const std::string& ticker) const;
};

// 0..10 ranking scores aligned like a SignalMatrix; NaN marks unscored cells.
struct ScoreMatrix {
  std::vector<YearMonth> months;
  std::vector<std::string> tickers;
  Grid s;
};

struct WeightSchedule {
  std::vector<YearMonth> months;
  std::vector<std::string> tickers;
  Grid w;  // [month x ticker], zero-filled; longs >= 0, shorts <= 0
  std::vector<std::string> warnings;
};

// Tickers whose close at as_of strictly exceeds the mean of their last
// `window` available closes. Tickers with insufficient history are excluded
// with a warning, never an error.
std::vector<std::string> moving_average_filter(const PricePanel& panel, int window,
                                               const Date& as_of,
                                               EventLog* log = nullptr);

// The n candidates with the highest trailing Sharpe at as_of, descending,
// ties broken lexicographically. Candidates whose Sharpe is undefined rank
// below all defined ones. Fewer candidates than n returns them all with a
// warning.
std::vector<std::string> top_n_by_trailing_sharpe(
    const std::vector<std::string>& candidates, const PricePanel& panel,
    const Date& as_of, std::size_t n, int lookback_days, EventLog* log = nullptr);

// Realizes one catalog strategy as a month-by-ticker weight grid over the
// signal matrix's months and universe. Cap-weighted strategies require caps,
// GPT strategies require scores; a month whose selection is empty becomes a
// zero-weight month with a warning.
WeightSchedule build_weights(const StrategySpec& spec,
                             const eval::SignalMatrix& signals,
                             const ScoreMatrix* scores, const PricePanel& panel,
                             const CapWeights* caps, EventLog* log = nullptr);

struct TradeLogEntry {
  Date date;
  std::string ticker;
  double weight_delta = 0.0;
};

struct PerformanceReport {
  std::string strategy;
  double cost_bps = 0.0;
  double total_return_gross = 0.0;
  double total_return_net = 0.0;
  double volatility = 0.0;
  std::optional<double> sharpe;
  std::optional<double> sortino;
  std::optional<double> win_rate;  // nullopt when no trade closed
  int n_trades = 0;
  double max_drawdown = 0.0;
  std::vector<Date> dates;
  std::vector<double> wealth_net;    // starts at 1.0 on the first rebalance day
  std::vector<double> wealth_gross;
  std::vector<TradeLogEntry> trade_log;
  std::vector<std::string> warnings;

  nlohmann::ordered_json to_json(bool include_curve = true) const;
};

// Daily shares-based simulation: positions rebalance to the schedule at each
// month-end close and drift in between; each rebalance pays
// cost_bps/10000 x sum|target - drifted weight| out of wealth. Wealth is
// marked daily (pre-trade on rebalance days), metrics run on the net daily
// return series, and the gross curve runs the same book at zero cost. Win
// rate counts a trade from entry to exit (weight crossing zero), profitable
// when its cash flows net of attributed costs sum positive; positions still
// open at the end close at the final mark.
PerformanceReport run_backtest(const StrategySpec& spec,
                               const WeightSchedule& weights,
                               const PricePanel& panel, EventLog* log = nullptr);

}  // namespace mlab::backtest
