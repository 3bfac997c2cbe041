#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlab/panel.hpp"

namespace mlab::metrics {

// Daily simple returns: r[d][t] = p[d][t]/p[d-1][t] - 1 where both prices
// exist; missing prices propagate missing returns. Panel needs >= 2 dates.
ReturnPanel simple_returns(const PricePanel& panel);

// prod(1 + r) - 1 over the series. Any return <= -1 is rejected.
double cumulative_return(std::span<const double> returns);

struct RiskMetrics {
  double volatility = 0.0;               // annualized, sample (n-1) stddev
  std::optional<double> sharpe;          // nullopt when volatility is 0
  std::optional<double> sortino;         // nullopt when downside dev is 0
};

// Volatility, Sharpe and Sortino from a periodic return series.
//   volatility = stddev(returns) * sqrt(periods_per_year)
//   Sharpe     = mean(excess) * periods_per_year / volatility
//   Sortino    = same numerator over annualized downside deviation,
//                sqrt(sum(min(excess, 0)^2) / (n - 1)) * sqrt(ppy)
// The per-period risk-free rate is risk_free_rate / periods_per_year.
RiskMetrics risk_metrics(std::span<const double> returns,
                         double risk_free_rate = 0.0,
                         int periods_per_year = 252);

// Worst peak-to-trough loss: min over t of value[t]/runmax[t] - 1. Always
// <= 0. Series must be non-empty and positive.
double max_drawdown(std::span<const double> wealth_or_prices);

// Pearson correlation over pairwise-complete observations. Diagonal is
// exactly 1; pairs with fewer than two overlapping points (or zero variance)
// are NaN, never zero.
Grid correlation_matrix(const ReturnPanel& returns);

struct WindowMetrics {
  int window_months = 0;
  double cumulative_return = 0.0;
  double volatility = 0.0;
  std::optional<double> sharpe;
  std::optional<double> sortino;
  double max_drawdown = 0.0;
};

// Price-derived inputs of the stock price dynamics summary: the target, its
// peers and the market index side by side over each lookback window, plus a
// correlation matrix over the longest window.
struct MetricsReport {
  std::string target;
  std::vector<std::string> peers;
  std::string index;
  Date as_of;
  std::vector<std::string> entities;  // target, peers..., index
  std::vector<std::vector<WindowMetrics>> metrics;  // [entity][window]
  Grid correlation;  // [entity x entity], computed over the longest window

  nlohmann::ordered_json to_json() const;  // undefined metrics -> explicit null
};

struct DynamicsOptions {
  std::vector<int> windows_months = {3, 6, 12};
  double risk_free_rate = 0.0;
  int periods_per_year = 252;
};

// Window start dates are as_of minus k calendar months, mapped to the
// nearest available trading day; returns accrue strictly after that day.
// Unknown tickers raise NotFoundError, windows that reach past the start of
// the calendar raise InsufficientDataError.
MetricsReport price_dynamics_metrics(const std::string& target,
                                     const std::vector<std::string>& peers,
                                     const std::string& index,
                                     const PricePanel& panel,
                                     const Date& as_of,
                                     const DynamicsOptions& opts = {});

}  // namespace mlab::metrics
