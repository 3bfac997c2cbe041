#include "mlab/metrics.hpp"

#include <algorithm>
#include <cmath>

#include "mlab/errors.hpp"
#include "mlab/util.hpp"

namespace mlab::metrics {

ReturnPanel simple_returns(const PricePanel& panel) {
  if (panel.calendar.size() < 2)
    throw InsufficientDataError("simple_returns needs at least 2 dates, got " +
                                std::to_string(panel.calendar.size()));
  ReturnPanel out;
  out.calendar.assign(panel.calendar.begin() + 1, panel.calendar.end());
  out.tickers = panel.tickers;
  out.returns = Grid(panel.calendar.size() - 1, panel.tickers.size());
  for (std::size_t r = 1; r < panel.calendar.size(); ++r)
    for (std::size_t c = 0; c < panel.tickers.size(); ++c) {
      double prev = panel.prices.at(r - 1, c);
      double cur = panel.prices.at(r, c);
      if (!is_missing(prev) && !is_missing(cur))
        out.returns.at(r - 1, c) = cur / prev - 1.0;
    }
  return out;
}

double cumulative_return(std::span<const double> returns) {
  if (returns.empty())
    throw InsufficientDataError("cumulative_return over empty series");
  double wealth = 1.0;
  for (double r : returns) {
    if (r <= -1.0)
      throw InvalidInputError("return " + fmt_double(r) +
                              " <= -1 makes cumulative return undefined");
    wealth *= 1.0 + r;
  }
  return wealth - 1.0;
}

RiskMetrics risk_metrics(std::span<const double> returns,
                         double risk_free_rate, int periods_per_year) {
  const std::size_t n = returns.size();
  if (n < 2)
    throw InsufficientDataError("risk_metrics needs at least 2 returns, got " +
                                std::to_string(n));
  const double rf_period = risk_free_rate / periods_per_year;
  double mean = 0.0;
  for (double r : returns) mean += r - rf_period;
  mean /= static_cast<double>(n);

  double var = 0.0;
  double downside_sq = 0.0;
  for (double r : returns) {
    double x = r - rf_period;
    var += (x - mean) * (x - mean);
    if (x < 0.0) downside_sq += x * x;
  }
  var /= static_cast<double>(n - 1);
  downside_sq /= static_cast<double>(n - 1);

  const double ann = std::sqrt(static_cast<double>(periods_per_year));
  RiskMetrics out;
  out.volatility = std::sqrt(var) * ann;
  double downside_dev = std::sqrt(downside_sq) * ann;
  double ann_mean = mean * periods_per_year;
  if (out.volatility > 0.0) out.sharpe = ann_mean / out.volatility;
  if (downside_dev > 0.0) out.sortino = ann_mean / downside_dev;
  return out;
}

double max_drawdown(std::span<const double> wealth_or_prices) {
  if (wealth_or_prices.empty())
    throw InsufficientDataError("max_drawdown over empty series");
  double peak = 0.0;
  double worst = 0.0;
  for (double v : wealth_or_prices) {
    if (v <= 0.0)
      throw InvalidInputError("max_drawdown requires positive values, got " +
                              fmt_double(v));
    peak = std::max(peak, v);
    worst = std::min(worst, v / peak - 1.0);
  }
  return worst;
}

Grid correlation_matrix(const ReturnPanel& returns) {
  const std::size_t nt = returns.tickers.size();
  Grid corr(nt, nt);
  for (std::size_t a = 0; a < nt; ++a) {
    corr.at(a, a) = 1.0;
    for (std::size_t b = a + 1; b < nt; ++b) {
      // Pairwise-complete two-pass Pearson.
      double sum_x = 0.0, sum_y = 0.0;
      std::size_t n = 0;
      for (std::size_t r = 0; r < returns.returns.rows(); ++r) {
        double x = returns.returns.at(r, a);
        double y = returns.returns.at(r, b);
        if (is_missing(x) || is_missing(y)) continue;
        sum_x += x;
        sum_y += y;
        ++n;
      }
      if (n < 2) continue;  // undefined, stays NaN
      double mx = sum_x / n, my = sum_y / n;
      double sxy = 0.0, sxx = 0.0, syy = 0.0;
      for (std::size_t r = 0; r < returns.returns.rows(); ++r) {
        double x = returns.returns.at(r, a);
        double y = returns.returns.at(r, b);
        if (is_missing(x) || is_missing(y)) continue;
        sxy += (x - mx) * (y - my);
        sxx += (x - mx) * (x - mx);
        syy += (y - my) * (y - my);
      }
      if (sxx <= 0.0 || syy <= 0.0) continue;  // zero variance -> undefined
      double rho = sxy / std::sqrt(sxx * syy);
      corr.at(a, b) = rho;
      corr.at(b, a) = rho;
    }
  }
  return corr;
}

namespace {

// Returns of one ticker over (window_start, as_of], skipping missing cells.
std::vector<double> window_returns(const ReturnPanel& rp, std::size_t col,
                                   const Date& start_excl, const Date& as_of) {
  std::vector<double> out;
  for (std::size_t r = 0; r < rp.calendar.size(); ++r) {
    if (!(start_excl < rp.calendar[r]) || as_of < rp.calendar[r]) continue;
    double v = rp.returns.at(r, col);
    if (!is_missing(v)) out.push_back(v);
  }
  return out;
}

std::vector<double> window_prices(const PricePanel& panel, std::size_t col,
                                  const Date& start_incl, const Date& as_of) {
  std::vector<double> out;
  for (std::size_t r = 0; r < panel.calendar.size(); ++r) {
    if (panel.calendar[r] < start_incl || as_of < panel.calendar[r]) continue;
    double v = panel.prices.at(r, col);
    if (!is_missing(v)) out.push_back(v);
  }
  return out;
}

}  // namespace

MetricsReport price_dynamics_metrics(const std::string& target,
                                     const std::vector<std::string>& peers,
                                     const std::string& index,
                                     const PricePanel& panel,
                                     const Date& as_of,
                                     const DynamicsOptions& opts) {
  MetricsReport report;
  report.target = target;
  report.peers = peers;
  report.index = index;
  report.as_of = as_of;
  report.entities.push_back(target);
  report.entities.insert(report.entities.end(), peers.begin(), peers.end());
  report.entities.push_back(index);

  std::vector<std::size_t> cols;
  for (const auto& t : report.entities) cols.push_back(panel.ticker_index(t));

  ReturnPanel rp = simple_returns(panel);

  int max_window = 0;
  for (int w : opts.windows_months) max_window = std::max(max_window, w);

  // Window anchors: as_of minus w months, snapped to the nearest trading day.
  auto window_anchor = [&](int months) -> Date {
    Date raw = add_months(as_of, -months);
    if (raw < panel.calendar.front())
      throw InsufficientDataError("window of " + std::to_string(months) +
                                  " months before " + as_of.to_string() +
                                  " precedes available history");
    std::size_t idx = panel.nearest_index(raw);
    return panel.calendar[idx];
  };

  report.metrics.resize(report.entities.size());
  for (std::size_t e = 0; e < report.entities.size(); ++e) {
    for (int w : opts.windows_months) {
      Date anchor = window_anchor(w);
      WindowMetrics wm;
      wm.window_months = w;
      auto rets = window_returns(rp, cols[e], anchor, as_of);
      if (rets.size() < 2)
        throw InsufficientDataError("ticker " + report.entities[e] + " has " +
                                    std::to_string(rets.size()) +
                                    " returns in the " + std::to_string(w) +
                                    "-month window ending " + as_of.to_string());
      wm.cumulative_return = cumulative_return(rets);
      RiskMetrics risk =
          risk_metrics(rets, opts.risk_free_rate, opts.periods_per_year);
      wm.volatility = risk.volatility;
      wm.sharpe = risk.sharpe;
      wm.sortino = risk.sortino;
      auto prices = window_prices(panel, cols[e], anchor, as_of);
      wm.max_drawdown = max_drawdown(prices);
      report.metrics[e].push_back(wm);
    }
  }

  // Correlations over the longest window, restricted to the report entities.
  Date anchor = window_anchor(max_window);
  ReturnPanel sub;
  sub.tickers = report.entities;
  std::size_t row_begin = 0, row_end = 0;
  for (std::size_t r = 0; r < rp.calendar.size(); ++r) {
    if (!(anchor < rp.calendar[r])) row_begin = r + 1;
    if (!(as_of < rp.calendar[r])) row_end = r + 1;
  }
  sub.calendar.assign(rp.calendar.begin() + row_begin, rp.calendar.begin() + row_end);
  sub.returns = Grid(sub.calendar.size(), cols.size());
  for (std::size_t r = 0; r < sub.calendar.size(); ++r)
    for (std::size_t c = 0; c < cols.size(); ++c)
      sub.returns.at(r, c) = rp.returns.at(row_begin + r, cols[c]);
  report.correlation = correlation_matrix(sub);
  return report;
}

nlohmann::ordered_json MetricsReport::to_json() const {
  nlohmann::ordered_json j;
  j["target"] = target;
  j["peers"] = peers;
  j["index"] = index;
  j["as_of"] = as_of.to_string();
  auto opt = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };
  nlohmann::ordered_json entities = nlohmann::ordered_json::array();
  for (std::size_t e = 0; e < this->entities.size(); ++e) {
    nlohmann::ordered_json je;
    je["ticker"] = this->entities[e];
    nlohmann::ordered_json windows = nlohmann::ordered_json::array();
    for (const auto& wm : metrics[e]) {
      nlohmann::ordered_json jw;
      jw["window_months"] = wm.window_months;
      jw["cumulative_return"] = wm.cumulative_return;
      jw["volatility"] = wm.volatility;
      jw["sharpe"] = opt(wm.sharpe);
      jw["sortino"] = opt(wm.sortino);
      jw["max_drawdown"] = wm.max_drawdown;
      windows.push_back(jw);
    }
    je["windows"] = windows;
    entities.push_back(je);
  }
  j["entities"] = entities;
  nlohmann::ordered_json corr = nlohmann::ordered_json::array();
  for (std::size_t r = 0; r < correlation.rows(); ++r) {
    nlohmann::ordered_json row = nlohmann::ordered_json::array();
    for (std::size_t c = 0; c < correlation.cols(); ++c) {
      double v = correlation.at(r, c);
      row.push_back(is_missing(v) ? nlohmann::ordered_json(nullptr)
                                  : nlohmann::ordered_json(v));
    }
    corr.push_back(row);
  }
  j["correlation"] = corr;
  return j;
}

}  // namespace mlab::metrics
