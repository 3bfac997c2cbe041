#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlab/calendar.hpp"
#include "mlab/event_log.hpp"
#include "mlab/panel.hpp"

namespace mlab::eval {

enum class Leg { kLong, kShort, kBoth };

const char* leg_name(Leg leg);
Leg leg_from_name(const std::string& name);

// Months x tickers grid of decisions in {-1, 0, +1}.
struct SignalMatrix {
  std::vector<YearMonth> months;
  std::vector<std::string> tickers;
  std::vector<std::int8_t> m;  // row-major [month][ticker]

  std::int8_t at(std::size_t i, std::size_t j) const {
    return m[i * tickers.size() + j];
  }
  std::int8_t& at(std::size_t i, std::size_t j) {
    return m[i * tickers.size() + j];
  }
  // Shape consistency, strictly increasing months, unique tickers, domain.
  void validate() const;
};

// r[i][j] is the simple return realized over the month after signal month i:
// close(month_end(months[i])) to close(month_end(months[i] + 1)). Cells with
// a missing boundary price are NaN.
struct MonthlyReturnMatrix {
  std::vector<YearMonth> months;
  std::vector<std::string> tickers;
  Grid r;
};

MonthlyReturnMatrix monthly_returns(const PricePanel& panel,
                                    const std::vector<YearMonth>& months);

// Subtracts each month's cross-sectional mean (over defined cells) from that
// month's returns. A month with no defined return is rejected. Idempotent.
MonthlyReturnMatrix detrend_returns(const MonthlyReturnMatrix& r);

// Cumulative signal-following return: each month contributes the average of
// m*r over that month's active cells (leg selects m=+1, m=-1, or m!=0; cells
// with an undefined return are skipped); months compound. A month with no
// active cell is flat and logged as a warning.
double signal_performance(const SignalMatrix& m, const MonthlyReturnMatrix& r,
                          Leg leg, EventLog* log = nullptr);

// Fraction of active cells with m*r > 0 over the whole matrix. No active
// cell at all is an undefined ratio.
double hit_ratio(const SignalMatrix& m, const MonthlyReturnMatrix& r, Leg leg);

// I.i.d. uniform draws over {-1, 0, +1}, seeded and reproducible.
SignalMatrix random_signal_matrix(const std::vector<YearMonth>& months,
                                  const std::vector<std::string>& tickers,
                                  std::uint64_t seed);

struct BootstrapOptions {
  Leg leg = Leg::kLong;
  int n_samples = 10000;
  std::uint64_t seed = 0;
  bool detrend = true;
};

struct BootstrapResult {
  double observed_R = 0.0;
  double observed_HR = 0.0;
  double quantile_R = 0.0;   // percentile in [0, 100]
  double quantile_HR = 0.0;  // percentile in [0, 100]
  int n_samples = 0;
  std::uint64_t seed = 0;
  Leg leg = Leg::kLong;
  bool detrend = true;
  std::string rng;  // generator name and version
  std::vector<std::string> warnings;

  nlohmann::ordered_json to_json() const;
};

// Observed R and HR against the same statistics on n_samples random signal
// matrices over identical months and tickers. Quantile = percentage of
// samples strictly below the observed value, ties counting half. Each sample
// draws from a seed derived from (seed, sample index), so results are
// independent of evaluation order and bit-reproducible.
BootstrapResult bootstrap_evaluate(const SignalMatrix& observed,
                                   const MonthlyReturnMatrix& r,
                                   const BootstrapOptions& opts,
                                   EventLog* log = nullptr);

}  // namespace mlab::eval
