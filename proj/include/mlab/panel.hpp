#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <vector>

#include "mlab/calendar.hpp"

namespace mlab {

// Missing observations are explicit NaNs, never silent zeros.
inline constexpr double kMissing = std::numeric_limits<double>::quiet_NaN();
inline bool is_missing(double x) { return std::isnan(x); }

// Dense row-major matrix of doubles with NaN as the missing marker.
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, double fill = kMissing)
      : rows_(rows), cols_(cols), v_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& at(std::size_t r, std::size_t c) { return v_[r * cols_ + c]; }
  double at(std::size_t r, std::size_t c) const { return v_[r * cols_ + c]; }

  const std::vector<double>& data() const { return v_; }

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> v_;
};

// Daily adjusted-close prices aligned on a shared trading calendar.
// Invariants: dates strictly increasing, tickers unique, prices positive
// where present. validate() enforces all three.
struct PricePanel {
  std::vector<Date> calendar;
  std::vector<std::string> tickers;
  Grid prices;  // [date x ticker]

  void validate() const;  // throws IntegrityError on violation

  // Index of a ticker; throws NotFoundError.
  std::size_t ticker_index(const std::string& ticker) const;

  bool has_ticker(const std::string& ticker) const;

  // Largest index with calendar[i] <= d, or npos if none.
  std::size_t index_on_or_before(const Date& d) const;

  // Index of the calendar date closest to d (ties resolve to the earlier
  // date), or npos if the calendar is empty.
  std::size_t nearest_index(const Date& d) const;

  // Index of the last trading day of the month, or npos if the month has no
  // trading days in the calendar.
  std::size_t month_end_index(const YearMonth& ym) const;

  static constexpr std::size_t npos = static_cast<std::size_t>(-1);
};

// Simple daily returns derived from a PricePanel; one fewer row.
struct ReturnPanel {
  std::vector<Date> calendar;
  std::vector<std::string> tickers;
  Grid returns;  // [date x ticker], NaN where either bounding price missing
};

// Sub-panel with the given tickers in the given order; same calendar.
// Throws NotFoundError if any ticker is absent.
PricePanel restrict_tickers(const PricePanel& panel,
                            const std::vector<std::string>& tickers);

}  // namespace mlab
