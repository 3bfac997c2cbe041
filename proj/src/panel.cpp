#include "mlab/panel.hpp"

#include <algorithm>
#include <cstdlib>
#include <unordered_set>

#include "mlab/errors.hpp"

namespace mlab {

void PricePanel::validate() const {
  if (prices.rows() != calendar.size() || prices.cols() != tickers.size())
    throw IntegrityError("price panel shape does not match calendar/tickers");
  for (std::size_t i = 1; i < calendar.size(); ++i)
    if (!(calendar[i - 1] < calendar[i]))
      throw IntegrityError("panel calendar not strictly increasing at " +
                           calendar[i].to_string());
  std::unordered_set<std::string> seen;
  for (const auto& t : tickers)
    if (!seen.insert(t).second)
      throw IntegrityError("duplicate ticker '" + t + "' in panel");
  for (std::size_t r = 0; r < prices.rows(); ++r)
    for (std::size_t c = 0; c < prices.cols(); ++c) {
      double p = prices.at(r, c);
      if (!is_missing(p) && p <= 0.0)
        throw IntegrityError("non-positive price for " + tickers[c] + " on " +
                             calendar[r].to_string());
    }
}

std::size_t PricePanel::ticker_index(const std::string& ticker) const {
  auto it = std::find(tickers.begin(), tickers.end(), ticker);
  if (it == tickers.end())
    throw NotFoundError("ticker '" + ticker + "' not in panel");
  return static_cast<std::size_t>(it - tickers.begin());
}

bool PricePanel::has_ticker(const std::string& ticker) const {
  return std::find(tickers.begin(), tickers.end(), ticker) != tickers.end();
}

std::size_t PricePanel::index_on_or_before(const Date& d) const {
  auto it = std::upper_bound(calendar.begin(), calendar.end(), d);
  if (it == calendar.begin()) return npos;
  return static_cast<std::size_t>(it - calendar.begin()) - 1;
}

std::size_t PricePanel::nearest_index(const Date& d) const {
  if (calendar.empty()) return npos;
  auto it = std::lower_bound(calendar.begin(), calendar.end(), d);
  if (it == calendar.end()) return calendar.size() - 1;
  if (it == calendar.begin()) return 0;
  std::size_t hi = static_cast<std::size_t>(it - calendar.begin());
  std::size_t lo = hi - 1;
  long dist_lo = std::labs(d.serial() - calendar[lo].serial());
  long dist_hi = std::labs(calendar[hi].serial() - d.serial());
  return dist_lo <= dist_hi ? lo : hi;  // tie -> earlier
}

std::size_t PricePanel::month_end_index(const YearMonth& ym) const {
  std::size_t idx = index_on_or_before(month_end_date(ym));
  if (idx == npos) return npos;
  if (month_of(calendar[idx]) != ym) return npos;
  return idx;
}

PricePanel restrict_tickers(const PricePanel& panel,
                            const std::vector<std::string>& tickers) {
  PricePanel out;
  out.calendar = panel.calendar;
  out.tickers = tickers;
  out.prices = Grid(panel.calendar.size(), tickers.size());
  for (std::size_t c = 0; c < tickers.size(); ++c) {
    std::size_t src = panel.ticker_index(tickers[c]);
    for (std::size_t r = 0; r < panel.calendar.size(); ++r)
      out.prices.at(r, c) = panel.prices.at(r, src);
  }
  out.validate();
  return out;
}

}  // namespace mlab
