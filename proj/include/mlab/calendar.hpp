#pragma once

#include <compare>
#include <string>
#include <string_view>

namespace mlab {

// Calendar date (no time component). Stored as plain year/month/day and
// converted to a serial day count for distance arithmetic.
struct Date {
  int year = 0;
  int month = 0;  // 1..12
  int day = 0;    // 1..31

  auto operator<=>(const Date&) const = default;

  // Days since 1970-01-01 (negative before).
  long serial() const;
  std::string to_string() const;  // ISO-8601, YYYY-MM-DD
};

bool is_valid_date(const Date& d);
int days_in_month(int year, int month);

// Parses "YYYY-MM-DD"; throws ParseError on malformed input.
Date parse_date(std::string_view s);

// Shifts by whole calendar months, clamping the day to the target month's
// length (2023-03-31 minus 1 month -> 2023-02-28).
Date add_months(const Date& d, int months);

// Calendar month, used to index monthly signal/return matrices.
struct YearMonth {
  int year = 0;
  int month = 0;  // 1..12

  auto operator<=>(const YearMonth&) const = default;

  int index() const { return year * 12 + (month - 1); }
  YearMonth next() const;
  YearMonth prev() const;
  std::string to_string() const;  // YYYY-MM
};

// Parses "YYYY-MM"; throws ParseError.
YearMonth parse_year_month(std::string_view s);

inline YearMonth month_of(const Date& d) { return {d.year, d.month}; }

// Last calendar day of the month (not trading-day aware).
Date month_end_date(const YearMonth& ym);

}  // namespace mlab
