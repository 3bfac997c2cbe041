#include "mlab/calendar.hpp"

#include <cstdio>

#include "mlab/errors.hpp"

namespace mlab {

int days_in_month(int year, int month) {
  static const int kDays[] = {31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31};
  if (month < 1 || month > 12) return 0;
  if (month == 2) {
    bool leap = (year % 4 == 0 && year % 100 != 0) || year % 400 == 0;
    return leap ? 29 : 28;
  }
  return kDays[month - 1];
}

bool is_valid_date(const Date& d) {
  return d.month >= 1 && d.month <= 12 && d.day >= 1 &&
         d.day <= days_in_month(d.year, d.month);
}

long Date::serial() const {
  // Howard Hinnant's days_from_civil.
  long y = year;
  unsigned m = static_cast<unsigned>(month);
  unsigned d = static_cast<unsigned>(day);
  y -= m <= 2;
  const long era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153 * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<long>(doe) - 719468;
}

std::string Date::to_string() const {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d", year, month, day);
  return buf;
}

Date parse_date(std::string_view s) {
  Date d;
  if (s.size() != 10 || s[4] != '-' || s[7] != '-')
    throw ParseError("bad date '" + std::string(s) + "', expected YYYY-MM-DD");
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u, 8u, 9u})
    if (s[i] < '0' || s[i] > '9')
      throw ParseError("bad date '" + std::string(s) + "', expected YYYY-MM-DD");
  d.year = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
  d.month = (s[5] - '0') * 10 + (s[6] - '0');
  d.day = (s[8] - '0') * 10 + (s[9] - '0');
  if (!is_valid_date(d))
    throw ParseError("invalid calendar date '" + std::string(s) + "'");
  return d;
}

Date add_months(const Date& d, int months) {
  int idx = d.year * 12 + (d.month - 1) + months;
  int year = idx >= 0 ? idx / 12 : (idx - 11) / 12;
  int month = idx - year * 12 + 1;
  int day = d.day;
  int dim = days_in_month(year, month);
  if (day > dim) day = dim;
  return {year, month, day};
}

YearMonth YearMonth::next() const {
  return month == 12 ? YearMonth{year + 1, 1} : YearMonth{year, month + 1};
}

YearMonth YearMonth::prev() const {
  return month == 1 ? YearMonth{year - 1, 12} : YearMonth{year, month - 1};
}

std::string YearMonth::to_string() const {
  char buf[8];
  std::snprintf(buf, sizeof(buf), "%04d-%02d", year, month);
  return buf;
}

YearMonth parse_year_month(std::string_view s) {
  if (s.size() != 7 || s[4] != '-')
    throw ParseError("bad month '" + std::string(s) + "', expected YYYY-MM");
  for (std::size_t i : {0u, 1u, 2u, 3u, 5u, 6u})
    if (s[i] < '0' || s[i] > '9')
      throw ParseError("bad month '" + std::string(s) + "', expected YYYY-MM");
  YearMonth ym;
  ym.year = (s[0] - '0') * 1000 + (s[1] - '0') * 100 + (s[2] - '0') * 10 + (s[3] - '0');
  ym.month = (s[5] - '0') * 10 + (s[6] - '0');
  if (ym.month < 1 || ym.month > 12)
    throw ParseError("invalid month '" + std::string(s) + "'");
  return ym;
}

Date month_end_date(const YearMonth& ym) {
  return {ym.year, ym.month, days_in_month(ym.year, ym.month)};
}

}  // namespace mlab
