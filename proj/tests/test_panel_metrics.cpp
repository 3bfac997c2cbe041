#include <cmath>
#include <vector>

#include "doctest.h"
#include "mlab/errors.hpp"
#include "mlab/metrics.hpp"
#include "mlab/panel.hpp"

using namespace mlab;

namespace {

PricePanel make_panel(const std::vector<Date>& dates,
                      const std::vector<std::string>& tickers,
                      const std::vector<std::vector<double>>& px) {
  PricePanel p;
  p.calendar = dates;
  p.tickers = tickers;
  p.prices = Grid(dates.size(), tickers.size());
  for (std::size_t r = 0; r < px.size(); ++r)
    for (std::size_t c = 0; c < px[r].size(); ++c) p.prices.at(r, c) = px[r][c];
  p.validate();
  return p;
}

// weekday trading calendar covering [first, last]
std::vector<Date> weekdays(Date first, const Date& last) {
  std::vector<Date> out;
  for (long s = first.serial(); s <= last.serial(); ++s) {
    int dow = static_cast<int>(((s % 7) + 7 + 4) % 7);  // 0=Sunday
    Date d = first;
    // advance from first by (s - first.serial()) days
    long off = s - first.serial();
    while (off > 0) {
      if (d.day < days_in_month(d.year, d.month)) ++d.day;
      else d = {d.month == 12 ? d.year + 1 : d.year, d.month == 12 ? 1 : d.month + 1, 1};
      --off;
    }
    if (dow >= 1 && dow <= 5) out.push_back(d);
  }
  return out;
}

}  // namespace

TEST_CASE("panel validation rejects bad shapes and values") {
  PricePanel p;
  p.calendar = {{2023, 1, 2}, {2023, 1, 3}};
  p.tickers = {"A", "B"};
  p.prices = Grid(2, 2, 1.0);
  CHECK_NOTHROW(p.validate());

  PricePanel bad_order = p;
  bad_order.calendar = {{2023, 1, 3}, {2023, 1, 2}};
  CHECK_THROWS_AS(bad_order.validate(), IntegrityError);

  PricePanel dup = p;
  dup.tickers = {"A", "A"};
  CHECK_THROWS_AS(dup.validate(), IntegrityError);

  PricePanel neg = p;
  neg.prices.at(0, 0) = -1.0;
  CHECK_THROWS_AS(neg.validate(), IntegrityError);

  PricePanel shape = p;
  shape.prices = Grid(1, 2, 1.0);
  CHECK_THROWS_AS(shape.validate(), IntegrityError);
}

TEST_CASE("panel lookups") {
  PricePanel p = make_panel({{2023, 1, 2}, {2023, 1, 5}, {2023, 2, 1}}, {"A"},
                            {{1}, {2}, {3}});
  CHECK(p.ticker_index("A") == 0);
  CHECK_THROWS_AS(p.ticker_index("Z"), NotFoundError);
  CHECK(p.has_ticker("A"));
  CHECK_FALSE(p.has_ticker("Z"));

  CHECK(p.index_on_or_before({2023, 1, 2}) == 0);
  CHECK(p.index_on_or_before({2023, 1, 4}) == 0);
  CHECK(p.index_on_or_before({2023, 1, 5}) == 1);
  CHECK(p.index_on_or_before({2024, 1, 1}) == 2);
  CHECK(p.index_on_or_before({2023, 1, 1}) == PricePanel::npos);

  CHECK(p.nearest_index({2023, 1, 2}) == 0);
  CHECK(p.nearest_index({2022, 12, 1}) == 0);
  CHECK(p.nearest_index({2023, 3, 1}) == 2);
  CHECK(p.nearest_index({2023, 1, 4}) == 1);   // 1 day vs 2 days
  // 2023-01-03 is equidistant between 01-02 and 01-04; falls back to earlier
  PricePanel q = make_panel({{2023, 1, 2}, {2023, 1, 4}}, {"A"}, {{1}, {2}});
  CHECK(q.nearest_index({2023, 1, 3}) == 0);

  CHECK(p.month_end_index({2023, 1}) == 1);
  CHECK(p.month_end_index({2023, 2}) == 2);
  CHECK(p.month_end_index({2023, 3}) == PricePanel::npos);
}

TEST_CASE("restrict_tickers keeps order and calendar") {
  PricePanel p = make_panel({{2023, 1, 2}, {2023, 1, 3}}, {"A", "B", "C"},
                            {{1, 2, 3}, {4, 5, 6}});
  PricePanel r = restrict_tickers(p, {"C", "A"});
  CHECK(r.tickers == std::vector<std::string>{"C", "A"});
  CHECK(r.calendar == p.calendar);
  CHECK(r.prices.at(0, 0) == 3);
  CHECK(r.prices.at(1, 1) == 4);
  CHECK_THROWS_AS(restrict_tickers(p, {"A", "Z"}), NotFoundError);
}

TEST_CASE("simple returns propagate missing prices") {
  PricePanel p = make_panel({{2023, 1, 2}, {2023, 1, 3}, {2023, 1, 4}}, {"A", "B"},
                            {{100, 50}, {110, kMissing}, {99, 60}});
  ReturnPanel r = metrics::simple_returns(p);
  REQUIRE(r.calendar.size() == 2);
  CHECK(r.calendar[0] == Date{2023, 1, 3});
  CHECK(r.returns.at(0, 0) == doctest::Approx(0.10).epsilon(1e-12));
  CHECK(r.returns.at(1, 0) == doctest::Approx(-0.10).epsilon(1e-12));
  CHECK(is_missing(r.returns.at(0, 1)));
  CHECK(is_missing(r.returns.at(1, 1)));

  PricePanel single = make_panel({{2023, 1, 2}}, {"A"}, {{100}});
  CHECK_THROWS_AS(metrics::simple_returns(single), InsufficientDataError);
}

TEST_CASE("cumulative return compounds") {
  std::vector<double> r = {0.10, -0.05, 0.02};
  CHECK(metrics::cumulative_return(r) ==
        doctest::Approx(1.10 * 0.95 * 1.02 - 1.0).epsilon(1e-15));
  std::vector<double> bad = {0.10, -1.0};
  CHECK_THROWS_AS(metrics::cumulative_return(bad), InvalidInputError);
  CHECK_THROWS_AS(metrics::cumulative_return(std::vector<double>{}),
                  InsufficientDataError);
}

TEST_CASE("risk metrics against a hand-computed case") {
  std::vector<double> r = {0.01, -0.02, 0.03, 0.0};
  const double mean = (0.01 - 0.02 + 0.03 + 0.0) / 4.0;
  double var = 0.0, down = 0.0;
  for (double x : r) {
    var += (x - mean) * (x - mean);
    if (x < 0.0) down += x * x;
  }
  var /= 3.0;
  down /= 3.0;
  metrics::RiskMetrics m = metrics::risk_metrics(r, 0.0, 252);
  CHECK(m.volatility == doctest::Approx(std::sqrt(var * 252)).epsilon(1e-12));
  REQUIRE(m.sharpe.has_value());
  CHECK(*m.sharpe ==
        doctest::Approx(mean * 252 / std::sqrt(var * 252)).epsilon(1e-12));
  REQUIRE(m.sortino.has_value());
  CHECK(*m.sortino ==
        doctest::Approx(mean * 252 / std::sqrt(down * 252)).epsilon(1e-12));

  // risk-free rate shifts the numerator per period
  metrics::RiskMetrics mrf = metrics::risk_metrics(r, 0.252, 252);
  REQUIRE(mrf.sharpe.has_value());
  CHECK(*mrf.sharpe < *m.sharpe);

  CHECK_THROWS_AS(metrics::risk_metrics(std::vector<double>{0.01}),
                  InsufficientDataError);
}

TEST_CASE("degenerate risk metrics become undefined, not zero") {
  std::vector<double> flat = {0.01, 0.01, 0.01};
  metrics::RiskMetrics m = metrics::risk_metrics(flat);
  CHECK(m.volatility == 0.0);
  CHECK_FALSE(m.sharpe.has_value());

  std::vector<double> up = {0.01, 0.02, 0.03};
  metrics::RiskMetrics mu = metrics::risk_metrics(up);
  CHECK(mu.sharpe.has_value());
  CHECK_FALSE(mu.sortino.has_value());  // no downside observations
}

TEST_CASE("max drawdown") {
  std::vector<double> w = {1.0, 1.2, 0.9, 1.5, 1.2};
  CHECK(metrics::max_drawdown(w) == doctest::Approx(0.9 / 1.2 - 1.0).epsilon(1e-15));
  std::vector<double> up = {1.0, 1.1, 1.2};
  CHECK(metrics::max_drawdown(up) == 0.0);
  std::vector<double> bad = {1.0, 0.0};
  CHECK_THROWS_AS(metrics::max_drawdown(bad), InvalidInputError);
  CHECK_THROWS_AS(metrics::max_drawdown(std::vector<double>{}),
                  InsufficientDataError);
}

TEST_CASE("correlation matrix rules") {
  ReturnPanel rp;
  rp.calendar = {{2023, 1, 3}, {2023, 1, 4}, {2023, 1, 5}, {2023, 1, 6}};
  rp.tickers = {"A", "B", "C", "D"};
  rp.returns = Grid(4, 4);
  // A and B perfectly correlated, C anti-correlated with A, D constant
  const double a[] = {0.01, -0.02, 0.03, 0.005};
  for (std::size_t r = 0; r < 4; ++r) {
    rp.returns.at(r, 0) = a[r];
    rp.returns.at(r, 1) = 2.0 * a[r] + 0.001;
    rp.returns.at(r, 2) = -a[r];
    rp.returns.at(r, 3) = 0.004;
  }
  Grid corr = metrics::correlation_matrix(rp);
  for (std::size_t i = 0; i < 4; ++i) CHECK(corr.at(i, i) == 1.0);
  CHECK(corr.at(0, 1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(corr.at(0, 2) == doctest::Approx(-1.0).epsilon(1e-12));
  CHECK(corr.at(1, 0) == corr.at(0, 1));
  CHECK(is_missing(corr.at(0, 3)));  // zero variance
  CHECK(is_missing(corr.at(3, 3)) == false);

  // fewer than two overlapping points is undefined
  ReturnPanel sparse;
  sparse.calendar = rp.calendar;
  sparse.tickers = {"A", "B"};
  sparse.returns = Grid(4, 2);
  sparse.returns.at(0, 0) = 0.01;
  sparse.returns.at(1, 0) = 0.02;
  sparse.returns.at(0, 1) = 0.01;  // only one overlap row
  sparse.returns.at(2, 1) = 0.02;
  Grid c2 = metrics::correlation_matrix(sparse);
  CHECK(is_missing(c2.at(0, 1)));
}

TEST_CASE("price dynamics metrics anchors windows on the calendar") {
  std::vector<Date> cal = weekdays({2022, 6, 1}, {2023, 6, 30});
  std::vector<std::string> tickers = {"IDX", "PEER", "TGT"};
  PricePanel p;
  p.calendar = cal;
  p.tickers = tickers;
  p.prices = Grid(cal.size(), 3);
  for (std::size_t r = 0; r < cal.size(); ++r) {
    p.prices.at(r, 0) = 100.0 + 0.05 * r;
    p.prices.at(r, 1) = 50.0 + 0.02 * r;
    p.prices.at(r, 2) = 20.0 * std::exp(0.0004 * r);
  }
  p.validate();

  const Date as_of = cal[p.month_end_index({2023, 6})];
  metrics::MetricsReport rep =
      metrics::price_dynamics_metrics("TGT", {"PEER"}, "IDX", p, as_of);
  CHECK(rep.entities == std::vector<std::string>{"TGT", "PEER", "IDX"});
  REQUIRE(rep.metrics.size() == 3);
  REQUIRE(rep.metrics[0].size() == 3);
  CHECK(rep.metrics[0][0].window_months == 3);
  CHECK(rep.metrics[0][2].window_months == 12);

  // oracle for the 3-month target window
  const Date anchor = cal[p.nearest_index(add_months(as_of, -3))];
  std::size_t a_idx = 0, e_idx = 0;
  for (std::size_t r = 0; r < cal.size(); ++r) {
    if (cal[r] == anchor) a_idx = r;
    if (cal[r] == as_of) e_idx = r;
  }
  const std::size_t tcol = p.ticker_index("TGT");
  double expected = p.prices.at(e_idx, tcol) / p.prices.at(a_idx, tcol) - 1.0;
  CHECK(rep.metrics[0][0].cumulative_return ==
        doctest::Approx(expected).epsilon(1e-12));

  // correlation over the longest window, entity x entity
  CHECK(rep.correlation.rows() == 3);
  CHECK(rep.correlation.at(0, 0) == 1.0);

  CHECK_THROWS_AS(
      metrics::price_dynamics_metrics("NOPE", {"PEER"}, "IDX", p, as_of),
      NotFoundError);
  CHECK_THROWS_AS(
      metrics::price_dynamics_metrics("TGT", {"PEER"}, "IDX", p, {2022, 8, 31}),
      InsufficientDataError);  // 12-month window precedes history

  nlohmann::ordered_json j = rep.to_json();
  CHECK(j.at("target") == "TGT");
  CHECK(j.at("entities").size() == 3);
}
