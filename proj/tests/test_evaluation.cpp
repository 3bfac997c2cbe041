#include <cmath>
#include <vector>

#include "doctest.h"
#include "mlab/errors.hpp"
#include "mlab/evaluation.hpp"
#include "mlab/event_log.hpp"
#include "mlab/panel.hpp"
#include "mlab/rng.hpp"

using namespace mlab;
using namespace mlab::eval;

namespace {

SignalMatrix make_signals(const std::vector<YearMonth>& months,
                          const std::vector<std::string>& tickers,
                          const std::vector<int>& cells) {
  SignalMatrix m;
  m.months = months;
  m.tickers = tickers;
  for (int v : cells) m.m.push_back(static_cast<std::int8_t>(v));
  m.validate();
  return m;
}

MonthlyReturnMatrix make_returns(const std::vector<YearMonth>& months,
                                 const std::vector<std::string>& tickers,
                                 const std::vector<double>& cells) {
  MonthlyReturnMatrix r;
  r.months = months;
  r.tickers = tickers;
  r.r = Grid(months.size(), tickers.size());
  for (std::size_t i = 0; i < cells.size(); ++i)
    r.r.at(i / tickers.size(), i % tickers.size()) = cells[i];
  return r;
}

const std::vector<YearMonth> kMonths = {{2023, 1}, {2023, 2}};
const std::vector<std::string> kTickers = {"A", "B"};

}  // namespace

TEST_CASE("leg names round trip") {
  CHECK(leg_name(Leg::kLong) == std::string("long"));
  CHECK(leg_from_name("short") == Leg::kShort);
  CHECK(leg_from_name("both") == Leg::kBoth);
  CHECK_THROWS_AS(leg_from_name("sideways"), InvalidInputError);
}

TEST_CASE("signal matrix validation") {
  CHECK_NOTHROW(make_signals(kMonths, kTickers, {1, -1, 0, 1}));

  SignalMatrix shape;
  shape.months = kMonths;
  shape.tickers = kTickers;
  shape.m = {1, 0, 1};
  CHECK_THROWS_AS(shape.validate(), IntegrityError);

  SignalMatrix order;
  order.months = {{2023, 2}, {2023, 1}};
  order.tickers = kTickers;
  order.m = {0, 0, 0, 0};
  CHECK_THROWS_AS(order.validate(), IntegrityError);

  SignalMatrix dup;
  dup.months = kMonths;
  dup.tickers = {"A", "A"};
  dup.m = {0, 0, 0, 0};
  CHECK_THROWS_AS(dup.validate(), IntegrityError);

  SignalMatrix domain;
  domain.months = kMonths;
  domain.tickers = kTickers;
  domain.m = {0, 0, 2, 0};
  CHECK_THROWS_AS(domain.validate(), IntegrityError);
}

TEST_CASE("monthly returns span month end to month end") {
  PricePanel p;
  p.calendar = {{2023, 1, 30}, {2023, 1, 31}, {2023, 2, 27},
                {2023, 2, 28}, {2023, 3, 31}};
  p.tickers = {"A", "B"};
  p.prices = Grid(5, 2);
  const double px[5][2] = {{98, 50},  {100, 50}, {104, 52},
                           {110, 55}, {121, kMissing}};
  for (int r = 0; r < 5; ++r)
    for (int c = 0; c < 2; ++c) p.prices.at(r, c) = px[r][c];
  p.validate();

  MonthlyReturnMatrix r = monthly_returns(p, {{2023, 1}, {2023, 2}});
  CHECK(r.r.at(0, 0) == doctest::Approx(0.10).epsilon(1e-12));   // 100 -> 110
  CHECK(r.r.at(1, 0) == doctest::Approx(0.10).epsilon(1e-12));   // 110 -> 121
  CHECK(r.r.at(0, 1) == doctest::Approx(0.10).epsilon(1e-12));   // 50 -> 55
  CHECK(is_missing(r.r.at(1, 1)));  // missing March close for B

  CHECK_THROWS_WITH_AS(monthly_returns(p, {{2023, 3}}),
                       "no trading day in 2023-04 to realize returns for 2023-03",
                       InsufficientDataError);
  CHECK_THROWS_AS(monthly_returns(p, {{2022, 12}}), InsufficientDataError);
  CHECK_THROWS_AS(monthly_returns(p, {}), InvalidInputError);
  CHECK_THROWS_AS(monthly_returns(p, {{2023, 2}, {2023, 1}}), InvalidInputError);
}

TEST_CASE("detrending removes each month's cross-sectional mean") {
  MonthlyReturnMatrix r =
      make_returns(kMonths, kTickers, {0.02, 0.04, -0.03, 0.01});
  MonthlyReturnMatrix d = detrend_returns(r);
  CHECK(d.r.at(0, 0) == doctest::Approx(-0.01).epsilon(1e-15));
  CHECK(d.r.at(0, 1) == doctest::Approx(0.01).epsilon(1e-15));
  CHECK(d.r.at(1, 0) == doctest::Approx(-0.02).epsilon(1e-15));
  CHECK(d.r.at(1, 1) == doctest::Approx(0.02).epsilon(1e-15));

  // idempotent to the bit
  MonthlyReturnMatrix dd = detrend_returns(d);
  CHECK(dd.r.data() == d.r.data());

  // NaN cells are ignored by the mean and stay NaN
  MonthlyReturnMatrix sparse =
      make_returns(kMonths, kTickers, {0.02, kMissing, 0.0, 0.0});
  MonthlyReturnMatrix ds = detrend_returns(sparse);
  CHECK(ds.r.at(0, 0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(is_missing(ds.r.at(0, 1)));

  MonthlyReturnMatrix hollow =
      make_returns(kMonths, kTickers, {kMissing, kMissing, 0.0, 0.0});
  CHECK_THROWS_WITH_AS(detrend_returns(hollow),
                       "month 2023-01 has no defined return to detrend",
                       InvalidInputError);
}

TEST_CASE("signal performance compounds monthly active means") {
  SignalMatrix m = make_signals(kMonths, kTickers, {1, -1, 1, 0});
  MonthlyReturnMatrix r =
      make_returns(kMonths, kTickers, {0.10, -0.10, 0.05, 0.20});

  // long leg: month1 mean(+0.10) = 0.10, month2 mean(+0.05) = 0.05
  CHECK(signal_performance(m, r, Leg::kLong) ==
        doctest::Approx(1.10 * 1.05 - 1.0).epsilon(1e-15));
  // short leg: month1 mean(-1 * -0.10) = 0.10; month2 has no short -> flat
  EventLog log;
  CHECK(signal_performance(m, r, Leg::kShort, &log) ==
        doctest::Approx(0.10).epsilon(1e-15));
  REQUIRE(log.warning_count() == 1);
  CHECK(log.events()[0].message ==
        "month 2023-02 has no active short signal; treated as flat");
  // both legs: month1 mean(0.10, 0.10) = 0.10, month2 mean(0.05)
  CHECK(signal_performance(m, r, Leg::kBoth) ==
        doctest::Approx(1.10 * 1.05 - 1.0).epsilon(1e-15));

  // undefined returns drop out of the average
  MonthlyReturnMatrix holey =
      make_returns(kMonths, kTickers, {0.10, kMissing, 0.05, 0.0});
  SignalMatrix longs = make_signals(kMonths, kTickers, {1, 1, 1, 0});
  CHECK(signal_performance(longs, holey, Leg::kLong) ==
        doctest::Approx(1.10 * 1.05 - 1.0).epsilon(1e-15));

  MonthlyReturnMatrix misaligned = make_returns(
      {{2023, 1}, {2023, 3}}, kTickers, {0.1, 0.1, 0.1, 0.1});
  CHECK_THROWS_WITH_AS(signal_performance(m, misaligned, Leg::kLong),
                       "signal and return matrices are not aligned",
                       InvalidInputError);
}

TEST_CASE("hit ratio counts profitable active cells") {
  SignalMatrix m = make_signals(kMonths, kTickers, {1, -1, 1, 0});
  MonthlyReturnMatrix r =
      make_returns(kMonths, kTickers, {0.10, -0.10, -0.05, 0.20});
  // active: (+1,0.10) hit, (-1,-0.10) hit, (+1,-0.05) miss
  CHECK(hit_ratio(m, r, Leg::kBoth) == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
  CHECK(hit_ratio(m, r, Leg::kLong) == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(hit_ratio(m, r, Leg::kShort) == doctest::Approx(1.0).epsilon(1e-15));

  SignalMatrix holds = make_signals(kMonths, kTickers, {0, 0, 0, 0});
  CHECK_THROWS_WITH_AS(hit_ratio(holds, r, Leg::kLong),
                       "hit ratio undefined: no active long cell",
                       InvalidInputError);
  SignalMatrix longs_only = make_signals(kMonths, kTickers, {1, 0, 1, 0});
  CHECK_THROWS_AS(hit_ratio(longs_only, r, Leg::kShort), InvalidInputError);
  // zero return is not a hit
  MonthlyReturnMatrix zero = make_returns(kMonths, kTickers, {0.0, 0.0, 0.0, 0.0});
  CHECK(hit_ratio(m, zero, Leg::kBoth) == 0.0);
}

TEST_CASE("random signal matrices are seeded and in-domain") {
  std::vector<YearMonth> months = {{2023, 1}, {2023, 2}, {2023, 3}};
  std::vector<std::string> tickers = {"A", "B", "C", "D"};
  SignalMatrix a = random_signal_matrix(months, tickers, 7);
  SignalMatrix b = random_signal_matrix(months, tickers, 7);
  SignalMatrix c = random_signal_matrix(months, tickers, 8);
  CHECK(a.m == b.m);
  CHECK(a.m != c.m);
  CHECK_NOTHROW(a.validate());
  bool saw[3] = {false, false, false};
  for (std::int8_t v : a.m) saw[v + 1] = true;
  CHECK(saw[0]);
  CHECK(saw[1]);
  CHECK(saw[2]);
}

TEST_CASE("bootstrap is bit-reproducible and order-independent") {
  std::vector<YearMonth> months = {{2023, 1}, {2023, 2}, {2023, 3}};
  std::vector<std::string> tickers = {"A", "B", "C"};
  MonthlyReturnMatrix r = make_returns(
      months, tickers,
      {0.05, -0.02, 0.01, -0.03, 0.04, 0.02, 0.01, -0.01, 0.03});
  SignalMatrix m = random_signal_matrix(months, tickers, 3);

  BootstrapOptions opts;
  opts.leg = Leg::kBoth;
  opts.n_samples = 500;
  opts.seed = 42;
  BootstrapResult x = bootstrap_evaluate(m, r, opts);
  BootstrapResult y = bootstrap_evaluate(m, r, opts);
  CHECK(x.observed_R == y.observed_R);
  CHECK(x.observed_HR == y.observed_HR);
  CHECK(x.quantile_R == y.quantile_R);
  CHECK(x.quantile_HR == y.quantile_HR);
  CHECK(x.n_samples == 500);
  CHECK(x.seed == 42);
  CHECK(x.rng == kRngName);
  CHECK(x.detrend);
  CHECK(x.quantile_R >= 0.0);
  CHECK(x.quantile_R <= 100.0);
  CHECK(x.quantile_HR >= 0.0);
  CHECK(x.quantile_HR <= 100.0);

  // a different seed moves the sampled quantiles
  BootstrapOptions other = opts;
  other.seed = 43;
  BootstrapResult z = bootstrap_evaluate(m, r, other);
  CHECK(z.observed_R == x.observed_R);  // observed stats ignore the seed

  nlohmann::ordered_json j = x.to_json();
  CHECK(j.at("n_samples") == 500);
  CHECK(j.at("leg") == "both");
  CHECK(j.at("rng") == kRngName);
}

TEST_CASE("bootstrap rejects an observed matrix with no active cell") {
  std::vector<YearMonth> months = {{2023, 1}};
  std::vector<std::string> tickers = {"A", "B"};
  MonthlyReturnMatrix r = make_returns(months, tickers, {0.05, -0.02});
  SignalMatrix holds = make_signals(months, tickers, {0, 0});
  BootstrapOptions opts;
  opts.n_samples = 10;
  CHECK_THROWS_AS(bootstrap_evaluate(holds, r, opts), InvalidInputError);

  SignalMatrix ok = make_signals(months, tickers, {1, 0});
  BootstrapOptions bad = opts;
  bad.n_samples = 0;
  CHECK_THROWS_AS(bootstrap_evaluate(ok, r, bad), InvalidInputError);
}

TEST_CASE("bootstrap forwards detrending warnings") {
  // single ticker: detrending forces every month's return to zero, so the
  // observed long performance ties with every sample at 0
  std::vector<YearMonth> months = {{2023, 1}, {2023, 2}};
  std::vector<std::string> tickers = {"A"};
  MonthlyReturnMatrix r = make_returns(months, tickers, {0.05, 0.03});
  SignalMatrix m = make_signals(months, tickers, {1, 0});
  BootstrapOptions opts;
  opts.n_samples = 50;
  opts.leg = Leg::kLong;
  EventLog log;
  BootstrapResult res = bootstrap_evaluate(m, r, opts, &log);
  CHECK(res.observed_R == 0.0);
  // the observed matrix holds in 2023-02: that month is flat and warned about
  bool found = false;
  for (const auto& w : res.warnings)
    if (w == "month 2023-02 has no active long signal; treated as flat")
      found = true;
  CHECK(found);
  CHECK(log.warning_count() == res.warnings.size());
}
