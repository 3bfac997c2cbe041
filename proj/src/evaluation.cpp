#include "mlab/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "mlab/errors.hpp"
#include "mlab/rng.hpp"
#include "mlab/util.hpp"

namespace mlab::eval {

const char* leg_name(Leg leg) {
  switch (leg) {
    case Leg::kLong: return "long";
    case Leg::kShort: return "short";
    case Leg::kBoth: return "both";
  }
  return "?";
}

Leg leg_from_name(const std::string& name) {
  const std::string n = util::lower(util::trim(name));
  if (n == "long") return Leg::kLong;
  if (n == "short") return Leg::kShort;
  if (n == "both") return Leg::kBoth;
  throw InvalidInputError("unknown leg '" + name + "' (expected long/short/both)");
}

void SignalMatrix::validate() const {
  if (m.size() != months.size() * tickers.size())
    throw IntegrityError("signal matrix shape mismatch: " + std::to_string(m.size()) +
                         " cells for " + std::to_string(months.size()) + "x" +
                         std::to_string(tickers.size()));
  for (std::size_t i = 1; i < months.size(); ++i)
    if (!(months[i - 1] < months[i]))
      throw IntegrityError("signal months not strictly increasing at " +
                           months[i].to_string());
  std::set<std::string> seen;
  for (const std::string& t : tickers)
    if (!seen.insert(t).second)
      throw IntegrityError("duplicate ticker in signal matrix: " + t);
  for (std::int8_t v : m)
    if (v < -1 || v > 1)
      throw IntegrityError("signal value " + std::to_string(int(v)) +
                           " outside {-1, 0, +1}");
}

MonthlyReturnMatrix monthly_returns(const PricePanel& panel,
                                    const std::vector<YearMonth>& months) {
  if (months.empty()) throw InvalidInputError("no months requested");
  for (std::size_t i = 1; i < months.size(); ++i)
    if (!(months[i - 1] < months[i]))
      throw InvalidInputError("months not strictly increasing at " +
                              months[i].to_string());

  MonthlyReturnMatrix out;
  out.months = months;
  out.tickers = panel.tickers;
  out.r = Grid(months.size(), panel.tickers.size());

  for (std::size_t i = 0; i < months.size(); ++i) {
    const std::size_t e0 = panel.month_end_index(months[i]);
    const std::size_t e1 = panel.month_end_index(months[i].next());
    if (e0 == PricePanel::npos)
      throw InsufficientDataError("no trading day in " + months[i].to_string());
    if (e1 == PricePanel::npos)
      throw InsufficientDataError("no trading day in " + months[i].next().to_string() +
                                  " to realize returns for " + months[i].to_string());
    for (std::size_t j = 0; j < panel.tickers.size(); ++j) {
      const double p0 = panel.prices.at(e0, j);
      const double p1 = panel.prices.at(e1, j);
      out.r.at(i, j) = (is_missing(p0) || is_missing(p1)) ? kMissing : p1 / p0 - 1.0;
    }
  }
  return out;
}

MonthlyReturnMatrix detrend_returns(const MonthlyReturnMatrix& r) {
  MonthlyReturnMatrix out = r;
  for (std::size_t i = 0; i < r.months.size(); ++i) {
    std::size_t n = 0;
    for (std::size_t j = 0; j < r.tickers.size(); ++j)
      if (!is_missing(r.r.at(i, j))) ++n;
    if (n == 0)
      throw InvalidInputError("month " + r.months[i].to_string() +
                              " has no defined return to detrend");
    // Subtract the cross-sectional mean until the residual is pure rounding
    // noise relative to the row's magnitude. Every exit condition depends
    // only on the row's current bits, so a second detrend pass recomputes
    // the same mean, exits the same way and writes nothing: detrending is
    // bitwise idempotent.
    const double eps_factor =
        16.0 * static_cast<double>(n + 1) * std::numeric_limits<double>::epsilon();
    for (int pass = 0; pass < 400; ++pass) {
      double sum = 0.0;
      double scale = 0.0;
      for (std::size_t j = 0; j < r.tickers.size(); ++j) {
        const double v = out.r.at(i, j);
        if (is_missing(v)) continue;
        sum += v;
        scale = std::max(scale, std::fabs(v));
      }
      const double mean = sum / static_cast<double>(n);
      if (std::fabs(mean) <= eps_factor * scale || std::fabs(mean) < 1e-300) break;
      bool changed = false;
      for (std::size_t j = 0; j < r.tickers.size(); ++j) {
        const double v = out.r.at(i, j);
        if (is_missing(v)) continue;
        const double next = v - mean;
        if (next != v) {
          out.r.at(i, j) = next;
          changed = true;
        }
      }
      if (!changed) break;
    }
  }
  return out;
}

namespace {

void check_aligned(const SignalMatrix& m, const MonthlyReturnMatrix& r) {
  if (m.months != r.months || m.tickers != r.tickers)
    throw InvalidInputError("signal and return matrices are not aligned");
}

bool active_under(Leg leg, std::int8_t v) {
  switch (leg) {
    case Leg::kLong: return v == 1;
    case Leg::kShort: return v == -1;
    case Leg::kBoth: return v != 0;
  }
  return false;
}

// Core Eq-2 evaluation on a raw signal buffer so the bootstrap loop can
// reuse one allocation per sample.
double performance_raw(const std::int8_t* m, const MonthlyReturnMatrix& r, Leg leg,
                       EventLog* log) {
  const std::size_t n_months = r.months.size();
  const std::size_t n_tickers = r.tickers.size();
  double wealth = 1.0;
  for (std::size_t i = 0; i < n_months; ++i) {
    double sum = 0.0;
    std::size_t active = 0;
    for (std::size_t j = 0; j < n_tickers; ++j) {
      const std::int8_t v = m[i * n_tickers + j];
      if (!active_under(leg, v)) continue;
      const double ret = r.r.at(i, j);
      if (is_missing(ret)) continue;
      sum += static_cast<double>(v) * ret;
      ++active;
    }
    if (active == 0) {
      log_warn(log, "month " + r.months[i].to_string() + " has no active " +
                        leg_name(leg) + " signal; treated as flat");
      continue;
    }
    wealth *= 1.0 + sum / static_cast<double>(active);
  }
  return wealth - 1.0;
}

// Eq-3 on a raw buffer. Returns false when no cell is active.
bool hit_ratio_raw(const std::int8_t* m, const MonthlyReturnMatrix& r, Leg leg,
                   double* out) {
  const std::size_t n_months = r.months.size();
  const std::size_t n_tickers = r.tickers.size();
  std::size_t active = 0, hits = 0;
  for (std::size_t i = 0; i < n_months; ++i) {
    for (std::size_t j = 0; j < n_tickers; ++j) {
      const std::int8_t v = m[i * n_tickers + j];
      if (!active_under(leg, v)) continue;
      const double ret = r.r.at(i, j);
      if (is_missing(ret)) continue;
      ++active;
      if (static_cast<double>(v) * ret > 0.0) ++hits;
    }
  }
  if (active == 0) return false;
  *out = static_cast<double>(hits) / static_cast<double>(active);
  return true;
}

}  // namespace

double signal_performance(const SignalMatrix& m, const MonthlyReturnMatrix& r,
                          Leg leg, EventLog* log) {
  m.validate();
  check_aligned(m, r);
  return performance_raw(m.m.data(), r, leg, log);
}

double hit_ratio(const SignalMatrix& m, const MonthlyReturnMatrix& r, Leg leg) {
  m.validate();
  check_aligned(m, r);
  double out = 0.0;
  if (!hit_ratio_raw(m.m.data(), r, leg, &out))
    throw InvalidInputError(std::string("hit ratio undefined: no active ") +
                            leg_name(leg) + " cell");
  return out;
}

SignalMatrix random_signal_matrix(const std::vector<YearMonth>& months,
                                  const std::vector<std::string>& tickers,
                                  std::uint64_t seed) {
  SignalMatrix out;
  out.months = months;
  out.tickers = tickers;
  out.m.resize(months.size() * tickers.size());
  Rng rng(seed);
  for (std::int8_t& v : out.m)
    v = static_cast<std::int8_t>(static_cast<int>(rng.uniform_int(0, 2)) - 1);
  return out;
}

nlohmann::ordered_json BootstrapResult::to_json() const {
  nlohmann::ordered_json j;
  j["observed_R"] = observed_R;
  j["observed_HR"] = observed_HR;
  j["quantile_R"] = quantile_R;
  j["quantile_HR"] = quantile_HR;
  j["n_samples"] = n_samples;
  j["seed"] = seed;
  j["leg"] = leg_name(leg);
  j["detrend"] = detrend;
  j["rng"] = rng;
  j["warnings"] = warnings;
  return j;
}

BootstrapResult bootstrap_evaluate(const SignalMatrix& observed,
                                   const MonthlyReturnMatrix& r,
                                   const BootstrapOptions& opts, EventLog* log) {
  if (opts.n_samples < 1) throw InvalidInputError("n_samples must be >= 1");
  observed.validate();
  check_aligned(observed, r);

  EventLog local;
  const MonthlyReturnMatrix returns = opts.detrend ? detrend_returns(r) : r;

  BootstrapResult result;
  result.n_samples = opts.n_samples;
  result.seed = opts.seed;
  result.leg = opts.leg;
  result.detrend = opts.detrend;
  result.rng = kRngName;

  result.observed_R = performance_raw(observed.m.data(), returns, opts.leg, &local);
  double hr = 0.0;
  if (!hit_ratio_raw(observed.m.data(), returns, opts.leg, &hr))
    throw InvalidInputError(std::string("hit ratio undefined: no active ") +
                            leg_name(opts.leg) + " cell in the observed matrix");
  result.observed_HR = hr;

  const std::size_t cells = returns.months.size() * returns.tickers.size();
  std::vector<std::int8_t> sample(cells);
  std::size_t below_r = 0, ties_r = 0, below_hr = 0, ties_hr = 0;
  for (int s = 0; s < opts.n_samples; ++s) {
    Rng rng(derive_seed(opts.seed, static_cast<std::uint64_t>(s)));
    for (std::size_t c = 0; c < cells; ++c)
      sample[c] = static_cast<std::int8_t>(static_cast<int>(rng.uniform_int(0, 2)) - 1);

    const double sr = performance_raw(sample.data(), returns, opts.leg, nullptr);
    if (sr < result.observed_R)
      ++below_r;
    else if (sr == result.observed_R)
      ++ties_r;

    double shr = 0.0;
    if (!hit_ratio_raw(sample.data(), returns, opts.leg, &shr)) shr = 0.0;
    if (shr < result.observed_HR)
      ++below_hr;
    else if (shr == result.observed_HR)
      ++ties_hr;
  }
  const double n = static_cast<double>(opts.n_samples);
  result.quantile_R = 100.0 * (below_r + 0.5 * ties_r) / n;
  result.quantile_HR = 100.0 * (below_hr + 0.5 * ties_hr) / n;

  for (const EventLog::Event& e : local.events()) {
    result.warnings.push_back(e.message);
    log_warn(log, e.message);
  }
  return result;
}

}  // namespace mlab::eval
