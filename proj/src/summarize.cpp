#include "mlab/summarize.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>
#include <sstream>

#include "mlab/errors.hpp"
#include "mlab/util.hpp"

namespace mlab::summarize {

namespace {

std::string collapse_blank_runs(const std::string& s) {
  std::string out;
  out.reserve(s.size());
  int newlines = 0;
  for (char c : s) {
    if (c == '\n') {
      if (++newlines <= 2) out.push_back(c);
    } else {
      newlines = 0;
      out.push_back(c);
    }
  }
  return out;
}

}  // namespace

std::vector<NewsArticle> clean_articles(const std::vector<NewsArticle>& articles,
                                        const std::string& ticker,
                                        const std::string& company_name) {
  std::vector<NewsArticle> kept;
  const std::string name_lc = util::lower(company_name);
  for (const NewsArticle& a : articles) {
    const std::string text = a.title + "\n" + a.body;
    bool relevant = util::contains_word_ci(text, ticker);
    if (!relevant && !name_lc.empty())
      relevant = util::lower(text).find(name_lc) != std::string::npos;
    if (!relevant) continue;
    NewsArticle c = a;
    c.title = std::string(util::trim(a.title));
    c.body = std::string(util::trim(collapse_blank_runs(a.body)));
    kept.push_back(std::move(c));
  }
  return kept;
}

// ---------------------------------------------------------------------------
// Daily news
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kNewsSystem =
    "You are a financial news editor. You distill a day's coverage of a single "
    "company into a compact brief, keeping verifiable developments separate "
    "from commentary.";

std::string build_daily_news_prompt(const std::vector<NewsArticle>& articles,
                                    const std::string& ticker, const Date& date) {
  std::ostringstream os;
  os << "Company: " << ticker << "\nDate: " << date.to_string() << "\n";
  os << "\nFactual news:\n";
  bool any_fact = false;
  for (const NewsArticle& a : articles) {
    if (a.kind != NewsArticle::Kind::kFactual) continue;
    any_fact = true;
    os << "- " << a.title << "\n  " << a.body << "\n";
  }
  if (!any_fact) os << "(none)\n";
  os << "\nAnalyst and commentator opinions:\n";
  bool any_op = false;
  for (const NewsArticle& a : articles) {
    if (a.kind != NewsArticle::Kind::kOpinion) continue;
    any_op = true;
    os << "- " << a.title << "\n  " << a.body << "\n";
  }
  if (!any_op) os << "(none)\n";
  os << "\nWrite one concise summary of the day for " << ticker
     << ". Report facts first, then opinions, clearly separated. Keep every "
        "figure exactly as stated.";
  return os.str();
}

}  // namespace

DailyNewsSummary summarize_daily_news(const std::vector<NewsArticle>& articles,
                                      const std::string& ticker, const Date& date,
                                      llm::LLMClient& client,
                                      const llm::RetryPolicy& retry,
                                      EventLog* log) {
  for (const NewsArticle& a : articles) {
    if (a.ticker != ticker)
      throw InvalidInputError("daily news for " + ticker + " mixed with article for " +
                              a.ticker);
    if (a.date != date)
      throw InvalidInputError("daily news for " + date.to_string() +
                              " mixed with article dated " + a.date.to_string());
  }
  DailyNewsSummary out;
  out.ticker = ticker;
  out.date = date;
  out.source_article_count = static_cast<int>(articles.size());
  if (articles.empty()) {
    out.text.clear();
    return out;
  }
  llm::LLMRequest req;
  req.system = kNewsSystem;
  req.user = build_daily_news_prompt(articles, ticker, date);
  out.text = llm::complete_with_retry(client, req, retry, log);
  return out;
}

// ---------------------------------------------------------------------------
// Progressive monthly news
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kProgressiveSystem =
    "You are a financial news editor maintaining a running monthly narrative "
    "for a single company. Fold the new daily briefs into the existing "
    "summary, keep what still matters, and drop what has been superseded. "
    "Keep factual developments distinct from analysts' opinions.";

std::string build_progressive_prompt(const std::optional<ProgressiveNewsSummary>& prev,
                                     const std::vector<DailyNewsSummary>& dailies,
                                     const std::string& ticker,
                                     const YearMonth& as_of) {
  std::ostringstream os;
  os << "Company: " << ticker << "\nMonth: " << as_of.to_string() << "\n";
  os << "\nCurrent Summary";
  if (prev) os << " (as of " << prev->as_of.to_string() << ")";
  os << ":\n";
  if (prev)
    os << prev->text << "\n";
  else
    os << "(none; this is the first month of coverage)\n";
  os << "\nDaily news summaries for " << as_of.to_string() << ":\n";
  for (const DailyNewsSummary& d : dailies) {
    os << "[" << d.date.to_string() << "]\n" << d.text << "\n";
  }
  os << "\nUpdate the summary with the most pertinent new information. Return "
        "the full revised monthly summary, facts first and opinions after.";
  return os.str();
}

}  // namespace

ProgressiveNewsSummary update_progressive_summary(
    const std::optional<ProgressiveNewsSummary>& prev,
    const std::vector<DailyNewsSummary>& dailies, const std::string& ticker,
    const YearMonth& as_of, llm::LLMClient& client, const ProgressiveOptions& opts,
    EventLog* log) {
  if (opts.window_days < 0)
    throw InvalidInputError("window_days must be nonnegative");
  const Date end = month_end_date(as_of);
  const int window = opts.window_days == 0 ? days_in_month(as_of.year, as_of.month)
                                           : opts.window_days;
  if (prev) {
    if (prev->ticker != ticker)
      throw InvalidInputError("previous summary belongs to " + prev->ticker);
    if (!(prev->as_of < as_of))
      throw InvalidInputError("previous summary is not from an earlier month");
  }
  for (const DailyNewsSummary& d : dailies) {
    if (d.ticker != ticker)
      throw InvalidInputError("daily summary for " + d.ticker +
                              " mixed into update for " + ticker);
    const long long age = end.serial() - d.date.serial();
    if (age < 0 || age >= window)
      throw InvalidInputError("daily summary dated " + d.date.to_string() +
                              " falls outside the " + std::to_string(window) +
                              "-day window ending " + end.to_string());
  }

  ProgressiveNewsSummary out;
  out.ticker = ticker;
  out.as_of = as_of;
  out.window_days = window;
  if (prev) out.predecessor = prev->as_of;

  if (dailies.empty()) {
    if (!prev)
      throw InvalidInputError("no daily summaries and no previous summary for " +
                              ticker + " " + as_of.to_string());
    log_warn(log, "no daily summaries for " + ticker + " " + as_of.to_string() +
                      "; carried previous summary forward");
    out.text = prev->text;
    return out;
  }

  std::vector<DailyNewsSummary> ordered = dailies;
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const DailyNewsSummary& a, const DailyNewsSummary& b) {
                     return a.date < b.date;
                   });

  const std::size_t budget = client.max_prompt_chars();
  std::size_t dropped = 0;
  std::string prompt = build_progressive_prompt(prev, ordered, ticker, as_of);
  while (prompt.size() > budget && ordered.size() > 1) {
    ordered.erase(ordered.begin());  // oldest first
    ++dropped;
    prompt = build_progressive_prompt(prev, ordered, ticker, as_of);
  }
  if (dropped > 0)
    log_warn(log, "truncated " + std::to_string(dropped) +
                      " oldest daily summaries for " + ticker + " " +
                      as_of.to_string() + " to fit the prompt budget");
  if (prompt.size() > budget)
    log_warn(log, "prompt for " + ticker + " " + as_of.to_string() +
                      " still exceeds the budget with a single daily summary");

  llm::LLMRequest req;
  req.system = kProgressiveSystem;
  req.user = prompt;
  out.text = llm::complete_with_retry(client, req, opts.retry, log);
  return out;
}

// ---------------------------------------------------------------------------
// Fundamentals
// ---------------------------------------------------------------------------

const char* statement_label(Statement s) {
  switch (s) {
    case Statement::kBalanceSheet: return "Balance Sheet";
    case Statement::kIncomeStatement: return "Income Statement";
    case Statement::kCashFlow: return "Cash Flow";
  }
  return "?";
}

std::string abbreviate_number(double x) {
  if (!std::isfinite(x)) throw InvalidInputError("cannot abbreviate a non-finite value");
  const double ax = std::fabs(x);
  if (ax >= 1e9) return util::fmt_double(x / 1e9, 2) + " billion";
  if (ax >= 1e6) return util::fmt_double(x / 1e6, 2) + " million";
  if (ax >= 1e3) return util::fmt_double(x / 1e3, 2) + " thousand";
  return util::fmt_trimmed(x);
}

namespace {

struct QuarterKey {
  int year = 0;
  int q = 0;
  auto operator<=>(const QuarterKey&) const = default;
};

QuarterKey parse_quarter(const std::string& label) {
  // "2023-Q3" or "2023Q3"
  std::string s(util::trim(label));
  if (s.size() < 6) throw ParseError("bad quarter label: " + label);
  QuarterKey k;
  std::size_t i = 0;
  while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) ++i;
  if (i != 4) throw ParseError("bad quarter label: " + label);
  k.year = std::stoi(s.substr(0, 4));
  if (i < s.size() && s[i] == '-') ++i;
  if (i >= s.size() || (s[i] != 'Q' && s[i] != 'q'))
    throw ParseError("bad quarter label: " + label);
  ++i;
  if (i + 1 != s.size() || s[i] < '1' || s[i] > '4')
    throw ParseError("bad quarter label: " + label);
  k.q = s[i] - '0';
  return k;
}

}  // namespace

StandardizedFinancialTable standardize_financials(
    const std::vector<QuarterlyReport>& reports, int n_quarters) {
  if (reports.empty())
    throw InsufficientDataError("no quarterly reports to standardize");
  if (n_quarters < 1) throw InvalidInputError("n_quarters must be positive");

  std::vector<std::pair<QuarterKey, const QuarterlyReport*>> ordered;
  ordered.reserve(reports.size());
  for (const QuarterlyReport& r : reports) ordered.emplace_back(parse_quarter(r.quarter), &r);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto& a, const auto& b) { return a.first < b.first; });
  for (std::size_t i = 1; i < ordered.size(); ++i)
    if (ordered[i].first == ordered[i - 1].first)
      throw IntegrityError("duplicate quarterly report for " + ordered[i].second->quarter);

  const std::size_t take = std::min<std::size_t>(ordered.size(),
                                                 static_cast<std::size_t>(n_quarters));
  ordered.erase(ordered.begin(), ordered.end() - static_cast<std::ptrdiff_t>(take));

  StandardizedFinancialTable table;
  for (const auto& [key, rep] : ordered) table.quarters.push_back(rep->quarter);

  // Row universe: first appearance per statement, statements in fixed order.
  using RowKey = std::pair<Statement, std::string>;
  std::vector<RowKey> row_keys;
  std::set<RowKey> seen;
  for (Statement st : {Statement::kBalanceSheet, Statement::kIncomeStatement,
                       Statement::kCashFlow}) {
    for (const auto& [key, rep] : ordered) {
      for (const LineItem& item : rep->items) {
        if (item.statement != st) continue;
        RowKey rk{st, item.name};
        if (seen.insert(rk).second) row_keys.push_back(rk);
      }
    }
  }

  // Per-quarter lookup, rejecting ambiguous duplicates.
  std::vector<std::map<RowKey, double>> cells(ordered.size());
  for (std::size_t qi = 0; qi < ordered.size(); ++qi) {
    for (const LineItem& item : ordered[qi].second->items) {
      RowKey rk{item.statement, item.name};
      auto [it, inserted] = cells[qi].emplace(rk, item.value);
      if (!inserted)
        throw IntegrityError("line item '" + item.name + "' appears twice in " +
                             ordered[qi].second->quarter);
    }
  }

  for (const RowKey& rk : row_keys) {
    StandardizedFinancialTable::Row row;
    row.statement = rk.first;
    row.name = rk.second;
    for (std::size_t qi = 0; qi < ordered.size(); ++qi) {
      auto it = cells[qi].find(rk);
      row.cells.push_back(it == cells[qi].end() ? std::string("n/a")
                                               : abbreviate_number(it->second));
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

std::string StandardizedFinancialTable::to_text() const {
  std::size_t name_w = 0;
  for (const Row& r : rows) name_w = std::max(name_w, r.name.size());
  std::vector<std::size_t> col_w(quarters.size());
  for (std::size_t c = 0; c < quarters.size(); ++c) {
    col_w[c] = quarters[c].size();
    for (const Row& r : rows) col_w[c] = std::max(col_w[c], r.cells[c].size());
  }

  std::ostringstream os;
  auto pad = [&os](const std::string& s, std::size_t w) {
    os << s;
    for (std::size_t i = s.size(); i < w; ++i) os << ' ';
  };
  pad("", name_w);
  for (std::size_t c = 0; c < quarters.size(); ++c) {
    os << "  ";
    pad(quarters[c], col_w[c]);
  }
  os << '\n';

  const Statement order[] = {Statement::kBalanceSheet, Statement::kIncomeStatement,
                             Statement::kCashFlow};
  for (Statement st : order) {
    bool any = false;
    for (const Row& r : rows) {
      if (r.statement != st) continue;
      if (!any) {
        os << statement_label(st) << '\n';
        any = true;
      }
      pad("  " + r.name, name_w);
      for (std::size_t c = 0; c < quarters.size(); ++c) {
        os << "  ";
        pad(r.cells[c], col_w[c]);
      }
      os << '\n';
    }
  }
  return os.str();
}

namespace {

constexpr const char* kFundamentalsSystem =
    "You are a financial analyst reading standardized quarterly statements. "
    "Describe the trajectory of the business across the quarters shown: "
    "growth, margins, balance sheet strength, cash generation.";

}  // namespace

FundamentalsSummary summarize_fundamentals(const std::vector<QuarterlyReport>& reports,
                                           const std::string& ticker, int n_quarters,
                                           llm::LLMClient& client,
                                           const llm::RetryPolicy& retry,
                                           EventLog* log) {
  StandardizedFinancialTable table = standardize_financials(reports, n_quarters);
  std::ostringstream os;
  os << "Company: " << ticker << "\n\nQuarterly statements (oldest to newest), "
     << "figures abbreviated:\n\n"
     << table.to_text()
     << "\nSummarize the company's recent financial trajectory in a few "
        "paragraphs. Mention concrete figures where they matter.";
  llm::LLMRequest req;
  req.system = kFundamentalsSystem;
  req.user = os.str();
  FundamentalsSummary out;
  out.ticker = ticker;
  out.quarters_covered = table.quarters;
  out.text = llm::complete_with_retry(client, req, retry, log);
  return out;
}

// ---------------------------------------------------------------------------
// Price dynamics
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kDynamicsSystem =
    "You are a quantitative analyst. Turn the metrics below into a factual "
    "narrative about the stock's recent price behavior, in absolute terms and "
    "relative to its peers and the index. Do not invent numbers; quote the "
    "values given.";

std::string fmt_metric(const std::optional<double>& v) {
  return v ? util::fmt_double(*v, 6) : std::string("undefined");
}

}  // namespace

std::string render_dynamics_summary(const metrics::MetricsReport& report,
                                    const std::string& ticker, llm::LLMClient& client,
                                    const llm::RetryPolicy& retry, EventLog* log) {
  if (report.target != ticker)
    throw InvalidInputError("metrics report is for " + report.target + ", not " +
                            ticker);
  if (report.index.empty() ||
      std::find(report.entities.begin(), report.entities.end(), report.index) ==
          report.entities.end())
    throw InvalidInputError("metrics report for " + ticker + " has no index row");

  std::ostringstream os;
  os << "Stock: " << ticker << "\nAs of: " << report.as_of.to_string()
     << "\nIndex: " << report.index << "\nPeers:";
  for (const std::string& p : report.peers) os << ' ' << p;
  os << "\n\nMetrics by entity and trailing window:\n";
  for (std::size_t e = 0; e < report.entities.size(); ++e) {
    const std::string& entity = report.entities[e];
    std::string role = entity == report.target ? "target"
                       : entity == report.index ? "index"
                                                : "peer";
    os << entity << " (" << role << "):\n";
    for (const metrics::WindowMetrics& m : report.metrics[e]) {
      os << "  " << m.window_months
         << "m: cumulative_return=" << util::fmt_double(m.cumulative_return, 6)
         << " volatility=" << util::fmt_double(m.volatility, 6)
         << " sharpe=" << fmt_metric(m.sharpe) << " sortino=" << fmt_metric(m.sortino)
         << " max_drawdown=" << util::fmt_double(m.max_drawdown, 6) << '\n';
    }
  }
  os << "\nReturn correlations over the longest window:\n";
  for (std::size_t i = 0; i < report.entities.size(); ++i) {
    for (std::size_t j = i + 1; j < report.entities.size(); ++j) {
      const double c = report.correlation.at(i, j);
      os << "  " << report.entities[i] << "/" << report.entities[j] << ": "
         << (std::isnan(c) ? std::string("undefined") : util::fmt_double(c, 6)) << '\n';
    }
  }
  os << "\nWrite the price dynamics summary for " << ticker
     << ". Cover absolute performance, risk, drawdown, and how the stock moved "
        "relative to its peers and the index.";

  llm::LLMRequest req;
  req.system = kDynamicsSystem;
  req.user = os.str();
  return llm::complete_with_retry(client, req, retry, log);
}

// ---------------------------------------------------------------------------
// Macro
// ---------------------------------------------------------------------------

namespace {

constexpr const char* kMacroStage1System =
    "You are a macroeconomic analyst. Summarize the report below, emphasizing "
    "central bank policy, geopolitical developments, and market outlooks.";

constexpr const char* kMacroStage2System =
    "You are a macroeconomic strategist. You are given several summarized "
    "macro reports from the same period.";

}  // namespace

MacroSummary summarize_macro(const std::vector<std::string>& reports, const Date& as_of,
                             llm::LLMClient& client, const llm::RetryPolicy& retry,
                             EventLog* log) {
  if (reports.empty()) throw InvalidInputError("no macro reports to summarize");

  std::vector<std::string> stage1;
  stage1.reserve(reports.size());
  for (std::size_t i = 0; i < reports.size(); ++i) {
    if (util::trim(reports[i]).empty())
      throw InvalidInputError("macro report " + std::to_string(i + 1) + " is empty");
    llm::LLMRequest req;
    req.system = kMacroStage1System;
    req.user = "Report " + std::to_string(i + 1) + " of " +
               std::to_string(reports.size()) + ", period ending " +
               as_of.to_string() + ":\n\n" + reports[i];
    stage1.push_back(llm::complete_with_retry(client, req, retry, log));
  }

  std::ostringstream os;
  os << "Period ending: " << as_of.to_string() << "\n\n";
  for (std::size_t i = 0; i < stage1.size(); ++i)
    os << "Summary of report " << (i + 1) << ":\n" << stage1[i] << "\n\n";
  os << "Condense these into a single macroeconomic overview. State where the "
        "reports agree (consensus), where they contradict each other, and the "
        "overall sentiment for each major asset class.";

  llm::LLMRequest req;
  req.system = kMacroStage2System;
  req.user = os.str();

  MacroSummary out;
  out.as_of = as_of;
  out.report_count = static_cast<int>(reports.size());
  out.text = llm::complete_with_retry(client, req, retry, log);
  return out;
}

}  // namespace mlab::summarize
