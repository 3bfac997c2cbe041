#pragma once

#include <optional>
#include <string>
#include <vector>

#include "mlab/calendar.hpp"
#include "mlab/event_log.hpp"
#include "mlab/llm.hpp"
#include "mlab/metrics.hpp"

namespace mlab::summarize {

// ---------------------------------------------------------------------------
// News
// ---------------------------------------------------------------------------

struct NewsArticle {
  enum class Kind { kFactual, kOpinion };
  std::string ticker;
  Date date;
  std::string title;
  std::string body;
  Kind kind = Kind::kFactual;
};

// Rule-based pre-filter: drops articles that mention neither the ticker nor
// the company name, trims whitespace and collapses blank-line runs.
std::vector<NewsArticle> clean_articles(const std::vector<NewsArticle>& articles,
                                        const std::string& ticker,
                                        const std::string& company_name);

struct DailyNewsSummary {
  std::string ticker;
  Date date;
  std::string text;
  int source_article_count = 0;
};

struct ProgressiveNewsSummary {
  std::string ticker;
  YearMonth as_of;
  std::string text;
  int window_days = 0;
  std::optional<YearMonth> predecessor;  // prior month in the chain
};

// One summary per (ticker, date). An empty article list yields an explicitly
// empty summary without touching the client.
DailyNewsSummary summarize_daily_news(const std::vector<NewsArticle>& articles,
                                      const std::string& ticker, const Date& date,
                                      llm::LLMClient& client,
                                      const llm::RetryPolicy& retry = {},
                                      EventLog* log = nullptr);

struct ProgressiveOptions {
  // 0 means "the whole calendar month of as_of"; otherwise a trailing window
  // of this many days ending at month end.
  int window_days = 0;
  llm::RetryPolicy retry;
};

// Rolls the running narrative forward: the prompt carries the previous
// month's summary (labeled Current Summary) plus this month's daily
// summaries. With no predecessor the chain starts from the dailies alone.
// Daily summaries overflow the client's prompt budget oldest-first, with a
// logged truncation event.
ProgressiveNewsSummary update_progressive_summary(
    const std::optional<ProgressiveNewsSummary>& prev,
    const std::vector<DailyNewsSummary>& dailies, const std::string& ticker,
    const YearMonth& as_of, llm::LLMClient& client,
    const ProgressiveOptions& opts = {}, EventLog* log = nullptr);

// ---------------------------------------------------------------------------
// Fundamentals
// ---------------------------------------------------------------------------

enum class Statement { kBalanceSheet, kIncomeStatement, kCashFlow };

const char* statement_label(Statement s);

struct LineItem {
  Statement statement;
  std::string name;
  double value = 0.0;
};

struct QuarterlyReport {
  std::string quarter;  // "2023-Q3" (also accepts "2023Q3")
  std::vector<LineItem> items;
};

// Compact scaled rendering of a financial figure:
//   |x| >= 1e9 -> "D billion", 1e6..1e9 -> "D million", 1e3..1e6 ->
//   "D thousand" with D = x/scale at two decimals; smaller values print
//   plainly. Sign is preserved; non-finite input is rejected.
std::string abbreviate_number(double x);

struct StandardizedFinancialTable {
  struct Row {
    Statement statement;
    std::string name;
    std::vector<std::string> cells;  // aligned with quarters; "n/a" when absent
  };
  std::vector<std::string> quarters;  // oldest -> newest
  std::vector<Row> rows;

  std::string to_text() const;
};

// Aligns the last n_quarters side by side with every numeric cell
// abbreviated. Items missing from a quarter become "n/a" cells; a duplicated
// line item within one quarter is a schema mismatch and is rejected with the
// offending item named.
StandardizedFinancialTable standardize_financials(
    const std::vector<QuarterlyReport>& reports, int n_quarters);

struct FundamentalsSummary {
  std::string ticker;
  std::vector<std::string> quarters_covered;  // consecutive, most recent last
  std::string text;
};

// Standardize + one summarization call over the table.
FundamentalsSummary summarize_fundamentals(
    const std::vector<QuarterlyReport>& reports, const std::string& ticker,
    int n_quarters, llm::LLMClient& client, const llm::RetryPolicy& retry = {},
    EventLog* log = nullptr);

// ---------------------------------------------------------------------------
// Price dynamics
// ---------------------------------------------------------------------------

// Renders a MetricsReport into a factual narrative. Every metric value is
// embedded in the prompt verbatim (fixed six-decimal formatting).
std::string render_dynamics_summary(const metrics::MetricsReport& report,
                                    const std::string& ticker,
                                    llm::LLMClient& client,
                                    const llm::RetryPolicy& retry = {},
                                    EventLog* log = nullptr);

// ---------------------------------------------------------------------------
// Macro
// ---------------------------------------------------------------------------

struct MacroSummary {
  Date as_of;
  std::string text;
  int report_count = 0;
};

// Two-stage condensation: each report is summarized on its own, then the
// union is condensed into one overview asking for consensus, contradictions
// and sentiment by asset class. Exactly N + 1 completions for N reports.
MacroSummary summarize_macro(const std::vector<std::string>& reports,
                             const Date& as_of, llm::LLMClient& client,
                             const llm::RetryPolicy& retry = {},
                             EventLog* log = nullptr);

}  // namespace mlab::summarize
