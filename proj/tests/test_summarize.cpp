#include <limits>
#include <optional>
#include <string>
#include <vector>

#include "doctest.h"
#include "mlab/errors.hpp"
#include "mlab/event_log.hpp"
#include "mlab/llm.hpp"
#include "mlab/summarize.hpp"

using namespace mlab;
using namespace mlab::summarize;

namespace {

// Captures every request and answers with a canned string.
struct RecordingClient final : llm::LLMClient {
  std::vector<llm::LLMRequest> requests;
  std::string reply = "canned summary";
  std::size_t budget = 48000;
  std::string complete(const llm::LLMRequest& request) override {
    requests.push_back(request);
    return reply;
  }
  std::size_t max_prompt_chars() const override { return budget; }
  std::string name() const override { return "recording"; }
};

NewsArticle article(const std::string& ticker, const Date& date,
                    const std::string& title, const std::string& body,
                    NewsArticle::Kind kind = NewsArticle::Kind::kFactual) {
  return NewsArticle{ticker, date, title, body, kind};
}

}  // namespace

TEST_CASE("clean_articles keeps only relevant articles and tidies text") {
  std::vector<NewsArticle> raw = {
      article("ABC", {2023, 10, 5}, "  ABC beats estimates  ",
              "Line one.\n\n\n\n\nLine two.  "),
      article("ABC", {2023, 10, 5}, "Market wrap: stocks drift", "No mention here."),
      article("ABC", {2023, 10, 5}, "Acme Corp expands", "New plant for Acme Corp."),
  };
  std::vector<NewsArticle> kept = clean_articles(raw, "ABC", "Acme Corp");
  REQUIRE(kept.size() == 2);
  CHECK(kept[0].title == "ABC beats estimates");
  CHECK(kept[0].body == "Line one.\n\nLine two.");
  CHECK(kept[1].title == "Acme Corp expands");

  // ticker matching is word-bounded: "XABC" does not count
  std::vector<NewsArticle> off = {
      article("ABC", {2023, 10, 5}, "XABC news", "nothing relevant")};
  CHECK(clean_articles(off, "ABC", "").empty());
}

TEST_CASE("daily news summary separates facts from opinions") {
  RecordingClient client;
  std::vector<NewsArticle> articles = {
      article("ABC", {2023, 10, 5}, "ABC ships product", "Details.",
              NewsArticle::Kind::kFactual),
      article("ABC", {2023, 10, 5}, "Analyst upgrades ABC", "Bullish take.",
              NewsArticle::Kind::kOpinion),
  };
  DailyNewsSummary s =
      summarize_daily_news(articles, "ABC", {2023, 10, 5}, client);
  CHECK(s.ticker == "ABC");
  CHECK(s.source_article_count == 2);
  CHECK(s.text == "canned summary");
  REQUIRE(client.requests.size() == 1);
  const std::string& prompt = client.requests[0].user;
  CHECK(prompt.find("Factual news:") != std::string::npos);
  CHECK(prompt.find("Analyst and commentator opinions:") != std::string::npos);
  CHECK(prompt.find("ABC ships product") < prompt.find("Analyst upgrades ABC"));

  // one empty category renders as "(none)"
  RecordingClient c2;
  std::vector<NewsArticle> facts_only = {articles[0]};
  summarize_daily_news(facts_only, "ABC", {2023, 10, 5}, c2);
  CHECK(c2.requests[0].user.find("(none)") != std::string::npos);
}

TEST_CASE("daily news summary validates its batch and skips empty days") {
  RecordingClient client;
  DailyNewsSummary empty =
      summarize_daily_news({}, "ABC", {2023, 10, 5}, client);
  CHECK(empty.text.empty());
  CHECK(empty.source_article_count == 0);
  CHECK(client.requests.empty());

  std::vector<NewsArticle> wrong_ticker = {
      article("XYZ", {2023, 10, 5}, "t", "b")};
  CHECK_THROWS_AS(
      summarize_daily_news(wrong_ticker, "ABC", {2023, 10, 5}, client),
      InvalidInputError);
  std::vector<NewsArticle> wrong_date = {article("ABC", {2023, 10, 6}, "t", "b")};
  CHECK_THROWS_AS(
      summarize_daily_news(wrong_date, "ABC", {2023, 10, 5}, client),
      InvalidInputError);
}

TEST_CASE("progressive summary chains month over month") {
  RecordingClient client;
  std::vector<DailyNewsSummary> dailies = {
      {"ABC", {2023, 10, 10}, "first brief", 2},
      {"ABC", {2023, 10, 24}, "second brief", 1},
  };
  ProgressiveNewsSummary first =
      update_progressive_summary(std::nullopt, dailies, "ABC", {2023, 10}, client);
  CHECK(first.as_of == YearMonth{2023, 10});
  CHECK(first.window_days == 31);
  CHECK_FALSE(first.predecessor.has_value());
  REQUIRE(client.requests.size() == 1);
  CHECK(client.requests[0].user.find(
            "(none; this is the first month of coverage)") != std::string::npos);
  CHECK(client.requests[0].user.find("first brief") != std::string::npos);

  std::vector<DailyNewsSummary> november = {
      {"ABC", {2023, 11, 7}, "november brief", 1}};
  ProgressiveNewsSummary second =
      update_progressive_summary(first, november, "ABC", {2023, 11}, client);
  REQUIRE(second.predecessor.has_value());
  CHECK(*second.predecessor == YearMonth{2023, 10});
  REQUIRE(client.requests.size() == 2);
  CHECK(client.requests[1].user.find("Current Summary (as of 2023-10):") !=
        std::string::npos);
  CHECK(client.requests[1].user.find(first.text) != std::string::npos);
}

TEST_CASE("progressive summary carries forward over quiet months") {
  RecordingClient client;
  ProgressiveNewsSummary prev;
  prev.ticker = "ABC";
  prev.as_of = {2023, 10};
  prev.text = "october narrative";
  EventLog log;
  ProgressiveNewsSummary out = update_progressive_summary(
      prev, {}, "ABC", {2023, 11}, client, {}, &log);
  CHECK(out.text == "october narrative");
  CHECK(client.requests.empty());
  REQUIRE(log.warning_count() == 1);
  CHECK(log.events()[0].message ==
        "no daily summaries for ABC 2023-11; carried previous summary forward");

  CHECK_THROWS_AS(
      update_progressive_summary(std::nullopt, {}, "ABC", {2023, 11}, client),
      InvalidInputError);
}

TEST_CASE("progressive summary enforces its window and lineage") {
  RecordingClient client;
  std::vector<DailyNewsSummary> stale = {
      {"ABC", {2023, 10, 31}, "stale brief", 1}};
  // November window is 30 days ending 11-30; 10-31 is exactly 30 days out
  CHECK_THROWS_AS(
      update_progressive_summary(std::nullopt, stale, "ABC", {2023, 11}, client),
      InvalidInputError);
  std::vector<DailyNewsSummary> fresh = {
      {"ABC", {2023, 11, 1}, "fresh brief", 1}};
  CHECK_NOTHROW(
      update_progressive_summary(std::nullopt, fresh, "ABC", {2023, 11}, client));

  ProgressiveOptions weekly;
  weekly.window_days = 7;
  std::vector<DailyNewsSummary> old_for_week = {
      {"ABC", {2023, 11, 20}, "too old", 1}};
  CHECK_THROWS_AS(update_progressive_summary(std::nullopt, old_for_week, "ABC",
                                             {2023, 11}, client, weekly),
                  InvalidInputError);

  ProgressiveNewsSummary wrong;
  wrong.ticker = "XYZ";
  wrong.as_of = {2023, 10};
  wrong.text = "x";
  CHECK_THROWS_AS(
      update_progressive_summary(wrong, fresh, "ABC", {2023, 11}, client),
      InvalidInputError);

  ProgressiveNewsSummary future;
  future.ticker = "ABC";
  future.as_of = {2023, 11};
  future.text = "x";
  CHECK_THROWS_AS(
      update_progressive_summary(future, fresh, "ABC", {2023, 11}, client),
      InvalidInputError);
}

TEST_CASE("progressive summary truncates oldest dailies to fit the budget") {
  RecordingClient client;
  client.budget = 600;
  std::vector<DailyNewsSummary> dailies;
  for (int d = 1; d <= 4; ++d)
    dailies.push_back(
        {"ABC", {2023, 11, d}, std::string(300, static_cast<char>('a' + d)), 1});
  EventLog log;
  update_progressive_summary(std::nullopt, dailies, "ABC", {2023, 11}, client,
                             {}, &log);
  REQUIRE(client.requests.size() == 1);
  CHECK(client.requests[0].user.find(std::string(300, 'e')) != std::string::npos);
  CHECK(client.requests[0].user.find(std::string(300, 'b')) == std::string::npos);
  bool truncated = false;
  for (const auto& e : log.events())
    if (e.message.find("truncated 3 oldest daily summaries for ABC 2023-11") !=
        std::string::npos)
      truncated = true;
  CHECK(truncated);
}

TEST_CASE("abbreviate_number scales and preserves sign") {
  CHECK(abbreviate_number(22.96e9) == "22.96 billion");
  CHECK(abbreviate_number(1e9) == "1.00 billion");
  CHECK(abbreviate_number(1.5e6) == "1.50 million");
  CHECK(abbreviate_number(-2.5e6) == "-2.50 million");
  CHECK(abbreviate_number(2500) == "2.50 thousand");
  CHECK(abbreviate_number(999) == "999");
  CHECK(abbreviate_number(0.5) == "0.5");
  CHECK(abbreviate_number(0.0) == "0");
  CHECK(abbreviate_number(-999999999) == "-1000.00 million");
  CHECK_THROWS_AS(abbreviate_number(std::numeric_limits<double>::infinity()),
                  InvalidInputError);
  CHECK_THROWS_AS(abbreviate_number(std::numeric_limits<double>::quiet_NaN()),
                  InvalidInputError);
}

namespace {

QuarterlyReport quarter(const std::string& label,
                        std::vector<LineItem> items) {
  return QuarterlyReport{label, std::move(items)};
}

}  // namespace

TEST_CASE("standardize_financials aligns quarters and fills gaps") {
  std::vector<QuarterlyReport> reports = {
      quarter("2023-Q2", {{Statement::kIncomeStatement, "revenue", 2.0e9},
                          {Statement::kBalanceSheet, "total assets", 9.0e9}}),
      quarter("2023Q1", {{Statement::kIncomeStatement, "revenue", 1.5e9},
                         {Statement::kBalanceSheet, "total assets", 8.5e9},
                         {Statement::kCashFlow, "operating cash flow", 4.0e8}}),
      quarter("2022-Q4", {{Statement::kIncomeStatement, "revenue", 1.0e9}}),
  };
  StandardizedFinancialTable t = standardize_financials(reports, 2);
  CHECK(t.quarters == std::vector<std::string>{"2023Q1", "2023-Q2"});
  REQUIRE(t.rows.size() == 3);
  // balance sheet rows come first, then income, then cash flow
  CHECK(t.rows[0].name == "total assets");
  CHECK(t.rows[1].name == "revenue");
  CHECK(t.rows[2].name == "operating cash flow");
  CHECK(t.rows[1].cells == std::vector<std::string>{"1.50 billion", "2.00 billion"});
  CHECK(t.rows[2].cells == std::vector<std::string>{"400.00 million", "n/a"});

  std::string text = t.to_text();
  CHECK(text.find("Balance Sheet") != std::string::npos);
  CHECK(text.find("Income Statement") != std::string::npos);
  CHECK(text.find("Cash Flow") != std::string::npos);
  CHECK(text.find("Balance Sheet") < text.find("Income Statement"));
  CHECK(text.find("Income Statement") < text.find("Cash Flow"));
  CHECK(text.find("n/a") != std::string::npos);
}

TEST_CASE("standardize_financials rejects inconsistent input") {
  CHECK_THROWS_AS(standardize_financials({}, 4), InsufficientDataError);
  std::vector<QuarterlyReport> reports = {
      quarter("2023-Q1", {{Statement::kIncomeStatement, "revenue", 1.0}})};
  CHECK_THROWS_AS(standardize_financials(reports, 0), InvalidInputError);

  std::vector<QuarterlyReport> dup_quarter = {
      quarter("2023-Q1", {{Statement::kIncomeStatement, "revenue", 1.0}}),
      quarter("2023Q1", {{Statement::kIncomeStatement, "revenue", 2.0}}),
  };
  CHECK_THROWS_WITH_AS(standardize_financials(dup_quarter, 4),
                       "duplicate quarterly report for 2023Q1", IntegrityError);

  std::vector<QuarterlyReport> dup_item = {
      quarter("2023-Q1", {{Statement::kIncomeStatement, "revenue", 1.0},
                          {Statement::kIncomeStatement, "revenue", 2.0}})};
  CHECK_THROWS_WITH_AS(standardize_financials(dup_item, 4),
                       "line item 'revenue' appears twice in 2023-Q1",
                       IntegrityError);

  std::vector<QuarterlyReport> bad_label = {
      quarter("late 2023", {{Statement::kIncomeStatement, "revenue", 1.0}})};
  CHECK_THROWS_WITH_AS(standardize_financials(bad_label, 4),
                       "bad quarter label: late 2023", ParseError);
}

TEST_CASE("fundamentals summary embeds the standardized table") {
  RecordingClient client;
  std::vector<QuarterlyReport> reports = {
      quarter("2023-Q1", {{Statement::kIncomeStatement, "revenue", 1.5e9}}),
      quarter("2023-Q2", {{Statement::kIncomeStatement, "revenue", 2.0e9}}),
  };
  FundamentalsSummary s = summarize_fundamentals(reports, "ABC", 4, client);
  CHECK(s.ticker == "ABC");
  CHECK(s.quarters_covered == std::vector<std::string>{"2023-Q1", "2023-Q2"});
  CHECK(s.text == "canned summary");
  REQUIRE(client.requests.size() == 1);
  CHECK(client.requests[0].user.find("1.50 billion") != std::string::npos);
  CHECK(client.requests[0].user.find("Company: ABC") != std::string::npos);
}

TEST_CASE("macro summary is a two-stage condensation") {
  RecordingClient client;
  std::vector<std::string> reports = {"inflation report text", "labor market text",
                                      "rates outlook text"};
  MacroSummary s = summarize_macro(reports, {2023, 11, 30}, client);
  CHECK(s.report_count == 3);
  CHECK(s.as_of == Date{2023, 11, 30});
  REQUIRE(client.requests.size() == 4);  // one per report plus the merge
  CHECK(client.requests[0].user.find("Report 1 of 3, period ending 2023-11-30") !=
        std::string::npos);
  CHECK(client.requests[2].user.find("rates outlook text") != std::string::npos);
  const std::string& merge = client.requests[3].user;
  CHECK(merge.find("Summary of report 1:") != std::string::npos);
  CHECK(merge.find("consensus") != std::string::npos);
  CHECK(merge.find("sentiment") != std::string::npos);

  CHECK_THROWS_AS(summarize_macro({}, {2023, 11, 30}, client), InvalidInputError);
  CHECK_THROWS_WITH_AS(
      summarize_macro({"ok", "  "}, {2023, 11, 30}, client),
      "macro report 2 is empty", InvalidInputError);
}
