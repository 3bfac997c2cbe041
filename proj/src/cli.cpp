#include "mlab/cli.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "json.hpp"
#include "mlab/backtest.hpp"
#include "mlab/calendar.hpp"
#include "mlab/errors.hpp"
#include "mlab/evaluation.hpp"
#include "mlab/event_log.hpp"
#include "mlab/io.hpp"
#include "mlab/llm.hpp"
#include "mlab/metrics.hpp"
#include "mlab/panel.hpp"
#include "mlab/rng.hpp"
#include "mlab/signal.hpp"
#include "mlab/similarity.hpp"
#include "mlab/summarize.hpp"
#include "mlab/util.hpp"

namespace mlab::cli {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

// Everything a subcommand needs: config, output dir, summary store, the LLM
// and embedding providers, the event log and the manifest under construction.
struct Session {
  Args args;
  io::RunConfig cfg;
  fs::path out;
  std::unique_ptr<io::SummaryStore> store;
  std::unique_ptr<llm::LLMClient> client;
  std::unique_ptr<similarity::EmbeddingProvider> embed_base;
  std::unique_ptr<similarity::CachingProvider> embed;
  EventLog log;
  io::RunManifest manifest;
  std::uint64_t seed = 0;
  int samples = 0;
  llm::RetryPolicy retry;
};

std::uint64_t parse_seed_flag(const std::string& s) {
  std::uint64_t v = 0;
  const char* end = s.data() + s.size();
  auto [p, ec] = std::from_chars(s.data(), end, v);
  if (ec != std::errc() || p != end)
    throw ConfigError("bad --seed '" + s + "': expected an unsigned integer");
  return v;
}

Session make_session(const Args& args, const std::string& command) {
  Session s;
  s.args = args;
  if (args.config_path.empty()) throw ConfigError("--config is required");
  s.cfg = io::load_config(args.config_path);
  s.out = fs::path(args.out_dir);
  fs::create_directories(s.out);
  s.store = std::make_unique<io::SummaryStore>(s.out / "store");
  if (s.cfg.llm.kind == "http")
    s.client = std::make_unique<llm::HttpLLMClient>(s.cfg.llm.endpoint, s.cfg.llm.model,
                                                    s.cfg.llm.api_key_env);
  else
    s.client = std::make_unique<llm::StubLLMClient>();
  if (s.cfg.embedding.kind == "http")
    throw ConfigError("no http embedding provider is shipped; use kind 'stub'");
  s.embed_base = std::make_unique<similarity::HashedBowProvider>(
      static_cast<std::size_t>(s.cfg.embedding.dimension));
  s.embed = std::make_unique<similarity::CachingProvider>(*s.embed_base);
  s.seed = args.seed.empty() ? s.cfg.seed : parse_seed_flag(args.seed);
  s.samples = args.samples < 0 ? s.cfg.n_samples : args.samples;
  if (s.samples < 1) throw ConfigError("--samples must be >= 1");
  s.manifest = io::make_manifest(command, s.cfg);
  return s;
}

std::string utc_timestamp() {
  std::time_t now = std::time(nullptr);
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

// Folds log events into the manifest, writes manifest-<command>.json and
// reports per-item errors on stderr.
int finish(Session& s) {
  for (const auto& e : s.log.events()) {
    if (e.level == EventLog::Level::kError)
      s.manifest.errors.push_back(e.message);
    else
      s.manifest.warnings.push_back(e.message);
  }
  if (s.cfg.record_timestamps) s.manifest.timestamp = utc_timestamp();
  s.manifest.finalize();
  io::write_file(s.out / ("manifest-" + s.manifest.command + ".json"),
                 s.manifest.to_json().dump(2) + "\n");
  if (!s.manifest.errors.empty()) {
    std::fprintf(stderr, "%zu error(s) during %s:\n", s.manifest.errors.size(),
                 s.manifest.command.c_str());
    for (const auto& msg : s.manifest.errors)
      std::fprintf(stderr, "  %s\n", msg.c_str());
    return 1;
  }
  return 0;
}

// Digest of the store slice a command consumes, recorded as a manifest input.
std::string store_digest(const io::SummaryStore& store, const std::string& kind) {
  std::string acc;
  for (const auto& k : store.enumerate(kind)) {
    acc += k.kind;
    acc += '/';
    acc += k.ticker;
    acc += '/';
    acc += k.as_of;
    acc += ':';
    acc += to_hex(fnv1a64(io::read_file(store.path_for(k))));
    acc += '\n';
  }
  return acc;
}

std::vector<std::string> load_universe_for(Session& s) {
  const std::string file =
      s.args.universe.empty() ? s.cfg.universe_file : s.args.universe;
  const fs::path path = s.cfg.data_path(file);
  s.manifest.add_input_file("universe", path);
  return io::load_universe(path);
}

std::optional<YearMonth> month_filter(const Args& args) {
  if (args.as_of.empty()) return std::nullopt;
  try {
    return parse_year_month(args.as_of);
  } catch (const ParseError&) {
    throw ConfigError("bad --as-of '" + args.as_of + "': expected YYYY-MM");
  }
}

std::string fmt_full(double x) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", x);
  return buf;
}

std::string opt_full(const std::optional<double>& x) {
  return x ? fmt_full(*x) : std::string();
}

std::string opt_cell(const std::optional<double>& x) {
  return x ? util::fmt_double(*x, 2) : std::string("-");
}

ordered_json parse_json_file(const fs::path& path) {
  try {
    return ordered_json::parse(io::read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

// ---------------------------------------------------------------------------
// summarize-news
// ---------------------------------------------------------------------------

int cmd_summarize_news(Session& s) {
  auto universe = load_universe_for(s);
  const fs::path news_path = s.cfg.data_path(s.cfg.news_file);
  s.manifest.add_input_file("news", news_path);
  auto articles = io::load_news(news_path);
  auto only = month_filter(s.args);

  std::map<std::string, std::vector<summarize::NewsArticle>> by_ticker;
  for (auto& a : articles) by_ticker[a.ticker].push_back(a);

  int n_daily = 0, n_monthly = 0;
  for (const auto& ticker : universe) {
    auto it = by_ticker.find(ticker);
    if (it == by_ticker.end()) {
      s.log.warn("no news articles for " + ticker);
      continue;
    }
    try {
      auto cleaned = summarize::clean_articles(it->second, ticker, "");
      std::map<YearMonth, std::map<Date, std::vector<summarize::NewsArticle>>> by_month;
      for (auto& a : cleaned) by_month[month_of(a.date)][a.date].push_back(a);
      for (auto& [ym, by_date] : by_month) {
        if (only && ym != *only) continue;
        std::vector<summarize::DailyNewsSummary> dailies;
        for (auto& [date, day_articles] : by_date) {
          auto daily = summarize::summarize_daily_news(day_articles, ticker, date,
                                                       *s.client, s.retry, &s.log);
          ordered_json doc;
          doc["kind"] = "news-daily";
          doc["ticker"] = ticker;
          doc["as_of"] = date.to_string();
          doc["text"] = daily.text;
          doc["source_article_count"] = daily.source_article_count;
          s.store->put({"news-daily", ticker, date.to_string()}, doc);
          dailies.push_back(std::move(daily));
          ++n_daily;
        }
        std::optional<summarize::ProgressiveNewsSummary> prev;
        io::SummaryStore::Key prev_key{"news-monthly", ticker, ym.prev().to_string()};
        if (s.store->contains(prev_key)) {
          auto doc = s.store->get(prev_key);
          summarize::ProgressiveNewsSummary p;
          p.ticker = ticker;
          p.as_of = ym.prev();
          p.text = doc.at("text").get<std::string>();
          p.window_days = doc.at("window_days").get<int>();
          prev = std::move(p);
        }
        summarize::ProgressiveOptions popts;
        popts.retry = s.retry;
        auto monthly = summarize::update_progressive_summary(prev, dailies, ticker, ym,
                                                             *s.client, popts, &s.log);
        ordered_json doc;
        doc["kind"] = "news-monthly";
        doc["ticker"] = ticker;
        doc["as_of"] = ym.to_string();
        doc["text"] = monthly.text;
        doc["window_days"] = monthly.window_days;
        doc["lineage"]["predecessor"] =
            monthly.predecessor ? ordered_json(monthly.predecessor->to_string())
                                : ordered_json(nullptr);
        s.store->put({"news-monthly", ticker, ym.to_string()}, doc);
        ++n_monthly;
      }
    } catch (const Error& e) {
      s.log.error(ticker + ": " + e.what());
    }
  }
  std::printf("stored %d daily and %d monthly news summaries\n", n_daily, n_monthly);
  return finish(s);
}

// ---------------------------------------------------------------------------
// summarize-fundamentals
// ---------------------------------------------------------------------------

int cmd_summarize_fundamentals(Session& s) {
  auto universe = load_universe_for(s);
  const fs::path path = s.cfg.data_path(s.cfg.fundamentals_file);
  s.manifest.add_input_file("fundamentals", path);
  auto all = io::load_fundamentals(path);

  int n = 0;
  for (const auto& ticker : universe) {
    auto it = all.find(ticker);
    if (it == all.end()) {
      s.log.warn("no fundamentals for " + ticker);
      continue;
    }
    try {
      auto summary = summarize::summarize_fundamentals(it->second, ticker,
                                                       s.cfg.n_quarters, *s.client,
                                                       s.retry, &s.log);
      ordered_json doc;
      doc["kind"] = "fundamentals";
      doc["ticker"] = ticker;
      doc["as_of"] = summary.quarters_covered.back();
      doc["quarters_covered"] = summary.quarters_covered;
      doc["text"] = summary.text;
      s.store->put({"fundamentals", ticker, summary.quarters_covered.back()}, doc);
      ++n;
    } catch (const Error& e) {
      s.log.error(ticker + ": " + e.what());
    }
  }
  std::printf("stored %d fundamentals summaries\n", n);
  return finish(s);
}

// ---------------------------------------------------------------------------
// summarize-dynamics
// ---------------------------------------------------------------------------

int cmd_summarize_dynamics(Session& s) {
  auto universe = load_universe_for(s);
  const fs::path prices_path = s.cfg.data_path(s.cfg.prices_file);
  const fs::path desc_path = s.cfg.data_path(s.cfg.descriptions_file);
  s.manifest.add_input_file("prices", prices_path);
  s.manifest.add_input_file("descriptions", desc_path);
  s.manifest.add_input("store:news-monthly", store_digest(*s.store, "news-monthly"));
  auto panel = io::load_prices(prices_path);
  auto descriptions = io::load_descriptions(desc_path);
  auto only = month_filter(s.args);

  std::map<std::string, std::vector<YearMonth>> months_by_ticker;
  for (const auto& k : s.store->enumerate("news-monthly"))
    months_by_ticker[k.ticker].push_back(parse_year_month(k.as_of));

  metrics::DynamicsOptions dopts;
  dopts.risk_free_rate = s.cfg.risk_free_rate;
  dopts.periods_per_year = s.cfg.periods_per_year;

  int n = 0;
  for (const auto& ticker : universe) {
    try {
      std::vector<YearMonth> months;
      if (only) {
        months.push_back(*only);
      } else if (auto it = months_by_ticker.find(ticker);
                 it != months_by_ticker.end()) {
        months = it->second;
      }
      if (months.empty()) {
        s.log.warn("no months to summarize for " + ticker +
                   "; run summarize-news first or pass --as-of");
        continue;
      }
      auto ranked = similarity::stock_universe(
          ticker, descriptions, static_cast<std::size_t>(s.cfg.peer_count), *s.embed);
      std::vector<std::string> peers;
      for (const auto& r : ranked) peers.push_back(r.ticker);
      for (const auto& ym : months) {
        std::size_t idx = panel.month_end_index(ym);
        if (idx == PricePanel::npos) {
          s.log.error(ticker + " " + ym.to_string() + ": no trading day in month");
          continue;
        }
        const Date as_of = panel.calendar[idx];
        auto report = metrics::price_dynamics_metrics(ticker, peers, s.cfg.index_ticker,
                                                      panel, as_of, dopts);
        auto text = summarize::render_dynamics_summary(report, ticker, *s.client,
                                                       s.retry, &s.log);
        ordered_json doc;
        doc["kind"] = "dynamics";
        doc["ticker"] = ticker;
        doc["as_of"] = ym.to_string();
        doc["as_of_date"] = as_of.to_string();
        doc["text"] = text;
        doc["metrics"] = report.to_json();
        s.store->put({"dynamics", ticker, ym.to_string()}, doc);
        ++n;
      }
    } catch (const Error& e) {
      s.log.error(ticker + ": " + e.what());
    }
  }
  std::printf("stored %d price dynamics summaries\n", n);
  return finish(s);
}

// ---------------------------------------------------------------------------
// summarize-macro
// ---------------------------------------------------------------------------

int cmd_summarize_macro(Session& s) {
  const fs::path dir = s.cfg.data_path(s.cfg.macro_dir);
  if (!fs::is_directory(dir))
    throw NotFoundError("macro directory '" + dir.string() + "' does not exist");
  auto only = month_filter(s.args);

  std::vector<std::string> month_names;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) month_names.push_back(entry.path().filename().string());
  std::sort(month_names.begin(), month_names.end());

  int n = 0;
  for (const auto& name : month_names) {
    try {
      const YearMonth ym = parse_year_month(name);
      if (only && ym != *only) continue;
      auto reports = io::load_macro_dir(dir / name);
      if (reports.empty()) {
        s.log.warn("no reports under " + (dir / name).string());
        continue;
      }
      std::string joined;
      for (const auto& r : reports) {
        joined += r;
        joined += '\n';
      }
      s.manifest.add_input("macro:" + name, joined);
      auto summary = summarize::summarize_macro(reports, month_end_date(ym), *s.client,
                                                s.retry, &s.log);
      ordered_json doc;
      doc["kind"] = "macro";
      doc["as_of"] = ym.to_string();
      doc["text"] = summary.text;
      doc["report_count"] = summary.report_count;
      s.store->put({"macro", "", ym.to_string()}, doc);
      ++n;
    } catch (const Error& e) {
      s.log.error(name + ": " + e.what());
    }
  }
  if (n == 0) s.log.warn("no macro months were summarized");
  std::printf("stored %d macro summaries\n", n);
  return finish(s);
}

// ---------------------------------------------------------------------------
// signal
// ---------------------------------------------------------------------------

signal::SignalContext assemble_context(
    Session& s, const std::map<std::string, io::SummaryStore::Key>& latest_fund,
    const std::string& ticker, const YearMonth& ym) {
  signal::SignalContext ctx;
  ctx.ticker = ticker;
  ctx.as_of = ym;
  ctx.news =
      s.store->get({"news-monthly", ticker, ym.to_string()}).at("text").get<std::string>();
  ctx.dynamics =
      s.store->get({"dynamics", ticker, ym.to_string()}).at("text").get<std::string>();
  auto it = latest_fund.find(ticker);
  if (it == latest_fund.end())
    throw NotFoundError("no fundamentals summary stored for " + ticker);
  ctx.fundamentals = s.store->get(it->second).at("text").get<std::string>();
  io::SummaryStore::Key macro_key{"macro", "", ym.to_string()};
  if (s.store->contains(macro_key))
    ctx.macro = s.store->get(macro_key).at("text").get<std::string>();
  return ctx;
}

int cmd_signal(Session& s) {
  auto universe = load_universe_for(s);
  for (const char* kind : {"news-monthly", "dynamics", "fundamentals", "macro"})
    s.manifest.add_input(std::string("store:") + kind, store_digest(*s.store, kind));
  auto only = month_filter(s.args);

  std::map<std::string, std::vector<YearMonth>> months_by_ticker;
  for (const auto& k : s.store->enumerate("news-monthly"))
    months_by_ticker[k.ticker].push_back(parse_year_month(k.as_of));
  std::map<std::string, io::SummaryStore::Key> latest_fund;
  for (const auto& k : s.store->enumerate("fundamentals")) latest_fund[k.ticker] = k;

  struct Row {
    YearMonth ym;
    std::string ticker;
    int decision;
  };
  std::vector<Row> rows;
  for (const auto& ticker : universe) {
    std::vector<YearMonth> months;
    if (only) {
      months.push_back(*only);
    } else if (auto it = months_by_ticker.find(ticker);
               it != months_by_ticker.end()) {
      months = it->second;
    }
    if (months.empty()) {
      s.log.warn("no months with stored summaries for " + ticker);
      continue;
    }
    for (const auto& ym : months) {
      try {
        auto ctx = assemble_context(s, latest_fund, ticker, ym);
        auto sig = signal::generate_signal(ctx, *s.client, s.retry, &s.log);
        ordered_json doc;
        doc["kind"] = "signal";
        doc["ticker"] = ticker;
        doc["as_of"] = ym.to_string();
        doc["decision"] = signal::decision_value(sig.decision);
        doc["decision_name"] = signal::decision_name(sig.decision);
        doc["explanation"] = sig.explanation;
        doc["raw_completion"] = sig.raw_completion;
        s.store->put({"signal", ticker, ym.to_string()}, doc);
        rows.push_back({ym, ticker, signal::decision_value(sig.decision)});
      } catch (const Error& e) {
        s.log.error(ticker + " " + ym.to_string() + ": " + e.what());
      }
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.ym != b.ym) return a.ym < b.ym;
    return a.ticker < b.ticker;
  });
  std::string csv = "as_of,ticker,decision,score\n";
  for (const auto& r : rows)
    csv += r.ym.to_string() + "," + r.ticker + "," + std::to_string(r.decision) + ",\n";
  io::write_file(s.out / "signals_generated.csv", csv);
  std::printf("generated %zu signals\n", rows.size());
  return finish(s);
}

// ---------------------------------------------------------------------------
// rank
// ---------------------------------------------------------------------------

int cmd_rank(Session& s) {
  s.manifest.add_input("store:signal", store_digest(*s.store, "signal"));
  auto only = month_filter(s.args);

  std::map<YearMonth, std::vector<signal::Signal>> by_month;
  for (const auto& k : s.store->enumerate("signal")) {
    const YearMonth ym = parse_year_month(k.as_of);
    if (only && ym != *only) continue;
    auto doc = s.store->get(k);
    signal::Signal sig;
    sig.ticker = k.ticker;
    sig.as_of = ym;
    sig.decision = signal::decision_from_value(doc.at("decision").get<int>());
    sig.explanation = doc.at("explanation").get<std::string>();
    sig.raw_completion = doc.at("raw_completion").get<std::string>();
    by_month[ym].push_back(std::move(sig));
  }
  if (by_month.empty()) s.log.warn("no stored signals to rank");

  struct Row {
    YearMonth ym;
    std::string ticker;
    int score;
  };
  std::vector<Row> rows;
  int n_months = 0;
  for (auto& [ym, sigs] : by_month) {
    try {
      std::vector<signal::Signal> buys;
      for (const auto& x : sigs)
        if (x.decision == signal::Decision::kBuy) buys.push_back(x);
      if (buys.empty()) {
        s.log.warn("no buy signals in " + ym.to_string() + "; nothing to rank");
        continue;
      }
      auto ranked = signal::rank_buy_explanations(buys, *s.client, s.seed, {}, &s.log);
      ordered_json scores = ordered_json::array();
      for (const auto& r : ranked) {
        scores.push_back(ordered_json{{"ticker", r.signal.ticker}, {"score", r.score}});
        rows.push_back({ym, r.signal.ticker, r.score});
      }
      ordered_json doc;
      doc["kind"] = "rank";
      doc["as_of"] = ym.to_string();
      doc["scores"] = std::move(scores);
      s.store->put({"rank", "", ym.to_string()}, doc);
      ++n_months;
    } catch (const Error& e) {
      s.log.error(ym.to_string() + ": " + e.what());
    }
  }
  std::sort(rows.begin(), rows.end(), [](const Row& a, const Row& b) {
    if (a.ym != b.ym) return a.ym < b.ym;
    return a.ticker < b.ticker;
  });
  std::string csv = "as_of,ticker,score\n";
  for (const auto& r : rows)
    csv += r.ym.to_string() + "," + r.ticker + "," + std::to_string(r.score) + "\n";
  io::write_file(s.out / "scores.csv", csv);
  std::printf("ranked buy explanations for %d month(s), %zu signals\n", n_months,
              rows.size());
  return finish(s);
}

// ---------------------------------------------------------------------------
// backtest
// ---------------------------------------------------------------------------

int cmd_backtest(Session& s) {
  const fs::path prices_path = s.cfg.data_path(s.cfg.prices_file);
  const fs::path signals_path = s.cfg.data_path(s.cfg.signals_file);
  s.manifest.add_input_file("prices", prices_path);
  s.manifest.add_input_file("signals", signals_path);
  auto panel = io::load_prices(prices_path);
  auto table = io::load_signals(signals_path, &s.log);

  std::optional<backtest::CapWeights> caps;
  const fs::path caps_path = s.cfg.data_path(s.cfg.caps_file);
  if (fs::exists(caps_path)) {
    s.manifest.add_input_file("caps", caps_path);
    caps = io::load_caps(caps_path);
  }

  std::vector<std::string> names;
  if (s.args.strategies.empty()) {
    names = s.cfg.strategies.empty() ? backtest::strategy_names() : s.cfg.strategies;
  } else if (s.args.strategies == "all") {
    names = backtest::strategy_names();
  } else {
    for (const auto& piece : util::split(s.args.strategies, ',')) {
      std::string t(util::trim(piece));
      if (!t.empty()) names.push_back(std::move(t));
    }
    if (names.empty()) throw ConfigError("--strategies lists no strategy");
  }

  fs::create_directories(s.out / "backtest");
  std::vector<backtest::PerformanceReport> reports;
  for (const auto& name : names) {
    try {
      auto spec = backtest::make_spec(name, s.cfg.cost_bps);
      auto weights = backtest::build_weights(spec, table.signals,
                                             table.has_scores ? &table.scores : nullptr,
                                             panel, caps ? &*caps : nullptr, &s.log);
      auto report = backtest::run_backtest(spec, weights, panel, &s.log);
      io::write_file(s.out / "backtest" / (name + ".json"),
                     report.to_json(true).dump(2) + "\n");
      reports.push_back(std::move(report));
    } catch (const Error& e) {
      s.log.error("strategy " + name + ": " + e.what());
    }
  }

  std::string summary =
      "strategy,cost_bps,total_return_gross,total_return_net,volatility,sharpe,"
      "sortino,win_rate,n_trades,max_drawdown\n";
  for (const auto& r : reports) {
    summary += r.strategy + "," + fmt_full(r.cost_bps) + "," +
               fmt_full(r.total_return_gross) + "," + fmt_full(r.total_return_net) +
               "," + fmt_full(r.volatility) + "," + opt_full(r.sharpe) + "," +
               opt_full(r.sortino) + "," + opt_full(r.win_rate) + "," +
               std::to_string(r.n_trades) + "," + fmt_full(r.max_drawdown) + "\n";
  }
  io::write_file(s.out / "backtest" / "summary.csv", summary);

  std::string curves = "strategy,date,wealth_net,wealth_gross\n";
  for (const auto& r : reports)
    for (std::size_t i = 0; i < r.dates.size(); ++i)
      curves += r.strategy + "," + r.dates[i].to_string() + "," +
                fmt_full(r.wealth_net[i]) + "," + fmt_full(r.wealth_gross[i]) + "\n";
  io::write_file(s.out / "backtest" / "wealth_curves.csv", curves);

  std::printf("%-18s %11s %11s %8s %7s %7s %8s\n", "strategy", "net_return",
              "gross_ret", "sharpe", "win", "trades", "max_dd");
  for (const auto& r : reports)
    std::printf("%-18s %10.2f%% %10.2f%% %8s %7s %7d %7.2f%%\n", r.strategy.c_str(),
                100.0 * r.total_return_net, 100.0 * r.total_return_gross,
                opt_cell(r.sharpe).c_str(), opt_cell(r.win_rate).c_str(), r.n_trades,
                100.0 * r.max_drawdown);
  return finish(s);
}

// ---------------------------------------------------------------------------
// bootstrap
// ---------------------------------------------------------------------------

int cmd_bootstrap(Session& s) {
  const fs::path prices_path = s.cfg.data_path(s.cfg.prices_file);
  const fs::path signals_path = s.cfg.data_path(s.cfg.signals_file);
  s.manifest.add_input_file("prices", prices_path);
  s.manifest.add_input_file("signals", signals_path);
  auto panel = io::load_prices(prices_path);
  auto table = io::load_signals(signals_path, &s.log);

  auto restricted = restrict_tickers(panel, table.signals.tickers);
  auto returns = eval::monthly_returns(restricted, table.signals.months);

  fs::create_directories(s.out / "bootstrap");
  for (eval::Leg leg : {eval::Leg::kLong, eval::Leg::kShort, eval::Leg::kBoth}) {
    try {
      eval::BootstrapOptions opts;
      opts.leg = leg;
      opts.n_samples = s.samples;
      opts.seed = s.seed;
      auto res = eval::bootstrap_evaluate(table.signals, returns, opts, &s.log);
      io::write_file(s.out / "bootstrap" /
                         (std::string(eval::leg_name(leg)) + ".json"),
                     res.to_json().dump(2) + "\n");
      std::printf("%-5s R=%+.4f (pct %.2f)  HR=%.4f (pct %.2f)  n=%d\n",
                  eval::leg_name(leg), res.observed_R, res.quantile_R, res.observed_HR,
                  res.quantile_HR, res.n_samples);
    } catch (const Error& e) {
      s.log.error(std::string("leg ") + eval::leg_name(leg) + ": " + e.what());
    }
  }
  return finish(s);
}

// ---------------------------------------------------------------------------
// similarity-report
// ---------------------------------------------------------------------------

int cmd_similarity_report(Session& s) {
  for (const char* kind : {"signal", "news-monthly", "dynamics", "fundamentals", "macro"})
    s.manifest.add_input(std::string("store:") + kind, store_digest(*s.store, kind));
  auto only = month_filter(s.args);

  std::map<std::string, io::SummaryStore::Key> latest_fund;
  for (const auto& k : s.store->enumerate("fundamentals")) latest_fund[k.ticker] = k;

  std::vector<signal::Signal> signals;
  std::vector<signal::SignalContext> contexts;
  for (const auto& k : s.store->enumerate("signal")) {
    const YearMonth ym = parse_year_month(k.as_of);
    if (only && ym != *only) continue;
    try {
      auto doc = s.store->get(k);
      signal::Signal sig;
      sig.ticker = k.ticker;
      sig.as_of = ym;
      sig.decision = signal::decision_from_value(doc.at("decision").get<int>());
      sig.explanation = doc.at("explanation").get<std::string>();
      auto ctx = assemble_context(s, latest_fund, k.ticker, ym);
      signals.push_back(std::move(sig));
      contexts.push_back(std::move(ctx));
    } catch (const Error& e) {
      s.log.error(k.ticker + " " + k.as_of + ": " + e.what());
    }
  }
  if (signals.empty())
    throw InvalidInputError("no stored signals; run the signal command first");

  auto report = signal::signal_component_similarity(signals, contexts, *s.embed);
  ordered_json doc;
  doc["provider"] = s.embed->name();
  doc["n_signals"] = signals.size();
  doc["components"] = report.to_json();
  io::write_file(s.out / "similarity.json", doc.dump(2) + "\n");
  std::printf(
      "component similarity means: news=%.4f dynamics=%.4f fundamentals=%.4f "
      "macro=%.4f (n=%zu)\n",
      report.news.mean, report.dynamics.mean, report.fundamentals.mean,
      report.macro.mean, signals.size());
  return finish(s);
}

// ---------------------------------------------------------------------------
// report
// ---------------------------------------------------------------------------

int cmd_report(Session& s) {
  std::vector<fs::path> manifests;
  if (fs::is_directory(s.out))
    for (const auto& entry : fs::directory_iterator(s.out)) {
      const std::string name = entry.path().filename().string();
      if (name.rfind("manifest-", 0) == 0 && entry.path().extension() == ".json")
        manifests.push_back(entry.path());
    }
  std::sort(manifests.begin(), manifests.end());
  if (manifests.empty()) {
    std::fprintf(stderr, "no run manifests under %s; run a pipeline command first\n",
                 s.out.string().c_str());
    return 2;
  }

  std::string text = "marketlab run report\n====================\n\n";
  for (const auto& path : manifests) {
    s.manifest.add_input_file(path.filename().string(), path);
    auto doc = parse_json_file(path);
    text += "command: " + doc.value("command", std::string("?")) + "\n";
    text += "  run_id: " + doc.value("run_id", std::string("?")) + "\n";
    text += "  config: " + doc.value("config_hash", std::string("?")) + "\n";
    text += "  inputs: " + std::to_string(doc.value("inputs", ordered_json::array()).size()) + "\n";
    const auto warnings = doc.value("warnings", ordered_json::array());
    const auto errors = doc.value("errors", ordered_json::array());
    text += "  warnings: " + std::to_string(warnings.size()) + "\n";
    text += "  errors: " + std::to_string(errors.size()) + "\n";
    for (const auto& e : errors) text += "    error: " + e.get<std::string>() + "\n";
    text += "\n";
  }

  text += "store\n-----\n";
  for (const char* kind : {"news-daily", "news-monthly", "fundamentals", "dynamics",
                           "macro", "signal", "rank"}) {
    char line[64];
    std::snprintf(line, sizeof(line), "%-14s %zu\n", kind, s.store->count(kind));
    text += line;
  }
  text += "\n";

  if (fs::exists(s.out / "backtest" / "summary.csv")) {
    text += "backtest summary\n----------------\n";
    text += io::read_file(s.out / "backtest" / "summary.csv");
    text += "\n";
  }
  for (const char* leg : {"long", "short", "both"}) {
    const fs::path p = s.out / "bootstrap" / (std::string(leg) + ".json");
    if (!fs::exists(p)) continue;
    auto doc = parse_json_file(p);
    char line[160];
    std::snprintf(line, sizeof(line),
                  "bootstrap %-5s R=%+.6f (pct %.2f)  HR=%.6f (pct %.2f)\n", leg,
                  doc.value("observed_R", 0.0), doc.value("quantile_R", 0.0),
                  doc.value("observed_HR", 0.0), doc.value("quantile_HR", 0.0));
    text += line;
  }
  if (fs::exists(s.out / "similarity.json")) {
    auto doc = parse_json_file(s.out / "similarity.json");
    const auto comp = doc.value("components", ordered_json::object());
    char line[160];
    std::snprintf(line, sizeof(line),
                  "similarity means: news=%.4f dynamics=%.4f fundamentals=%.4f "
                  "macro=%.4f\n",
                  comp.contains("news") ? comp["news"].value("mean", 0.0) : 0.0,
                  comp.contains("dynamics") ? comp["dynamics"].value("mean", 0.0) : 0.0,
                  comp.contains("fundamentals") ? comp["fundamentals"].value("mean", 0.0)
                                                : 0.0,
                  comp.contains("macro") ? comp["macro"].value("mean", 0.0) : 0.0);
    text += line;
  }

  io::write_file(s.out / "report.txt", text);
  std::fputs(text.c_str(), stdout);
  return finish(s);
}

using Handler = int (*)(Session&);

const std::vector<std::pair<std::string, Handler>>& handlers() {
  static const std::vector<std::pair<std::string, Handler>> table = {
      {"summarize-news", cmd_summarize_news},
      {"summarize-fundamentals", cmd_summarize_fundamentals},
      {"summarize-dynamics", cmd_summarize_dynamics},
      {"summarize-macro", cmd_summarize_macro},
      {"signal", cmd_signal},
      {"rank", cmd_rank},
      {"backtest", cmd_backtest},
      {"bootstrap", cmd_bootstrap},
      {"similarity-report", cmd_similarity_report},
      {"report", cmd_report},
  };
  return table;
}

}  // namespace

const std::vector<std::string>& command_names() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> out;
    for (const auto& [name, fn] : handlers()) out.push_back(name);
    return out;
  }();
  return names;
}

int run_command(const Args& args) {
  for (const auto& [name, fn] : handlers()) {
    if (name == args.command) {
      Session s = make_session(args, name);
      return fn(s);
    }
  }
  throw ConfigError("unknown command '" + args.command + "'");
}

}  // namespace mlab::cli
