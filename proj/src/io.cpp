#include "mlab/io.hpp"

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "mlab/errors.hpp"
#include "mlab/rng.hpp"
#include "mlab/util.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace mlab::io {

// ---------------------------------------------------------------------------
// Raw files
// ---------------------------------------------------------------------------

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw NotFoundError("cannot open " + path.string());
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

void write_file(const fs::path& path, const std::string& content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  out << content;
  if (!out) throw Error("short write to " + path.string());
}

// ---------------------------------------------------------------------------
// Parsing helpers
// ---------------------------------------------------------------------------

namespace {

std::vector<std::string> non_empty_lines(const std::string& text,
                                         std::vector<std::size_t>* line_numbers) {
  std::vector<std::string> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t next = text.find('\n', pos);
    std::string line = next == std::string::npos ? text.substr(pos)
                                                 : text.substr(pos, next - pos);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!util::trim(line).empty()) {
      out.push_back(line);
      if (line_numbers) line_numbers->push_back(line_no);
    }
    if (next == std::string::npos) break;
    pos = next + 1;
  }
  return out;
}

double parse_double_field(const std::string& raw, const char* what,
                          std::size_t line_no) {
  const std::string s(util::trim(raw));
  double v = 0.0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" +
                     raw + "'");
  return v;
}

long parse_int_field(const std::string& raw, const char* what, std::size_t line_no) {
  const std::string s(util::trim(raw));
  long v = 0;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size())
    throw ParseError("line " + std::to_string(line_no) + ": bad " + what + " '" +
                     raw + "'");
  return v;
}

void check_header(const std::string& line, const char* expected, const fs::path& path) {
  if (std::string(util::trim(line)) != expected)
    throw ParseError(path.string() + ": expected header '" + expected + "', got '" +
                     line + "'");
}

std::string fmt_full(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

ordered_json parse_json(const std::string& text, const fs::path& path) {
  try {
    return ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError(path.string() + ": " + e.what());
  }
}

}  // namespace

// ---------------------------------------------------------------------------
// Prices
// ---------------------------------------------------------------------------

PricePanel load_prices(const fs::path& path) {
  std::vector<std::size_t> line_nos;
  const std::vector<std::string> lines = non_empty_lines(read_file(path), &line_nos);
  if (lines.empty()) throw ParseError(path.string() + ": empty file, header expected");
  check_header(lines[0], "date,ticker,adj_close", path);

  std::map<Date, std::map<std::string, double>> rows;
  std::set<std::string> tickers;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t ln = line_nos[i];
    const std::vector<std::string> f = util::split(lines[i], ',');
    if (f.size() != 3)
      throw ParseError("line " + std::to_string(ln) + ": expected 3 fields, got " +
                       std::to_string(f.size()));
    Date date;
    try {
      date = parse_date(std::string(util::trim(f[0])));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(ln) + ": " + e.what());
    }
    const std::string ticker(util::trim(f[1]));
    if (ticker.empty())
      throw ParseError("line " + std::to_string(ln) + ": empty ticker");
    const double price = parse_double_field(f[2], "price", ln);
    if (!(price > 0.0))
      throw IntegrityError("line " + std::to_string(ln) + ": nonpositive price for " +
                           ticker + " on " + date.to_string());
    auto [it, inserted] = rows[date].emplace(ticker, price);
    if (!inserted)
      throw IntegrityError("line " + std::to_string(ln) + ": duplicate row for (" +
                           date.to_string() + ", " + ticker + ")");
    tickers.insert(ticker);
  }

  PricePanel panel;
  panel.tickers.assign(tickers.begin(), tickers.end());
  panel.calendar.reserve(rows.size());
  for (const auto& [date, cells] : rows) panel.calendar.push_back(date);
  panel.prices = Grid(panel.calendar.size(), panel.tickers.size());
  std::size_t r = 0;
  for (const auto& [date, cells] : rows) {
    for (const auto& [ticker, price] : cells) {
      const std::size_t c = static_cast<std::size_t>(
          std::lower_bound(panel.tickers.begin(), panel.tickers.end(), ticker) -
          panel.tickers.begin());
      panel.prices.at(r, c) = price;
    }
    ++r;
  }
  panel.validate();
  return panel;
}

void write_prices(const PricePanel& panel, const fs::path& path) {
  std::ostringstream os;
  os << "date,ticker,adj_close\n";
  for (std::size_t r = 0; r < panel.calendar.size(); ++r)
    for (std::size_t c = 0; c < panel.tickers.size(); ++c) {
      const double p = panel.prices.at(r, c);
      if (is_missing(p)) continue;
      os << panel.calendar[r].to_string() << ',' << panel.tickers[c] << ','
         << fmt_full(p) << '\n';
    }
  write_file(path, os.str());
}

// ---------------------------------------------------------------------------
// Signals
// ---------------------------------------------------------------------------

SignalTable load_signals(const fs::path& path, EventLog* log) {
  std::vector<std::size_t> line_nos;
  const std::vector<std::string> lines = non_empty_lines(read_file(path), &line_nos);
  if (lines.empty()) throw ParseError(path.string() + ": empty file, header expected");
  check_header(lines[0], "as_of,ticker,decision,score", path);

  struct Cell {
    int decision;
    std::optional<int> score;
  };
  std::map<YearMonth, std::map<std::string, Cell>> rows;
  std::set<std::string> tickers;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t ln = line_nos[i];
    const std::vector<std::string> f = util::split(lines[i], ',');
    if (f.size() != 4)
      throw ParseError("line " + std::to_string(ln) + ": expected 4 fields, got " +
                       std::to_string(f.size()));
    YearMonth month;
    try {
      month = parse_year_month(std::string(util::trim(f[0])));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(ln) + ": " + e.what());
    }
    const std::string ticker(util::trim(f[1]));
    if (ticker.empty())
      throw ParseError("line " + std::to_string(ln) + ": empty ticker");
    const long decision = parse_int_field(f[2], "decision", ln);
    if (decision < -1 || decision > 1)
      throw InvalidInputError("line " + std::to_string(ln) + ": decision value " +
                              std::to_string(decision) + " outside {-1, 0, +1}");
    Cell cell{static_cast<int>(decision), std::nullopt};
    if (!util::trim(f[3]).empty()) {
      const long score = parse_int_field(f[3], "score", ln);
      if (score < 0 || score > 10)
        throw InvalidInputError("line " + std::to_string(ln) + ": score " +
                                std::to_string(score) + " outside 0..10");
      cell.score = static_cast<int>(score);
    }
    auto [it, inserted] = rows[month].emplace(ticker, cell);
    if (!inserted)
      throw IntegrityError("line " + std::to_string(ln) + ": duplicate signal for (" +
                           month.to_string() + ", " + ticker + ")");
    tickers.insert(ticker);
  }
  if (rows.empty()) throw InsufficientDataError(path.string() + ": no signal rows");

  SignalTable table;
  table.signals.tickers.assign(tickers.begin(), tickers.end());
  for (const auto& [month, cells] : rows) table.signals.months.push_back(month);
  const std::size_t n_months = table.signals.months.size();
  const std::size_t n_tickers = table.signals.tickers.size();
  table.signals.m.assign(n_months * n_tickers, 0);
  table.scores.months = table.signals.months;
  table.scores.tickers = table.signals.tickers;
  table.scores.s = Grid(n_months, n_tickers);

  std::size_t r = 0;
  for (const auto& [month, cells] : rows) {
    for (const auto& [ticker, cell] : cells) {
      const std::size_t c = static_cast<std::size_t>(
          std::lower_bound(table.signals.tickers.begin(), table.signals.tickers.end(),
                           ticker) -
          table.signals.tickers.begin());
      table.signals.at(r, c) = static_cast<std::int8_t>(cell.decision);
      if (cell.score) {
        table.scores.s.at(r, c) = *cell.score;
        table.has_scores = true;
      }
    }
    ++r;
  }
  table.signals.validate();

  for (std::int8_t v : table.signals.m) {
    if (v == 1) ++table.n_buy;
    else if (v == -1) ++table.n_sell;
    else ++table.n_hold;
  }
  if (table.n_buy + table.n_sell == 0)
    log_warn(log, path.string() + ": no active signals, every cell is hold");
  return table;
}

void write_signals(const SignalTable& table, const fs::path& path) {
  std::ostringstream os;
  os << "as_of,ticker,decision,score\n";
  for (std::size_t i = 0; i < table.signals.months.size(); ++i)
    for (std::size_t j = 0; j < table.signals.tickers.size(); ++j) {
      os << table.signals.months[i].to_string() << ','
         << table.signals.tickers[j] << ','
         << static_cast<int>(table.signals.at(i, j)) << ',';
      const double s = table.scores.s.at(i, j);
      if (!is_missing(s)) os << static_cast<int>(s);
      os << '\n';
    }
  write_file(path, os.str());
}

// ---------------------------------------------------------------------------
// Market caps
// ---------------------------------------------------------------------------

backtest::CapWeights load_caps(const fs::path& path) {
  std::vector<std::size_t> line_nos;
  const std::vector<std::string> lines = non_empty_lines(read_file(path), &line_nos);
  if (lines.empty()) throw ParseError(path.string() + ": empty file, header expected");
  check_header(lines[0], "as_of,ticker,market_cap", path);

  std::map<YearMonth, std::map<std::string, double>> rows;
  std::set<std::string> tickers;
  for (std::size_t i = 1; i < lines.size(); ++i) {
    const std::size_t ln = line_nos[i];
    const std::vector<std::string> f = util::split(lines[i], ',');
    if (f.size() != 3)
      throw ParseError("line " + std::to_string(ln) + ": expected 3 fields, got " +
                       std::to_string(f.size()));
    YearMonth month;
    try {
      month = parse_year_month(std::string(util::trim(f[0])));
    } catch (const ParseError& e) {
      throw ParseError("line " + std::to_string(ln) + ": " + e.what());
    }
    const std::string ticker(util::trim(f[1]));
    if (ticker.empty())
      throw ParseError("line " + std::to_string(ln) + ": empty ticker");
    const double cap = parse_double_field(f[2], "market cap", ln);
    if (!(cap > 0.0))
      throw IntegrityError("line " + std::to_string(ln) +
                           ": nonpositive market cap for " + ticker);
    auto [it, inserted] = rows[month].emplace(ticker, cap);
    if (!inserted)
      throw IntegrityError("line " + std::to_string(ln) + ": duplicate cap for (" +
                           month.to_string() + ", " + ticker + ")");
    tickers.insert(ticker);
  }

  backtest::CapWeights caps;
  caps.tickers.assign(tickers.begin(), tickers.end());
  for (const auto& [month, cells] : rows) caps.months.push_back(month);
  caps.caps = Grid(caps.months.size(), caps.tickers.size());
  std::size_t r = 0;
  for (const auto& [month, cells] : rows) {
    for (const auto& [ticker, cap] : cells) {
      const std::size_t c = static_cast<std::size_t>(
          std::lower_bound(caps.tickers.begin(), caps.tickers.end(), ticker) -
          caps.tickers.begin());
      caps.caps.at(r, c) = cap;
    }
    ++r;
  }
  return caps;
}

void write_caps(const backtest::CapWeights& caps, const fs::path& path) {
  std::ostringstream os;
  os << "as_of,ticker,market_cap\n";
  for (std::size_t i = 0; i < caps.months.size(); ++i)
    for (std::size_t j = 0; j < caps.tickers.size(); ++j) {
      const double c = caps.caps.at(i, j);
      if (is_missing(c)) continue;
      os << caps.months[i].to_string() << ',' << caps.tickers[j] << ','
         << fmt_full(c) << '\n';
    }
  write_file(path, os.str());
}

// ---------------------------------------------------------------------------
// Descriptions, news, macro, fundamentals, universe
// ---------------------------------------------------------------------------

std::vector<similarity::StockDescription> load_descriptions(const fs::path& path) {
  const ordered_json doc = parse_json(read_file(path), path);
  if (!doc.is_array()) throw ParseError(path.string() + ": expected a JSON array");
  std::vector<similarity::StockDescription> out;
  std::set<std::string> seen;
  for (const auto& item : doc) {
    if (!item.is_object() || !item.contains("ticker") || !item.contains("description"))
      throw ParseError(path.string() +
                       ": each entry needs 'ticker' and 'description'");
    similarity::StockDescription d;
    d.ticker = item.at("ticker").get<std::string>();
    d.text = item.at("description").get<std::string>();
    if (!seen.insert(d.ticker).second)
      throw IntegrityError(path.string() + ": duplicate description for " + d.ticker);
    out.push_back(std::move(d));
  }
  return out;
}

void write_descriptions(const std::vector<similarity::StockDescription>& descriptions,
                        const fs::path& path) {
  ordered_json doc = ordered_json::array();
  for (const auto& d : descriptions)
    doc.push_back(ordered_json{{"ticker", d.ticker}, {"description", d.text}});
  write_file(path, doc.dump(2) + "\n");
}

std::vector<summarize::NewsArticle> load_news(const fs::path& path) {
  std::vector<std::size_t> line_nos;
  const std::vector<std::string> lines = non_empty_lines(read_file(path), &line_nos);
  std::vector<summarize::NewsArticle> out;
  for (std::size_t i = 0; i < lines.size(); ++i) {
    ordered_json doc;
    try {
      doc = ordered_json::parse(lines[i]);
    } catch (const nlohmann::json::parse_error& e) {
      throw ParseError(path.string() + " line " + std::to_string(line_nos[i]) + ": " +
                       e.what());
    }
    for (const char* field : {"ticker", "date", "title", "body", "kind"})
      if (!doc.contains(field))
        throw ParseError(path.string() + " line " + std::to_string(line_nos[i]) +
                         ": missing field '" + field + "'");
    summarize::NewsArticle a;
    a.ticker = doc.at("ticker").get<std::string>();
    a.date = parse_date(doc.at("date").get<std::string>());
    a.title = doc.at("title").get<std::string>();
    a.body = doc.at("body").get<std::string>();
    const std::string kind = doc.at("kind").get<std::string>();
    if (kind == "factual")
      a.kind = summarize::NewsArticle::Kind::kFactual;
    else if (kind == "opinion")
      a.kind = summarize::NewsArticle::Kind::kOpinion;
    else
      throw ParseError(path.string() + " line " + std::to_string(line_nos[i]) +
                       ": kind '" + kind + "' is not factual or opinion");
    out.push_back(std::move(a));
  }
  return out;
}

void write_news(const std::vector<summarize::NewsArticle>& articles,
                const fs::path& path) {
  std::ostringstream os;
  for (const auto& a : articles) {
    ordered_json doc{{"ticker", a.ticker},
                     {"date", a.date.to_string()},
                     {"title", a.title},
                     {"body", a.body},
                     {"kind", a.kind == summarize::NewsArticle::Kind::kFactual
                                  ? "factual"
                                  : "opinion"}};
    os << doc.dump() << '\n';
  }
  write_file(path, os.str());
}

std::vector<std::string> load_macro_dir(const fs::path& dir) {
  if (!fs::exists(dir)) throw NotFoundError("no macro directory at " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_regular_file() && entry.path().extension() == ".txt")
      files.push_back(entry.path());
  std::sort(files.begin(), files.end());
  std::vector<std::string> out;
  out.reserve(files.size());
  for (const auto& f : files) out.push_back(read_file(f));
  return out;
}

std::map<std::string, std::vector<summarize::QuarterlyReport>> load_fundamentals(
    const fs::path& path) {
  const ordered_json doc = parse_json(read_file(path), path);
  if (!doc.is_object()) throw ParseError(path.string() + ": expected a JSON object");
  std::map<std::string, std::vector<summarize::QuarterlyReport>> out;
  for (const auto& [ticker, reports] : doc.items()) {
    if (!reports.is_array())
      throw ParseError(path.string() + ": " + ticker + " must map to an array");
    std::vector<summarize::QuarterlyReport> parsed;
    for (const auto& rep : reports) {
      summarize::QuarterlyReport q;
      q.quarter = rep.at("quarter").get<std::string>();
      for (const auto& item : rep.at("items")) {
        summarize::LineItem li;
        const std::string st = item.at("statement").get<std::string>();
        if (st == "balance_sheet")
          li.statement = summarize::Statement::kBalanceSheet;
        else if (st == "income_statement")
          li.statement = summarize::Statement::kIncomeStatement;
        else if (st == "cash_flow")
          li.statement = summarize::Statement::kCashFlow;
        else
          throw ParseError(path.string() + ": unknown statement '" + st + "' for " +
                           ticker);
        li.name = item.at("name").get<std::string>();
        li.value = item.at("value").get<double>();
        q.items.push_back(std::move(li));
      }
      parsed.push_back(std::move(q));
    }
    out.emplace(ticker, std::move(parsed));
  }
  return out;
}

std::vector<std::string> load_universe(const fs::path& path) {
  const std::vector<std::string> lines = non_empty_lines(read_file(path), nullptr);
  std::vector<std::string> out;
  std::set<std::string> seen;
  for (const std::string& line : lines) {
    const std::string t(util::trim(line));
    if (t.empty() || t[0] == '#') continue;
    if (!seen.insert(t).second)
      throw IntegrityError(path.string() + ": duplicate ticker " + t);
    out.push_back(t);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Summary store
// ---------------------------------------------------------------------------

namespace {

void check_component(const std::string& s, const char* what, bool allow_empty) {
  if (s.empty()) {
    if (allow_empty) return;
    throw InvalidInputError(std::string("summary key ") + what + " is empty");
  }
  bool all_dots = true;
  for (char c : s) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
                    (c >= '0' && c <= '9') || c == '-' || c == '_' || c == '.';
    if (!ok)
      throw InvalidInputError(std::string("summary key ") + what + " '" + s +
                              "' has unsafe characters");
    all_dots = all_dots && c == '.';
  }
  // "." and ".." are legal charset-wise but walk the directory tree
  if (all_dots)
    throw InvalidInputError(std::string("summary key ") + what + " '" + s +
                            "' has unsafe characters");
}

}  // namespace

bool SummaryStore::Key::operator<(const Key& o) const {
  if (kind != o.kind) return kind < o.kind;
  if (ticker != o.ticker) return ticker < o.ticker;
  return as_of < o.as_of;
}

SummaryStore::SummaryStore(fs::path root) : root_(std::move(root)) {
  fs::create_directories(root_);
}

fs::path SummaryStore::path_for(const Key& key) const {
  check_component(key.kind, "kind", false);
  check_component(key.ticker, "ticker", true);
  check_component(key.as_of, "as_of", false);
  fs::path p = root_ / key.kind;
  if (!key.ticker.empty()) p /= key.ticker;
  return p / (key.as_of + ".json");
}

void SummaryStore::put(const Key& key, const ordered_json& doc) {
  write_file(path_for(key), doc.dump(2) + "\n");
}

ordered_json SummaryStore::get(const Key& key) const {
  const fs::path p = path_for(key);
  if (!fs::exists(p))
    throw NotFoundError("no stored document for " + key.kind + "/" +
                        (key.ticker.empty() ? "" : key.ticker + "/") + key.as_of);
  return parse_json(read_file(p), p);
}

bool SummaryStore::contains(const Key& key) const { return fs::exists(path_for(key)); }

ordered_json SummaryStore::get_predecessor(const Key& key) const {
  const ordered_json doc = get(key);
  if (!doc.contains("lineage") || !doc.at("lineage").contains("predecessor") ||
      doc.at("lineage").at("predecessor").is_null())
    throw NotFoundError(key.kind + "/" + key.ticker + "/" + key.as_of +
                        " is a chain root; it has no predecessor");
  Key pred = key;
  pred.as_of = doc.at("lineage").at("predecessor").get<std::string>();
  return get(pred);
}

std::vector<SummaryStore::Key> SummaryStore::enumerate(const std::string& kind) const {
  std::vector<Key> keys;
  if (!fs::exists(root_)) return keys;
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (!entry.is_regular_file() || entry.path().extension() != ".json") continue;
    const fs::path rel = fs::relative(entry.path(), root_);
    std::vector<std::string> parts;
    for (const auto& part : rel) parts.push_back(part.string());
    if (parts.size() != 2 && parts.size() != 3) continue;
    Key key;
    key.kind = parts[0];
    if (parts.size() == 3) key.ticker = parts[1];
    key.as_of = rel.stem().string();
    if (!kind.empty() && key.kind != kind) continue;
    keys.push_back(std::move(key));
  }
  std::sort(keys.begin(), keys.end());
  return keys;
}

std::size_t SummaryStore::count(const std::string& kind) const {
  return enumerate(kind).size();
}

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

namespace {

void reject_credentials(const ordered_json& node, const std::string& where) {
  if (node.is_object()) {
    for (const auto& [key, value] : node.items()) {
      const std::string k = util::lower(key);
      const bool credential = k == "api_key" || k == "apikey" || k == "key" ||
                              k == "token" || k == "secret" || k == "password" ||
                              k == "credential" || k == "credentials";
      if (credential)
        throw ConfigError("config field '" + where + key +
                          "' looks like a stored credential; use api_key_env to "
                          "name an environment variable instead");
      reject_credentials(value, where + key + ".");
    }
  } else if (node.is_array()) {
    for (const auto& item : node) reject_credentials(item, where);
  }
}

ProviderConfig parse_provider(const ordered_json& node, const std::string& where) {
  ProviderConfig p;
  static const std::set<std::string> known = {"kind", "endpoint", "model",
                                              "api_key_env", "dimension"};
  for (const auto& [key, value] : node.items())
    if (!known.count(key))
      throw ConfigError("unknown config key '" + where + "." + key + "'");
  if (node.contains("kind")) p.kind = node.at("kind").get<std::string>();
  if (p.kind != "stub" && p.kind != "http")
    throw ConfigError(where + ".kind must be 'stub' or 'http', got '" + p.kind + "'");
  if (node.contains("endpoint")) p.endpoint = node.at("endpoint").get<std::string>();
  if (node.contains("model")) p.model = node.at("model").get<std::string>();
  if (node.contains("api_key_env"))
    p.api_key_env = node.at("api_key_env").get<std::string>();
  if (node.contains("dimension")) p.dimension = node.at("dimension").get<int>();
  if (p.dimension < 1) throw ConfigError(where + ".dimension must be positive");
  if (p.kind == "http" && p.endpoint.empty())
    throw ConfigError(where + " uses kind 'http' but has no endpoint");
  return p;
}

}  // namespace

fs::path RunConfig::resolve(const std::string& name) const {
  fs::path p(name);
  if (p.is_absolute()) return p.lexically_normal();
  return (base_dir / p).lexically_normal();
}

fs::path RunConfig::data_path(const std::string& name) const {
  fs::path p(name);
  if (p.is_absolute()) return p.lexically_normal();
  return (resolve(data_dir) / p).lexically_normal();
}

ordered_json RunConfig::to_json() const {
  auto provider = [](const ProviderConfig& p) {
    return ordered_json{{"kind", p.kind},
                        {"endpoint", p.endpoint},
                        {"model", p.model},
                        {"api_key_env", p.api_key_env},
                        {"dimension", p.dimension}};
  };
  return ordered_json{{"universe_file", universe_file},
                      {"data_dir", data_dir},
                      {"prices_file", prices_file},
                      {"signals_file", signals_file},
                      {"caps_file", caps_file},
                      {"descriptions_file", descriptions_file},
                      {"news_file", news_file},
                      {"macro_dir", macro_dir},
                      {"fundamentals_file", fundamentals_file},
                      {"index_ticker", index_ticker},
                      {"llm", provider(llm)},
                      {"embedding", provider(embedding)},
                      {"n_samples", n_samples},
                      {"seed", seed},
                      {"cost_bps", cost_bps},
                      {"risk_free_rate", risk_free_rate},
                      {"periods_per_year", periods_per_year},
                      {"n_quarters", n_quarters},
                      {"peer_count", peer_count},
                      {"strategies", strategies},
                      {"record_timestamps", record_timestamps}};
}

std::string RunConfig::hash() const { return to_hex(fnv1a64(to_json().dump())); }

RunConfig load_config(const fs::path& path) {
  const ordered_json doc = parse_json(read_file(path), path);
  if (!doc.is_object()) throw ConfigError(path.string() + ": config must be an object");
  reject_credentials(doc, "");

  static const std::set<std::string> known = {
      "universe_file", "data_dir",       "prices_file",     "signals_file",
      "caps_file",     "descriptions_file", "news_file",    "macro_dir",
      "fundamentals_file", "index_ticker", "llm",           "embedding",
      "n_samples",     "seed",           "cost_bps",        "risk_free_rate",
      "periods_per_year", "n_quarters",  "peer_count",      "strategies",
      "record_timestamps"};
  for (const auto& [key, value] : doc.items())
    if (!known.count(key))
      throw ConfigError(path.string() + ": unknown config key '" + key + "'");

  RunConfig cfg;
  cfg.base_dir = fs::absolute(path).parent_path();
  auto str = [&](const char* key, std::string& out) {
    if (doc.contains(key)) out = doc.at(key).get<std::string>();
  };
  str("universe_file", cfg.universe_file);
  str("data_dir", cfg.data_dir);
  str("prices_file", cfg.prices_file);
  str("signals_file", cfg.signals_file);
  str("caps_file", cfg.caps_file);
  str("descriptions_file", cfg.descriptions_file);
  str("news_file", cfg.news_file);
  str("macro_dir", cfg.macro_dir);
  str("fundamentals_file", cfg.fundamentals_file);
  str("index_ticker", cfg.index_ticker);
  if (doc.contains("llm")) cfg.llm = parse_provider(doc.at("llm"), "llm");
  if (doc.contains("embedding"))
    cfg.embedding = parse_provider(doc.at("embedding"), "embedding");
  if (doc.contains("n_samples")) cfg.n_samples = doc.at("n_samples").get<int>();
  if (doc.contains("seed")) cfg.seed = doc.at("seed").get<std::uint64_t>();
  if (doc.contains("cost_bps")) cfg.cost_bps = doc.at("cost_bps").get<double>();
  if (doc.contains("risk_free_rate"))
    cfg.risk_free_rate = doc.at("risk_free_rate").get<double>();
  if (doc.contains("periods_per_year"))
    cfg.periods_per_year = doc.at("periods_per_year").get<int>();
  if (doc.contains("n_quarters")) cfg.n_quarters = doc.at("n_quarters").get<int>();
  if (doc.contains("peer_count")) cfg.peer_count = doc.at("peer_count").get<int>();
  if (doc.contains("strategies"))
    cfg.strategies = doc.at("strategies").get<std::vector<std::string>>();
  if (doc.contains("record_timestamps"))
    cfg.record_timestamps = doc.at("record_timestamps").get<bool>();

  if (cfg.n_samples < 1) throw ConfigError("n_samples must be >= 1");
  if (cfg.cost_bps < 0) throw ConfigError("cost_bps must be nonnegative");
  if (cfg.periods_per_year < 1) throw ConfigError("periods_per_year must be >= 1");
  if (cfg.n_quarters < 1) throw ConfigError("n_quarters must be >= 1");
  if (cfg.peer_count < 1) throw ConfigError("peer_count must be >= 1");
  for (const std::string& s : cfg.strategies) {
    const auto& names = backtest::strategy_names();
    if (std::find(names.begin(), names.end(), s) == names.end())
      throw ConfigError("unknown strategy '" + s + "' in config");
  }
  return cfg;
}

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

void RunManifest::add_input(const std::string& name, const std::string& content) {
  inputs.emplace_back(name, to_hex(fnv1a64(content)));
}

void RunManifest::add_input_file(const std::string& name, const fs::path& path) {
  add_input(name, read_file(path));
}

void RunManifest::finalize() {
  std::uint64_t h = fnv1a64(command);
  h = fnv1a64(config_hash, h);
  std::vector<std::pair<std::string, std::string>> sorted_inputs = inputs;
  std::sort(sorted_inputs.begin(), sorted_inputs.end());
  for (const auto& [name, hash] : sorted_inputs) {
    h = fnv1a64(name, h);
    h = fnv1a64(hash, h);
  }
  for (const auto& [name, version] : components) {
    h = fnv1a64(name, h);
    h = fnv1a64(version, h);
  }
  run_id = to_hex(h);
}

ordered_json RunManifest::to_json() const {
  ordered_json j;
  j["run_id"] = run_id;
  j["tool"] = ordered_json{{"name", kToolName}, {"version", kToolVersion}};
  j["command"] = command;
  j["config_hash"] = config_hash;
  ordered_json in = ordered_json::array();
  for (const auto& [name, hash] : inputs)
    in.push_back(ordered_json{{"name", name}, {"hash", hash}});
  j["inputs"] = in;
  ordered_json comp = ordered_json::array();
  for (const auto& [name, version] : components)
    comp.push_back(ordered_json{{"name", name}, {"version", version}});
  j["components"] = comp;
  j["warnings"] = warnings;
  j["errors"] = errors;
  if (timestamp) j["timestamp"] = *timestamp;
  return j;
}

RunManifest make_manifest(const std::string& command, const RunConfig& config) {
  RunManifest m;
  m.command = command;
  m.config_hash = config.hash();
  m.components.emplace_back(kToolName, kToolVersion);
  m.components.emplace_back("rng", kRngName);
  return m;
}

}  // namespace mlab::io
