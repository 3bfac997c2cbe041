#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlab/backtest.hpp"
#include "mlab/evaluation.hpp"
#include "mlab/event_log.hpp"
#include "mlab/panel.hpp"
#include "mlab/similarity.hpp"
#include "mlab/summarize.hpp"

namespace mlab::io {

inline constexpr const char* kToolName = "marketlab";
inline constexpr const char* kToolVersion = "1.0.0";

std::string read_file(const std::filesystem::path& path);        // NotFoundError
void write_file(const std::filesystem::path& path, const std::string& content);

// ---------------------------------------------------------------------------
// Tabular loaders / writers
// ---------------------------------------------------------------------------

// prices CSV: header "date,ticker,adj_close", ISO dates, positive prices.
PricePanel load_prices(const std::filesystem::path& path);
void write_prices(const PricePanel& panel, const std::filesystem::path& path);

struct SignalTable {
  eval::SignalMatrix signals;
  backtest::ScoreMatrix scores;  // aligned with signals; NaN where unscored
  bool has_scores = false;
  std::size_t n_buy = 0, n_hold = 0, n_sell = 0;
};

// signals CSV: header "as_of,ticker,decision,score"; as_of is YYYY-MM,
// decision in {-1,0,1}, score an optional integer 0..10. Unlisted
// (month,ticker) combinations are hold.
SignalTable load_signals(const std::filesystem::path& path, EventLog* log = nullptr);
void write_signals(const SignalTable& table, const std::filesystem::path& path);

// caps CSV: header "as_of,ticker,market_cap", positive values.
backtest::CapWeights load_caps(const std::filesystem::path& path);
void write_caps(const backtest::CapWeights& caps, const std::filesystem::path& path);

// descriptions JSON: array of {"ticker", "description"}.
std::vector<similarity::StockDescription> load_descriptions(
    const std::filesystem::path& path);
void write_descriptions(const std::vector<similarity::StockDescription>& descriptions,
                        const std::filesystem::path& path);

// news JSONL: one {"ticker","date","title","body","kind"} object per line,
// kind in {"factual","opinion"}.
std::vector<summarize::NewsArticle> load_news(const std::filesystem::path& path);
void write_news(const std::vector<summarize::NewsArticle>& articles,
                const std::filesystem::path& path);

// macro reports: every *.txt file in the directory, ordered by filename.
std::vector<std::string> load_macro_dir(const std::filesystem::path& dir);

// fundamentals JSON: {"TICKER": [{"quarter","items":[{statement,name,value}]}]}.
std::map<std::string, std::vector<summarize::QuarterlyReport>> load_fundamentals(
    const std::filesystem::path& path);

// universe: one ticker per line, '#' comments allowed.
std::vector<std::string> load_universe(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Summary store
// ---------------------------------------------------------------------------

// Content-addressed file store for summary documents:
//   <root>/<kind>/<ticker>/<as_of>.json   (or <root>/<kind>/<as_of>.json for
// documents without a ticker, e.g. macro). Round-trips are byte-identical.
class SummaryStore {
 public:
  struct Key {
    std::string kind;
    std::string ticker;  // may be empty
    std::string as_of;

    bool operator<(const Key& o) const;
  };

  explicit SummaryStore(std::filesystem::path root);

  std::filesystem::path path_for(const Key& key) const;
  void put(const Key& key, const nlohmann::ordered_json& doc);
  nlohmann::ordered_json get(const Key& key) const;  // NotFoundError when absent
  bool contains(const Key& key) const;

  // Follows the lineage.predecessor link of a stored document; the chain
  // root has none and raises NotFoundError.
  nlohmann::ordered_json get_predecessor(const Key& key) const;

  std::vector<Key> enumerate(const std::string& kind = "") const;  // sorted
  std::size_t count(const std::string& kind = "") const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
};

// ---------------------------------------------------------------------------
// Run configuration
// ---------------------------------------------------------------------------

struct ProviderConfig {
  std::string kind = "stub";  // "stub" or "http"
  std::string endpoint;
  std::string model;
  std::string api_key_env;  // name of the environment variable, never the key
  int dimension = 256;      // embedding providers only
};

struct RunConfig {
  std::filesystem::path base_dir;  // directory of the config file
  std::string universe_file = "universe.txt";
  std::string data_dir = ".";
  std::string prices_file = "prices.csv";
  std::string signals_file = "signals.csv";
  std::string caps_file = "caps.csv";
  std::string descriptions_file = "descriptions.json";
  std::string news_file = "news.jsonl";
  std::string macro_dir = "macro";
  std::string fundamentals_file = "fundamentals.json";
  std::string index_ticker = "OEF";

  ProviderConfig llm;
  ProviderConfig embedding;

  int n_samples = 10000;
  std::uint64_t seed = 42;
  double cost_bps = 5.0;
  double risk_free_rate = 0.0;
  int periods_per_year = 252;
  int n_quarters = 4;
  int peer_count = 5;
  std::vector<std::string> strategies;  // empty means all twelve
  bool record_timestamps = false;       // opt-in; keeps runs byte-comparable

  std::filesystem::path resolve(const std::string& name) const;
  std::filesystem::path data_path(const std::string& name) const;
  nlohmann::ordered_json to_json() const;
  std::string hash() const;  // hex digest of the canonical form
};

// Parses and validates a config file. Any credential-bearing field (api_key,
// token, secret, ...) is rejected; providers reference credentials only
// through environment-variable names.
RunConfig load_config(const std::filesystem::path& path);

// ---------------------------------------------------------------------------
// Run manifest
// ---------------------------------------------------------------------------

struct RunManifest {
  std::string run_id;  // hash of command + config + input hashes
  std::string command;
  std::string config_hash;
  std::vector<std::pair<std::string, std::string>> inputs;      // name -> hex hash
  std::vector<std::pair<std::string, std::string>> components;  // name -> version
  std::vector<std::string> errors;
  std::vector<std::string> warnings;
  std::optional<std::string> timestamp;  // only when record_timestamps

  void add_input(const std::string& name, const std::string& content);
  void add_input_file(const std::string& name, const std::filesystem::path& path);
  void finalize();  // computes run_id
  nlohmann::ordered_json to_json() const;
};

RunManifest make_manifest(const std::string& command, const RunConfig& config);

}  // namespace mlab::io
