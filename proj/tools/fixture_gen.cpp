// Generates the deterministic fixture set under fixtures/. Everything is
// seeded, so regenerating produces byte-identical files.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <set>
#include <string>
#include <vector>

#include "json.hpp"
#include "mlab/calendar.hpp"
#include "mlab/rng.hpp"
#include "mlab/util.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;
using namespace mlab;

namespace {

Date next_day(Date d) {
  ++d.day;
  if (d.day > days_in_month(d.year, d.month)) {
    d.day = 1;
    ++d.month;
    if (d.month > 12) {
      d.month = 1;
      ++d.year;
    }
  }
  return d;
}

std::vector<Date> weekdays(const Date& from, const Date& to) {
  std::vector<Date> out;
  for (Date d = from; d <= to; d = next_day(d)) {
    int dow = static_cast<int>((d.serial() + 4) % 7);  // 0 = Sunday
    if (dow >= 1 && dow <= 5) out.push_back(d);
  }
  return out;
}

double gauss(Rng& rng) {
  double z = 0.0;
  for (int i = 0; i < 12; ++i) z += rng.uniform();
  return z - 6.0;
}

void write(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) {
    std::fprintf(stderr, "cannot write %s\n", path.c_str());
    std::exit(1);
  }
  std::fwrite(content.data(), 1, content.size(), f);
  std::fclose(f);
}

std::vector<std::string> make_tickers(Rng& rng) {
  std::set<std::string> seen;
  while (seen.size() < 100) {
    std::string t;
    for (int i = 0; i < 3; ++i)
      t += static_cast<char>('A' + rng.uniform_int(0, 25));
    if (t == "OEF") continue;
    seen.insert(t);
  }
  return {seen.begin(), seen.end()};
}

struct Sector {
  const char* name;
  const char* phrase;
};

const Sector kSectors[] = {
    {"technology", "software platforms and cloud infrastructure"},
    {"healthcare", "medical devices and specialty pharmaceuticals"},
    {"energy", "oil and gas exploration and refining"},
    {"financial services", "consumer banking and asset management"},
    {"industrials", "aerospace components and factory automation"},
    {"consumer staples", "branded foods beverages and household goods"},
    {"utilities", "regulated electric and water distribution"},
    {"materials", "specialty chemicals and industrial metals"},
    {"telecommunications", "wireless networks and broadband services"},
    {"retail", "omnichannel storefronts and e-commerce logistics"},
};

const char* kAngles[] = {
    "international expansion", "margin improvement",   "platform consolidation",
    "recurring revenue",       "capacity upgrades",    "cost discipline",
    "research partnerships",   "regional acquisitions", "capital returns",
    "supply chain resilience",
};

}  // namespace

int main(int argc, char** argv) {
  const fs::path out = argc > 1 ? argv[1] : "fixtures";
  fs::create_directories(out);

  Rng rng(20240615u);
  const auto tickers = make_tickers(rng);
  const auto calendar = weekdays({2022, 1, 3}, {2024, 3, 29});

  // universe files
  {
    std::string u = "# 100-stock demo universe\n";
    for (const auto& t : tickers) u += t + "\n";
    write(out / "universe.txt", u);
    std::string s = "# pipeline demo subset\n";
    for (int i = 0; i < 3; ++i) s += tickers[i] + "\n";
    write(out / "universe_small.txt", s);
  }

  // descriptions.json
  {
    ordered_json arr = ordered_json::array();
    for (std::size_t i = 0; i < tickers.size(); ++i) {
      const Sector& sec = kSectors[i % 10];
      const char* angle = kAngles[(i / 10) % 10];
      std::string text = tickers[i] + " operates in the " + sec.name +
                         " sector, providing " + sec.phrase + ". Its " + sec.name +
                         " portfolio spans " + sec.phrase +
                         " for institutional and retail clients, with a strategic "
                         "focus on " + angle + ".";
      arr.push_back(ordered_json{{"ticker", tickers[i]}, {"description", text}});
    }
    write(out / "descriptions.json", arr.dump(2) + "\n");
  }

  // prices.csv: full coverage, geometric walks
  {
    std::vector<std::string> cols = tickers;
    cols.push_back("OEF");
    std::vector<double> px(cols.size()), mu(cols.size()), sigma(cols.size());
    Rng prng(881001u);
    for (std::size_t c = 0; c < cols.size(); ++c) {
      px[c] = 20.0 + 180.0 * prng.uniform();
      mu[c] = -0.0004 + 0.0012 * prng.uniform();
      sigma[c] = 0.008 + 0.017 * prng.uniform();
    }
    mu.back() = 0.00022;
    sigma.back() = 0.009;
    std::string csv = "date,ticker,adj_close\n";
    csv.reserve(cols.size() * calendar.size() * 28);
    for (const auto& d : calendar) {
      for (std::size_t c = 0; c < cols.size(); ++c) {
        px[c] *= std::exp(mu[c] + sigma[c] * gauss(prng));
        csv += d.to_string() + "," + cols[c] + "," + util::fmt_double(px[c], 4) + "\n";
      }
    }
    write(out / "prices.csv", csv);
  }

  // signal months: 2022-12 .. 2024-02
  std::vector<YearMonth> months;
  for (YearMonth ym{2022, 12}; ym <= YearMonth{2024, 2}; ym = ym.next())
    months.push_back(ym);

  // signals.csv: exactly 338 buy / 1150 hold / 12 sell over 15 x 100 cells
  {
    const std::size_t cells = months.size() * tickers.size();
    std::vector<int> labels(cells, 0);
    for (std::size_t i = 0; i < 338; ++i) labels[i] = 1;
    for (std::size_t i = 338; i < 350; ++i) labels[i] = -1;
    for (std::uint64_t attempt = 0;; ++attempt) {
      Rng lrng(derive_seed(7700u, attempt));
      lrng.shuffle(labels);
      bool ok = true;
      for (std::size_t m = 0; m < months.size(); ++m) {
        int buys = 0;
        for (std::size_t t = 0; t < tickers.size(); ++t)
          if (labels[m * tickers.size() + t] == 1) ++buys;
        if (buys < 8) ok = false;
      }
      if (ok) break;
    }
    Rng srng(440022u);
    std::string csv = "as_of,ticker,decision,score\n";
    for (std::size_t m = 0; m < months.size(); ++m)
      for (std::size_t t = 0; t < tickers.size(); ++t) {
        const int v = labels[m * tickers.size() + t];
        csv += months[m].to_string() + "," + tickers[t] + "," + std::to_string(v) + ",";
        if (v == 1) csv += std::to_string(srng.uniform_int(0, 10));
        csv += "\n";
      }
    write(out / "signals.csv", csv);
  }

  // caps.csv
  {
    Rng crng(550033u);
    std::vector<double> cap(tickers.size());
    for (std::size_t t = 0; t < tickers.size(); ++t)
      cap[t] = (3.0 + 95.0 * crng.uniform()) * 1e9;
    std::string csv = "as_of,ticker,market_cap\n";
    for (const auto& ym : months)
      for (std::size_t t = 0; t < tickers.size(); ++t) {
        cap[t] *= 1.0 + 0.06 * (crng.uniform() - 0.5);
        csv += ym.to_string() + "," + tickers[t] + "," + util::fmt_double(cap[t], 0) + "\n";
      }
    write(out / "caps.csv", csv);
  }

  // news.jsonl for the three pipeline tickers, 2023-10 .. 2023-12
  {
    const char* titles[] = {
        "%s reports quarterly results ahead of consensus",
        "%s expands its buyback and lifts the dividend",
        "%s unveils multi-year product roadmap at investor day",
        "%s shares slip after an analyst downgrade",
        "%s signs a distribution agreement with a national chain",
        "%s names a new chief financial officer",
    };
    const char* bodies[] = {
        "%s said revenue rose ahead of plan on stronger demand. Management "
        "reiterated full-year guidance and flagged continued cost discipline.",
        "The board of %s authorized additional repurchases. Analysts called the "
        "move a sign of confidence in free cash flow.",
        "%s walked investors through its pipeline and capital plans. The company "
        "expects the initiatives to be accretive within two years.",
        "A sell-side desk cut its rating on %s citing valuation. The note kept "
        "estimates unchanged and called fundamentals intact.",
        "%s will supply product nationally starting next quarter. Terms were not "
        "disclosed, though the firm called the deal material.",
        "%s promoted an insider to the finance chief role. The transition takes "
        "effect at the start of the next fiscal quarter.",
    };
    std::string jsonl;
    int idx = 0;
    for (int ti = 0; ti < 3; ++ti) {
      const std::string& t = tickers[ti];
      for (int mi = 10; mi <= 12; ++mi) {
        for (int day : {5, 12, 19, 26}) {
          const Date d{2023, mi, day};
          const int n_articles = 1 + (idx % 2);
          for (int a = 0; a < n_articles; ++a, ++idx) {
            char title[160], body[400];
            std::snprintf(title, sizeof(title), titles[idx % 6], t.c_str());
            std::snprintf(body, sizeof(body), bodies[(idx + 2) % 6], t.c_str());
            ordered_json j{{"ticker", t},
                           {"date", d.to_string()},
                           {"title", title},
                           {"body", body},
                           {"kind", idx % 3 == 0 ? "opinion" : "factual"}};
            jsonl += j.dump() + "\n";
          }
        }
        // one untargeted wire story per month; the relevance filter drops it
        ordered_json noise{{"ticker", t},
                           {"date", Date{2023, mi, 9}.to_string()},
                           {"title", "Market wrap: stocks drift as yields climb"},
                           {"body",
                            "Broad indexes closed mixed in light volume. Traders "
                            "pointed to rate expectations rather than any single "
                            "company update."},
                           {"kind", "factual"}};
        jsonl += noise.dump() + "\n";
      }
    }
    write(out / "news.jsonl", jsonl);
  }

  // macro reports, four per month
  {
    struct Report {
      const char* file;
      const char* fmt;
    };
    const Report reports[] = {
        {"01-inflation.txt",
         "Consumer prices rose %.1f percent from a year earlier in %s, with core "
         "goods flat and shelter still the main driver. Energy subtracted from "
         "the headline figure for a second straight month. Market-based "
         "inflation expectations held near %.1f percent."},
        {"02-central-bank.txt",
         "The central bank held its policy rate at %.2f percent in %s and "
         "repeated that decisions stay data dependent. The statement noted "
         "tighter credit conditions for households and firms. Futures now "
         "price the first cut roughly %d months out."},
        {"03-labor.txt",
         "Employers added about %d thousand jobs in %s while the unemployment "
         "rate held at %.1f percent. Wage growth cooled slightly to %.1f "
         "percent year over year. Participation among prime-age workers "
         "remains near cycle highs."},
        {"04-markets.txt",
         "Equity indexes finished %s %s, led by large-cap growth, while "
         "ten-year yields moved %d basis points. Credit spreads stayed "
         "contained and issuance was orderly. Commodities were mixed, with "
         "crude %s on balance."},
    };
    const char* month_names[] = {"October", "November", "December"};
    for (int mi = 0; mi < 3; ++mi) {
      const YearMonth ym{2023, 10 + mi};
      const fs::path dir = out / "macro" / ym.to_string();
      char buf[640];
      std::snprintf(buf, sizeof(buf), reports[0].fmt, 3.7 - 0.3 * mi,
                    month_names[mi], 2.4 - 0.1 * mi);
      write(dir / reports[0].file, std::string(buf) + "\n");
      std::snprintf(buf, sizeof(buf), reports[1].fmt, 5.33, month_names[mi], 7 - mi);
      write(dir / reports[1].file, std::string(buf) + "\n");
      std::snprintf(buf, sizeof(buf), reports[2].fmt, 190 - 20 * mi, month_names[mi],
                    3.9, 4.4 - 0.1 * mi);
      write(dir / reports[2].file, std::string(buf) + "\n");
      std::snprintf(buf, sizeof(buf), reports[3].fmt, month_names[mi],
                    mi == 1 ? "sharply higher" : "modestly higher", 12 - 9 * mi,
                    mi == 2 ? "softer" : "firmer");
      write(dir / reports[3].file, std::string(buf) + "\n");
    }
  }

  // fundamentals.json for the pipeline tickers, 2022-Q4 .. 2023-Q4
  {
    struct Item {
      const char* statement;
      const char* name;
      double base;
    };
    const Item items[] = {
        {"balance_sheet", "total assets", 23.0e9},
        {"balance_sheet", "total liabilities", 13.8e9},
        {"balance_sheet", "shareholders equity", 9.2e9},
        {"balance_sheet", "cash and equivalents", 3.2e9},
        {"balance_sheet", "long-term debt", 6.1e9},
        {"income_statement", "revenue", 5.8e9},
        {"income_statement", "cost of revenue", 3.1e9},
        {"income_statement", "operating income", 1.2e9},
        {"income_statement", "net income", 0.95e9},
        {"income_statement", "diluted eps", 2.17},
        {"cash_flow", "operating cash flow", 1.5e9},
        {"cash_flow", "capital expenditure", -0.6e9},
        {"cash_flow", "free cash flow", 0.9e9},
        {"cash_flow", "dividends paid", -0.35e9},
    };
    const char* quarters[] = {"2022-Q4", "2023-Q1", "2023-Q2", "2023-Q3", "2023-Q4"};
    Rng frng(660044u);
    ordered_json root = ordered_json::object();
    for (int ti = 0; ti < 3; ++ti) {
      const double scale = 1.0 + 0.45 * ti;
      ordered_json history = ordered_json::array();
      for (int q = 0; q < 5; ++q) {
        ordered_json rows = ordered_json::array();
        for (const Item& item : items) {
          // drop one item from one quarter to exercise the n/a path
          if (ti == 1 && q == 1 && std::string(item.name) == "dividends paid")
            continue;
          const double growth = std::pow(1.03, q) * (1.0 + 0.04 * (frng.uniform() - 0.5));
          rows.push_back(ordered_json{{"statement", item.statement},
                                      {"name", item.name},
                                      {"value", item.base * scale * growth}});
        }
        history.push_back(ordered_json{{"quarter", quarters[q]}, {"items", rows}});
      }
      root[tickers[ti]] = history;
    }
    write(out / "fundamentals.json", root.dump(2) + "\n");
  }

  // config.json
  {
    ordered_json cfg{{"universe_file", "universe.txt"},
                     {"data_dir", "."},
                     {"prices_file", "prices.csv"},
                     {"signals_file", "signals.csv"},
                     {"caps_file", "caps.csv"},
                     {"descriptions_file", "descriptions.json"},
                     {"news_file", "news.jsonl"},
                     {"macro_dir", "macro"},
                     {"fundamentals_file", "fundamentals.json"},
                     {"index_ticker", "OEF"},
                     {"llm", ordered_json{{"kind", "stub"}}},
                     {"embedding", ordered_json{{"kind", "stub"}, {"dimension", 256}}},
                     {"n_samples", 10000},
                     {"seed", 42},
                     {"cost_bps", 5.0},
                     {"risk_free_rate", 0.0},
                     {"periods_per_year", 252},
                     {"n_quarters", 4},
                     {"peer_count", 5},
                     {"strategies", ordered_json::array()},
                     {"record_timestamps", false}};
    write(out / "config.json", cfg.dump(2) + "\n");
  }

  std::printf("fixtures written to %s\n", out.string().c_str());
  return 0;
}
