#include "netfolio/cli.hpp"

#include "netfolio/graphrep.hpp"
#include "netfolio/market_data.hpp"
#include "netfolio/relational.hpp"
#include "netfolio/synthetic.hpp"

#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/spdlog.h>

#include <Eigen/Core>

#include <cstdio>
#include <iostream>
#include <sstream>

namespace netfolio::cli {

namespace {

std::string_view to_string(Universe u) {
  switch (u) {
    case Universe::stocks: return "stocks";
    case Universe::crypto: return "crypto";
    case Universe::custom: return "custom";
  }
  return "?";
}

Universe parse_universe(std::string_view text) {
  for (auto u : {Universe::stocks, Universe::crypto, Universe::custom}) {
    if (text == to_string(u)) return u;
  }
  throw ConfigError("unknown universe '" + std::string(text) + "' (expected stocks, crypto or custom)");
}

std::string_view to_string(Rebalance r) { return r == Rebalance::daily ? "daily" : "buy-and-hold"; }

Rebalance parse_rebalance(std::string_view text) {
  if (text == "daily") return Rebalance::daily;
  if (text == "buy-and-hold") return Rebalance::buy_and_hold;
  throw ConfigError("unknown rebalance '" + std::string(text) + "' (expected daily or buy-and-hold)");
}

std::vector<RelationKind> parse_relations(std::string_view text) {
  std::vector<RelationKind> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    const auto pos = std::min(text.find(',', start), text.size());
    const auto field = text.substr(start, pos - start);
    if (!field.empty()) {
      const auto kind = parse_relation_kind(field);
      if (std::find(out.begin(), out.end(), kind) == out.end()) out.push_back(kind);
    }
    start = pos + 1;
  }
  if (out.empty()) throw ConfigError("no relation kinds given");
  return out;
}

std::string join_relations(const std::vector<RelationKind>& kinds) {
  std::string out;
  for (auto k : kinds) {
    if (!out.empty()) out += ',';
    out += to_string(k);
  }
  return out;
}

bool is_cooccurrence(RelationKind k) { return k == RelationKind::cCor || k == RelationKind::cMI; }

struct LoadedData {
  PricePanel prices;
  ReturnPanel returns;
  std::optional<Eigen::VectorXd> caps;
};

LoadedData load_data(const RunConfig& config) {
  LoadedData data;
  data.prices = load_price_panel(config.prices, config.coverage);
  data.returns = compute_returns(data.prices);
  if (config.caps) data.caps = load_caps(*config.caps, data.prices.assets);
  return data;
}

std::string cleaned_panel_csv(const PricePanel& panel) {
  std::ostringstream out;
  write_price_panel(panel, out);
  return out.str();
}

// In-sample panel of the configured window, or the whole panel.
std::pair<ReturnPanel, std::string> selected_panel(const RunConfig& config, const ReturnPanel& returns) {
  if (config.window < 0) return {returns, "full"};
  const auto windows = make_windows(returns, config.in_months, config.out_months, config.step_months);
  if (config.window >= static_cast<int>(windows.size())) {
    throw DataError("window " + std::to_string(config.window) + " does not exist; the panel yields " +
                    std::to_string(windows.size()) + " window(s)");
  }
  const auto& w = windows[static_cast<std::size_t>(config.window)];
  return {w.in_sample, format_date(w.label)};
}

constexpr int kCooccurrenceMonths = 12;

// The trailing twelve calendar months of `panel`.
ReturnPanel trailing_year(const ReturnPanel& panel) {
  const int span = span_months(panel);
  if (span < kCooccurrenceMonths) {
    throw DataError("co-occurrence needs " + std::to_string(kCooccurrenceMonths) +
                    " full calendar months; the selected data spans " + std::to_string(span));
  }
  const auto months = split_months(panel);
  std::size_t begin = 0;
  for (int m = 0; m < span - kCooccurrenceMonths; ++m) begin += months[static_cast<std::size_t>(m)].rows();
  return panel.slice(begin, panel.rows());
}

CommunityOptions community_options(const RunConfig& config, std::uint64_t salt, Clusterer c, RelationKind k) {
  CommunityOptions opts;
  opts.seed = derive_seed(config.seed, salt, static_cast<std::uint64_t>(c), static_cast<std::uint64_t>(k));
  opts.ap.damping = config.damping;
  opts.ap.preference = config.preference;
  return opts;
}

RelationalMatrix build_relation(const RunConfig& config, const ReturnPanel& panel, RelationKind kind) {
  if (!is_cooccurrence(kind)) return base_relation(panel, kind, config.bins);
  const auto base = kind == RelationKind::cCor ? RelationKind::Cor : RelationKind::MI;
  auto result = cooccurrence_matrix(trailing_year(panel), config.clusterer, base,
                                    community_options(config, 0xC0, config.clusterer, kind), config.bins,
                                    kCooccurrenceMonths);
  if (!result.skipped_months.empty()) {
    spdlog::warn("{}: {} month(s) skipped after failed clustering", to_string(kind), result.skipped_months.size());
  }
  return std::move(result.matrix);
}

std::string lowercase(std::string_view s) {
  std::string out(s);
  for (auto& ch : out) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
  return out;
}

void add_option_flags(CLI::App& app, RunConfig& c, std::string& universe, std::string& rebalance) {
  app.add_option("--prices", c.prices, "Price panel CSV (date column, one column per asset)");
  app.add_option("--caps", c.caps, "Market caps CSV (symbol,cap)");
  app.add_option("--universe", universe, "stocks (P=25), crypto (P=20) or custom");
  app.add_option("--portfolio-size", c.portfolio_size, "Assets per portfolio");
  app.add_option("--in-months", c.in_months, "In-sample window length");
  app.add_option("--out-months", c.out_months, "Out-of-sample window length");
  app.add_option("--step-months", c.step_months, "Window step");
  app.add_option("--bins", c.bins, "Quantile bins for mutual information");
  app.add_option("--damping", c.damping, "Affinity propagation damping");
  app.add_option("--preference", c.preference, "Affinity propagation preference (default: median similarity)");
  app.add_option("--seed", c.seed, "Master seed");
  app.add_option("--strategies", c.strategies, "Comma-separated patterns such as LV-*-PCA-max");
  app.add_option("--out-dir", c.out_dir, "Output directory");
  app.add_option("--top-k", c.top_k, "Rows in the ranking tables");
  app.add_option("--coverage", c.coverage, "Minimum fraction of dates an asset must cover");
  app.add_option("--random-reps", c.random_repetitions, "Draws averaged by the RANDOM baseline");
  app.add_option("--rebalance", rebalance, "daily or buy-and-hold");
}

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& target) {
  if (auto it = j.find(key); it != j.end()) target = it->get<T>();
}

}  // namespace

int RunConfig::effective_portfolio_size() const {
  if (portfolio_size) return *portfolio_size;
  switch (universe) {
    case Universe::stocks: return 25;
    case Universe::crypto: return 20;
    case Universe::custom: break;
  }
  throw ConfigError("--universe custom requires --portfolio-size");
}

void validate(const RunConfig& config) {
  if (config.prices.empty()) throw ConfigError("--prices is required");
  if (!std::filesystem::is_regular_file(config.prices)) {
    throw ConfigError("prices file '" + config.prices.string() + "' does not exist");
  }
  if (config.caps && !std::filesystem::is_regular_file(*config.caps)) {
    throw ConfigError("caps file '" + config.caps->string() + "' does not exist");
  }
  if (config.effective_portfolio_size() < 1) throw ConfigError("--portfolio-size must be at least 1");
  if (config.in_months < 1 || config.out_months < 1 || config.step_months < 1) {
    throw ConfigError("window lengths and step must be at least one month");
  }
  if (config.bins < 2) throw ConfigError("--bins must be at least 2");
  if (!(config.damping >= 0.5 && config.damping < 1.0)) throw ConfigError("--damping must be in [0.5, 1)");
  if (config.top_k < 1) throw ConfigError("--top-k must be at least 1");
  if (!(config.coverage > 0.0 && config.coverage <= 1.0)) throw ConfigError("--coverage must be in (0, 1]");
  if (config.random_repetitions < 1) throw ConfigError("--random-reps must be at least 1");
  if (config.relations.empty()) throw ConfigError("no relation kinds given");
  filter_strategies(config.strategies);
}

RunConfig load_config_file(const std::filesystem::path& path) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_file(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  } catch (const std::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  if (!j.is_object()) throw ConfigError("config " + path.string() + " must hold a JSON object");
  static const std::vector<std::string> known{
      "prices", "caps", "universe", "portfolio-size", "in-months", "out-months", "step-months", "bins",
      "damping", "preference", "seed", "strategies", "out-dir", "top-k", "coverage", "random-reps",
      "rebalance", "relations", "clusterer", "window"};
  for (const auto& [key, _] : j.items()) {
    if (std::find(known.begin(), known.end(), key) == known.end()) {
      throw ConfigError("config " + path.string() + ": unknown key '" + key + "'");
    }
  }
  RunConfig c;
  try {
    if (j.contains("prices")) c.prices = j["prices"].get<std::string>();
    if (j.contains("caps")) c.caps = j["caps"].get<std::string>();
    if (j.contains("universe")) c.universe = parse_universe(j["universe"].get<std::string>());
    if (j.contains("portfolio-size")) c.portfolio_size = j["portfolio-size"].get<int>();
    read_key(j, "in-months", c.in_months);
    read_key(j, "out-months", c.out_months);
    read_key(j, "step-months", c.step_months);
    read_key(j, "bins", c.bins);
    read_key(j, "damping", c.damping);
    if (j.contains("preference")) c.preference = j["preference"].get<double>();
    read_key(j, "seed", c.seed);
    read_key(j, "strategies", c.strategies);
    if (j.contains("out-dir")) c.out_dir = j["out-dir"].get<std::string>();
    read_key(j, "top-k", c.top_k);
    read_key(j, "coverage", c.coverage);
    read_key(j, "random-reps", c.random_repetitions);
    if (j.contains("rebalance")) c.rebalance = parse_rebalance(j["rebalance"].get<std::string>());
    if (j.contains("relations")) c.relations = parse_relations(j["relations"].get<std::string>());
    if (j.contains("clusterer")) c.clusterer = parse_clusterer(j["clusterer"].get<std::string>());
    read_key(j, "window", c.window);
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("config " + path.string() + ": " + e.what());
  }
  // Relative paths in the file are relative to the file itself.
  const auto base = path.parent_path();
  if (!c.prices.empty() && c.prices.is_relative()) c.prices = base / c.prices;
  if (c.caps && c.caps->is_relative()) c.caps = base / *c.caps;
  if (j.contains("out-dir") && c.out_dir.is_relative()) c.out_dir = base / c.out_dir;
  return c;
}

std::string run_manifest_json(const RunConfig& config, std::string_view command) {
  nlohmann::ordered_json j;
  j["tool"] = "netfolio";
  j["version"] = kVersion;
  j["command"] = command;
  nlohmann::ordered_json c;
  c["prices"] = config.prices.generic_string();
  c["caps"] = config.caps ? nlohmann::ordered_json(config.caps->generic_string()) : nlohmann::ordered_json();
  c["universe"] = to_string(config.universe);
  c["portfolio-size"] = config.effective_portfolio_size();
  c["in-months"] = config.in_months;
  c["out-months"] = config.out_months;
  c["step-months"] = config.step_months;
  c["bins"] = config.bins;
  c["damping"] = config.damping;
  c["preference"] = config.preference ? nlohmann::ordered_json(*config.preference) : nlohmann::ordered_json("median");
  c["seed"] = config.seed;
  c["strategies"] = config.strategies;
  c["top-k"] = config.top_k;
  c["coverage"] = config.coverage;
  c["random-reps"] = config.random_repetitions;
  c["rebalance"] = to_string(config.rebalance);
  c["relations"] = join_relations(config.relations);
  c["clusterer"] = to_string(config.clusterer);
  c["window"] = config.window;
  j["config"] = c;
  j["seed"] = config.seed;
  j["libraries"] = {{"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) +
                                  "." + std::to_string(EIGEN_MINOR_VERSION)},
                    {"spdlog", std::to_string(SPDLOG_VER_MAJOR) + "." + std::to_string(SPDLOG_VER_MINOR) + "." +
                                   std::to_string(SPDLOG_VER_PATCH)}};
  return j.dump(2) + "\n";
}

OutputSet cmd_matrix(const RunConfig& config) {
  validate(config);
  const auto data = load_data(config);
  auto [panel, label] = selected_panel(config, data.returns);
  OutputSet out;
  for (auto kind : config.relations) {
    auto rel = build_relation(config, panel, kind);
    rel.source_window = label;
    const auto stem = "matrix_" + lowercase(to_string(kind));
    std::ostringstream csv;
    write_matrix_csv(rel, csv);
    out.add(stem + ".csv", csv.str());
    nlohmann::ordered_json side;
    side["kind"] = to_string(kind);
    side["window"] = label;
    side["assets"] = rel.size();
    side["first_date"] = format_date(panel.dates.front());
    side["last_date"] = format_date(panel.dates.back());
    out.add(stem + ".json", side.dump(2) + "\n");
  }
  out.add("cleaned_prices.csv", cleaned_panel_csv(data.prices));
  out.add("run_manifest.json", run_manifest_json(config, "matrix"));
  return out;
}

OutputSet cmd_communities(const RunConfig& config) {
  validate(config);
  const auto data = load_data(config);
  auto [panel, label] = selected_panel(config, data.returns);
  OutputSet out;
  for (auto kind : config.relations) {
    auto rel = build_relation(config, panel, kind);
    rel.source_window = label;
    const auto partition =
        detect_communities(rel, config.clusterer, community_options(config, 0xC1, config.clusterer, kind));
    const auto stem = lowercase(to_string(config.clusterer)) + "_" + lowercase(to_string(kind));
    std::ostringstream csv;
    write_partition_csv(partition, csv);
    out.add("partition_" + stem + ".csv", csv.str());
    std::ostringstream dot;
    write_dot(build_mst(to_distance(rel)), dot, partition.labels);
    out.add("mst_" + stem + ".dot", dot.str());
    nlohmann::ordered_json side;
    side["clusterer"] = to_string(partition.clusterer);
    side["relation"] = to_string(partition.relation);
    side["window"] = label;
    side["communities"] = partition.community_count();
    side["quality"] = partition.quality;
    side["seed"] = partition.seed;
    side["iterations"] = partition.iterations;
    out.add("partition_" + stem + ".json", side.dump(2) + "\n");
  }
  out.add("cleaned_prices.csv", cleaned_panel_csv(data.prices));
  out.add("run_manifest.json", run_manifest_json(config, "communities"));
  return out;
}

namespace {

std::string ranking_table(const Report& report, const std::vector<std::string>& ids, const char* title,
                          bool volatility) {
  std::unordered_map<std::string, const StrategySummary*> by_id;
  for (const auto& s : report.strategies) by_id[s.strategy_id] = &s;
  std::ostringstream out;
  out << title << '\n';
  char line[160];
  int rank = 1;
  auto row = [&](const std::string& label, const StrategySummary& s) {
    if (volatility) {
      std::snprintf(line, sizeof line, "  %-4s %-22s %10.5f +/- %.5f\n", label.c_str(), s.strategy_id.c_str(),
                    s.mean_volatility, s.se_volatility);
    } else {
      std::snprintf(line, sizeof line, "  %-4s %-22s %10.3f +/- %.3f\n", label.c_str(), s.strategy_id.c_str(),
                    s.mean_return, s.se_return);
    }
    out << line;
  };
  for (const auto& id : ids) row(std::to_string(rank++), *by_id.at(id));
  for (const auto& b : report.baselines) row("-", b);
  return out.str();
}

std::string ratio_table(const Report& report) {
  std::unordered_map<std::string, const StrategySummary*> by_id;
  for (const auto& s : report.strategies) by_id[s.strategy_id] = &s;
  std::ostringstream out;
  out << "Top strategies by return/volatility ratio\n";
  char line[160];
  int rank = 1;
  for (const auto& id : report.top_ratio) {
    const auto& s = *by_id.at(id);
    std::snprintf(line, sizeof line, "  %-4d %-22s %10.2f +/- %.2f\n", rank++, id.c_str(), s.mean_ratio,
                  s.se_ratio);
    out << line;
  }
  for (const auto& b : report.baselines) {
    std::snprintf(line, sizeof line, "  %-4s %-22s %10.2f +/- %.2f\n", "-", b.strategy_id.c_str(), b.mean_ratio,
                  b.se_ratio);
    out << line;
  }
  return out.str();
}

}  // namespace

OutputSet cmd_backtest(const RunConfig& config, std::string* console_report) {
  validate(config);
  const auto data = load_data(config);
  BacktestConfig bc;
  bc.in_months = config.in_months;
  bc.out_months = config.out_months;
  bc.step_months = config.step_months;
  bc.strategies = filter_strategies(config.strategies);
  bc.random_repetitions = config.random_repetitions;
  bc.top_k = config.top_k;
  bc.pipeline.portfolio_size = config.effective_portfolio_size();
  bc.pipeline.bins = config.bins;
  bc.pipeline.ap.damping = config.damping;
  bc.pipeline.ap.preference = config.preference;
  bc.pipeline.seed = config.seed;
  bc.pipeline.rebalance = config.rebalance;

  const auto run = run_backtest(data.returns, data.caps, bc);
  OutputSet out;
  out.add("results.csv", results_csv(run));
  out.add("summary.json", summary_json(run));
  out.add("value_in_time.csv", value_in_time_csv(run, config.top_k));
  out.add("table_mean_return.csv", strategy_table_csv(run.report, TableField::mean_return));
  out.add("table_volatility.csv", strategy_table_csv(run.report, TableField::mean_volatility));
  out.add("selections.csv", selections_csv(run));
  out.add("cleaned_prices.csv", cleaned_panel_csv(data.prices));
  out.add("run_manifest.json", run_manifest_json(config, "backtest"));
  if (console_report) {
    std::ostringstream text;
    text << run.windows.size() << " window(s), " << bc.strategies.size() << " strategies\n\n";
    text << ranking_table(run.report, run.report.top_return, "Top strategies by mean return (%)", false) << '\n';
    text << ranking_table(run.report, run.report.top_volatility, "Top strategies by mean volatility", true)
         << '\n';
    text << ratio_table(run.report);
    *console_report = text.str();
  }
  return out;
}

int run(int argc, char** argv) {
  CLI::App app{"Network-based portfolio selection and backtesting"};
  app.set_version_flag("--version", std::string(kVersion));
  app.require_subcommand(1);
  std::string config_path;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Debug logging");

  RunConfig flags;
  std::string universe;
  std::string rebalance;
  std::string relations;
  std::string clusterer;

  auto* matrix = app.add_subcommand("matrix", "Write relational matrices as CSV");
  auto* communities = app.add_subcommand("communities", "Write partitions and annotated MST exports");
  auto* backtest = app.add_subcommand("backtest", "Backtest the strategy grid against the baselines");
  for (auto* sub : {matrix, communities, backtest}) {
    sub->add_option("--config", config_path, "JSON config; flags given on the command line take precedence");
    add_option_flags(*sub, flags, universe, rebalance);
  }
  for (auto* sub : {matrix, communities}) {
    sub->add_option("--relations", relations, "Comma-separated subset of Cor,MI,cCor,cMI");
    sub->add_option("--clusterer", clusterer, "LV or AP");
    sub->add_option("--window", flags.window, "Use the in-sample part of this window (default: whole panel)");
  }

  auto* synth = app.add_subcommand("synthesize", "Write a block factor-model price panel");
  std::vector<int> block_sizes{20, 20};
  double loading = 0.9;
  double idio = 0.3;
  int days = 500;
  std::uint64_t synth_seed = 0;
  std::filesystem::path synth_out = "prices.csv";
  synth->add_option("--blocks", block_sizes, "Block sizes")->delimiter(',');
  synth->add_option("--loading", loading, "Factor loading shared by every block");
  synth->add_option("--idio", idio, "Idiosyncratic volatility relative to the factor");
  synth->add_option("--days", days, "Number of daily returns");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("-o,--output", synth_out, "Output CSV path");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfigError;
  }
  spdlog::set_level(verbose ? spdlog::level::debug : spdlog::level::warn);

  try {
    if (synth->parsed()) {
      FactorModelSpec spec;
      for (int size : block_sizes) spec.blocks.push_back({size, loading, 0.0});
      spec.idiosyncratic_vol = idio;
      spec.days = days;
      spec.seed = synth_seed;
      std::ostringstream csv;
      write_price_panel(generate_block_panel(spec), csv);
      OutputSet out;
      out.add(synth_out.filename().string(), csv.str());
      out.commit(synth_out.has_parent_path() ? synth_out.parent_path() : std::filesystem::path("."));
      return kOk;
    }

    CLI::App* sub = matrix->parsed() ? matrix : communities->parsed() ? communities : backtest;
    RunConfig config = config_path.empty() ? RunConfig{} : load_config_file(config_path);
    auto given = [&](const char* name) { return sub->count(name) > 0; };
    if (given("--prices")) config.prices = flags.prices;
    if (given("--caps")) config.caps = flags.caps;
    if (given("--universe")) config.universe = parse_universe(universe);
    if (given("--portfolio-size")) config.portfolio_size = flags.portfolio_size;
    if (given("--in-months")) config.in_months = flags.in_months;
    if (given("--out-months")) config.out_months = flags.out_months;
    if (given("--step-months")) config.step_months = flags.step_months;
    if (given("--bins")) config.bins = flags.bins;
    if (given("--damping")) config.damping = flags.damping;
    if (given("--preference")) config.preference = flags.preference;
    if (given("--seed")) config.seed = flags.seed;
    if (given("--strategies")) config.strategies = flags.strategies;
    if (given("--out-dir")) config.out_dir = flags.out_dir;
    if (given("--top-k")) config.top_k = flags.top_k;
    if (given("--coverage")) config.coverage = flags.coverage;
    if (given("--random-reps")) config.random_repetitions = flags.random_repetitions;
    if (given("--rebalance")) config.rebalance = parse_rebalance(rebalance);
    if (sub != backtest) {
      if (given("--relations")) config.relations = parse_relations(relations);
      if (given("--clusterer")) config.clusterer = parse_clusterer(clusterer);
      if (given("--window")) config.window = flags.window;
    }

    if (sub == matrix) {
      cmd_matrix(config).commit(config.out_dir);
    } else if (sub == communities) {
      cmd_communities(config).commit(config.out_dir);
    } else {
      std::string report;
      cmd_backtest(config, &report).commit(config.out_dir);
      std::cout << report;
    }
    return kOk;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return kDataError;
  } catch (const ConvergenceError& e) {
    std::cerr << "convergence error: " << e.what() << '\n';
    return kConvergenceError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}

}  // namespace netfolio::cli
