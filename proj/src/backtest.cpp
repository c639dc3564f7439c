#include "netfolio/backtest.hpp"

#include "netfolio/graphrep.hpp"
#include "netfolio/io.hpp"
#include "netfolio/relational.hpp"

#include <json.hpp>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <tuple>
#include <unordered_map>

namespace netfolio {

std::string StrategySpec::id() const {
  std::string out;
  out.append(to_string(clusterer)).append("-");
  out.append(to_string(relation)).append("-");
  out.append(to_string(metric)).append("-");
  out.append(to_string(range));
  return out;
}

namespace {

std::vector<std::string> split(std::string_view text, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = text.find(sep, start);
    out.emplace_back(text.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

std::string trimmed(std::string s) {
  auto not_space = [](unsigned char c) { return !std::isspace(c); };
  s.erase(s.begin(), std::find_if(s.begin(), s.end(), not_space));
  s.erase(std::find_if(s.rbegin(), s.rend(), not_space).base(), s.end());
  return s;
}

}  // namespace

StrategySpec StrategySpec::parse(std::string_view id) {
  const auto fields = split(id, '-');
  if (fields.size() != 4) throw ConfigError("strategy id '" + std::string(id) + "' needs four dash-separated fields");
  return {parse_clusterer(fields[0]), parse_relation_kind(fields[1]), parse_metric(fields[2]),
          parse_range(fields[3])};
}

std::vector<StrategySpec> strategy_grid() {
  std::vector<StrategySpec> grid;
  grid.reserve(120);
  for (auto c : {Clusterer::LV, Clusterer::AP}) {
    for (auto k : {RelationKind::Cor, RelationKind::MI, RelationKind::cCor, RelationKind::cMI}) {
      for (auto m : {Metric::PCA, Metric::DegFG, Metric::CloFG, Metric::DegMST, Metric::CloMST}) {
        for (auto r : {Range::max, Range::med, Range::min}) grid.push_back({c, k, m, r});
      }
    }
  }
  return grid;
}

std::vector<StrategySpec> filter_strategies(std::string_view patterns) {
  const auto grid = strategy_grid();
  if (trimmed(std::string(patterns)).empty()) return grid;
  std::vector<char> keep(grid.size(), 0);
  for (const auto& raw : split(patterns, ',')) {
    const auto pattern = trimmed(raw);
    if (pattern.empty()) continue;
    const auto f = split(pattern, '-');
    if (f.size() != 4) throw ConfigError("strategy pattern '" + pattern + "' needs four dash-separated fields");
    // validate the non-wildcard fields
    if (f[0] != "*") parse_clusterer(f[0]);
    if (f[1] != "*") parse_relation_kind(f[1]);
    if (f[2] != "*") parse_metric(f[2]);
    if (f[3] != "*") parse_range(f[3]);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      const auto& s = grid[g];
      if ((f[0] == "*" || f[0] == to_string(s.clusterer)) && (f[1] == "*" || f[1] == to_string(s.relation)) &&
          (f[2] == "*" || f[2] == to_string(s.metric)) && (f[3] == "*" || f[3] == to_string(s.range))) {
        keep[g] = 1;
      }
    }
  }
  std::vector<StrategySpec> out;
  for (std::size_t g = 0; g < grid.size(); ++g) {
    if (keep[g]) out.push_back(grid[g]);
  }
  if (out.empty()) throw ConfigError("strategy filter '" + std::string(patterns) + "' matches nothing");
  return out;
}

void finalize_metrics(PortfolioResult& result) {
  const auto& r = result.daily_returns;
  double growth = 1.0;
  for (double x : r) growth *= 1.0 + x;
  result.cumulative_return = (growth - 1.0) * 100.0;
  if (r.empty()) {
    result.volatility = 0.0;
  } else {
    const double mean = std::accumulate(r.begin(), r.end(), 0.0) / static_cast<double>(r.size());
    double ss = 0.0;
    for (double x : r) ss += (x - mean) * (x - mean);
    result.volatility = std::sqrt(ss / static_cast<double>(r.size()));
  }
  result.ratio = result.volatility > 0.0 ? result.cumulative_return / result.volatility : 0.0;
}

namespace {

Eigen::MatrixXd simple_returns(const ReturnPanel& panel) {
  return panel.raw_returns.unaryExpr([](double x) { return std::expm1(x); });
}

// Daily returns of a portfolio holding `indices` (ascending) with `weights`;
// an empty weight vector means equal weights.
std::vector<double> portfolio_series(const Eigen::MatrixXd& simple, const std::vector<int>& indices,
                                     const std::vector<double>& weights, Rebalance rebalance) {
  const auto t_count = simple.rows();
  const bool equal = weights.empty();
  const double k = static_cast<double>(indices.size());
  std::vector<double> out(static_cast<std::size_t>(t_count), 0.0);
  if (rebalance == Rebalance::daily) {
    for (Eigen::Index t = 0; t < t_count; ++t) {
      double acc = 0.0;
      for (std::size_t j = 0; j < indices.size(); ++j) {
        const double x = simple(t, indices[j]);
        acc += equal ? x : weights[j] * x;
      }
      out[static_cast<std::size_t>(t)] = equal ? acc / k : acc;
    }
    return out;
  }
  std::vector<double> holding(indices.size());
  for (std::size_t j = 0; j < indices.size(); ++j) holding[j] = equal ? 1.0 / k : weights[j];
  double value = 1.0;
  for (Eigen::Index t = 0; t < t_count; ++t) {
    double next = 0.0;
    for (std::size_t j = 0; j < indices.size(); ++j) {
      holding[j] *= 1.0 + simple(t, indices[j]);
      next += holding[j];
    }
    out[static_cast<std::size_t>(t)] = next / value - 1.0;
    value = next;
  }
  return out;
}

PortfolioResult make_result(const WindowPair& window, std::vector<double> series) {
  PortfolioResult result;
  result.window = window.label;
  result.dates = window.out_of_sample.dates;
  result.daily_returns = std::move(series);
  finalize_metrics(result);
  return result;
}

}  // namespace

PortfolioResult evaluate_weights(const Eigen::VectorXd& weights, const WindowPair& window, Rebalance rebalance) {
  const auto& oos = window.out_of_sample;
  if (static_cast<std::size_t>(weights.size()) != oos.cols()) throw std::invalid_argument("weight count mismatch");
  std::vector<int> indices;
  std::vector<double> w;
  for (Eigen::Index i = 0; i < weights.size(); ++i) {
    if (weights[i] < 0.0) throw DataError("negative portfolio weight");
    if (weights[i] > 0.0) {
      indices.push_back(static_cast<int>(i));
      w.push_back(weights[i]);
    }
  }
  if (indices.empty()) throw std::invalid_argument("portfolio has no positive weight");
  auto result = make_result(window, portfolio_series(simple_returns(oos), indices, w, rebalance));
  for (int i : indices) result.symbols.push_back(oos.assets[static_cast<std::size_t>(i)]);
  return result;
}

PortfolioResult evaluate_portfolio(const std::vector<std::string>& symbols, const WindowPair& window,
                                   Rebalance rebalance) {
  if (symbols.empty()) throw std::invalid_argument("portfolio has no symbols");
  const auto& oos = window.out_of_sample;
  std::vector<int> indices;
  for (const auto& s : symbols) {
    auto it = std::find(oos.assets.begin(), oos.assets.end(), s);
    if (it == oos.assets.end()) {
      throw DataError("symbol " + s + " is missing from the out-of-sample window starting " +
                      format_date(window.label));
    }
    indices.push_back(static_cast<int>(it - oos.assets.begin()));
  }
  std::sort(indices.begin(), indices.end());
  if (std::adjacent_find(indices.begin(), indices.end()) != indices.end()) {
    throw std::invalid_argument("portfolio lists a symbol twice");
  }
  auto result = make_result(window, portfolio_series(simple_returns(oos), indices, {}, rebalance));
  for (int i : indices) result.symbols.push_back(oos.assets[static_cast<std::size_t>(i)]);
  return result;
}

// ---------------------------------------------------------------------------

class WindowModel {
 public:
  using RelationKey = std::pair<int, int>;  // (kind, clusterer or -1)

  static RelationKey relation_key(Clusterer c, RelationKind k) {
    const bool cooc = k == RelationKind::cCor || k == RelationKind::cMI;
    return {static_cast<int>(k), cooc ? static_cast<int>(c) : -1};
  }

  std::map<RelationKey, RelationalMatrix> relations;
  std::map<RelationKey, AssetGraph> full_graphs;
  std::map<RelationKey, AssetGraph> trees;
  std::map<std::pair<int, int>, Partition> partitions;  // (clusterer, kind)
  std::map<std::tuple<int, int, int>, AssetScores> scores;
};

WindowContext::WindowContext(const WindowPair& window, PipelineOptions options)
    : window_(&window), options_(std::move(options)), model_(std::make_unique<WindowModel>()) {}

WindowContext::~WindowContext() = default;

const RelationalMatrix& WindowContext::relation(Clusterer clusterer, RelationKind kind) {
  const auto key = WindowModel::relation_key(clusterer, kind);
  auto it = model_->relations.find(key);
  if (it != model_->relations.end()) return it->second;
  RelationalMatrix rel;
  const auto& in = window_->in_sample;
  if (kind == RelationKind::Cor || kind == RelationKind::MI) {
    rel = base_relation(in, kind, options_.bins);
  } else {
    CommunityOptions co;
    co.ap = options_.ap;
    co.seed = derive_seed(options_.seed, options_.window_index, 100 + static_cast<std::uint64_t>(clusterer),
                          static_cast<std::uint64_t>(kind));
    const auto base = kind == RelationKind::cCor ? RelationKind::Cor : RelationKind::MI;
    rel = cooccurrence_matrix(in, clusterer, base, co, options_.bins, span_months(in)).matrix;
  }
  rel.source_window = format_date(window_->label);
  return model_->relations.emplace(key, std::move(rel)).first->second;
}

const Partition& WindowContext::partition(Clusterer clusterer, RelationKind kind) {
  const std::pair<int, int> key{static_cast<int>(clusterer), static_cast<int>(kind)};
  auto it = model_->partitions.find(key);
  if (it != model_->partitions.end()) return it->second;
  CommunityOptions co;
  co.ap = options_.ap;
  co.seed = derive_seed(options_.seed, options_.window_index, static_cast<std::uint64_t>(clusterer),
                        static_cast<std::uint64_t>(kind));
  auto p = detect_communities(relation(clusterer, kind), clusterer, co);
  return model_->partitions.emplace(key, std::move(p)).first->second;
}

const AssetScores& WindowContext::scores(Clusterer clusterer, RelationKind kind, Metric metric) {
  // Only degree scores depend on the partition.
  const bool per_community = metric == Metric::DegFG || metric == Metric::DegMST;
  const auto rkey = WindowModel::relation_key(clusterer, kind);
  const std::tuple<int, int, int> key{per_community ? static_cast<int>(clusterer) : rkey.second,
                                      static_cast<int>(kind), static_cast<int>(metric)};
  auto it = model_->scores.find(key);
  if (it != model_->scores.end()) return it->second;

  const auto& rel = relation(clusterer, kind);
  auto graph = [&](bool tree) -> const AssetGraph& {
    auto& cache = tree ? model_->trees : model_->full_graphs;
    auto g = cache.find(rkey);
    if (g != cache.end()) return g->second;
    const auto d = to_distance(rel);
    return cache.emplace(rkey, tree ? build_mst(d) : build_full_graph(d)).first->second;
  };
  AssetScores s;
  switch (metric) {
    case Metric::PCA: s = pca_scores(rel); break;
    case Metric::CloFG: s = closeness_scores(graph(false)); break;
    case Metric::CloMST: s = closeness_scores(graph(true)); break;
    case Metric::DegFG: s = degree_scores(graph(false), partition(clusterer, kind)); break;
    case Metric::DegMST: s = degree_scores(graph(true), partition(clusterer, kind)); break;
  }
  return model_->scores.emplace(key, std::move(s)).first->second;
}

Selection WindowContext::select(const StrategySpec& spec) {
  const auto& p = partition(spec.clusterer, spec.relation);
  const auto& s = scores(spec.clusterer, spec.relation, spec.metric);
  return select_portfolio(p, s, {spec.metric, spec.range, options_.portfolio_size});
}

PortfolioResult run_strategy(const StrategySpec& spec, WindowContext& context) {
  try {
    const auto selection = context.select(spec);
    std::vector<std::string> symbols;
    for (int i : selection.indices) symbols.push_back(context.window().in_sample.assets[static_cast<std::size_t>(i)]);
    auto result = evaluate_portfolio(symbols, context.window(), context.options().rebalance);
    result.strategy_id = spec.id();
    // evaluate_portfolio lists symbols by column; carry the selection details along in that order
    std::vector<std::size_t> order(selection.indices.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return selection.indices[a] < selection.indices[b]; });
    for (auto k : order) {
      result.communities.push_back(selection.communities[k]);
      result.scores.push_back(selection.scores[k]);
    }
    return result;
  } catch (const ConvergenceError& e) {
    throw ConvergenceError(spec.id() + " on window " + format_date(context.window().label) + ": " + e.what(),
                           e.last_exemplars());
  }
}

PortfolioResult run_strategy(const StrategySpec& spec, const WindowPair& window, const PipelineOptions& options) {
  WindowContext context(window, options);
  return run_strategy(spec, context);
}

PortfolioResult run_random_baseline(const WindowPair& window, int portfolio_size, int repetitions,
                                    std::uint64_t seed, Rebalance rebalance) {
  const auto& oos = window.out_of_sample;
  const int n = static_cast<int>(oos.cols());
  if (repetitions < 1) throw ConfigError("random baseline needs at least one repetition");
  if (portfolio_size < 1) throw ConfigError("portfolio size must be at least 1");
  if (portfolio_size > n) {
    spdlog::warn("random baseline: portfolio size {} exceeds universe of {}", portfolio_size, n);
    portfolio_size = n;
  }
  const auto simple = simple_returns(oos);
  std::vector<double> series(oos.rows(), 0.0);
  double sum_return = 0.0;
  double sum_vol = 0.0;
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int rep = 0; rep < repetitions; ++rep) {
    std::mt19937_64 rng(derive_seed(seed, static_cast<std::uint64_t>(rep)));
    std::iota(pool.begin(), pool.end(), 0);
    // partial Fisher-Yates
    for (int i = 0; i < portfolio_size; ++i) {
      std::uniform_int_distribution<int> pick(i, n - 1);
      std::swap(pool[static_cast<std::size_t>(i)], pool[static_cast<std::size_t>(pick(rng))]);
    }
    std::vector<int> chosen(pool.begin(), pool.begin() + portfolio_size);
    std::sort(chosen.begin(), chosen.end());
    PortfolioResult one = make_result(window, portfolio_series(simple, chosen, {}, rebalance));
    for (std::size_t t = 0; t < series.size(); ++t) series[t] += one.daily_returns[t];
    sum_return += one.cumulative_return;
    sum_vol += one.volatility;
  }
  PortfolioResult result;
  result.strategy_id = std::string(kRandomBaseline);
  result.window = window.label;
  result.dates = oos.dates;
  for (auto& x : series) x /= static_cast<double>(repetitions);
  result.daily_returns = std::move(series);
  result.cumulative_return = sum_return / static_cast<double>(repetitions);
  result.volatility = sum_vol / static_cast<double>(repetitions);
  result.ratio = result.volatility > 0.0 ? result.cumulative_return / result.volatility : 0.0;
  return result;
}

PortfolioResult run_index_baseline(const WindowPair& window, const std::optional<Eigen::VectorXd>& caps,
                                   Rebalance rebalance) {
  const auto& oos = window.out_of_sample;
  PortfolioResult result;
  bool equal = true;
  if (caps) {
    if (static_cast<std::size_t>(caps->size()) != oos.cols()) throw std::invalid_argument("cap count mismatch");
    if ((caps->array() < 0.0).any()) throw DataError("negative market cap");
    if (!(caps->sum() > 0.0)) throw DataError("market caps sum to zero");
    equal = (caps->array() == (*caps)[0]).all();
  }
  if (equal) {
    result = evaluate_portfolio(oos.assets, window, rebalance);
  } else {
    result = evaluate_weights(*caps / caps->sum(), window, rebalance);
  }
  result.strategy_id = std::string(kIndexBaseline);
  return result;
}

// ---------------------------------------------------------------------------

namespace {

std::pair<double, double> mean_and_se(const std::vector<double>& xs) {
  const double n = static_cast<double>(xs.size());
  const double mean = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  if (xs.size() < 2) return {mean, 0.0};
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return {mean, std::sqrt(ss / (n - 1.0)) / std::sqrt(n)};
}

bool is_baseline(const std::string& id) { return id == kRandomBaseline || id == kIndexBaseline; }

}  // namespace

Report aggregate_and_rank(const std::vector<PortfolioResult>& results, int top_k) {
  std::vector<std::string> order;
  std::unordered_map<std::string, std::vector<const PortfolioResult*>> groups;
  for (const auto& r : results) {
    auto [it, inserted] = groups.try_emplace(r.strategy_id);
    if (inserted) order.push_back(r.strategy_id);
    it->second.push_back(&r);
  }
  Report report;
  for (const auto& id : order) {
    std::vector<double> ret;
    std::vector<double> vol;
    std::vector<double> ratio;
    for (const auto* r : groups[id]) {
      ret.push_back(r->cumulative_return);
      vol.push_back(r->volatility);
      ratio.push_back(r->ratio);
    }
    StrategySummary s;
    s.strategy_id = id;
    s.windows = static_cast<int>(ret.size());
    std::tie(s.mean_return, s.se_return) = mean_and_se(ret);
    std::tie(s.mean_volatility, s.se_volatility) = mean_and_se(vol);
    std::tie(s.mean_ratio, s.se_ratio) = mean_and_se(ratio);
    (is_baseline(id) ? report.baselines : report.strategies).push_back(std::move(s));
  }

  const auto& st = report.strategies;
  auto ranked = [&](auto better) {
    std::vector<std::size_t> idx(st.size());
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return better(st[a], st[b]); });
    std::vector<std::string> ids;
    for (std::size_t i = 0; i < idx.size() && static_cast<int>(i) < top_k; ++i) ids.push_back(st[idx[i]].strategy_id);
    return ids;
  };
  report.top_return = ranked([](const auto& a, const auto& b) { return a.mean_return > b.mean_return; });
  report.top_volatility = ranked([](const auto& a, const auto& b) { return a.mean_volatility < b.mean_volatility; });
  report.top_ratio = ranked([](const auto& a, const auto& b) { return a.mean_ratio > b.mean_ratio; });
  return report;
}

BacktestRun run_backtest(const ReturnPanel& panel, const std::optional<Eigen::VectorXd>& caps,
                         const BacktestConfig& config, Exec exec) {
  if (config.strategies.empty()) throw ConfigError("no strategies selected");
  BacktestRun run;
  run.windows = make_windows(panel, config.in_months, config.out_months, config.step_months);
  if (run.windows.empty()) {
    throw DataError("panel spans " + std::to_string(span_months(panel)) + " months; need at least " +
                    std::to_string(config.in_months + config.out_months) + " for one window");
  }
  const std::size_t per_window = config.strategies.size() + 2;
  const auto window_count = static_cast<int>(run.windows.size());
  run.results.resize(run.windows.size() * per_window);
  std::vector<std::exception_ptr> errors(run.windows.size());

  auto run_window = [&](int w) {
    try {
      const auto& window = run.windows[static_cast<std::size_t>(w)];
      PipelineOptions options = config.pipeline;
      options.window_index = static_cast<std::uint64_t>(w);
      WindowContext context(window, options);
      const std::size_t base = static_cast<std::size_t>(w) * per_window;
      for (std::size_t s = 0; s < config.strategies.size(); ++s) {
        run.results[base + s] = run_strategy(config.strategies[s], context);
      }
      run.results[base + config.strategies.size()] = run_random_baseline(
          window, options.portfolio_size, config.random_repetitions,
          derive_seed(options.seed, options.window_index, 0xBA5E), options.rebalance);
      run.results[base + config.strategies.size() + 1] = run_index_baseline(window, caps, options.rebalance);
    } catch (...) {
      errors[static_cast<std::size_t>(w)] = std::current_exception();
    }
  };
  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (int w = 0; w < window_count; ++w) run_window(w);
  } else {
    for (int w = 0; w < window_count; ++w) run_window(w);
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  run.report = aggregate_and_rank(run.results, config.top_k);
  return run;
}

// ---------------------------------------------------------------------------

std::string results_csv(const BacktestRun& run) {
  std::ostringstream out;
  out << "strategy_id,window_start,cum_return_pct,volatility,ratio\n";
  for (const auto& r : run.results) {
    out << r.strategy_id << ',' << format_date(r.window) << ',' << format_double(r.cumulative_return) << ','
        << format_double(r.volatility) << ',' << format_double(r.ratio) << '\n';
  }
  return out.str();
}

namespace {

nlohmann::ordered_json summary_to_json(const StrategySummary& s) {
  nlohmann::ordered_json j;
  j["strategy_id"] = s.strategy_id;
  j["windows"] = s.windows;
  j["mean_return"] = s.mean_return;
  j["se_return"] = s.se_return;
  j["mean_volatility"] = s.mean_volatility;
  j["se_volatility"] = s.se_volatility;
  j["mean_ratio"] = s.mean_ratio;
  j["se_ratio"] = s.se_ratio;
  return j;
}

}  // namespace

std::string summary_json(const BacktestRun& run) {
  nlohmann::ordered_json j;
  auto windows = nlohmann::ordered_json::array();
  for (const auto& w : run.windows) {
    windows.push_back({{"in_sample_start", format_date(w.in_sample.dates.front())},
                       {"in_sample_end", format_date(w.in_sample.dates.back())},
                       {"out_of_sample_start", format_date(w.out_of_sample.dates.front())},
                       {"out_of_sample_end", format_date(w.out_of_sample.dates.back())}});
  }
  j["windows"] = windows;
  auto strategies = nlohmann::ordered_json::array();
  for (const auto& s : run.report.strategies) strategies.push_back(summary_to_json(s));
  j["strategies"] = strategies;
  auto baselines = nlohmann::ordered_json::array();
  for (const auto& s : run.report.baselines) baselines.push_back(summary_to_json(s));
  j["baselines"] = baselines;
  j["top_k"] = {{"return", run.report.top_return},
                {"volatility", run.report.top_volatility},
                {"ratio", run.report.top_ratio}};
  return j.dump(2) + "\n";
}

std::string value_in_time_csv(const BacktestRun& run, int top_k) {
  std::ostringstream out;
  out << "date,strategy_id,portfolio_value\n";
  if (run.windows.empty()) return out.str();
  const auto& last = run.windows.back();
  std::vector<std::string> ids;
  for (const auto& id : run.report.top_ratio) {
    if (static_cast<int>(ids.size()) >= top_k) break;
    ids.push_back(id);
  }
  ids.emplace_back(kRandomBaseline);
  ids.emplace_back(kIndexBaseline);
  for (const auto& id : ids) {
    auto it = std::find_if(run.results.begin(), run.results.end(),
                           [&](const PortfolioResult& r) { return r.strategy_id == id && r.window == last.label; });
    if (it == run.results.end()) continue;
    double value = 1.0;
    out << format_date(last.in_sample.dates.back()) << ',' << id << ",1\n";
    for (std::size_t t = 0; t < it->daily_returns.size(); ++t) {
      value *= 1.0 + it->daily_returns[t];
      out << format_date(it->dates[t]) << ',' << id << ',' << format_double(value) << '\n';
    }
  }
  return out.str();
}

std::string selections_csv(const BacktestRun& run) {
  std::ostringstream out;
  out << "strategy_id,symbol,community_id,score\n";
  if (run.windows.empty()) return out.str();
  const auto label = run.windows.back().label;
  for (const auto& r : run.results) {
    if (r.window != label || r.communities.empty()) continue;
    for (std::size_t k = 0; k < r.symbols.size(); ++k) {
      out << r.strategy_id << ',' << r.symbols[k] << ',' << r.communities[k] << ',' << format_double(r.scores[k])
          << '\n';
    }
  }
  return out.str();
}

std::string strategy_table_csv(const Report& report, TableField field) {
  auto cell = [&](const StrategySummary& s) {
    char buf[96];
    if (field == TableField::mean_return) {
      std::snprintf(buf, sizeof buf, "%.2f \xC2\xB1 %.4f", s.mean_return, s.se_return);
    } else {
      std::snprintf(buf, sizeof buf, "%.4f \xC2\xB1 %.5f", s.mean_volatility, s.se_volatility);
    }
    return std::string(buf);
  };
  std::unordered_map<std::string, const StrategySummary*> by_id;
  for (const auto& s : report.strategies) by_id[s.strategy_id] = &s;

  const std::vector<Clusterer> clusterers{Clusterer::LV, Clusterer::AP};
  const std::vector<RelationKind> kinds{RelationKind::Cor, RelationKind::MI, RelationKind::cCor, RelationKind::cMI};
  std::ostringstream out;
  out << "metric,range";
  for (auto c : clusterers) {
    for (auto k : kinds) out << ',' << to_string(c) << '-' << to_string(k);
  }
  out << '\n';
  for (auto m : {Metric::PCA, Metric::DegFG, Metric::CloFG, Metric::DegMST, Metric::CloMST}) {
    for (auto r : {Range::max, Range::med, Range::min}) {
      out << to_string(m) << ',' << to_string(r);
      for (auto c : clusterers) {
        for (auto k : kinds) {
          auto it = by_id.find(StrategySpec{c, k, m, r}.id());
          out << ',';
          if (it != by_id.end()) out << '"' << cell(*it->second) << '"';
        }
      }
      out << '\n';
    }
  }
  for (const auto& b : report.baselines) {
    out << "baseline," << b.strategy_id << ",\"" << cell(b) << "\"\n";
  }
  return out.str();
}

}  // namespace netfolio
