#include "netfolio/backtest.hpp"
#include "support.hpp"

#include <doctest.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <sstream>

using namespace netfolio;

namespace {

const std::vector<double> kA{0.1, -0.1, 0.1, 0.0, 0.1};
const std::vector<double> kB{0.0, 0.05, 0.0, -0.1, 0.0};

WindowPair two_asset_window() { return testing::window_from_simple({kA, kB}, {"A", "B"}); }

const std::vector<WindowPair>& block_windows() {
  static const auto windows = [] {
    auto spec = testing::two_blocks(5, 300, 10);
    return make_windows(compute_returns(generate_block_panel(spec)), 12, 1, 1);
  }();
  return windows;
}

PortfolioResult fake_result(const std::string& id, double ret, double vol, int window = 0) {
  PortfolioResult r;
  r.strategy_id = id;
  r.window = testing::ymd(2020, 1 + window, 1);
  r.cumulative_return = ret;
  r.volatility = vol;
  r.ratio = vol > 0.0 ? ret / vol : 0.0;
  return r;
}

std::size_t line_count(const std::string& text) {
  return static_cast<std::size_t>(std::count(text.begin(), text.end(), '\n'));
}

}  // namespace

TEST_CASE("hand-built two-asset portfolio") {
  const auto r = evaluate_portfolio({"A", "B"}, two_asset_window());
  const std::vector<double> expected{0.05, -0.025, 0.05, -0.05, 0.05};
  REQUIRE(r.daily_returns.size() == 5);
  for (int t = 0; t < 5; ++t) CHECK(std::abs(r.daily_returns[t] - expected[t]) < 1e-12);
  CHECK(std::abs(r.cumulative_return - 7.225015625) < 1e-9);
  CHECK(std::abs(r.volatility - std::sqrt(0.0019)) < 1e-9);
  CHECK(std::abs(r.ratio - 7.225015625 / std::sqrt(0.0019)) < 1e-9);
  CHECK(r.symbols == std::vector<std::string>{"A", "B"});
  CHECK(r.window == testing::ymd(2021, 1, 1));
}

TEST_CASE("single-asset portfolio reproduces the asset") {
  const auto w = two_asset_window();
  const auto r = evaluate_portfolio({"A"}, w);
  PortfolioResult own;
  for (Eigen::Index t = 0; t < w.out_of_sample.raw_returns.rows(); ++t) {
    own.daily_returns.push_back(std::expm1(w.out_of_sample.raw_returns(t, 0)));
  }
  finalize_metrics(own);
  CHECK(r.daily_returns == own.daily_returns);
  CHECK(r.cumulative_return == own.cumulative_return);
  CHECK(r.volatility == own.volatility);

  Eigen::VectorXd unit = Eigen::VectorXd::Zero(2);
  unit[0] = 1.0;
  CHECK(evaluate_weights(unit, w).daily_returns == own.daily_returns);
}

TEST_CASE("constant and doubling prices") {
  const auto flat = evaluate_portfolio({"A"}, testing::window_from_simple({std::vector<double>(20, 0.0)}, {"A"}));
  CHECK(flat.cumulative_return == 0.0);
  CHECK(flat.volatility == 0.0);
  CHECK(flat.ratio == 0.0);

  const double step = std::exp(std::log(2.0) / 250.0) - 1.0;
  const auto doubling = evaluate_portfolio({"A"}, testing::window_from_simple({std::vector<double>(250, step)}, {"A"}));
  CHECK(std::abs(doubling.cumulative_return - 100.0) < 1e-9);
}

TEST_CASE("evaluation is permutation invariant and consistent") {
  std::mt19937_64 rng(6);
  std::normal_distribution<double> normal(0.0, 0.02);
  std::vector<std::vector<double>> simple(6, std::vector<double>(40));
  for (auto& s : simple) {
    for (auto& x : s) x = normal(rng);
  }
  const auto w = testing::window_from_simple(simple, testing::symbols(6));
  const auto a = evaluate_portfolio({"S0", "S3", "S5"}, w);
  const auto b = evaluate_portfolio({"S5", "S0", "S3"}, w);
  CHECK(a.daily_returns == b.daily_returns);
  CHECK(a.cumulative_return == b.cumulative_return);
  CHECK(std::abs(a.ratio * a.volatility - a.cumulative_return) < 1e-9);
  CHECK_THROWS_AS(evaluate_portfolio({"S0", "ZZ"}, w), DataError);
  CHECK_THROWS(evaluate_portfolio({"S0", "S0"}, w));
  CHECK_THROWS(evaluate_portfolio({}, w));
}

TEST_CASE("buy-and-hold tracks drifting weights") {
  const auto w = two_asset_window();
  const auto r = evaluate_portfolio({"A", "B"}, w, Rebalance::buy_and_hold);
  double va = 0.5;
  double vb = 0.5;
  for (int t = 0; t < 5; ++t) {
    va *= 1.0 + kA[t];
    vb *= 1.0 + kB[t];
  }
  CHECK(std::abs(r.cumulative_return - 100.0 * (va + vb - 1.0)) < 1e-9);
}

TEST_CASE("index baseline weighting") {
  const auto w = two_asset_window();
  const Eigen::VectorXd equal = Eigen::VectorXd::Constant(2, 3.0);
  const auto all = evaluate_portfolio({"A", "B"}, w);
  const auto eq = run_index_baseline(w, equal);
  CHECK(eq.daily_returns == all.daily_returns);
  CHECK(eq.strategy_id == "INDEX");
  CHECK(run_index_baseline(w, std::nullopt).daily_returns == all.daily_returns);

  Eigen::VectorXd only_a(2);
  only_a << 5.0, 0.0;
  const auto single = run_index_baseline(w, only_a);
  CHECK(single.cumulative_return == evaluate_portfolio({"A"}, w).cumulative_return);

  const auto three = testing::window_from_simple({kA, kB, {0.02, 0.02, -0.01, 0.0, 0.03}}, {"A", "B", "C"});
  Eigen::VectorXd caps(3);
  caps << 1.0, 2.0, 7.0;
  const auto weighted = run_index_baseline(three, caps);
  const std::vector<double> kC{0.02, 0.02, -0.01, 0.0, 0.03};
  for (int t = 0; t < 5; ++t) {
    CHECK(std::abs(weighted.daily_returns[t] - (0.1 * kA[t] + 0.2 * kB[t] + 0.7 * kC[t])) < 1e-12);
  }
  caps[1] = -1.0;
  CHECK_THROWS_AS(run_index_baseline(three, caps), DataError);
}

TEST_CASE("random baseline") {
  const auto w = two_asset_window();
  const auto full = run_random_baseline(w, 2, 25, 9);
  const auto all = evaluate_portfolio({"A", "B"}, w);
  CHECK(std::abs(full.cumulative_return - all.cumulative_return) < 1e-12);
  CHECK(std::abs(full.volatility - all.volatility) < 1e-12);
  CHECK(full.strategy_id == "RANDOM");

  const auto again = run_random_baseline(w, 1, 100, 9);
  CHECK(again.cumulative_return == run_random_baseline(w, 1, 100, 9).cumulative_return);

  // Mirror-image assets: each draw returns +x or -x on the same volatility.
  std::vector<double> up(30, 0.01);
  std::vector<double> down(30);
  for (int t = 0; t < 30; ++t) up[t] = (t % 3 == 0 ? -0.01 : 0.015);
  for (int t = 0; t < 30; ++t) down[t] = -up[t];
  const auto mirror = testing::window_from_simple({up, down}, {"U", "D"});
  const double ru = evaluate_portfolio({"U"}, mirror).cumulative_return;
  const double rd = evaluate_portfolio({"D"}, mirror).cumulative_return;
  const auto avg = run_random_baseline(mirror, 1, 100, 21);
  // 100 fair coin flips: 4 standard deviations of the draw share.
  const double half_width = 4.0 * 0.5 / std::sqrt(100.0) * std::abs(ru - rd);
  CHECK(std::abs(avg.cumulative_return - 0.5 * (ru + rd)) <= half_width);
  CHECK_THROWS_AS(run_random_baseline(mirror, 1, 0, 1), ConfigError);
}

TEST_CASE("aggregation means, standard errors and rankings") {
  const auto single = aggregate_and_rank({fake_result("X", 12.0, 0.01)});
  REQUIRE(single.strategies.size() == 1);
  CHECK(single.strategies[0].mean_return == 12.0);
  CHECK(single.strategies[0].se_return == 0.0);

  const auto two = aggregate_and_rank({fake_result("X", 10.0, 0.01, 0), fake_result("X", 20.0, 0.03, 1)});
  CHECK(two.strategies[0].mean_return == 15.0);
  CHECK(two.strategies[0].se_return == doctest::Approx(5.0).epsilon(1e-15));
  CHECK(two.strategies[0].windows == 2);

  std::vector<PortfolioResult> results;
  const std::vector<std::string> ids{"P", "Q", "R", "S", "T"};
  const std::vector<double> rets{3.0, -1.0, 8.0, 5.0, 0.5};
  const std::vector<double> vols{0.02, 0.01, 0.05, 0.015, 0.03};
  for (std::size_t i = 0; i < ids.size(); ++i) results.push_back(fake_result(ids[i], rets[i], vols[i]));
  results.push_back(fake_result("RANDOM", 100.0, 0.001));
  const auto report = aggregate_and_rank(results, 3);
  CHECK(report.baselines.size() == 1);
  CHECK(report.strategies.size() == 5);

  auto sorted_ids = [&](auto key, bool descending) {
    std::vector<std::size_t> order{0, 1, 2, 3, 4};
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
      return descending ? key(a) > key(b) : key(a) < key(b);
    });
    std::vector<std::string> out;
    for (std::size_t k = 0; k < 3; ++k) out.push_back(ids[order[k]]);
    return out;
  };
  CHECK(report.top_return == sorted_ids([&](std::size_t i) { return rets[i]; }, true));
  CHECK(report.top_volatility == sorted_ids([&](std::size_t i) { return vols[i]; }, false));
  CHECK(report.top_ratio == sorted_ids([&](std::size_t i) { return rets[i] / vols[i]; }, true));
}

TEST_CASE("strategy grid") {
  const auto grid = strategy_grid();
  CHECK(grid.size() == 120);
  std::set<std::string> ids;
  for (const auto& s : grid) {
    ids.insert(s.id());
    CHECK(StrategySpec::parse(s.id()) == s);
  }
  CHECK(ids.size() == 120);
  CHECK(grid.front().id() == "LV-Cor-PCA-max");
  CHECK(grid.back().id() == "AP-cMI-CloMST-min");

  CHECK(filter_strategies("").size() == 120);
  CHECK(filter_strategies("LV-*-PCA-max").size() == 4);
  const auto picked = filter_strategies("AP-cMI-CloMST-min,LV-Cor-*-*");
  REQUIRE(picked.size() == 16);
  CHECK(picked.front().id() == "LV-Cor-PCA-max");
  CHECK(picked.back().id() == "AP-cMI-CloMST-min");
  CHECK_THROWS_AS(filter_strategies("LV-Cor-PCA"), ConfigError);
  CHECK_THROWS_AS(filter_strategies("XX-Cor-PCA-max"), ConfigError);
  CHECK_THROWS_AS(StrategySpec::parse("LV-Cor-PCA-top"), ConfigError);
}

TEST_CASE("strategies on a two-block panel draw from both blocks") {
  const auto& windows = block_windows();
  REQUIRE(!windows.empty());
  PipelineOptions options;
  options.portfolio_size = 6;
  options.seed = 3;
  for (const char* id : {"LV-Cor-PCA-max", "AP-Cor-DegFG-min", "LV-MI-CloMST-med", "AP-MI-CloFG-max", "LV-cCor-DegMST-max"}) {
    CAPTURE(id);
    const auto r = run_strategy(StrategySpec::parse(id), windows.front(), options);
    CHECK(r.symbols.size() == 6);
    CHECK(r.strategy_id == id);
    int first = 0;
    for (const auto& s : r.symbols) first += s <= "A10" ? 1 : 0;
    CHECK(first > 0);
    CHECK(first < 6);
    const auto again = run_strategy(StrategySpec::parse(id), windows.front(), options);
    CHECK(again.symbols == r.symbols);
    CHECK(again.daily_returns == r.daily_returns);
  }
}

TEST_CASE("portfolio covering the universe equals the index") {
  const auto& w = block_windows().front();
  PipelineOptions options;
  options.portfolio_size = 25;
  const auto r = run_strategy(StrategySpec::parse("AP-Cor-PCA-min"), w, options);
  const auto index = run_index_baseline(w, std::nullopt);
  CHECK(r.daily_returns == index.daily_returns);
  CHECK(r.cumulative_return == index.cumulative_return);
}

TEST_CASE("backtest run and reports") {
  const auto spec = testing::two_blocks(8, 330, 8);
  const auto returns = compute_returns(generate_block_panel(spec));
  BacktestConfig config;
  config.strategies = filter_strategies("LV-Cor-*-max,AP-MI-PCA-*");
  config.out_months = 1;
  config.random_repetitions = 10;
  config.top_k = 3;
  config.pipeline.portfolio_size = 4;
  const auto run = run_backtest(returns, std::nullopt, config);
  const std::size_t windows = run.windows.size();
  REQUIRE(windows >= 2);
  CHECK(run.results.size() == windows * (config.strategies.size() + 2));
  CHECK(run.results[config.strategies.size()].strategy_id == "RANDOM");
  for (const auto& r : run.results) {
    if (r.volatility > 0.0) CHECK(std::abs(r.ratio * r.volatility - r.cumulative_return) < 1e-9);
  }

  const auto csv = results_csv(run);
  CHECK(csv.rfind("strategy_id,window_start,cum_return_pct,volatility,ratio\n", 0) == 0);
  CHECK(line_count(csv) == 1 + run.results.size());

  const auto summary = nlohmann::json::parse(summary_json(run));
  CHECK(summary["strategies"].size() == config.strategies.size());
  CHECK(summary["baselines"].size() == 2);

  const auto value = value_in_time_csv(run, 3);
  CHECK(value.rfind("date,strategy_id,portfolio_value\n", 0) == 0);
  const auto last_days = run.windows.back().out_of_sample.dates.size();
  CHECK(line_count(value) == 1 + 5 * (last_days + 1));

  const auto selections = selections_csv(run);
  CHECK(selections.rfind("strategy_id,symbol,community_id,score\n", 0) == 0);
  CHECK(line_count(selections) == 1 + config.strategies.size() * 4);

  const auto table = strategy_table_csv(run.report, TableField::mean_return);
  CHECK(table.rfind("metric,range,LV-Cor,LV-MI,LV-cCor,LV-cMI,AP-Cor,AP-MI,AP-cCor,AP-cMI\n", 0) == 0);
  CHECK(line_count(table) == 1 + 15 + 2);
  CHECK(table.find("±") != std::string::npos);
}

TEST_CASE("backtest rejects short panels and empty grids") {
  const auto returns = compute_returns(generate_block_panel(testing::two_blocks(1, 120, 3)));
  BacktestConfig config;
  CHECK_THROWS_AS(run_backtest(returns, std::nullopt, config), DataError);
  config.strategies.clear();
  CHECK_THROWS_AS(run_backtest(returns, std::nullopt, config), ConfigError);
}
