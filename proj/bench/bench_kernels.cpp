// Serial reference loops against the OpenMP kernels.

#include "netfolio/graphrep.hpp"
#include "netfolio/market_data.hpp"
#include "netfolio/relational.hpp"
#include "netfolio/selection.hpp"

#include <benchmark/benchmark.h>

#include <chrono>
#include <random>

using namespace netfolio;

namespace {

ReturnPanel random_panel(int days, int assets) {
  std::mt19937_64 rng(7);
  std::normal_distribution<double> normal(0.0, 0.01);
  Eigen::MatrixXd raw(days, assets);
  for (int j = 0; j < assets; ++j) {
    for (int i = 0; i < days; ++i) raw(i, j) = normal(rng);
  }
  std::vector<Date> dates;
  std::chrono::sys_days day{std::chrono::year{2019} / 1 / 1};
  for (int i = 0; i < days; ++i) dates.emplace_back(day + std::chrono::days{i});
  std::vector<std::string> names;
  for (int j = 0; j < assets; ++j) names.push_back("S" + std::to_string(j));
  return make_return_panel(std::move(dates), std::move(names), std::move(raw));
}

Exec mode(const benchmark::State& state) { return state.range(1) == 0 ? Exec::serial : Exec::parallel; }

void BM_Correlation(benchmark::State& state) {
  const auto panel = random_panel(252, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(correlation_matrix(panel, mode(state)).values.data());
}

void BM_MutualInformation(benchmark::State& state) {
  const auto panel = random_panel(252, static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(mutual_information_matrix(panel, 8, mode(state)).values.data());
}

void BM_ClosenessFG(benchmark::State& state) {
  const auto panel = random_panel(252, static_cast<int>(state.range(0)));
  const auto g = build_full_graph(to_distance(correlation_matrix(panel)));
  for (auto _ : state) benchmark::DoNotOptimize(closeness_scores(g, mode(state)).values.data());
}

}  // namespace

BENCHMARK(BM_Correlation)->ArgNames({"assets", "parallel"})->ArgsProduct({{100, 500}, {0, 1}});
BENCHMARK(BM_MutualInformation)->ArgNames({"assets", "parallel"})->ArgsProduct({{100, 500}, {0, 1}});
BENCHMARK(BM_ClosenessFG)->ArgNames({"assets", "parallel"})->ArgsProduct({{100, 300}, {0, 1}});

BENCHMARK_MAIN();
