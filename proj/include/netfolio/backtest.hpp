#pragma once

#include "netfolio/community.hpp"
#include "netfolio/market_data.hpp"
#include "netfolio/selection.hpp"
#include "netfolio/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netfolio {

struct StrategySpec {
  Clusterer clusterer = Clusterer::LV;
  RelationKind relation = RelationKind::Cor;
  Metric metric = Metric::PCA;
  Range range = Range::max;

  /// e.g. "LV-Cor-PCA-max"
  [[nodiscard]] std::string id() const;
  static StrategySpec parse(std::string_view id);

  friend bool operator==(const StrategySpec&, const StrategySpec&) = default;
};

/// All 2 x 4 x 5 x 3 = 120 strategies in canonical order
/// (clusterer, relation, metric, range).
std::vector<StrategySpec> strategy_grid();

/// Grid cells matching a comma-separated list of patterns. Each pattern has
/// four dash-separated fields; `*` matches any value. Empty text selects the
/// whole grid.
std::vector<StrategySpec> filter_strategies(std::string_view patterns);

inline constexpr std::string_view kRandomBaseline = "RANDOM";
inline constexpr std::string_view kIndexBaseline = "INDEX";

enum class Rebalance { daily, buy_and_hold };

struct PortfolioResult {
  std::string strategy_id;
  Date window{};
  std::vector<std::string> symbols;
  std::vector<int> communities;  // contributing community per symbol (strategies only)
  std::vector<double> scores;    // selection score per symbol (strategies only)
  std::vector<Date> dates;
  std::vector<double> daily_returns;  // simple returns
  double cumulative_return = 0.0;     // percent, compounded
  double volatility = 0.0;            // population std of daily_returns
  double ratio = 0.0;                 // cumulative_return / volatility, 0 when volatility == 0
};

/// Fills cumulative_return, volatility and ratio from daily_returns.
void finalize_metrics(PortfolioResult& result);

/// Fixed-weight portfolio over the out-of-sample panel. Weights are indexed
/// by asset column and must sum to 1.
PortfolioResult evaluate_weights(const Eigen::VectorXd& weights, const WindowPair& window,
                                 Rebalance rebalance = Rebalance::daily);

/// Equal-weighted portfolio of `symbols` over the out-of-sample panel.
PortfolioResult evaluate_portfolio(const std::vector<std::string>& symbols,
                                   const WindowPair& window,
                                   Rebalance rebalance = Rebalance::daily);

struct PipelineOptions {
  int portfolio_size = 25;
  int bins = 8;
  ApOptions ap;
  std::uint64_t seed = 0;
  Rebalance rebalance = Rebalance::daily;
  /// Index of the window, mixed into per-window sub-seeds.
  std::uint64_t window_index = 0;
};

class WindowModel;

/// In-sample pipeline artifacts for one window, built lazily and shared by
/// every strategy evaluated on that window. Not thread-safe.
class WindowContext {
 public:
  WindowContext(const WindowPair& window, PipelineOptions options);
  ~WindowContext();
  WindowContext(const WindowContext&) = delete;
  WindowContext& operator=(const WindowContext&) = delete;

  [[nodiscard]] const WindowPair& window() const { return *window_; }
  [[nodiscard]] const PipelineOptions& options() const { return options_; }

  const RelationalMatrix& relation(Clusterer clusterer, RelationKind kind);
  const Partition& partition(Clusterer clusterer, RelationKind kind);
  const AssetScores& scores(Clusterer clusterer, RelationKind kind, Metric metric);
  Selection select(const StrategySpec& spec);

 private:
  const WindowPair* window_;
  PipelineOptions options_;
  std::unique_ptr<WindowModel> model_;
};

/// Full pipeline on the in-sample panel, evaluated out-of-sample.
PortfolioResult run_strategy(const StrategySpec& spec, const WindowPair& window,
                             const PipelineOptions& options);
PortfolioResult run_strategy(const StrategySpec& spec, WindowContext& context);

/// Average of `repetitions` equal-weight portfolios of `portfolio_size`
/// uniformly drawn assets. Cumulative return, volatility and the daily
/// series are averaged; ratio is mean return over mean volatility.
PortfolioResult run_random_baseline(const WindowPair& window, int portfolio_size,
                                    int repetitions, std::uint64_t seed,
                                    Rebalance rebalance = Rebalance::daily);

/// All assets, weighted by cap at window start (equal weights without caps).
PortfolioResult run_index_baseline(const WindowPair& window,
                                   const std::optional<Eigen::VectorXd>& caps,
                                   Rebalance rebalance = Rebalance::daily);

struct StrategySummary {
  std::string strategy_id;
  int windows = 0;
  double mean_return = 0.0;
  double se_return = 0.0;
  double mean_volatility = 0.0;
  double se_volatility = 0.0;
  double mean_ratio = 0.0;
  double se_ratio = 0.0;
};

struct Report {
  std::vector<StrategySummary> strategies;  // first-seen order
  std::vector<StrategySummary> baselines;
  std::vector<std::string> top_return;      // mean return, descending
  std::vector<std::string> top_volatility;  // mean volatility, ascending
  std::vector<std::string> top_ratio;       // mean ratio, descending
};

/// Mean and standard error (sample std / sqrt(n), 0 for one window) per
/// strategy, plus top-k rankings. Baselines are summarized but not ranked.
Report aggregate_and_rank(const std::vector<PortfolioResult>& results, int top_k = 10);

struct BacktestConfig {
  int in_months = 12;
  int out_months = 12;
  int step_months = 1;
  std::vector<StrategySpec> strategies = strategy_grid();
  int random_repetitions = 100;
  int top_k = 10;
  PipelineOptions pipeline;
};

struct BacktestRun {
  std::vector<WindowPair> windows;
  std::vector<PortfolioResult> results;  // window-major; strategies then RANDOM, INDEX
  Report report;
};

/// Runs every configured strategy and both baselines over all windows.
/// Windows are processed in parallel under Exec::parallel; results are stored
/// in canonical order, so serial and parallel runs are identical.
BacktestRun run_backtest(const ReturnPanel& panel, const std::optional<Eigen::VectorXd>& caps,
                         const BacktestConfig& config, Exec exec = Exec::parallel);

/// `strategy_id,window_start,cum_return_pct,volatility,ratio`
std::string results_csv(const BacktestRun& run);
/// Per-strategy mean/SE, baselines and top-k tables.
std::string summary_json(const BacktestRun& run);
/// `date,strategy_id,portfolio_value` for the top-k strategies by ratio and
/// both baselines over the most recent window, normalized to 1 at its start.
std::string value_in_time_csv(const BacktestRun& run, int top_k);

/// `strategy_id,symbol,community_id,score` for every strategy's selection
/// in the most recent window.
std::string selections_csv(const BacktestRun& run);

enum class TableField { mean_return, mean_volatility };
/// Metric/range rows by clusterer/relation columns, cells "mean ± SE",
/// followed by the baseline rows.
std::string strategy_table_csv(const Report& report, TableField field);

}  // namespace netfolio
