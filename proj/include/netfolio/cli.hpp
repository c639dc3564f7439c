#pragma once

#include "netfolio/backtest.hpp"
#include "netfolio/community.hpp"
#include "netfolio/io.hpp"
#include "netfolio/types.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace netfolio::cli {

inline constexpr std::string_view kVersion = "0.1.0";

enum ExitCode : int { kOk = 0, kConfigError = 2, kDataError = 3, kConvergenceError = 4 };

enum class Universe { stocks, crypto, custom };

struct RunConfig {
  std::filesystem::path prices;
  std::optional<std::filesystem::path> caps;
  Universe universe = Universe::stocks;
  std::optional<int> portfolio_size;  // required for custom
  int in_months = 12;
  int out_months = 12;
  int step_months = 1;
  int bins = 8;
  double damping = 0.9;
  std::optional<double> preference;
  std::uint64_t seed = 0;
  std::string strategies;  // filter patterns, empty = full grid
  std::filesystem::path out_dir = "out";
  int top_k = 10;
  double coverage = 0.99;
  int random_repetitions = 100;
  Rebalance rebalance = Rebalance::daily;

  // matrix / communities
  std::vector<RelationKind> relations{RelationKind::Cor, RelationKind::MI};
  Clusterer clusterer = Clusterer::LV;
  int window = -1;  // -1: whole panel, else in-sample of that window

  [[nodiscard]] int effective_portfolio_size() const;
};

/// Throws ConfigError on violated invariants (missing files, P < 1, ...).
void validate(const RunConfig& config);

/// Reads a JSON config file whose keys mirror the long flag names
/// (`prices`, `portfolio-size`, ...).
RunConfig load_config_file(const std::filesystem::path& path);

std::string run_manifest_json(const RunConfig& config, std::string_view command);

/// Each command builds its outputs in memory; the caller commits them.
OutputSet cmd_matrix(const RunConfig& config);
OutputSet cmd_communities(const RunConfig& config);
OutputSet cmd_backtest(const RunConfig& config, std::string* console_report = nullptr);

/// Entry point for the `netfolio` tool; returns the process exit code.
int run(int argc, char** argv);

}  // namespace netfolio::cli
