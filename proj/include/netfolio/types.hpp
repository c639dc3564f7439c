#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace netfolio {

/// Selects between the OpenMP kernels and the plain serial reference loops.
/// Both paths produce bit-identical results; the serial one is kept for tests
/// and benchmarking.
enum class Exec { serial, parallel };

enum class RelationKind { Cor, MI, cCor, cMI };
enum class Clusterer { LV, AP };

std::string_view to_string(RelationKind kind);
std::string_view to_string(Clusterer clusterer);
RelationKind parse_relation_kind(std::string_view text);
Clusterer parse_clusterer(std::string_view text);

/// Bad user input: malformed config, unknown names, missing files.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Input data that cannot be turned into a valid panel or window.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Symmetric asset-by-asset similarity matrix.
struct RelationalMatrix {
  RelationKind kind = RelationKind::Cor;
  std::vector<std::string> assets;
  Eigen::MatrixXd values;
  std::string source_window;

  [[nodiscard]] std::size_t size() const { return assets.size(); }
};

/// Assignment of assets to communities. Labels are contiguous from 0 and
/// canonicalized by each community's smallest member index.
struct Partition {
  std::vector<std::string> assets;
  std::vector<int> labels;
  Clusterer clusterer = Clusterer::LV;
  RelationKind relation = RelationKind::Cor;
  double quality = 0.0;  // modularity (LV) or net similarity (AP)
  std::uint64_t seed = 0;
  int iterations = 0;

  [[nodiscard]] int community_count() const;
  [[nodiscard]] std::vector<std::vector<int>> members() const;
};

/// Counter-based sub-seed: splitmix64 chained over the master seed and the
/// stream coordinates, so each (strategy, window, repetition) stream is fixed
/// regardless of evaluation order.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b = 0,
                          std::uint64_t c = 0);

/// Relabels communities 0..Q-1 in ascending order of their smallest member.
std::vector<int> canonicalize_labels(const std::vector<int>& labels);

}  // namespace netfolio
