#pragma once

#include "netfolio/graphrep.hpp"
#include "netfolio/types.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace netfolio {

/// Reflects MST distances into similarities: w' = (w_max - w) + eps,
/// eps = 1e-6 * w_max (1e-6 when w_max == 0). Edge set is unchanged.
AssetGraph invert_mst_weights(const AssetGraph& mst);

/// Weighted Newman modularity at resolution 1. Zero for graphs without edges.
double modularity(const AssetGraph& g, std::span<const int> labels);

/// Multi-level Louvain. Node sweep order is shuffled from `seed` at every
/// level. When `pass_modularity` is given, the modularity of the labels on
/// the input graph is appended after every local-moving pass.
Partition louvain(const AssetGraph& g, std::uint64_t seed,
                  std::vector<double>* pass_modularity = nullptr);

struct ApOptions {
  std::optional<double> preference;  // unset: median of off-diagonal similarities
  double damping = 0.9;
  int max_iter = 1000;
  int stable_iter = 100;
  /// Add tie-breaking noise (see break_ties) before message passing.
  bool break_ties = true;
};

/// Thrown when affinity propagation does not settle within max_iter.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, std::vector<int> exemplars)
      : std::runtime_error(what), exemplars_(std::move(exemplars)) {}
  [[nodiscard]] const std::vector<int>& last_exemplars() const { return exemplars_; }

 private:
  std::vector<int> exemplars_;
};

/// Median of the strictly off-diagonal entries (mean of the two middle ones
/// for an even count).
double median_off_diagonal(const Eigen::MatrixXd& s);

/// Adds deterministic noise of magnitude below 1e-12 times the range of `s`
/// to every entry. Exactly tied similarities otherwise leave message passing
/// in a symmetric state that never selects an exemplar.
Eigen::MatrixXd break_ties(const Eigen::MatrixXd& s);

/// Affinity propagation on a square similarity matrix. The diagonal of `s`
/// is ignored and replaced by the preference.
Partition affinity_propagation(const Eigen::MatrixXd& s, const ApOptions& options = {});

struct CommunityOptions {
  std::uint64_t seed = 0;
  ApOptions ap;
  /// Dampings tried in turn when AP fails to converge; values not above
  /// ap.damping are skipped.
  std::vector<double> ap_retry_damping{0.95, 0.99};
};

/// LV: relation -> distance -> MST -> inverted weights -> Louvain.
/// AP: relation values used directly as similarities, retried with the
/// higher dampings of `ap_retry_damping` before a ConvergenceError escapes.
Partition detect_communities(const RelationalMatrix& relation, Clusterer clusterer,
                             const CommunityOptions& options = {});

}  // namespace netfolio
