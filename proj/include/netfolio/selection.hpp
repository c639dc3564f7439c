#pragma once

#include "netfolio/graphrep.hpp"
#include "netfolio/types.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace netfolio {

enum class Metric { PCA, DegFG, CloFG, DegMST, CloMST };
enum class Range { max, med, min };
enum class ScoreScope { whole_graph, per_community };

std::string_view to_string(Metric metric);
std::string_view to_string(Range range);
Metric parse_metric(std::string_view text);
Range parse_range(std::string_view text);

struct AssetScores {
  Metric metric = Metric::PCA;
  std::vector<std::string> assets;
  Eigen::VectorXd values;
  ScoreScope scope = ScoreScope::whole_graph;
};

struct SelectionSpec {
  Metric metric = Metric::PCA;
  Range range = Range::max;
  int portfolio_size = 25;
};

/// Rows of the relational matrix are the feature vectors. Each asset's score
/// is the norm of its centered row projected on the leading `components`
/// principal axes. Axes whose eigenvalue ties the last retained one are kept
/// too, so the retained subspace does not depend on the eigensolver's basis.
AssetScores pca_scores(const RelationalMatrix& rel, int components = 3);

/// Weighted degree (sum of incident distances) inside each community's
/// induced subgraph. Metric is DegFG or DegMST according to the graph.
AssetScores degree_scores(const AssetGraph& g, const Partition& partition);

/// (N-1) / sum of shortest-path distances, over the whole graph.
AssetScores closeness_scores(const AssetGraph& g, Exec exec = Exec::parallel);

/// Indices of the k largest (max), smallest (min) or closest-to-median (med)
/// values, ties broken by ascending index. Order: max descending, min
/// ascending, med by distance to the median.
std::vector<int> pick_range(std::span<const double> values, int k, Range range);

/// Per-community asset counts for a portfolio of `portfolio_size` assets.
/// `sizes[c]` is the member count of community c. The base quota is P / Q;
/// the P mod Q extra slots go to the largest communities (ties by id). A
/// community that cannot fill its quota contributes all members and the
/// deficit passes, one slot at a time, to the largest communities that still
/// have spare members.
std::vector<int> community_quotas(std::span<const int> sizes, int portfolio_size);

struct Selection {
  std::vector<int> indices;      // asset indices, grouped by community
  std::vector<int> communities;  // contributing community of each index
  std::vector<double> scores;
};

Selection select_portfolio(const Partition& partition, const AssetScores& scores,
                           const SelectionSpec& spec);

}  // namespace netfolio
