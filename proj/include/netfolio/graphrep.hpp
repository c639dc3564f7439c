#pragma once

#include "netfolio/types.hpp"

#include <Eigen/Dense>

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

namespace netfolio {

struct DistanceMatrix {
  RelationKind kind = RelationKind::Cor;
  std::vector<std::string> assets;
  Eigen::MatrixXd values;
};

struct Edge {
  int u = 0;  // u < v
  int v = 0;
  double weight = 0.0;

  friend bool operator==(const Edge&, const Edge&) = default;
};

enum class GraphShape { FG, MST };
enum class WeightKind { distance, similarity };

/// Weighted undirected graph over assets. Immutable after construction.
class AssetGraph {
 public:
  AssetGraph() = default;
  AssetGraph(GraphShape shape, WeightKind weights, std::vector<std::string> nodes,
             std::vector<Edge> edges);

  [[nodiscard]] GraphShape shape() const { return shape_; }
  [[nodiscard]] WeightKind weight_kind() const { return weights_; }
  [[nodiscard]] const std::vector<std::string>& nodes() const { return nodes_; }
  [[nodiscard]] int node_count() const { return static_cast<int>(nodes_.size()); }
  [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
  /// Neighbors of `node` as (neighbor, weight), sorted by neighbor index.
  [[nodiscard]] const std::vector<std::pair<int, double>>& neighbors(int node) const {
    return adjacency_[static_cast<std::size_t>(node)];
  }
  [[nodiscard]] double total_weight() const;

 private:
  GraphShape shape_ = GraphShape::FG;
  WeightKind weights_ = WeightKind::distance;
  std::vector<std::string> nodes_;
  std::vector<Edge> edges_;
  std::vector<std::vector<std::pair<int, double>>> adjacency_;
};

/// sqrt(2(1 - C)) for correlations; 1 - frequency for co-occurrence kinds.
DistanceMatrix correlation_distance(const RelationalMatrix& rel);

/// |M_ij - m| with m the largest off-diagonal entry; diagonal forced to 0.
DistanceMatrix mi_distance(const RelationalMatrix& rel);

/// Dispatches to the transform that matches rel.kind.
DistanceMatrix to_distance(const RelationalMatrix& rel);

AssetGraph build_full_graph(const DistanceMatrix& d);

/// Kruskal with ties ordered by (weight, min index, max index).
AssetGraph build_mst(const DistanceMatrix& d);

/// DOT export. `communities`, when non-empty, adds a `community` attribute
/// per node.
void write_dot(const AssetGraph& g, std::ostream& out, const std::vector<int>& communities = {});
/// Edge list CSV `i,j,weight` using node indices.
void write_edge_list(const AssetGraph& g, std::ostream& out);

}  // namespace netfolio
