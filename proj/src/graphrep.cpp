#include "netfolio/graphrep.hpp"

#include "netfolio/io.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>
#include <stdexcept>
#include <tuple>

namespace netfolio {

AssetGraph::AssetGraph(GraphShape shape, WeightKind weights, std::vector<std::string> nodes,
                       std::vector<Edge> edges)
    : shape_(shape), weights_(weights), nodes_(std::move(nodes)), edges_(std::move(edges)) {
  adjacency_.resize(nodes_.size());
  for (const auto& e : edges_) {
    if (e.u < 0 || e.v < 0 || e.u >= node_count() || e.v >= node_count() || e.u == e.v) {
      throw std::invalid_argument("edge endpoint out of range");
    }
    adjacency_[static_cast<std::size_t>(e.u)].emplace_back(e.v, e.weight);
    adjacency_[static_cast<std::size_t>(e.v)].emplace_back(e.u, e.weight);
  }
  for (auto& list : adjacency_) std::sort(list.begin(), list.end());
}

double AssetGraph::total_weight() const {
  double total = 0.0;
  for (const auto& e : edges_) total += e.weight;
  return total;
}

DistanceMatrix correlation_distance(const RelationalMatrix& rel) {
  DistanceMatrix d;
  d.kind = rel.kind;
  d.assets = rel.assets;
  const auto n = rel.values.rows();
  d.values.resize(n, n);
  switch (rel.kind) {
    case RelationKind::Cor:
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          d.values(i, j) = std::sqrt(2.0 * std::max(0.0, 1.0 - rel.values(i, j)));
        }
      }
      break;
    case RelationKind::cCor:
    case RelationKind::cMI:
      for (Eigen::Index i = 0; i < n; ++i) {
        for (Eigen::Index j = 0; j < n; ++j) {
          d.values(i, j) = std::clamp(1.0 - rel.values(i, j), 0.0, 1.0);
        }
      }
      break;
    case RelationKind::MI: throw std::invalid_argument("use mi_distance for MI matrices");
  }
  d.values.diagonal().setZero();
  return d;
}

DistanceMatrix mi_distance(const RelationalMatrix& rel) {
  if (rel.kind != RelationKind::MI) throw std::invalid_argument("mi_distance needs an MI matrix");
  const auto n = rel.values.rows();
  DistanceMatrix d;
  d.kind = rel.kind;
  d.assets = rel.assets;
  d.values = Eigen::MatrixXd::Zero(n, n);
  if (n < 2) return d;
  double peak = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) peak = std::max(peak, rel.values(i, j));
    }
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) d.values(i, j) = std::abs(rel.values(i, j) - peak);
    }
  }
  return d;
}

DistanceMatrix to_distance(const RelationalMatrix& rel) {
  return rel.kind == RelationKind::MI ? mi_distance(rel) : correlation_distance(rel);
}

AssetGraph build_full_graph(const DistanceMatrix& d) {
  const int n = static_cast<int>(d.values.rows());
  std::vector<Edge> edges;
  edges.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max(n - 1, 0)) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) edges.push_back({i, j, d.values(i, j)});
  }
  return AssetGraph(GraphShape::FG, WeightKind::distance, d.assets, std::move(edges));
}

namespace {

struct DisjointSets {
  explicit DisjointSets(int n) : parent(static_cast<std::size_t>(n)), rank(static_cast<std::size_t>(n), 0) {
    std::iota(parent.begin(), parent.end(), 0);
  }
  int find(int x) {
    while (parent[static_cast<std::size_t>(x)] != x) {
      parent[static_cast<std::size_t>(x)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(x)])];
      x = parent[static_cast<std::size_t>(x)];
    }
    return x;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    if (rank[static_cast<std::size_t>(a)] < rank[static_cast<std::size_t>(b)]) std::swap(a, b);
    parent[static_cast<std::size_t>(b)] = a;
    if (rank[static_cast<std::size_t>(a)] == rank[static_cast<std::size_t>(b)]) ++rank[static_cast<std::size_t>(a)];
    return true;
  }
  std::vector<int> parent;
  std::vector<int> rank;
};

}  // namespace

AssetGraph build_mst(const DistanceMatrix& d) {
  const int n = static_cast<int>(d.values.rows());
  if (n < 1) throw std::invalid_argument("MST needs at least one node");
  std::vector<Edge> candidates;
  candidates.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(n - 1) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) candidates.push_back({i, j, d.values(i, j)});
  }
  std::sort(candidates.begin(), candidates.end(), [](const Edge& a, const Edge& b) {
    return std::tie(a.weight, a.u, a.v) < std::tie(b.weight, b.u, b.v);
  });
  DisjointSets sets(n);
  std::vector<Edge> tree;
  tree.reserve(static_cast<std::size_t>(n - 1));
  for (const auto& e : candidates) {
    if (sets.unite(e.u, e.v)) {
      tree.push_back(e);
      if (static_cast<int>(tree.size()) == n - 1) break;
    }
  }
  return AssetGraph(GraphShape::MST, WeightKind::distance, d.assets, std::move(tree));
}

void write_dot(const AssetGraph& g, std::ostream& out, const std::vector<int>& communities) {
  out << "graph " << (g.shape() == GraphShape::MST ? "MST" : "FG") << " {\n";
  for (int i = 0; i < g.node_count(); ++i) {
    out << "  \"" << g.nodes()[static_cast<std::size_t>(i)] << '"';
    if (!communities.empty()) out << " [community=" << communities[static_cast<std::size_t>(i)] << ']';
    out << ";\n";
  }
  for (const auto& e : g.edges()) {
    out << "  \"" << g.nodes()[static_cast<std::size_t>(e.u)] << "\" -- \""
        << g.nodes()[static_cast<std::size_t>(e.v)] << "\" [weight=" << format_double(e.weight) << "];\n";
  }
  out << "}\n";
}

void write_edge_list(const AssetGraph& g, std::ostream& out) {
  out << "i,j,weight\n";
  for (const auto& e : g.edges()) out << e.u << ',' << e.v << ',' << format_double(e.weight) << '\n';
}

}  // namespace netfolio
