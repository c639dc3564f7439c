#include "netfolio/graphrep.hpp"
#include "oracles/spanning_trees.hpp"
#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <sstream>

using namespace netfolio;

namespace {

RelationalMatrix correlation_of(const Eigen::MatrixXd& c) {
  RelationalMatrix rel;
  rel.kind = RelationKind::Cor;
  rel.assets = testing::symbols(static_cast<int>(c.rows()));
  rel.values = c;
  return rel;
}

DistanceMatrix random_distances(int n, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  DistanceMatrix d;
  d.assets = testing::symbols(n);
  d.values = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) d.values(i, j) = d.values(j, i) = unit(rng);
  }
  return d;
}

std::vector<std::vector<double>> nested(const Eigen::MatrixXd& m) {
  std::vector<std::vector<double>> out(m.rows(), std::vector<double>(m.cols()));
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) out[i][j] = m(i, j);
  }
  return out;
}

int find(std::vector<int>& parent, int x) {
  while (parent[x] != x) x = parent[x] = parent[parent[x]];
  return x;
}

int component_count(int n, const std::vector<Edge>& edges) {
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  int count = n;
  for (const auto& e : edges) {
    const int a = find(parent, e.u);
    const int b = find(parent, e.v);
    if (a != b) {
      parent[a] = b;
      --count;
    }
  }
  return count;
}

// Spanning tree from Kruskal over a random edge order.
double random_tree_weight(const DistanceMatrix& d, std::mt19937_64& rng) {
  const int n = static_cast<int>(d.values.rows());
  std::vector<std::pair<int, int>> pairs;
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  std::shuffle(pairs.begin(), pairs.end(), rng);
  std::vector<int> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  double total = 0.0;
  for (auto [i, j] : pairs) {
    const int a = find(parent, i);
    const int b = find(parent, j);
    if (a != b) {
      parent[a] = b;
      total += d.values(i, j);
    }
  }
  return total;
}

}  // namespace

TEST_CASE("correlation distance anchors") {
  Eigen::MatrixXd c(4, 4);
  c << 1, 1, -1, 0,
       1, 1, -1, 0,
       -1, -1, 1, 0,
       0, 0, 0, 1;
  const auto d = correlation_distance(correlation_of(c));
  CHECK(std::abs(d.values(0, 1)) < 1e-12);
  CHECK(std::abs(d.values(0, 2) - 2.0) < 1e-12);
  CHECK(std::abs(d.values(0, 3) - std::sqrt(2.0)) < 1e-12);
  CHECK(d.values.diagonal().isZero(0.0));
}

TEST_CASE("co-occurrence distance is one minus frequency") {
  RelationalMatrix rel;
  rel.kind = RelationKind::cCor;
  rel.assets = testing::symbols(3);
  rel.values.resize(3, 3);
  rel.values << 1, 0.25, 0, 0.25, 1, 0.5, 0, 0.5, 1;
  const auto d = to_distance(rel);
  CHECK(d.kind == RelationKind::cCor);
  CHECK(d.values(0, 1) == 0.75);
  CHECK(d.values(0, 2) == 1.0);
  CHECK(d.values(1, 2) == 0.5);
  CHECK(d.values.diagonal().isZero(0.0));
}

TEST_CASE("correlation distance satisfies the metric axioms") {
  std::mt19937_64 rng(77);
  for (int trial = 0; trial < 100; ++trial) {
    const auto d = correlation_distance(correlation_of(testing::random_correlation(8, rng))).values;
    for (int i = 0; i < 8; ++i) {
      CHECK(d(i, i) == 0.0);
      for (int j = 0; j < 8; ++j) {
        CHECK(d(i, j) >= 0.0);
        CHECK(d(i, j) == d(j, i));
        for (int k = 0; k < 8; ++k) CHECK(d(i, k) <= d(i, j) + d(j, k) + 1e-12);
      }
    }
  }
}

TEST_CASE("MI distance measures the gap to the largest off-diagonal entry") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> unit(0.0, 0.8);
  RelationalMatrix rel;
  rel.kind = RelationKind::MI;
  rel.assets = testing::symbols(5);
  rel.values = Eigen::MatrixXd::Zero(5, 5);
  for (int i = 0; i < 5; ++i) {
    rel.values(i, i) = 2.0;
    for (int j = i + 1; j < 5; ++j) rel.values(i, j) = rel.values(j, i) = unit(rng);
  }
  rel.values(1, 3) = rel.values(3, 1) = 0.0;
  double m = 0.0;
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      if (i != j) m = std::max(m, rel.values(i, j));
    }
  }
  const auto d = to_distance(rel);
  for (int i = 0; i < 5; ++i) {
    for (int j = 0; j < 5; ++j) {
      const double expected = i == j ? 0.0 : std::abs(rel.values(i, j) - m);
      CHECK(d.values(i, j) == expected);
      CHECK(d.values(i, j) >= 0.0);
    }
  }
  CHECK(d.values(1, 3) == m);
  CHECK(d.values.minCoeff() == 0.0);

  rel.values.setConstant(0.3);
  CHECK(mi_distance(rel).values.isZero(0.0));
}

TEST_CASE("full graph enumerates every pair") {
  std::mt19937_64 rng(1);
  for (int n : {1, 3, 10}) {
    const auto d = random_distances(n, rng);
    const auto g = build_full_graph(d);
    REQUIRE(g.edges().size() == static_cast<std::size_t>(n * (n - 1) / 2));
    CHECK(g.shape() == GraphShape::FG);
    for (const auto& e : g.edges()) {
      CHECK(e.u < e.v);
      CHECK(e.weight == d.values(e.u, e.v));
    }
    for (int i = 0; i < n; ++i) CHECK(g.neighbors(i).size() == static_cast<std::size_t>(n - 1));
  }
}

TEST_CASE("MST weight equals the exhaustive minimum") {
  CHECK(oracle::count_spanning_trees(4) == 16);
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 60; ++trial) {
    const int n = 2 + trial % 5;
    const auto d = random_distances(n, rng);
    const auto tree = build_mst(d);
    CHECK(tree.edges().size() == static_cast<std::size_t>(n - 1));
    CHECK(component_count(n, tree.edges()) == 1);
    CHECK(tree.total_weight() == doctest::Approx(oracle::brute_force_mst_weight(nested(d.values))).epsilon(1e-15));
  }
}

TEST_CASE("path-shaped distances give the path") {
  const int n = 7;
  DistanceMatrix d;
  d.assets = testing::symbols(n);
  d.values.resize(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) d.values(i, j) = std::abs(i - j);
  }
  const auto tree = build_mst(d);
  REQUIRE(tree.edges().size() == 6);
  for (int i = 0; i < 6; ++i) CHECK(tree.edges()[i] == Edge{i, i + 1, 1.0});
}

TEST_CASE("tied weights resolve by index order") {
  DistanceMatrix d;
  d.assets = testing::symbols(5);
  d.values = Eigen::MatrixXd::Constant(5, 5, 0.5);
  d.values.diagonal().setZero();
  const auto a = build_mst(d);
  const auto b = build_mst(d);
  CHECK(a.edges() == b.edges());
  for (int i = 1; i < 5; ++i) CHECK(a.edges()[i - 1] == Edge{0, i, 0.5});

  std::mt19937_64 rng(0);
  const auto one = build_mst(random_distances(1, rng));
  CHECK(one.edges().empty());
}

TEST_CASE("MST beats random spanning trees and every edge is a bridge") {
  std::mt19937_64 rng(19);
  for (int trial = 0; trial < 5; ++trial) {
    const int n = 12;
    const auto d = random_distances(n, rng);
    const auto tree = build_mst(d);
    for (int k = 0; k < 1000; ++k) CHECK(tree.total_weight() <= random_tree_weight(d, rng) + 1e-12);
    for (std::size_t cut = 0; cut < tree.edges().size(); ++cut) {
      auto rest = tree.edges();
      rest.erase(rest.begin() + static_cast<std::ptrdiff_t>(cut));
      CHECK(component_count(n, rest) == 2);
    }
    for (const auto& e : tree.edges()) {
      for (int i = 0; i < n; ++i) {
        for (int j = i + 1; j < n; ++j) {
          auto swapped = tree.edges();
          std::replace(swapped.begin(), swapped.end(), e, Edge{i, j, d.values(i, j)});
          if (component_count(n, swapped) == 1) CHECK(d.values(i, j) >= e.weight);
        }
      }
    }
  }
}

TEST_CASE("DOT and edge-list export") {
  DistanceMatrix d;
  d.assets = {"AAA", "BBB", "CCC"};
  d.values.resize(3, 3);
  d.values << 0, 1, 2, 1, 0, 1.5, 2, 1.5, 0;
  const auto tree = build_mst(d);

  std::ostringstream dot;
  write_dot(tree, dot, {0, 0, 1});
  const std::string text = dot.str();
  CHECK(text.rfind("graph MST {", 0) == 0);
  CHECK(text.find("\"AAA\" [community=0];") != std::string::npos);
  CHECK(text.find("\"CCC\" [community=1];") != std::string::npos);
  CHECK(text.find("\"AAA\" -- \"BBB\"") != std::string::npos);
  CHECK(text.find("\"BBB\" -- \"CCC\"") != std::string::npos);
  CHECK(std::count(text.begin(), text.end(), '\n') == 1 + 3 + 2 + 1);

  std::ostringstream csv;
  write_edge_list(tree, csv);
  const std::string rows = csv.str();
  CHECK(rows.rfind("i,j,weight\n0,1,", 0) == 0);
  CHECK(std::count(rows.begin(), rows.end(), '\n') == 3);
}
