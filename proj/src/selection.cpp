#include "netfolio/selection.hpp"

#include <spdlog/spdlog.h>

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <string>

namespace netfolio {

std::string_view to_string(Metric metric) {
  switch (metric) {
    case Metric::PCA: return "PCA";
    case Metric::DegFG: return "DegFG";
    case Metric::CloFG: return "CloFG";
    case Metric::DegMST: return "DegMST";
    case Metric::CloMST: return "CloMST";
  }
  return "?";
}

std::string_view to_string(Range range) {
  switch (range) {
    case Range::max: return "max";
    case Range::med: return "med";
    case Range::min: return "min";
  }
  return "?";
}

Metric parse_metric(std::string_view text) {
  for (auto m : {Metric::PCA, Metric::DegFG, Metric::CloFG, Metric::DegMST, Metric::CloMST}) {
    if (text == to_string(m)) return m;
  }
  throw ConfigError("unknown metric '" + std::string(text) + "'");
}

Range parse_range(std::string_view text) {
  for (auto r : {Range::max, Range::med, Range::min}) {
    if (text == to_string(r)) return r;
  }
  throw ConfigError("unknown range '" + std::string(text) + "'");
}

AssetScores pca_scores(const RelationalMatrix& rel, int components) {
  const auto n = rel.values.rows();
  if (n != rel.values.cols()) throw std::invalid_argument("relational matrix must be square");
  if (components < 1) throw std::invalid_argument("need at least one component");
  AssetScores out;
  out.metric = Metric::PCA;
  out.assets = rel.assets;
  out.scope = ScoreScope::whole_graph;
  out.values = Eigen::VectorXd::Zero(n);
  if (n < 2) return out;

  const Eigen::RowVectorXd mean = rel.values.colwise().mean();
  const Eigen::MatrixXd centered = rel.values.rowwise() - mean;
  const Eigen::MatrixXd cov = centered.transpose() * centered / static_cast<double>(n - 1);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  if (solver.info() != Eigen::Success) throw std::runtime_error("PCA eigendecomposition failed");
  const Eigen::VectorXd& eig = solver.eigenvalues();  // ascending
  const double top = eig[n - 1];
  const double tol = 1e-9 * std::max(std::abs(top), std::numeric_limits<double>::min());

  // Keep the leading `components` axes plus any axis tied with the last one,
  // dropping axes with (numerically) zero variance.
  Eigen::Index keep = std::min<Eigen::Index>(components, n);
  while (keep < n && std::abs(eig[n - keep - 1] - eig[n - keep]) <= tol) ++keep;
  Eigen::Index positive = 0;
  for (Eigen::Index k = 0; k < keep; ++k) {
    if (eig[n - 1 - k] > tol) ++positive;
  }
  if (positive < std::min<Eigen::Index>(components, n)) {
    spdlog::warn("PCA: relational matrix has rank {} < {}; using available components", positive, components);
  }
  if (positive == 0) return out;
  const Eigen::MatrixXd axes = solver.eigenvectors().rightCols(positive);
  const Eigen::MatrixXd projection = centered * axes;
  out.values = projection.rowwise().norm();
  return out;
}

AssetScores degree_scores(const AssetGraph& g, const Partition& partition) {
  if (static_cast<int>(partition.labels.size()) != g.node_count()) {
    throw std::invalid_argument("partition does not cover the graph's nodes");
  }
  AssetScores out;
  out.metric = g.shape() == GraphShape::FG ? Metric::DegFG : Metric::DegMST;
  out.assets = g.nodes();
  out.scope = ScoreScope::per_community;
  out.values = Eigen::VectorXd::Zero(g.node_count());
  for (const auto& e : g.edges()) {
    if (partition.labels[static_cast<std::size_t>(e.u)] == partition.labels[static_cast<std::size_t>(e.v)]) {
      out.values[e.u] += e.weight;
      out.values[e.v] += e.weight;
    }
  }
  return out;
}

namespace {

// Array-based Dijkstra; returns the sum of shortest-path distances from
// `source`, summed in node index order.
double distance_sum(const AssetGraph& g, int source, std::vector<double>& dist, std::vector<char>& done) {
  const int n = g.node_count();
  std::fill(dist.begin(), dist.end(), std::numeric_limits<double>::infinity());
  std::fill(done.begin(), done.end(), 0);
  dist[static_cast<std::size_t>(source)] = 0.0;
  for (int step = 0; step < n; ++step) {
    int u = -1;
    for (int v = 0; v < n; ++v) {
      if (!done[static_cast<std::size_t>(v)] &&
          (u < 0 || dist[static_cast<std::size_t>(v)] < dist[static_cast<std::size_t>(u)])) {
        u = v;
      }
    }
    if (u < 0 || std::isinf(dist[static_cast<std::size_t>(u)])) break;
    done[static_cast<std::size_t>(u)] = 1;
    for (const auto& [v, w] : g.neighbors(u)) {
      const double candidate = dist[static_cast<std::size_t>(u)] + w;
      if (candidate < dist[static_cast<std::size_t>(v)]) dist[static_cast<std::size_t>(v)] = candidate;
    }
  }
  double total = 0.0;
  for (double d : dist) total += d;
  return total;
}

}  // namespace

AssetScores closeness_scores(const AssetGraph& g, Exec exec) {
  const int n = g.node_count();
  AssetScores out;
  out.metric = g.shape() == GraphShape::FG ? Metric::CloFG : Metric::CloMST;
  out.assets = g.nodes();
  out.scope = ScoreScope::whole_graph;
  out.values = Eigen::VectorXd::Zero(n);
  if (n < 2) return out;

  std::vector<double> sums(static_cast<std::size_t>(n), 0.0);
  auto run = [&](int begin, int end) {
    std::vector<double> dist(static_cast<std::size_t>(n));
    std::vector<char> done(static_cast<std::size_t>(n));
    for (int s = begin; s < end; ++s) sums[static_cast<std::size_t>(s)] = distance_sum(g, s, dist, done);
  };
  if (exec == Exec::parallel) {
#pragma omp parallel
    {
      std::vector<double> dist(static_cast<std::size_t>(n));
      std::vector<char> done(static_cast<std::size_t>(n));
#pragma omp for schedule(dynamic, 4)
      for (int s = 0; s < n; ++s) sums[static_cast<std::size_t>(s)] = distance_sum(g, s, dist, done);
    }
  } else {
    run(0, n);
  }

  bool degenerate = false;
  for (int i = 0; i < n; ++i) {
    const double total = sums[static_cast<std::size_t>(i)];
    if (std::isinf(total)) throw std::invalid_argument("closeness needs a connected graph");
    if (total > 0.0) {
      out.values[i] = static_cast<double>(n - 1) / total;
    } else {
      degenerate = true;
    }
  }
  if (degenerate) spdlog::warn("closeness: zero total distance for some nodes; closeness set to 0");
  return out;
}

std::vector<int> pick_range(std::span<const double> values, int k, Range range) {
  const int n = static_cast<int>(values.size());
  if (k < 0 || k > n) throw std::invalid_argument("pick_range: k out of range");
  std::vector<int> idx(static_cast<std::size_t>(n));
  std::iota(idx.begin(), idx.end(), 0);
  auto v = [&](int i) { return values[static_cast<std::size_t>(i)]; };
  switch (range) {
    case Range::max:
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v(a) != v(b) ? v(a) > v(b) : a < b; });
      break;
    case Range::min:
      std::sort(idx.begin(), idx.end(), [&](int a, int b) { return v(a) != v(b) ? v(a) < v(b) : a < b; });
      break;
    case Range::med: {
      if (n == 0) break;
      std::vector<double> sorted(values.begin(), values.end());
      std::sort(sorted.begin(), sorted.end());
      const std::size_t mid = sorted.size() / 2;
      const double median = sorted.size() % 2 == 1 ? sorted[mid] : 0.5 * (sorted[mid - 1] + sorted[mid]);
      auto dist = [&](int i) { return std::abs(v(i) - median); };
      std::sort(idx.begin(), idx.end(),
                [&](int a, int b) { return dist(a) != dist(b) ? dist(a) < dist(b) : a < b; });
      break;
    }
  }
  idx.resize(static_cast<std::size_t>(k));
  return idx;
}

std::vector<int> community_quotas(std::span<const int> sizes, int portfolio_size) {
  if (portfolio_size < 1) throw ConfigError("portfolio size must be at least 1");
  const int q = static_cast<int>(sizes.size());
  std::vector<int> quota(static_cast<std::size_t>(q), 0);
  if (q == 0) return quota;
  const int total = std::accumulate(sizes.begin(), sizes.end(), 0);
  if (portfolio_size >= total) return {sizes.begin(), sizes.end()};

  std::vector<int> order(static_cast<std::size_t>(q));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return sizes[static_cast<std::size_t>(a)] > sizes[static_cast<std::size_t>(b)];
  });
  const int base = portfolio_size / q;
  const int extra = portfolio_size % q;
  int deficit = 0;
  for (int rank = 0; rank < q; ++rank) {
    const auto c = static_cast<std::size_t>(order[static_cast<std::size_t>(rank)]);
    quota[c] = base + (rank < extra ? 1 : 0);
    if (quota[c] > sizes[c]) {
      deficit += quota[c] - sizes[c];
      quota[c] = sizes[c];
    }
  }
  while (deficit > 0) {
    for (int c : order) {
      if (deficit == 0) break;
      if (quota[static_cast<std::size_t>(c)] < sizes[static_cast<std::size_t>(c)]) {
        ++quota[static_cast<std::size_t>(c)];
        --deficit;
      }
    }
  }
  return quota;
}

Selection select_portfolio(const Partition& partition, const AssetScores& scores, const SelectionSpec& spec) {
  if (spec.portfolio_size < 1) throw ConfigError("portfolio size must be at least 1");
  if (scores.assets != partition.assets || static_cast<std::size_t>(scores.values.size()) != partition.labels.size()) {
    throw std::invalid_argument("scores and partition cover different assets");
  }
  const auto members = partition.members();
  std::vector<int> sizes;
  sizes.reserve(members.size());
  for (const auto& m : members) sizes.push_back(static_cast<int>(m.size()));
  if (spec.portfolio_size > static_cast<int>(partition.labels.size())) {
    spdlog::warn("portfolio size {} exceeds universe of {}; taking all assets", spec.portfolio_size,
                 partition.labels.size());
  }
  const auto quotas = community_quotas(sizes, spec.portfolio_size);

  Selection out;
  for (std::size_t c = 0; c < members.size(); ++c) {
    std::vector<double> local;
    local.reserve(members[c].size());
    for (int i : members[c]) local.push_back(scores.values[i]);
    for (int pick : pick_range(local, quotas[c], spec.range)) {
      const int asset = members[c][static_cast<std::size_t>(pick)];
      out.indices.push_back(asset);
      out.communities.push_back(static_cast<int>(c));
      out.scores.push_back(scores.values[asset]);
    }
  }
  return out;
}

}  // namespace netfolio
