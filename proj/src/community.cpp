#include "netfolio/community.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <random>
#include <string>

namespace netfolio {

AssetGraph invert_mst_weights(const AssetGraph& mst) {
  double w_max = 0.0;
  for (const auto& e : mst.edges()) w_max = std::max(w_max, e.weight);
  const double eps = w_max > 0.0 ? 1e-6 * w_max : 1e-6;
  std::vector<Edge> edges = mst.edges();
  for (auto& e : edges) e.weight = (w_max - e.weight) + eps;
  return AssetGraph(mst.shape(), WeightKind::similarity, mst.nodes(), std::move(edges));
}

double modularity(const AssetGraph& g, std::span<const int> labels) {
  const double m = g.total_weight();
  if (!(m > 0.0)) return 0.0;
  const int q = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<double> inside(static_cast<std::size_t>(q), 0.0);
  std::vector<double> degree(static_cast<std::size_t>(q), 0.0);
  for (const auto& e : g.edges()) {
    const int cu = labels[static_cast<std::size_t>(e.u)];
    const int cv = labels[static_cast<std::size_t>(e.v)];
    degree[static_cast<std::size_t>(cu)] += e.weight;
    degree[static_cast<std::size_t>(cv)] += e.weight;
    if (cu == cv) inside[static_cast<std::size_t>(cu)] += e.weight;
  }
  double total = 0.0;
  for (int c = 0; c < q; ++c) {
    const double frac = degree[static_cast<std::size_t>(c)] / (2.0 * m);
    total += inside[static_cast<std::size_t>(c)] / m - frac * frac;
  }
  return total;
}

namespace {

// Graph of the current Louvain level: node self-weight holds the weight of
// original edges collapsed inside the node.
struct LevelGraph {
  std::vector<double> self;
  std::vector<std::vector<std::pair<int, double>>> adjacency;
  std::vector<double> degree;

  [[nodiscard]] int size() const { return static_cast<int>(self.size()); }

  void finish() {
    degree.assign(self.size(), 0.0);
    for (std::size_t i = 0; i < self.size(); ++i) {
      double k = 2.0 * self[i];
      for (const auto& [j, w] : adjacency[i]) k += w;
      degree[i] = k;
    }
  }
};

LevelGraph from_asset_graph(const AssetGraph& g) {
  LevelGraph level;
  level.self.assign(static_cast<std::size_t>(g.node_count()), 0.0);
  level.adjacency.resize(static_cast<std::size_t>(g.node_count()));
  for (int i = 0; i < g.node_count(); ++i) level.adjacency[static_cast<std::size_t>(i)] = g.neighbors(i);
  level.finish();
  return level;
}

// One round of local moving. Returns true if any node changed community.
bool local_moving(const LevelGraph& g, double m, std::vector<int>& community, std::mt19937_64& rng) {
  const int n = g.size();
  community.resize(static_cast<std::size_t>(n));
  std::iota(community.begin(), community.end(), 0);
  std::vector<double> tot = g.degree;
  std::vector<int> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);

  std::vector<double> link(static_cast<std::size_t>(n), 0.0);
  std::vector<int> touched;
  const double two_m = 2.0 * m;
  const double min_gain = 1e-13 * m;
  bool improved = false;
  for (;;) {
    bool moved = false;
    for (int node : order) {
      const auto un = static_cast<std::size_t>(node);
      const int current = community[un];
      const double k = g.degree[un];
      touched.clear();
      for (const auto& [j, w] : g.adjacency[un]) {
        const int c = community[static_cast<std::size_t>(j)];
        if (link[static_cast<std::size_t>(c)] == 0.0) touched.push_back(c);  // weights are > 0
        link[static_cast<std::size_t>(c)] += w;
      }
      tot[static_cast<std::size_t>(current)] -= k;
      int best = current;
      double best_gain = link[static_cast<std::size_t>(current)] - tot[static_cast<std::size_t>(current)] * k / two_m;
      for (int c : touched) {
        const double gain = link[static_cast<std::size_t>(c)] - tot[static_cast<std::size_t>(c)] * k / two_m;
        if (gain > best_gain + min_gain) {
          best = c;
          best_gain = gain;
        }
      }
      tot[static_cast<std::size_t>(best)] += k;
      community[un] = best;
      if (best != current) moved = true;
      for (int c : touched) link[static_cast<std::size_t>(c)] = 0.0;
    }
    if (!moved) break;
    improved = true;
  }
  return improved;
}

// Renumbers `community` densely (by first appearance over node index) and
// returns the aggregated graph.
LevelGraph aggregate(const LevelGraph& g, std::vector<int>& community) {
  std::vector<int> remap(community.size(), -1);
  int next = 0;
  for (auto& c : community) {
    if (remap[static_cast<std::size_t>(c)] < 0) remap[static_cast<std::size_t>(c)] = next++;
    c = remap[static_cast<std::size_t>(c)];
  }
  LevelGraph out;
  out.self.assign(static_cast<std::size_t>(next), 0.0);
  std::vector<std::map<int, double>> links(static_cast<std::size_t>(next));
  for (int i = 0; i < g.size(); ++i) {
    const int ci = community[static_cast<std::size_t>(i)];
    out.self[static_cast<std::size_t>(ci)] += g.self[static_cast<std::size_t>(i)];
    for (const auto& [j, w] : g.adjacency[static_cast<std::size_t>(i)]) {
      if (j < i) continue;  // each undirected edge once
      const int cj = community[static_cast<std::size_t>(j)];
      if (ci == cj) {
        out.self[static_cast<std::size_t>(ci)] += w;
      } else {
        links[static_cast<std::size_t>(ci)][cj] += w;
        links[static_cast<std::size_t>(cj)][ci] += w;
      }
    }
  }
  out.adjacency.resize(static_cast<std::size_t>(next));
  for (int c = 0; c < next; ++c) {
    for (const auto& [d, w] : links[static_cast<std::size_t>(c)]) {
      out.adjacency[static_cast<std::size_t>(c)].emplace_back(d, w);
    }
  }
  out.finish();
  return out;
}

}  // namespace

Partition louvain(const AssetGraph& g, std::uint64_t seed, std::vector<double>* pass_modularity) {
  for (const auto& e : g.edges()) {
    if (!(e.weight > 0.0)) throw std::invalid_argument("Louvain needs strictly positive edge weights");
  }
  const int n = g.node_count();
  Partition result;
  result.assets = g.nodes();
  result.clusterer = Clusterer::LV;
  result.seed = seed;
  std::vector<int> labels(static_cast<std::size_t>(n));
  std::iota(labels.begin(), labels.end(), 0);

  const double m = g.total_weight();
  if (m > 0.0) {
    std::mt19937_64 rng(seed);
    LevelGraph level = from_asset_graph(g);
    std::vector<int> community;
    for (;;) {
      const bool improved = local_moving(level, m, community, rng);
      ++result.iterations;
      if (!improved) break;
      level = aggregate(level, community);
      for (auto& l : labels) l = community[static_cast<std::size_t>(l)];
      if (pass_modularity != nullptr) pass_modularity->push_back(modularity(g, labels));
      if (level.size() == 1) break;
    }
  }
  result.labels = canonicalize_labels(labels);
  result.quality = modularity(g, result.labels);
  return result;
}

double median_off_diagonal(const Eigen::MatrixXd& s) {
  const auto n = s.rows();
  if (n < 2) return n == 1 ? s(0, 0) : 0.0;
  std::vector<double> values;
  values.reserve(static_cast<std::size_t>(n * (n - 1)));
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j) values.push_back(s(i, j));
    }
  }
  std::sort(values.begin(), values.end());
  const std::size_t mid = values.size() / 2;
  if (values.size() % 2 == 1) return values[mid];
  return 0.5 * (values[mid - 1] + values[mid]);
}

namespace {

Partition ap_partition(const Eigen::MatrixXd& s, const std::vector<int>& exemplars, int iterations) {
  const auto n = s.rows();
  Partition p;
  p.clusterer = Clusterer::AP;
  p.iterations = iterations;
  std::vector<int> labels(static_cast<std::size_t>(n));
  double net = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    int best = exemplars.front();
    if (std::find(exemplars.begin(), exemplars.end(), static_cast<int>(i)) != exemplars.end()) {
      best = static_cast<int>(i);
    } else {
      for (int k : exemplars) {
        if (s(i, k) > s(i, best)) best = k;
      }
    }
    labels[static_cast<std::size_t>(i)] = best;
    net += s(i, best);
  }
  p.labels = canonicalize_labels(labels);
  p.quality = net;
  return p;
}

}  // namespace

Eigen::MatrixXd break_ties(const Eigen::MatrixXd& s) {
  const double range = s.size() == 0 ? 0.0 : s.maxCoeff() - s.minCoeff();
  if (!(range > 0.0)) return s;
  std::mt19937_64 rng(0x7AB1E5);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd out = s;
  for (Eigen::Index j = 0; j < s.cols(); ++j) {
    for (Eigen::Index i = 0; i < s.rows(); ++i) out(i, j) += 1e-12 * range * unit(rng);
  }
  return out;
}

Partition affinity_propagation(const Eigen::MatrixXd& similarity, const ApOptions& options) {
  const auto n = similarity.rows();
  if (n != similarity.cols() || n == 0) throw std::invalid_argument("similarity must be square and nonempty");
  if (!(options.damping >= 0.5 && options.damping < 1.0)) {
    throw ConfigError("AP damping must be in [0.5, 1)");
  }
  if (options.max_iter < 1 || options.stable_iter < 1) throw ConfigError("AP iteration counts must be positive");

  Eigen::MatrixXd s = similarity;
  const double preference = options.preference.value_or(median_off_diagonal(similarity));
  s.diagonal().setConstant(preference);
  if (n == 1) return ap_partition(s, {0}, 0);

  // All points mutually equally similar: message passing has no signal.
  bool all_equal = true;
  const double first = s(0, 1);
  for (Eigen::Index i = 0; i < n && all_equal; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      if (i != j && s(i, j) != first) {
        all_equal = false;
        break;
      }
    }
  }
  if (all_equal) {
    std::vector<int> exemplars;
    if (preference > first) {
      exemplars.resize(static_cast<std::size_t>(n));
      std::iota(exemplars.begin(), exemplars.end(), 0);
    } else {
      exemplars.push_back(0);
    }
    return ap_partition(s, exemplars, 0);
  }

  const Eigen::MatrixXd plain = s;  // labels and net similarity use the unperturbed values
  if (options.break_ties) s = break_ties(s);
  const double lambda = options.damping;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(n, n);
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  std::vector<char> exemplar(static_cast<std::size_t>(n), 0);
  std::vector<char> previous(static_cast<std::size_t>(n), 0);
  int same_for = 0;
  for (int it = 1; it <= options.max_iter; ++it) {
    // responsibilities: r(i,k) = s(i,k) - max_{k' != k} (a(i,k') + s(i,k'))
    for (Eigen::Index i = 0; i < n; ++i) {
      double best = -std::numeric_limits<double>::infinity();
      double second = best;
      Eigen::Index best_k = 0;
      for (Eigen::Index k = 0; k < n; ++k) {
        const double v = a(i, k) + s(i, k);
        if (v > best) {
          second = best;
          best = v;
          best_k = k;
        } else if (v > second) {
          second = v;
        }
      }
      for (Eigen::Index k = 0; k < n; ++k) {
        const double fresh = s(i, k) - (k == best_k ? second : best);
        r(i, k) = lambda * r(i, k) + (1.0 - lambda) * fresh;
      }
    }
    // availabilities
    for (Eigen::Index k = 0; k < n; ++k) {
      double positive = 0.0;
      for (Eigen::Index i = 0; i < n; ++i) {
        if (i != k) positive += std::max(0.0, r(i, k));
      }
      for (Eigen::Index i = 0; i < n; ++i) {
        double fresh;
        if (i == k) {
          fresh = positive;
        } else {
          fresh = std::min(0.0, r(k, k) + positive - std::max(0.0, r(i, k)));
        }
        a(i, k) = lambda * a(i, k) + (1.0 - lambda) * fresh;
      }
    }
    int count = 0;
    for (Eigen::Index k = 0; k < n; ++k) {
      exemplar[static_cast<std::size_t>(k)] = (a(k, k) + r(k, k)) > 0.0 ? 1 : 0;
      count += exemplar[static_cast<std::size_t>(k)];
    }
    same_for = (it > 1 && exemplar == previous) ? same_for + 1 : 1;
    previous = exemplar;
    if (same_for >= options.stable_iter && count > 0) {
      std::vector<int> exemplars;
      for (Eigen::Index k = 0; k < n; ++k) {
        if (exemplar[static_cast<std::size_t>(k)]) exemplars.push_back(static_cast<int>(k));
      }
      return ap_partition(plain, exemplars, it);
    }
  }
  std::vector<int> last;
  for (Eigen::Index k = 0; k < n; ++k) {
    if (exemplar[static_cast<std::size_t>(k)]) last.push_back(static_cast<int>(k));
  }
  throw ConvergenceError("affinity propagation did not converge in " + std::to_string(options.max_iter) +
                             " iterations (" + std::to_string(last.size()) + " exemplars at exit)",
                         std::move(last));
}

Partition detect_communities(const RelationalMatrix& relation, Clusterer clusterer,
                             const CommunityOptions& options) {
  Partition p;
  if (clusterer == Clusterer::LV) {
    const auto mst = build_mst(to_distance(relation));
    p = louvain(invert_mst_weights(mst), options.seed);
  } else {
    ApOptions ap = options.ap;
    std::size_t next = 0;
    for (;;) {
      try {
        p = affinity_propagation(relation.values, ap);
        break;
      } catch (const ConvergenceError&) {
        const auto& retry = options.ap_retry_damping;
        while (next < retry.size() && retry[next] <= ap.damping) ++next;
        if (next == retry.size()) throw;
        spdlog::debug("AP retry with damping {}", retry[next]);
        ap.damping = retry[next++];
      }
    }
    p.seed = options.seed;
  }
  p.assets = relation.assets;
  p.relation = relation.kind;
  return p;
}

}  // namespace netfolio
