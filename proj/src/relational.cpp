#include "netfolio/relational.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <stdexcept>
#include <string>

namespace netfolio {

namespace {

// Pearson correlation of two columns, two-pass.
double pearson(const double* x, const double* y, Eigen::Index n, double mean_x, double mean_y) {
  double sxy = 0.0;
  double sxx = 0.0;
  double syy = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) {
    const double dx = x[t] - mean_x;
    const double dy = y[t] - mean_y;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (!(sxx > 0.0) || !(syy > 0.0)) return 0.0;
  return std::clamp(sxy / std::sqrt(sxx * syy), -1.0, 1.0);
}

// Upper-triangle pair list in row-major order; the OpenMP loop walks it with
// dynamic scheduling so short rows do not starve threads.
std::vector<std::pair<int, int>> upper_pairs(int n) {
  std::vector<std::pair<int, int>> pairs;
  pairs.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(std::max(n - 1, 0)) / 2);
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) pairs.emplace_back(i, j);
  }
  return pairs;
}

}  // namespace

RelationalMatrix correlation_matrix(const ReturnPanel& returns, Exec exec) {
  const auto& x = returns.returns;
  const Eigen::Index t_count = x.rows();
  const int n = static_cast<int>(x.cols());
  if (t_count < 2) throw DataError("correlation needs at least 2 observations per asset");

  std::vector<double> means(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    double s = 0.0;
    for (Eigen::Index t = 0; t < t_count; ++t) s += x(t, j);
    means[static_cast<std::size_t>(j)] = s / static_cast<double>(t_count);
  }

  RelationalMatrix rel;
  rel.kind = RelationKind::Cor;
  rel.assets = returns.assets;
  rel.values = Eigen::MatrixXd::Identity(n, n);
  const auto pairs = upper_pairs(n);
  const auto pair_count = static_cast<std::ptrdiff_t>(pairs.size());

  auto cell = [&](std::ptrdiff_t p) {
    const auto [i, j] = pairs[static_cast<std::size_t>(p)];
    double c = 0.0;
    if (!returns.zero_variance[static_cast<std::size_t>(i)] &&
        !returns.zero_variance[static_cast<std::size_t>(j)]) {
      c = pearson(x.col(i).data(), x.col(j).data(), t_count, means[static_cast<std::size_t>(i)],
                  means[static_cast<std::size_t>(j)]);
    }
    rel.values(i, j) = c;
    rel.values(j, i) = c;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t p = 0; p < pair_count; ++p) cell(p);
  } else {
    for (std::ptrdiff_t p = 0; p < pair_count; ++p) cell(p);
  }
  return rel;
}

BinnedSeries quantile_bins(std::span<const double> values, int bins) {
  if (bins < 2) throw std::invalid_argument("need at least 2 bins");
  BinnedSeries out;
  out.bin_count = bins;
  const std::size_t n = values.size();
  out.bins.assign(n, 0);
  if (n == 0) {
    out.degenerate = true;
    return out;
  }
  const auto [lo, hi] = std::minmax_element(values.begin(), values.end());
  if (*lo == *hi) {
    out.degenerate = true;
    return out;
  }
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  for (std::size_t rank = 0; rank < n; ++rank) {
    out.bins[order[rank]] = static_cast<int>(rank * static_cast<std::size_t>(bins) / n);
  }
  return out;
}

double binned_entropy(const BinnedSeries& x) {
  if (x.degenerate || x.bins.empty()) return 0.0;
  std::vector<long> counts(static_cast<std::size_t>(x.bin_count), 0);
  for (int b : x.bins) ++counts[static_cast<std::size_t>(b)];
  const double n = static_cast<double>(x.bins.size());
  double h = 0.0;
  for (long c : counts) {
    if (c > 0) {
      const double p = static_cast<double>(c) / n;
      h -= p * std::log(p);
    }
  }
  return h;
}

double binned_mutual_information(const BinnedSeries& x, const BinnedSeries& y) {
  if (x.bins.size() != y.bins.size()) throw std::invalid_argument("series length mismatch");
  if (x.degenerate || y.degenerate || x.bins.empty()) return 0.0;
  const int bx = x.bin_count;
  const int by = y.bin_count;
  const int b = std::max(bx, by);
  std::vector<long> joint(static_cast<std::size_t>(b * b), 0);
  std::vector<long> cx(static_cast<std::size_t>(b), 0);
  std::vector<long> cy(static_cast<std::size_t>(b), 0);
  for (std::size_t t = 0; t < x.bins.size(); ++t) {
    ++joint[static_cast<std::size_t>(x.bins[t] * b + y.bins[t])];
    ++cx[static_cast<std::size_t>(x.bins[t])];
    ++cy[static_cast<std::size_t>(y.bins[t])];
  }
  const double n = static_cast<double>(x.bins.size());
  auto term = [&](int a, int c) {
    const long nab = joint[static_cast<std::size_t>(a * b + c)];
    if (nab == 0) return 0.0;
    const double ratio = static_cast<double>(nab) * n /
                         (static_cast<double>(cx[static_cast<std::size_t>(a)]) *
                          static_cast<double>(cy[static_cast<std::size_t>(c)]));
    return static_cast<double>(nab) / n * std::log(ratio);
  };
  // Cells (a,c) and (c,a) are added as one pair so swapping x and y only
  // swaps the operands of a commutative addition.
  double mi = 0.0;
  for (int a = 0; a < b; ++a) {
    mi += term(a, a);
    for (int c = a + 1; c < b; ++c) mi += term(a, c) + term(c, a);
  }
  return std::max(mi, 0.0);
}

RelationalMatrix mutual_information_matrix(const ReturnPanel& returns, int bins, Exec exec) {
  if (bins < 2) throw ConfigError("MI needs at least 2 bins");
  const auto& x = returns.returns;
  const int n = static_cast<int>(x.cols());
  if (x.rows() < bins) {
    throw DataError("MI with " + std::to_string(bins) + " bins needs at least that many observations, got " +
                    std::to_string(x.rows()));
  }
  std::vector<BinnedSeries> binned(static_cast<std::size_t>(n));
  auto bin_column = [&](int j) {
    binned[static_cast<std::size_t>(j)] =
        quantile_bins(std::span<const double>(x.col(j).data(), static_cast<std::size_t>(x.rows())), bins);
  };

  RelationalMatrix rel;
  rel.kind = RelationKind::MI;
  rel.assets = returns.assets;
  rel.values = Eigen::MatrixXd::Zero(n, n);
  const auto pairs = upper_pairs(n);
  const auto pair_count = static_cast<std::ptrdiff_t>(pairs.size());
  auto cell = [&](std::ptrdiff_t p) {
    const auto [i, j] = pairs[static_cast<std::size_t>(p)];
    const double m = binned_mutual_information(binned[static_cast<std::size_t>(i)],
                                               binned[static_cast<std::size_t>(j)]);
    rel.values(i, j) = m;
    rel.values(j, i) = m;
  };

  if (exec == Exec::parallel) {
#pragma omp parallel for schedule(static)
    for (int j = 0; j < n; ++j) bin_column(j);
#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t p = 0; p < pair_count; ++p) cell(p);
  } else {
    for (int j = 0; j < n; ++j) bin_column(j);
    for (std::ptrdiff_t p = 0; p < pair_count; ++p) cell(p);
  }
  for (int j = 0; j < n; ++j) rel.values(j, j) = binned_entropy(binned[static_cast<std::size_t>(j)]);
  return rel;
}

RelationalMatrix base_relation(const ReturnPanel& returns, RelationKind kind, int bins, Exec exec) {
  switch (kind) {
    case RelationKind::Cor: return correlation_matrix(returns, exec);
    case RelationKind::MI: return mutual_information_matrix(returns, bins, exec);
    default: throw std::invalid_argument("base_relation needs Cor or MI");
  }
}

RelationalMatrix cooccurrence_from_partitions(const std::vector<Partition>& partitions,
                                              RelationKind kind) {
  if (partitions.empty()) throw std::invalid_argument("no partitions to count");
  const auto& assets = partitions.front().assets;
  const auto n = static_cast<Eigen::Index>(assets.size());
  Eigen::MatrixXd counts = Eigen::MatrixXd::Zero(n, n);
  for (const auto& p : partitions) {
    if (p.assets != assets) throw std::invalid_argument("partitions cover different assets");
    for (Eigen::Index i = 0; i < n; ++i) {
      for (Eigen::Index j = i + 1; j < n; ++j) {
        if (p.labels[static_cast<std::size_t>(i)] == p.labels[static_cast<std::size_t>(j)]) {
          counts(i, j) += 1.0;
        }
      }
    }
  }
  RelationalMatrix rel;
  rel.kind = kind;
  rel.assets = assets;
  rel.values = Eigen::MatrixXd::Identity(n, n);
  const double total = static_cast<double>(partitions.size());
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      rel.values(i, j) = rel.values(j, i) = counts(i, j) / total;
    }
  }
  return rel;
}

CooccurrenceResult cooccurrence_matrix(const ReturnPanel& panel, Clusterer clusterer,
                                       RelationKind base_kind, const CommunityOptions& options,
                                       int bins, int months) {
  if (base_kind != RelationKind::Cor && base_kind != RelationKind::MI) {
    throw std::invalid_argument("co-occurrence base must be Cor or MI");
  }
  const int span = span_months(panel);
  if (span != months) {
    throw DataError("co-occurrence needs exactly " + std::to_string(months) +
                    " calendar months, panel spans " + std::to_string(span));
  }
  auto slices = split_months(panel);
  for (std::size_t m = 0; m < slices.size(); ++m) {
    if (slices[m].rows() < 15) {
      throw DataError("month " + std::to_string(m + 1) + " of the co-occurrence period has " +
                      std::to_string(slices[m].rows()) + " trading days, fewer than 15");
    }
  }

  const auto month_count = static_cast<int>(slices.size());
  std::vector<std::optional<Partition>> monthly(slices.size());
  auto run_month = [&](int m) {
    CommunityOptions month_options = options;
    month_options.seed = derive_seed(options.seed, 0xC0CC, static_cast<std::uint64_t>(m));
    try {
      auto rel = base_relation(slices[static_cast<std::size_t>(m)], base_kind, bins, Exec::serial);
      monthly[static_cast<std::size_t>(m)] = detect_communities(rel, clusterer, month_options);
    } catch (const ConvergenceError& e) {
      spdlog::warn("co-occurrence month {} skipped: {}", m + 1, e.what());
    }
  };
#pragma omp parallel for schedule(dynamic, 1)
  for (int m = 0; m < month_count; ++m) run_month(m);

  CooccurrenceResult result;
  for (int m = 0; m < month_count; ++m) {
    if (monthly[static_cast<std::size_t>(m)]) {
      result.monthly.push_back(std::move(*monthly[static_cast<std::size_t>(m)]));
    } else {
      result.skipped_months.push_back(m);
    }
  }
  if (result.monthly.empty()) {
    throw ConvergenceError("clustering failed in every co-occurrence month", {});
  }
  const RelationKind kind = base_kind == RelationKind::Cor ? RelationKind::cCor : RelationKind::cMI;
  result.matrix = cooccurrence_from_partitions(result.monthly, kind);
  return result;
}

double yearly_overlap_coefficient(const std::vector<Partition>& partitions) {
  if (partitions.size() < 2) throw std::invalid_argument("overlap needs at least 2 partitions");
  double total = 0.0;
  for (std::size_t k = 0; k + 1 < partitions.size(); ++k) {
    const auto& a = partitions[k].labels;
    const auto& b = partitions[k + 1].labels;
    if (a.size() != b.size()) throw std::invalid_argument("partitions cover different assets");
    long either = 0;
    long both = 0;
    for (std::size_t i = 0; i < a.size(); ++i) {
      for (std::size_t j = i + 1; j < a.size(); ++j) {
        const bool in_a = a[i] == a[j];
        const bool in_b = b[i] == b[j];
        if (in_a || in_b) ++either;
        if (in_a && in_b) ++both;
      }
    }
    total += either == 0 ? 1.0 : static_cast<double>(both) / static_cast<double>(either);
  }
  return total / static_cast<double>(partitions.size() - 1);
}

}  // namespace netfolio
