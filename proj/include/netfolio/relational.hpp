#pragma once

#include "netfolio/community.hpp"
#include "netfolio/market_data.hpp"
#include "netfolio/types.hpp"

#include <Eigen/Dense>

#include <span>
#include <string>
#include <vector>

namespace netfolio {

/// Pearson correlation of the z-scored returns. Pairs involving a
/// zero-variance column are 0 off the diagonal; the diagonal is always 1.
RelationalMatrix correlation_matrix(const ReturnPanel& returns, Exec exec = Exec::parallel);

/// Equal-frequency bin index for every observation. Ties are ordered by
/// observation index, so the i-th smallest value lands in bin
/// floor(i * bins / n). A constant column is degenerate: every observation
/// goes to bin 0 and `degenerate` is set.
struct BinnedSeries {
  std::vector<int> bins;
  int bin_count = 0;
  bool degenerate = false;
};
BinnedSeries quantile_bins(std::span<const double> values, int bins);

/// Plug-in entropy of a binned series, in nats.
double binned_entropy(const BinnedSeries& x);

/// Plug-in mutual information of two binned series of equal length, in nats.
/// Symmetric in its arguments bit for bit.
double binned_mutual_information(const BinnedSeries& x, const BinnedSeries& y);

/// Histogram mutual information on quantile bins (default 8). The diagonal
/// holds each column's entropy.
RelationalMatrix mutual_information_matrix(const ReturnPanel& returns, int bins = 8,
                                           Exec exec = Exec::parallel);

/// Cor or MI matrix of a panel, as requested.
RelationalMatrix base_relation(const ReturnPanel& returns, RelationKind kind, int bins = 8,
                               Exec exec = Exec::parallel);

/// Fraction of partitions in which each pair shares a community. The
/// diagonal is 1. All partitions must cover the same assets.
RelationalMatrix cooccurrence_from_partitions(const std::vector<Partition>& partitions,
                                              RelationKind kind);

struct CooccurrenceResult {
  RelationalMatrix matrix;
  std::vector<Partition> monthly;   // partitions that succeeded, in month order
  std::vector<int> skipped_months;  // month offsets whose clustering failed
};

/// Monthly clustering of `panel` (which must span `months` calendar months
/// with at least 15 trading days each), counted into a co-occurrence matrix.
CooccurrenceResult cooccurrence_matrix(const ReturnPanel& panel, Clusterer clusterer,
                                       RelationKind base_kind, const CommunityOptions& options,
                                       int bins = 8, int months = 12);

/// Mean over consecutive partition pairs of the fraction of pairs, among
/// those sharing a community in at least one of the two, whose same/different
/// status is preserved. A pair of partitions without any such pair counts 1.
double yearly_overlap_coefficient(const std::vector<Partition>& partitions);

}  // namespace netfolio
