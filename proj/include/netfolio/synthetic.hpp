#pragma once

#include "netfolio/market_data.hpp"

#include <cstdint>
#include <vector>

namespace netfolio {

struct FactorBlock {
  int size = 1;
  double loading = 0.5;  // in [0, 1]
  double drift = 0.0;    // per-day log drift
};

/// One-factor-per-block generator. Asset i of block b has log-return
///   drift_b + scale * (loading_b * f_b(t) + idiosyncratic_vol * e_i(t))
/// with f_b, e_i independent standard normals.
struct FactorModelSpec {
  std::vector<FactorBlock> blocks;
  int days = 500;  // number of returns; the panel has days + 1 price rows
  double idiosyncratic_vol = 0.3;
  double scale = 0.01;
  std::uint64_t seed = 0;
  Date start{std::chrono::year{2019}, std::chrono::January, std::chrono::day{1}};
};

void validate(const FactorModelSpec& spec);

/// Prices start at 100 on the first weekday on or after `start` and follow
/// a Monday-to-Friday calendar.
PricePanel generate_block_panel(const FactorModelSpec& spec);

/// Block index of every generated asset.
std::vector<int> block_labels(const FactorModelSpec& spec);

/// Rand index between two labelings of the same items.
double rand_index(const std::vector<int>& a, const std::vector<int>& b);

}  // namespace netfolio
