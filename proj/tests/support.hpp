#pragma once

#include "netfolio/market_data.hpp"
#include "netfolio/synthetic.hpp"
#include "netfolio/types.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <random>
#include <string>
#include <vector>

namespace testing {

inline netfolio::Date ymd(int y, unsigned m, unsigned d) {
  return netfolio::Date{std::chrono::year{y}, std::chrono::month{m}, std::chrono::day{d}};
}

inline std::vector<std::string> symbols(int n, const std::string& prefix = "S") {
  std::vector<std::string> out;
  for (int i = 0; i < n; ++i) out.push_back(prefix + std::to_string(i));
  return out;
}

// Consecutive calendar days starting at `start`.
inline std::vector<netfolio::Date> days_from(netfolio::Date start, int count) {
  std::vector<netfolio::Date> out;
  std::chrono::sys_days day{start};
  for (int i = 0; i < count; ++i) out.emplace_back(day + std::chrono::days{i});
  return out;
}

inline netfolio::ReturnPanel panel_from_raw(const Eigen::MatrixXd& raw,
                                            netfolio::Date start = ymd(2020, 1, 1)) {
  return netfolio::make_return_panel(days_from(start, static_cast<int>(raw.rows())),
                                     symbols(static_cast<int>(raw.cols())), raw);
}

inline Eigen::MatrixXd gaussian(int rows, int cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd out(rows, cols);
  for (int j = 0; j < cols; ++j) {
    for (int i = 0; i < rows; ++i) out(i, j) = normal(rng);
  }
  return out;
}

// Out-of-sample-only window over simple daily returns given per asset.
inline netfolio::WindowPair window_from_simple(const std::vector<std::vector<double>>& simple,
                                               const std::vector<std::string>& names) {
  const int t_count = static_cast<int>(simple.front().size());
  Eigen::MatrixXd raw(t_count, static_cast<int>(simple.size()));
  for (std::size_t j = 0; j < simple.size(); ++j) {
    for (int t = 0; t < t_count; ++t) raw(t, static_cast<int>(j)) = std::log1p(simple[j][static_cast<std::size_t>(t)]);
  }
  netfolio::WindowPair w;
  w.label = ymd(2021, 1, 1);
  w.out_of_sample = netfolio::make_return_panel(days_from(ymd(2021, 1, 1), t_count), names, raw);
  w.in_sample = w.out_of_sample;
  return w;
}

inline netfolio::FactorModelSpec two_blocks(std::uint64_t seed, int days = 500, int size = 20, double beta = 0.9,
                                            double idio = 0.3) {
  netfolio::FactorModelSpec spec;
  spec.blocks = {{size, beta, 0.0}, {size, beta, 0.0}};
  spec.days = days;
  spec.idiosyncratic_vol = idio;
  spec.seed = seed;
  return spec;
}

// Random symmetric similarity with unit diagonal from random factor loadings.
inline Eigen::MatrixXd random_correlation(int n, std::mt19937_64& rng) {
  std::normal_distribution<double> normal(0.0, 1.0);
  Eigen::MatrixXd f(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) f(i, j) = normal(rng);
  }
  Eigen::MatrixXd c = f * f.transpose();
  const Eigen::VectorXd d = c.diagonal().cwiseSqrt().cwiseInverse();
  c = d.asDiagonal() * c * d.asDiagonal();
  c = (0.5 * (c + c.transpose())).eval();
  c.diagonal().setOnes();
  return c.cwiseMax(-1.0).cwiseMin(1.0);
}

}  // namespace testing
