#include "netfolio/synthetic.hpp"

#include <chrono>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace netfolio {

void validate(const FactorModelSpec& spec) {
  if (spec.blocks.empty()) throw ConfigError("factor model needs at least one block");
  for (const auto& b : spec.blocks) {
    if (b.size < 1) throw ConfigError("block sizes must be at least 1");
    if (!(b.loading >= 0.0 && b.loading <= 1.0)) throw ConfigError("factor loadings must be in [0, 1]");
  }
  if (spec.days < 30) throw ConfigError("factor model needs at least 30 days");
  if (!(spec.idiosyncratic_vol >= 0.0)) throw ConfigError("idiosyncratic vol must be nonnegative");
  if (!(spec.scale > 0.0)) throw ConfigError("return scale must be positive");
}

namespace {

std::vector<Date> weekdays_from(Date start, int count) {
  using namespace std::chrono;
  std::vector<Date> out;
  out.reserve(static_cast<std::size_t>(count));
  sys_days day{start};
  while (static_cast<int>(out.size()) < count) {
    const weekday wd{day};
    if (wd != Saturday && wd != Sunday) out.emplace_back(day);
    day += days{1};
  }
  return out;
}

}  // namespace

PricePanel generate_block_panel(const FactorModelSpec& spec) {
  validate(spec);
  int n = 0;
  for (const auto& b : spec.blocks) n += b.size;
  const int rows = spec.days + 1;

  PricePanel panel;
  panel.dates = weekdays_from(spec.start, rows);
  const std::size_t width = std::to_string(n).size();
  for (int i = 0; i < n; ++i) {
    std::string id = std::to_string(i + 1);
    panel.assets.push_back("A" + std::string(width - id.size(), '0') + id);
  }
  panel.prices.resize(rows, n);
  panel.prices.row(0).setConstant(100.0);

  std::mt19937_64 rng(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> factor(spec.blocks.size());
  for (int t = 1; t < rows; ++t) {
    for (auto& f : factor) f = normal(rng);
    int asset = 0;
    for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
      const auto& block = spec.blocks[b];
      for (int k = 0; k < block.size; ++k, ++asset) {
        const double eps = normal(rng);
        const double r = block.drift + spec.scale * (block.loading * factor[b] + spec.idiosyncratic_vol * eps);
        panel.prices(t, asset) = panel.prices(t - 1, asset) * std::exp(r);
      }
    }
  }
  return panel;
}

std::vector<int> block_labels(const FactorModelSpec& spec) {
  std::vector<int> labels;
  for (std::size_t b = 0; b < spec.blocks.size(); ++b) {
    labels.insert(labels.end(), static_cast<std::size_t>(spec.blocks[b].size), static_cast<int>(b));
  }
  return labels;
}

double rand_index(const std::vector<int>& a, const std::vector<int>& b) {
  if (a.size() != b.size()) throw std::invalid_argument("labelings differ in length");
  const std::size_t n = a.size();
  if (n < 2) return 1.0;
  long agree = 0;
  long total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      agree += ((a[i] == a[j]) == (b[i] == b[j])) ? 1 : 0;
      ++total;
    }
  }
  return static_cast<double>(agree) / static_cast<double>(total);
}

}  // namespace netfolio
