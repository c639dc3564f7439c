#pragma once

#include "netfolio/types.hpp"

#include <Eigen/Dense>

#include <chrono>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace netfolio {

using Date = std::chrono::year_month_day;

Date parse_date(std::string_view text);
std::string format_date(const Date& date);

/// Months since year 0, used for calendar-month arithmetic.
int month_index(const Date& date);

/// Aligned date x asset matrix of raw prices.
struct PricePanel {
  std::vector<Date> dates;
  std::vector<std::string> assets;
  Eigen::MatrixXd prices;  // rows = dates, cols = assets
  std::optional<Eigen::VectorXd> caps;
};

/// Log-returns and their per-column z-scores (population std).
struct ReturnPanel {
  std::vector<Date> dates;  // date of the later price in each return
  std::vector<std::string> assets;
  Eigen::MatrixXd returns;
  Eigen::MatrixXd raw_returns;
  std::vector<bool> zero_variance;

  [[nodiscard]] std::size_t rows() const { return dates.size(); }
  [[nodiscard]] std::size_t cols() const { return assets.size(); }

  /// Rows [begin, end) with the z-scores recomputed on the slice.
  [[nodiscard]] ReturnPanel slice(std::size_t begin, std::size_t end) const;
};

struct WindowPair {
  ReturnPanel in_sample;
  ReturnPanel out_of_sample;
  Date label;
};

PricePanel parse_price_panel(std::istream& in, double coverage_threshold = 0.99);
PricePanel load_price_panel(const std::filesystem::path& path, double coverage_threshold = 0.99);

/// Writes a panel in the input CSV format. Values use shortest round-trip
/// formatting, so re-loading is bit-identical.
void write_price_panel(const PricePanel& panel, std::ostream& out);

/// Reads `symbol,cap` rows and aligns them to `assets`. Every asset must
/// have a nonnegative cap.
Eigen::VectorXd parse_caps(std::istream& in, const std::vector<std::string>& assets);
Eigen::VectorXd load_caps(const std::filesystem::path& path, const std::vector<std::string>& assets);

/// Builds a ReturnPanel from raw log-returns, z-scoring each column.
ReturnPanel make_return_panel(std::vector<Date> dates, std::vector<std::string> assets,
                              Eigen::MatrixXd raw_returns);

ReturnPanel compute_returns(const PricePanel& panel);

/// Sliding calendar-month windows. Returns an empty list (and logs a
/// warning) when the panel spans fewer than in_months + out_months.
std::vector<WindowPair> make_windows(const ReturnPanel& panel, int in_months = 12,
                                     int out_months = 12, int step_months = 1);

/// Number of calendar months from the first to the last date, inclusive.
int span_months(const ReturnPanel& panel);

/// Splits a panel into one slice per calendar month, in order. Months with no
/// trading days yield empty slices so the result always has span_months()
/// entries.
std::vector<ReturnPanel> split_months(const ReturnPanel& panel);

}  // namespace netfolio
