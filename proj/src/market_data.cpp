#include "netfolio/market_data.hpp"

#include "netfolio/io.hpp"

#include <spdlog/spdlog.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_map>

namespace netfolio {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

int parse_int(std::string_view text, std::string_view what) {
  int value = 0;
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("malformed " + std::string(what) + " '" + std::string(text) + "'");
  }
  return value;
}

// Column z-score with population std. Near-constant columns (std within
// rounding of zero relative to their magnitude) become all-zero.
bool zscore_column(const Eigen::Ref<const Eigen::VectorXd>& raw, Eigen::Ref<Eigen::VectorXd> out) {
  const auto n = raw.size();
  if (n == 0) {
    return true;
  }
  const double mean = raw.sum() / static_cast<double>(n);
  double ss = 0.0;
  for (Eigen::Index t = 0; t < n; ++t) ss += (raw[t] - mean) * (raw[t] - mean);
  const double sd = std::sqrt(ss / static_cast<double>(n));
  const double scale = std::max(1.0, raw.cwiseAbs().maxCoeff());
  if (!(sd > 1e-12 * scale)) {
    out.setZero();
    return true;
  }
  for (Eigen::Index t = 0; t < n; ++t) out[t] = (raw[t] - mean) / sd;
  return false;
}

}  // namespace

Date parse_date(std::string_view text) {
  text = trim(text);
  if (text.size() != 10 || text[4] != '-' || text[7] != '-') {
    throw DataError("malformed ISO-8601 date '" + std::string(text) + "'");
  }
  const int y = parse_int(text.substr(0, 4), "year");
  const int m = parse_int(text.substr(5, 2), "month");
  const int d = parse_int(text.substr(8, 2), "day");
  Date date{std::chrono::year{y}, std::chrono::month{static_cast<unsigned>(m)},
            std::chrono::day{static_cast<unsigned>(d)}};
  if (!date.ok()) throw DataError("invalid calendar date '" + std::string(text) + "'");
  return date;
}

std::string format_date(const Date& date) {
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(date.year()),
                static_cast<unsigned>(date.month()), static_cast<unsigned>(date.day()));
  return buf;
}

int month_index(const Date& date) {
  return static_cast<int>(date.year()) * 12 + static_cast<int>(static_cast<unsigned>(date.month())) - 1;
}

PricePanel parse_price_panel(std::istream& in, double coverage_threshold) {
  if (!(coverage_threshold >= 0.0 && coverage_threshold <= 1.0)) {
    throw ConfigError("coverage threshold must be in [0, 1]");
  }
  std::string line;
  if (!std::getline(in, line)) throw DataError("price file is empty");
  auto header = split_csv_line(line);
  if (header.size() < 2) throw DataError("price header must be `date,SYM1,...`");
  const std::size_t n = header.size() - 1;
  std::vector<std::string> symbols(header.begin() + 1, header.end());

  std::vector<Date> dates;
  std::vector<std::vector<double>> rows;  // NaN = missing
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != n + 1) {
      throw DataError("row " + std::to_string(dates.size() + 2) + " has " +
                      std::to_string(cells.size()) + " cells, expected " + std::to_string(n + 1));
    }
    Date date = parse_date(cells[0]);
    if (!dates.empty() && !(dates.back() < date)) {
      throw DataError("dates must be strictly increasing (at " + format_date(date) + ")");
    }
    dates.push_back(date);
    std::vector<double> row(n, std::numeric_limits<double>::quiet_NaN());
    for (std::size_t j = 0; j < n; ++j) {
      auto cell = trim(cells[j + 1]);
      if (!cell.empty()) row[j] = parse_double(cell);
    }
    rows.push_back(std::move(row));
  }
  if (dates.empty()) throw DataError("price file has no data rows");

  const std::size_t t_count = dates.size();
  std::vector<std::size_t> kept;
  for (std::size_t j = 0; j < n; ++j) {
    std::size_t present = 0;
    for (const auto& row : rows) present += std::isnan(row[j]) ? 0 : 1;
    const double coverage = static_cast<double>(present) / static_cast<double>(t_count);
    if (coverage >= coverage_threshold && present > 0) {
      kept.push_back(j);
    } else {
      spdlog::warn("dropping {}: coverage {:.4f} below {:.4f}", symbols[j], coverage,
                   coverage_threshold);
    }
  }
  if (kept.empty()) throw DataError("no asset survives the coverage filter");

  PricePanel panel;
  panel.dates = std::move(dates);
  panel.prices.resize(static_cast<Eigen::Index>(t_count), static_cast<Eigen::Index>(kept.size()));
  for (std::size_t c = 0; c < kept.size(); ++c) {
    const std::size_t j = kept[c];
    panel.assets.push_back(symbols[j]);
    double last = std::numeric_limits<double>::quiet_NaN();
    std::size_t leading = 0;
    for (std::size_t t = 0; t < t_count; ++t) {
      double v = rows[t][j];
      if (std::isnan(v)) {
        if (std::isnan(last)) ++leading;
        v = last;
      } else {
        last = v;
      }
      panel.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = v;
    }
    if (leading > 0) {
      // no earlier price to carry forward: use the first observed one
      double first = 0.0;
      for (std::size_t t = 0; t < t_count; ++t) {
        if (!std::isnan(rows[t][j])) {
          first = rows[t][j];
          break;
        }
      }
      for (std::size_t t = 0; t < leading; ++t) {
        panel.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c)) = first;
      }
      spdlog::warn("{}: {} leading missing prices back-filled", symbols[j], leading);
    }
    for (std::size_t t = 0; t < t_count; ++t) {
      const double v = panel.prices(static_cast<Eigen::Index>(t), static_cast<Eigen::Index>(c));
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw DataError("non-positive price for " + symbols[j] + " on " +
                        format_date(panel.dates[t]));
      }
    }
  }
  return panel;
}

PricePanel load_price_panel(const std::filesystem::path& path, double coverage_threshold) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read price file " + path.string());
  return parse_price_panel(in, coverage_threshold);
}

void write_price_panel(const PricePanel& panel, std::ostream& out) {
  out << "date";
  for (const auto& s : panel.assets) out << ',' << s;
  out << '\n';
  for (Eigen::Index t = 0; t < panel.prices.rows(); ++t) {
    out << format_date(panel.dates[static_cast<std::size_t>(t)]);
    for (Eigen::Index j = 0; j < panel.prices.cols(); ++j) out << ',' << format_double(panel.prices(t, j));
    out << '\n';
  }
}

Eigen::VectorXd parse_caps(std::istream& in, const std::vector<std::string>& assets) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("cap file is empty");
  auto header = split_csv_line(line);
  if (header.size() != 2 || trim(header[0]) != "symbol" || trim(header[1]) != "cap") {
    throw DataError("cap header must be `symbol,cap`");
  }
  std::unordered_map<std::string, double> caps;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    auto cells = split_csv_line(line);
    if (cells.size() != 2) throw DataError("cap row must have two cells: " + line);
    const double cap = parse_double(trim(cells[1]));
    if (!(cap >= 0.0) || !std::isfinite(cap)) {
      throw DataError("negative or invalid cap for " + cells[0]);
    }
    caps[std::string(trim(cells[0]))] = cap;
  }
  Eigen::VectorXd out(static_cast<Eigen::Index>(assets.size()));
  for (std::size_t i = 0; i < assets.size(); ++i) {
    auto it = caps.find(assets[i]);
    if (it == caps.end()) throw DataError("no market cap for " + assets[i]);
    out[static_cast<Eigen::Index>(i)] = it->second;
  }
  if (out.size() > 0 && !(out.sum() > 0.0)) throw DataError("market caps sum to zero");
  return out;
}

Eigen::VectorXd load_caps(const std::filesystem::path& path, const std::vector<std::string>& assets) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot read cap file " + path.string());
  return parse_caps(in, assets);
}

ReturnPanel make_return_panel(std::vector<Date> dates, std::vector<std::string> assets,
                              Eigen::MatrixXd raw_returns) {
  ReturnPanel out;
  out.dates = std::move(dates);
  out.assets = std::move(assets);
  out.raw_returns = std::move(raw_returns);
  out.returns.resize(out.raw_returns.rows(), out.raw_returns.cols());
  out.zero_variance.assign(out.assets.size(), false);
  for (Eigen::Index j = 0; j < out.raw_returns.cols(); ++j) {
    out.zero_variance[static_cast<std::size_t>(j)] =
        zscore_column(out.raw_returns.col(j), out.returns.col(j));
  }
  return out;
}

ReturnPanel ReturnPanel::slice(std::size_t begin, std::size_t end) const {
  end = std::min(end, dates.size());
  begin = std::min(begin, end);
  const auto b = static_cast<Eigen::Index>(begin);
  const auto len = static_cast<Eigen::Index>(end - begin);
  return make_return_panel(std::vector<Date>(dates.begin() + b, dates.begin() + b + len), assets,
                           raw_returns.middleRows(b, len));
}

ReturnPanel compute_returns(const PricePanel& panel) {
  const auto t_count = panel.prices.rows();
  if (t_count < 3) throw DataError("need at least 3 dates to compute returns");
  Eigen::MatrixXd raw(t_count - 1, panel.prices.cols());
  for (Eigen::Index j = 0; j < panel.prices.cols(); ++j) {
    for (Eigen::Index t = 0; t + 1 < t_count; ++t) {
      raw(t, j) = std::log(panel.prices(t + 1, j) / panel.prices(t, j));
    }
  }
  ReturnPanel out = make_return_panel(std::vector<Date>(panel.dates.begin() + 1, panel.dates.end()),
                                      panel.assets, std::move(raw));
  for (std::size_t j = 0; j < out.assets.size(); ++j) {
    if (out.zero_variance[j]) spdlog::warn("{}: constant log-returns, z-scores set to 0", out.assets[j]);
  }
  return out;
}

int span_months(const ReturnPanel& panel) {
  if (panel.dates.empty()) return 0;
  return month_index(panel.dates.back()) - month_index(panel.dates.front()) + 1;
}

namespace {

// First row whose month index is >= target.
std::size_t first_row_at_month(const ReturnPanel& panel, int target) {
  auto it = std::lower_bound(panel.dates.begin(), panel.dates.end(), target,
                             [](const Date& d, int m) { return month_index(d) < m; });
  return static_cast<std::size_t>(it - panel.dates.begin());
}

}  // namespace

std::vector<WindowPair> make_windows(const ReturnPanel& panel, int in_months, int out_months,
                                     int step_months) {
  if (in_months < 1 || out_months < 1 || step_months < 1) {
    throw ConfigError("window lengths and step must be at least one month");
  }
  std::vector<WindowPair> windows;
  const int total = span_months(panel);
  if (total < in_months + out_months) {
    spdlog::warn("panel spans {} months, fewer than {} needed for one window", total,
                 in_months + out_months);
    return windows;
  }
  const int first = month_index(panel.dates.front());
  for (int s = 0; s + in_months + out_months <= total; s += step_months) {
    const std::size_t a = first_row_at_month(panel, first + s);
    const std::size_t b = first_row_at_month(panel, first + s + in_months);
    const std::size_t c = first_row_at_month(panel, first + s + in_months + out_months);
    if (a == b || b == c) {
      spdlog::warn("window starting at month offset {} has an empty period; skipped", s);
      continue;
    }
    WindowPair w{panel.slice(a, b), panel.slice(b, c), panel.dates[a]};
    windows.push_back(std::move(w));
  }
  return windows;
}

std::vector<ReturnPanel> split_months(const ReturnPanel& panel) {
  std::vector<ReturnPanel> out;
  const int total = span_months(panel);
  if (total == 0) return out;
  const int first = month_index(panel.dates.front());
  for (int m = 0; m < total; ++m) {
    out.push_back(panel.slice(first_row_at_month(panel, first + m),
                              first_row_at_month(panel, first + m + 1)));
  }
  return out;
}

}  // namespace netfolio
