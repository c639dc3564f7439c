#include "netfolio/io.hpp"

#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <system_error>

namespace netfolio {

std::string format_double(double value) {
  char buf[64];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
  if (ec != std::errc{}) throw std::runtime_error("cannot format double");
  return std::string(buf, ptr);
}

double parse_double(std::string_view text) {
  double value = 0.0;
  if (!text.empty() && text.front() == '+') text.remove_prefix(1);
  auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc{} || ptr != text.data() + text.size()) {
    throw DataError("malformed number '" + std::string(text) + "'");
  }
  return value;
}

std::vector<std::string> split_csv_line(std::string_view line) {
  if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
  std::vector<std::string> cells;
  std::string cell;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cell += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cell += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      cells.push_back(std::move(cell));
      cell.clear();
    } else {
      cell += c;
    }
  }
  cells.push_back(std::move(cell));
  return cells;
}

void write_matrix_csv(const RelationalMatrix& rel, std::ostream& out) {
  out << "symbol";
  for (const auto& s : rel.assets) out << ',' << s;
  out << '\n';
  for (Eigen::Index i = 0; i < rel.values.rows(); ++i) {
    out << rel.assets[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < rel.values.cols(); ++j) out << ',' << format_double(rel.values(i, j));
    out << '\n';
  }
}

RelationalMatrix read_matrix_csv(std::istream& in, RelationKind kind) {
  std::string line;
  if (!std::getline(in, line)) throw DataError("matrix file is empty");
  auto header = split_csv_line(line);
  RelationalMatrix rel;
  rel.kind = kind;
  rel.assets.assign(header.begin() + 1, header.end());
  const auto n = static_cast<Eigen::Index>(rel.assets.size());
  rel.values.resize(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (!std::getline(in, line)) throw DataError("matrix file is truncated");
    auto cells = split_csv_line(line);
    if (static_cast<Eigen::Index>(cells.size()) != n + 1 || cells[0] != rel.assets[static_cast<std::size_t>(i)]) {
      throw DataError("matrix row " + std::to_string(i) + " does not match the header");
    }
    for (Eigen::Index j = 0; j < n; ++j) rel.values(i, j) = parse_double(cells[static_cast<std::size_t>(j) + 1]);
  }
  return rel;
}

void write_partition_csv(const Partition& partition, std::ostream& out) {
  out << "symbol,community_id\n";
  for (std::size_t i = 0; i < partition.assets.size(); ++i) {
    out << partition.assets[i] << ',' << partition.labels[i] << '\n';
  }
}

void OutputSet::add(std::string name, std::string content) {
  files_[std::move(name)] = std::move(content);
}

void OutputSet::commit(const std::filesystem::path& dir) const {
  std::filesystem::create_directories(dir);
  std::vector<std::pair<std::filesystem::path, std::filesystem::path>> staged;
  try {
    for (const auto& [name, content] : files_) {
      auto target = dir / name;
      auto tmp = target;
      tmp += ".tmp";
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      out << content;
      out.close();
      if (!out) throw std::runtime_error("cannot write " + tmp.string());
      staged.emplace_back(tmp, target);
    }
  } catch (...) {
    std::error_code ignored;
    for (const auto& [tmp, target] : staged) std::filesystem::remove(tmp, ignored);
    throw;
  }
  for (const auto& [tmp, target] : staged) std::filesystem::rename(tmp, target);
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot read " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace netfolio
