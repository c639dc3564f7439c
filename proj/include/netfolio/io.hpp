#pragma once

#include "netfolio/types.hpp"

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace netfolio {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);
double parse_double(std::string_view text);

std::vector<std::string> split_csv_line(std::string_view line);

/// Square matrix with a header row and a leading symbol column.
void write_matrix_csv(const RelationalMatrix& rel, std::ostream& out);
/// Reads values and symbols; kind and window come from the manifest.
RelationalMatrix read_matrix_csv(std::istream& in, RelationKind kind);

/// `symbol,community_id`
void write_partition_csv(const Partition& partition, std::ostream& out);

/// Collects named output files in memory and commits them together. Each
/// file is written to a temporary name and renamed into place, so a failed
/// run leaves no partial files behind.
class OutputSet {
 public:
  void add(std::string name, std::string content);
  [[nodiscard]] const std::map<std::string, std::string>& files() const { return files_; }
  void commit(const std::filesystem::path& dir) const;

 private:
  std::map<std::string, std::string> files_;
};

std::string read_file(const std::filesystem::path& path);

}  // namespace netfolio
