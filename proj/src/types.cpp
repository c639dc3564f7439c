#include "netfolio/types.hpp"

#include <algorithm>
#include <limits>
#include <string>

namespace netfolio {

std::string_view to_string(RelationKind kind) {
  switch (kind) {
    case RelationKind::Cor: return "Cor";
    case RelationKind::MI: return "MI";
    case RelationKind::cCor: return "cCor";
    case RelationKind::cMI: return "cMI";
  }
  return "?";
}

std::string_view to_string(Clusterer clusterer) {
  return clusterer == Clusterer::LV ? "LV" : "AP";
}

RelationKind parse_relation_kind(std::string_view text) {
  for (auto kind : {RelationKind::Cor, RelationKind::MI, RelationKind::cCor, RelationKind::cMI}) {
    if (text == to_string(kind)) return kind;
  }
  throw ConfigError("unknown relation '" + std::string(text) + "' (expected Cor, MI, cCor, cMI)");
}

Clusterer parse_clusterer(std::string_view text) {
  if (text == "LV") return Clusterer::LV;
  if (text == "AP") return Clusterer::AP;
  throw ConfigError("unknown clusterer '" + std::string(text) + "' (expected LV or AP)");
}

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t a, std::uint64_t b, std::uint64_t c) {
  std::uint64_t h = splitmix64(master);
  h = splitmix64(h ^ a);
  h = splitmix64(h ^ b);
  return splitmix64(h ^ c);
}

int Partition::community_count() const {
  if (labels.empty()) return 0;
  return *std::max_element(labels.begin(), labels.end()) + 1;
}

std::vector<std::vector<int>> Partition::members() const {
  std::vector<std::vector<int>> out(static_cast<std::size_t>(community_count()));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    out[static_cast<std::size_t>(labels[i])].push_back(static_cast<int>(i));
  }
  return out;
}

std::vector<int> canonicalize_labels(const std::vector<int>& labels) {
  // first occurrence order == ascending order of minimum member index
  std::vector<int> out(labels.size());
  std::vector<std::pair<int, int>> seen;  // raw label -> canonical
  for (std::size_t i = 0; i < labels.size(); ++i) {
    auto it = std::find_if(seen.begin(), seen.end(),
                           [&](const auto& p) { return p.first == labels[i]; });
    if (it == seen.end()) {
      seen.emplace_back(labels[i], static_cast<int>(seen.size()));
      out[i] = seen.back().second;
    } else {
      out[i] = it->second;
    }
  }
  return out;
}

}  // namespace netfolio
