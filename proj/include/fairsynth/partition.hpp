#pragma once

#include <compare>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "fairsynth/dataset.hpp"

namespace fairsynth {

/// Protected-value tuple, one category index per protected column.
using GroupTuple = std::vector<std::uint32_t>;

/// Subgroup = protected-value tuple x class label. Ordered lexicographically
/// by tuple, then label; this is the deterministic key order used everywhere.
struct SubgroupKey {
  GroupTuple protected_values;
  int class_label = 0;

  friend auto operator<=>(const SubgroupKey&, const SubgroupKey&) = default;
  friend bool operator==(const SubgroupKey&, const SubgroupKey&) = default;
};

inline std::string to_string(const GroupTuple& g) {
  std::string s;
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) s += '|';
    s += std::to_string(g[i]);
  }
  return s;
}

inline std::string to_string(const SubgroupKey& k) {
  return "(" + to_string(k.protected_values) + ", " + std::to_string(k.class_label) + ")";
}

/// Human-readable tuple using the dataset's category names, e.g. "Female|White".
inline std::string group_label(const Dataset& d, const GroupTuple& g) {
  std::string s;
  const auto& p = d.schema().protected_indices();
  for (std::size_t i = 0; i < g.size(); ++i) {
    if (i) s += '|';
    s += d.categories(p[i])[g[i]];
  }
  return s;
}

inline std::string key_label(const Dataset& d, const SubgroupKey& k) {
  return "(" + group_label(d, k.protected_values) + ", " +
         d.categories(d.schema().target_index())[static_cast<std::size_t>(k.class_label)] + ")";
}

struct SubgroupPartition {
  std::map<SubgroupKey, std::vector<std::size_t>> groups;
  std::size_t source_row_count = 0;
};

using GroupClassCounts = std::map<SubgroupKey, std::size_t>;

/// Every protected tuple of the cartesian product of protected dictionaries,
/// in lexicographic order.
inline std::vector<GroupTuple> all_group_tuples(const Dataset& d) {
  const auto& p = d.schema().protected_indices();
  std::vector<GroupTuple> out{GroupTuple{}};
  for (auto c : p) {
    std::vector<GroupTuple> next;
    for (const auto& prefix : out)
      for (std::uint32_t v = 0; v < d.category_count(c); ++v) {
        auto t = prefix;
        t.push_back(v);
        next.push_back(std::move(t));
      }
    out = std::move(next);
  }
  return out;
}

inline SubgroupPartition partition(const Dataset& d) {
  SubgroupPartition part;
  part.source_row_count = d.rows();
  for (auto& g : all_group_tuples(d))
    for (int y : {0, 1}) part.groups[SubgroupKey{g, y}];
  for (std::size_t r = 0; r < d.rows(); ++r) part.groups[SubgroupKey{d.protected_tuple(r), d.label(r)}].push_back(r);
  return part;
}

inline GroupClassCounts counts_of(const SubgroupPartition& part) {
  GroupClassCounts counts;
  for (const auto& [k, rows] : part.groups) counts[k] = rows.size();
  return counts;
}

/// Synthetic rows for each subgroup, keyed in deterministic key order.
using SyntheticBatches = std::map<SubgroupKey, RowBatch>;

/// Real rows first, then every batch in key order tagged Synthetic.
inline Dataset augment(const Dataset& real, const SyntheticBatches& synthetic) {
  const auto& schema = real.schema();
  const std::size_t m = schema.size();
  RowBatch cells = real.cells();
  auto origin = real.origins();
  for (const auto& [key, batch] : synthetic) {
    if (batch.empty()) continue;
    if (batch.cols() != m) throw Error(ErrorCode::SchemaMismatch, "batch for " + to_string(key) + " has wrong width");
    if (key.protected_values.size() != schema.protected_indices().size())
      throw Error(ErrorCode::SchemaMismatch, "key " + to_string(key) + " has wrong tuple length");
    for (std::size_t r = 0; r < batch.rows(); ++r) {
      auto row = batch.row(r);
      if (row[schema.target_index()] != key.class_label)
        throw Error(ErrorCode::SubgroupLabelMismatch, to_string(key));
      for (std::size_t i = 0; i < key.protected_values.size(); ++i)
        if (row[schema.protected_indices()[i]] != key.protected_values[i])
          throw Error(ErrorCode::SubgroupLabelMismatch, to_string(key));
      cells.push_back(row);
      origin.push_back(Origin::Synthetic);
    }
  }
  // the Dataset constructor re-validates every synthetic cell against the schema
  return Dataset(schema, real.dictionaries(), std::move(cells), std::move(origin));
}

}  // namespace fairsynth
