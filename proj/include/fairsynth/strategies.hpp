#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "fairsynth/error.hpp"
#include "fairsynth/partition.hpp"

namespace fairsynth {

enum class StrategyKind { Class, ClassAndProtected, Protected, ClassRatio };

inline constexpr std::array<StrategyKind, 4> kAllStrategies = {StrategyKind::Class, StrategyKind::ClassAndProtected,
                                                               StrategyKind::Protected, StrategyKind::ClassRatio};

inline std::string_view to_string(StrategyKind s) {
  switch (s) {
    case StrategyKind::Class: return "class";
    case StrategyKind::ClassAndProtected: return "class-protected";
    case StrategyKind::Protected: return "protected";
    case StrategyKind::ClassRatio: return "class-ratio";
  }
  return "class";
}

inline std::optional<StrategyKind> parse_strategy(std::string_view name) {
  for (auto s : kAllStrategies)
    if (to_string(s) == name) return s;
  return std::nullopt;
}

struct SamplingPlan {
  StrategyKind strategy = StrategyKind::Class;
  /// Every key of the source counts, zero where nothing is sampled.
  std::map<SubgroupKey, std::size_t> to_sample;
  double r_aug = 0.0;

  std::size_t total() const {
    std::size_t s = 0;
    for (const auto& [k, n] : to_sample) s += n;
    return s;
  }
};

namespace detail {

struct GroupCounts {
  GroupTuple tuple;
  std::uint64_t neg = 0;  // class 0
  std::uint64_t pos = 0;  // class 1
  std::uint64_t total() const { return neg + pos; }
};

/// Groups with at least one real row, in tuple order. Tuples without any rows
/// (possible for intersections of several protected columns) do not take part.
inline std::vector<GroupCounts> present_groups(const GroupClassCounts& counts) {
  std::map<GroupTuple, GroupCounts> by_tuple;
  for (const auto& [key, n] : counts) {
    auto& g = by_tuple[key.protected_values];
    g.tuple = key.protected_values;
    (key.class_label == 1 ? g.pos : g.neg) += n;
  }
  std::vector<GroupCounts> out;
  for (auto& [t, g] : by_tuple)
    if (g.total() > 0) out.push_back(g);
  return out;
}

/// Largest group total; ties go to the lexicographically smallest tuple.
inline std::size_t largest_group(const std::vector<GroupCounts>& groups) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < groups.size(); ++i)
    if (groups[i].total() > groups[best].total()) best = i;
  return best;
}

// round-half-up of num/den for num >= 0, den > 0
inline std::uint64_t round_ratio(std::uint64_t num, std::uint64_t den) { return (2 * num + den) / (2 * den); }

}  // namespace detail

/// Per-subgroup synthetic counts for one strategy, computed from real counts
/// only. Throws EmptyRequiredSubgroup if a positive count would have to be
/// drawn from an empty subgroup and DegenerateRatio if the class-ratio
/// target is 0 or 1.
inline SamplingPlan plan(StrategyKind strategy, const GroupClassCounts& counts) {
  auto groups = detail::present_groups(counts);
  if (groups.empty()) throw Error(ErrorCode::InvalidArgument, "no subgroup holds any rows");

  SamplingPlan out;
  out.strategy = strategy;
  for (const auto& [k, n] : counts) out.to_sample[k] = 0;

  using detail::GroupCounts;
  auto add = [&](const GroupCounts& g, int label, std::uint64_t n) {
    if (n == 0) return;
    SubgroupKey key{g.tuple, label};
    if ((label == 1 ? g.pos : g.neg) == 0) throw Error(ErrorCode::EmptyRequiredSubgroup, to_string(key));
    out.to_sample[key] += n;
  };
  const auto& largest = groups[detail::largest_group(groups)];
  switch (strategy) {
    case StrategyKind::Class:
      for (const auto& g : groups) {
        if (g.pos > g.neg) add(g, 0, g.pos - g.neg);
        else add(g, 1, g.neg - g.pos);
      }
      break;

    case StrategyKind::ClassAndProtected: {
      // Equals max(pos, neg) of the largest group whenever no subgroup of a
      // smaller group outnumbers it; otherwise the larger count is used so
      // that every subgroup can still be raised to a common size.
      std::uint64_t target = 0;
      for (const auto& g : groups) target = std::max({target, g.pos, g.neg});
      for (const auto& g : groups) {
        add(g, 0, target - g.neg);
        add(g, 1, target - g.pos);
      }
      break;
    }

    case StrategyKind::Protected:
      for (const auto& g : groups) {
        if (&g == &largest) continue;
        const std::uint64_t deficit = largest.total() - g.total();
        const std::uint64_t t = g.total();
        std::uint64_t pos = deficit * g.pos / t;
        std::uint64_t neg = deficit * g.neg / t;
        if (pos + neg < deficit) {
          // largest remainder; exact ties go to class 0
          const std::uint64_t frac_pos = deficit * g.pos % t;
          const std::uint64_t frac_neg = deficit * g.neg % t;
          (frac_pos > frac_neg ? pos : neg) += 1;
        }
        add(g, 1, pos);
        add(g, 0, neg);
      }
      break;

    case StrategyKind::ClassRatio: {
      const std::uint64_t pl = largest.pos, ql = largest.neg, tl = largest.total();
      if (pl == 0 || ql == 0)
        throw Error(ErrorCode::DegenerateRatio, "largest group " + to_string(largest.tuple) + " has a single class");
      for (const auto& g : groups) {
        if (&g == &largest) continue;
        // compare pos_g / t_g with pl / tl exactly in integers
        const std::uint64_t lhs = g.pos * tl, rhs = pl * g.total();
        if (lhs < rhs) add(g, 1, detail::round_ratio(rhs - lhs, ql));
        else if (lhs > rhs) add(g, 0, detail::round_ratio(lhs - rhs, pl));
      }
      break;
    }
  }

  std::uint64_t real = 0;
  for (const auto& [k, n] : counts) real += n;
  const std::uint64_t synth = out.total();
  out.r_aug = static_cast<double>(synth) / static_cast<double>(synth + real);
  return out;
}

struct DistributionRow {
  SubgroupKey key;
  std::size_t real_count = 0;
  std::size_t synthetic_count = 0;
  double real_pct = 0.0;       ///< share of all real rows
  double synthetic_pct = 0.0;  ///< share of the augmented set made of this subgroup's synthetic rows
};

struct DistributionTable {
  StrategyKind strategy = StrategyKind::Class;
  std::vector<DistributionRow> rows;  ///< key order
  double r_aug = 0.0;
};

inline DistributionTable summarize_distribution(const GroupClassCounts& counts, const SamplingPlan& p) {
  DistributionTable t;
  t.strategy = p.strategy;
  t.r_aug = p.r_aug;
  std::size_t real = 0;
  for (const auto& [k, n] : counts) real += n;
  const std::size_t augmented = real + p.total();
  for (const auto& [k, n] : counts) {
    DistributionRow row;
    row.key = k;
    row.real_count = n;
    auto it = p.to_sample.find(k);
    row.synthetic_count = it == p.to_sample.end() ? 0 : it->second;
    row.real_pct = real ? 100.0 * static_cast<double>(n) / static_cast<double>(real) : 0.0;
    row.synthetic_pct =
        augmented ? 100.0 * static_cast<double>(row.synthetic_count) / static_cast<double>(augmented) : 0.0;
    t.rows.push_back(row);
  }
  return t;
}

}  // namespace fairsynth
