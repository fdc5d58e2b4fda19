#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "fairsynth/error.hpp"
#include "fairsynth/partition.hpp"

namespace fairsynth {

/// Held-out predictions with the protected tuple of every row.
struct EvalFrame {
  std::vector<int> y_true;
  std::vector<double> y_score;
  std::vector<int> y_pred;
  std::vector<GroupTuple> group_of_row;
  /// Groups that should be reported even when no row falls into them.
  std::vector<GroupTuple> known_groups;

  std::size_t size() const noexcept { return y_true.size(); }

  void validate() const {
    if (y_true.empty()) throw Error(ErrorCode::InvalidArgument, "evaluation frame is empty");
    if (y_score.size() != y_true.size() || y_pred.size() != y_true.size() || group_of_row.size() != y_true.size())
      throw Error(ErrorCode::InvalidArgument, "evaluation frame columns differ in length");
  }
};

/// (metric, group) pair whose conditional rate had empty support.
struct UndefinedFlag {
  std::string metric;
  std::string group;
  friend auto operator<=>(const UndefinedFlag&, const UndefinedFlag&) = default;
};
using FlagSet = std::set<UndefinedFlag>;

struct MetricReport {
  double accuracy = 0.0;
  double f1 = 0.0;
  double roc_auc = 0.0;
  double eq_odds = 0.0;
  double stat_parity = 0.0;
  double eq_opp = 0.0;
  FlagSet undefined_flags;
};

inline double accuracy(const EvalFrame& f) {
  f.validate();
  std::size_t hit = 0;
  for (std::size_t i = 0; i < f.size(); ++i) hit += f.y_true[i] == f.y_pred[i];
  return static_cast<double>(hit) / static_cast<double>(f.size());
}

/// F1 of the positive class. When precision or recall is undefined (no
/// predicted or no true positives) it is reported as 0 and flagged.
inline double f1(const EvalFrame& f, FlagSet* flags = nullptr) {
  f.validate();
  std::size_t tp = 0, fp = 0, fn = 0;
  for (std::size_t i = 0; i < f.size(); ++i) {
    if (f.y_pred[i] && f.y_true[i]) ++tp;
    else if (f.y_pred[i]) ++fp;
    else if (f.y_true[i]) ++fn;
  }
  if (tp + fp == 0 || tp + fn == 0) {
    if (flags) flags->insert({"f1", "*"});
    return 0.0;
  }
  return 2.0 * static_cast<double>(tp) / static_cast<double>(2 * tp + fp + fn);
}

/// Area under the ROC curve via mid-ranks, equal to the Mann-Whitney
/// statistic with half credit for ties.
inline double roc_auc(const EvalFrame& f) {
  f.validate();
  const std::size_t n = f.size();
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::sort(order.begin(), order.end(), [&](auto a, auto b) { return f.y_score[a] < f.y_score[b]; });
  double rank_sum = 0.0;
  std::size_t pos = 0;
  for (std::size_t i = 0; i < n;) {
    std::size_t j = i;
    std::size_t block_pos = 0;
    while (j < n && f.y_score[order[j]] == f.y_score[order[i]]) block_pos += static_cast<std::size_t>(f.y_true[order[j++]]);
    // 1-based ranks i+1..j share the mean (i + 1 + j) / 2
    rank_sum += static_cast<double>(block_pos) * 0.5 * static_cast<double>(i + 1 + j);
    pos += block_pos;
    i = j;
  }
  const std::size_t neg = n - pos;
  if (pos == 0 || neg == 0) throw Error(ErrorCode::AucUndefined, "ROC AUC needs both classes");
  const double p = static_cast<double>(pos);
  return (rank_sum - p * (p + 1) / 2.0) / (p * static_cast<double>(neg));
}

namespace detail {

struct GroupRates {
  std::size_t n = 0, pos = 0, neg = 0;
  std::size_t pred_pos = 0, tp = 0, fp = 0;
};

inline std::map<GroupTuple, GroupRates> group_rates(const EvalFrame& f) {
  std::map<GroupTuple, GroupRates> out;
  for (const auto& g : f.known_groups) out[g];
  for (std::size_t i = 0; i < f.size(); ++i) {
    auto& g = out[f.group_of_row[i]];
    ++g.n;
    if (f.y_true[i]) {
      ++g.pos;
      g.tp += static_cast<std::size_t>(f.y_pred[i]);
    } else {
      ++g.neg;
      g.fp += static_cast<std::size_t>(f.y_pred[i]);
    }
    g.pred_pos += static_cast<std::size_t>(f.y_pred[i]);
  }
  return out;
}

// max - min over the groups where the rate is defined; false when none is
template <typename Rate>
bool rate_spread(const std::map<GroupTuple, GroupRates>& groups, Rate rate, const char* metric, FlagSet* flags,
                 double& spread) {
  double lo = 0, hi = 0;
  bool any = false;
  for (const auto& [tuple, g] : groups) {
    double v;
    if (!rate(g, v)) {
      if (flags) flags->insert({metric, to_string(tuple)});
      continue;
    }
    lo = any ? std::min(lo, v) : v;
    hi = any ? std::max(hi, v) : v;
    any = true;
  }
  spread = any ? hi - lo : 0.0;
  return any;
}

inline bool tpr(const GroupRates& g, double& v) {
  if (!g.pos) return false;
  v = static_cast<double>(g.tp) / static_cast<double>(g.pos);
  return true;
}

inline bool fpr(const GroupRates& g, double& v) {
  if (!g.neg) return false;
  v = static_cast<double>(g.fp) / static_cast<double>(g.neg);
  return true;
}

inline bool positive_rate(const GroupRates& g, double& v) {
  if (!g.n) return false;
  v = static_cast<double>(g.pred_pos) / static_cast<double>(g.n);
  return true;
}

}  // namespace detail

/// TPR spread plus FPR spread across groups (|a - b| sums for two groups).
inline double equalized_odds(const EvalFrame& f, FlagSet* flags = nullptr) {
  f.validate();
  auto groups = detail::group_rates(f);
  double t = 0, p = 0;
  const bool has_t = detail::rate_spread(groups, detail::tpr, "eq_odds", flags, t);
  const bool has_p = detail::rate_spread(groups, detail::fpr, "eq_odds", flags, p);
  if (!has_t && !has_p) throw Error(ErrorCode::AllRatesUndefined, "eq_odds");
  return t + p;
}

inline double statistical_parity(const EvalFrame& f, FlagSet* flags = nullptr) {
  f.validate();
  double s = 0;
  if (!detail::rate_spread(detail::group_rates(f), detail::positive_rate, "stat_parity", flags, s))
    throw Error(ErrorCode::AllRatesUndefined, "stat_parity");
  return s;
}

inline double equal_opportunity(const EvalFrame& f, FlagSet* flags = nullptr) {
  f.validate();
  double s = 0;
  if (!detail::rate_spread(detail::group_rates(f), detail::tpr, "eq_opp", flags, s))
    throw Error(ErrorCode::AllRatesUndefined, "eq_opp");
  return s;
}

inline MetricReport evaluate(const EvalFrame& f) {
  MetricReport r;
  r.accuracy = accuracy(f);
  r.f1 = f1(f, &r.undefined_flags);
  r.roc_auc = roc_auc(f);
  r.eq_odds = equalized_odds(f, &r.undefined_flags);
  r.stat_parity = statistical_parity(f, &r.undefined_flags);
  r.eq_opp = equal_opportunity(f, &r.undefined_flags);
  return r;
}

}  // namespace fairsynth
