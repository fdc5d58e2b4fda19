#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <ostream>
#include <span>
#include <vector>

#include "fairsynth/dataset.hpp"

namespace fairsynth {

struct GbdtConfig {
  std::size_t rounds = 100;
  double learning_rate = 0.1;
  std::size_t max_depth = 6;
  std::size_t min_leaf = 10;
  double lambda = 1.0;
  std::uint64_t seed = 0;  // training is deterministic; kept for provenance

  void validate() const {
    if (rounds < 1) throw Error(ErrorCode::InvalidArgument, "rounds must be >= 1");
    if (!(learning_rate > 0 && learning_rate <= 1)) throw Error(ErrorCode::InvalidArgument, "learning_rate out of (0,1]");
    if (max_depth < 1) throw Error(ErrorCode::InvalidArgument, "max_depth must be >= 1");
    if (min_leaf < 1) throw Error(ErrorCode::InvalidArgument, "min_leaf must be >= 1");
  }
};

namespace logistic {

inline double sigmoid(double margin) { return 1.0 / (1.0 + std::exp(-margin)); }

/// Negative log-likelihood of label y under logit `margin`.
inline double loss(double margin, int y) {
  // log(1 + exp(-s)) for y = 1, log(1 + exp(s)) for y = 0, computed stably
  const double s = y ? margin : -margin;
  return s > 0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
}

inline double gradient(double margin, int y) { return sigmoid(margin) - y; }

inline double hessian(double margin) {
  const double p = sigmoid(margin);
  return p * (1.0 - p);
}

}  // namespace logistic

/// Gradient-boosted regression trees on the logistic loss with Newton leaf
/// weights w = -G / (H + lambda). Protected and target columns are never
/// used as features.
class GbdtModel {
 public:
  struct Node {
    int feature = -1;  // schema column index; -1 for leaves
    double threshold = 0.0;
    std::vector<bool> left_categories;
    int left = -1, right = -1;
    double weight = 0.0;
    bool leaf() const { return feature < 0; }
  };
  using Tree = std::vector<Node>;

  double base_score() const noexcept { return base_score_; }
  const std::vector<Tree>& trees() const noexcept { return trees_; }
  const GbdtConfig& config() const noexcept { return config_; }
  const std::vector<std::size_t>& features() const noexcept { return features_; }
  /// Mean training log-loss of the base model followed by one entry per round.
  const std::vector<double>& loss_history() const noexcept { return loss_history_; }

  double margin(std::span<const double> row) const {
    double sum = 0.0;
    for (const auto& tree : trees_) sum += tree[leaf_of(tree, row)].weight;
    return base_score_ + config_.learning_rate * sum;
  }

  std::vector<double> predict_proba(const Dataset& d) const {
    check_schema(d);
    std::vector<double> out(d.rows());
    for (std::size_t r = 0; r < d.rows(); ++r) out[r] = logistic::sigmoid(margin(d.row(r)));
    return out;
  }

  std::vector<int> predict(const Dataset& d, double threshold = 0.5) const {
    auto p = predict_proba(d);
    std::vector<int> out(p.size());
    for (std::size_t i = 0; i < p.size(); ++i) out[i] = p[i] >= threshold ? 1 : 0;
    return out;
  }

  /// Plain-text dump, one line per node:
  ///   tree <t> node <i> leaf <weight>
  ///   tree <t> node <i> split <column> <= <threshold> left <l> right <r>
  ///   tree <t> node <i> split <column> in {<categories>} left <l> right <r>
  void dump(std::ostream& out) const {
    out << "base_score " << format_value(base_score_) << '\n';
    out << "learning_rate " << format_value(config_.learning_rate) << '\n';
    for (std::size_t t = 0; t < trees_.size(); ++t) {
      for (std::size_t i = 0; i < trees_[t].size(); ++i) {
        const auto& n = trees_[t][i];
        out << "tree " << t << " node " << i;
        if (n.leaf()) {
          out << " leaf " << format_value(n.weight) << '\n';
          continue;
        }
        out << " split " << schema_[static_cast<std::size_t>(n.feature)].name;
        if (n.left_categories.empty()) {
          out << " <= " << format_value(n.threshold);
        } else {
          out << " in {";
          bool first = true;
          for (std::size_t c = 0; c < n.left_categories.size(); ++c)
            if (n.left_categories[c]) {
              out << (first ? "" : ",") << c;
              first = false;
            }
          out << '}';
        }
        out << " left " << n.left << " right " << n.right << '\n';
      }
    }
  }

 private:
  friend GbdtModel train(const Dataset& d, const GbdtConfig& config);

  static std::size_t leaf_of(const Tree& tree, std::span<const double> row) {
    std::size_t i = 0;
    while (!tree[i].leaf()) {
      const auto& n = tree[i];
      const double v = row[static_cast<std::size_t>(n.feature)];
      const bool left = n.left_categories.empty() ? v <= n.threshold
                                                  : n.left_categories[static_cast<std::size_t>(v)];
      i = static_cast<std::size_t>(left ? n.left : n.right);
    }
    return i;
  }

  void check_schema(const Dataset& d) const {
    if (!(d.schema() == schema_)) throw Error(ErrorCode::SchemaMismatch, "columns differ from the training schema");
    for (auto f : features_) {
      if (!schema_.is_discrete(f)) continue;
      for (std::size_t r = 0; r < d.rows(); ++r)
        if (static_cast<std::size_t>(d.at(r, f)) >= category_count_[f])
          throw Error(ErrorCode::SchemaMismatch, "row " + std::to_string(r) + " column '" + schema_[f].name +
                                                     "' holds a category unseen in training");
    }
  }

  DatasetSchema schema_;
  std::vector<std::size_t> category_count_;
  std::vector<std::size_t> features_;
  double base_score_ = 0.0;
  std::vector<Tree> trees_;
  GbdtConfig config_;
  std::vector<double> loss_history_;
};

namespace detail {

/// Histogram binning of one feature over the training rows.
struct FeatureBins {
  std::size_t column = 0;
  bool categorical = false;
  std::size_t bin_count = 0;
  std::vector<double> upper;     // continuous: largest training value in each bin
  std::vector<double> next_min;  // continuous: smallest training value of the following bin
  std::vector<std::uint16_t> bin_of_row;
};

inline FeatureBins bin_feature(const Dataset& d, std::size_t column) {
  constexpr std::size_t kMaxBins = 256;
  FeatureBins fb;
  fb.column = column;
  const std::size_t n = d.rows();
  fb.bin_of_row.resize(n);
  if (d.schema().is_discrete(column)) {
    fb.categorical = true;
    fb.bin_count = d.category_count(column);
    for (std::size_t r = 0; r < n; ++r) fb.bin_of_row[r] = static_cast<std::uint16_t>(d.at(r, column));
    return fb;
  }
  std::vector<double> v(n);
  for (std::size_t r = 0; r < n; ++r) v[r] = d.at(r, column);
  std::sort(v.begin(), v.end());
  std::vector<double> uniq(v.begin(), std::unique(v.begin(), v.end()));
  if (uniq.size() <= kMaxBins) {
    fb.upper = uniq;
  } else {
    for (std::size_t i = 0; i < kMaxBins; ++i) {
      const double b = v[std::max<std::size_t>((i + 1) * n / kMaxBins, 1) - 1];
      if (fb.upper.empty() || b > fb.upper.back()) fb.upper.push_back(b);
    }
    if (fb.upper.back() < uniq.back()) fb.upper.push_back(uniq.back());
  }
  fb.bin_count = fb.upper.size();
  fb.next_min.resize(fb.bin_count);
  for (std::size_t b = 0; b + 1 < fb.bin_count; ++b)
    fb.next_min[b] = *std::upper_bound(uniq.begin(), uniq.end(), fb.upper[b]);
  fb.next_min.back() = fb.upper.back();
  for (std::size_t r = 0; r < n; ++r)
    fb.bin_of_row[r] = static_cast<std::uint16_t>(
        std::lower_bound(fb.upper.begin(), fb.upper.end(), d.at(r, column)) - fb.upper.begin());
  return fb;
}

class BoostedTreeBuilder {
 public:
  BoostedTreeBuilder(const std::vector<FeatureBins>& bins, const GbdtConfig& config, std::span<const double> grad,
                     std::span<const double> hess)
      : bins_(bins), config_(config), grad_(grad), hess_(hess) {
    // categorical features: order categories by mean gradient for this tree
    rank_.resize(bins_.size());
    order_.resize(bins_.size());
    for (std::size_t f = 0; f < bins_.size(); ++f) {
      if (!bins_[f].categorical) continue;
      const std::size_t k = bins_[f].bin_count;
      std::vector<double> sum(k, 0.0);
      std::vector<std::size_t> cnt(k, 0);
      for (std::size_t r = 0; r < grad_.size(); ++r) {
        sum[bins_[f].bin_of_row[r]] += grad_[r];
        ++cnt[bins_[f].bin_of_row[r]];
      }
      std::vector<double> mean(k);
      for (std::size_t c = 0; c < k; ++c) mean[c] = cnt[c] ? sum[c] / static_cast<double>(cnt[c]) : 0.0;
      auto& order = order_[f];
      order.resize(k);
      std::iota(order.begin(), order.end(), std::size_t{0});
      std::stable_sort(order.begin(), order.end(), [&](auto a, auto b) { return mean[a] < mean[b]; });
      rank_[f].resize(k);
      for (std::size_t i = 0; i < k; ++i) rank_[f][order[i]] = static_cast<std::uint16_t>(i);
    }
  }

  GbdtModel::Tree build() {
    std::vector<std::uint32_t> rows(grad_.size());
    std::iota(rows.begin(), rows.end(), 0u);
    tree_.emplace_back();
    grow(0, rows, 0);
    return std::move(tree_);
  }

 private:
  std::size_t ordinal(std::size_t f, std::size_t r) const {
    const auto b = bins_[f].bin_of_row[r];
    return bins_[f].categorical ? rank_[f][b] : b;
  }

  void grow(std::size_t id, std::vector<std::uint32_t>& rows, std::size_t depth) {
    double g = 0, h = 0;
    for (auto r : rows) {
      g += grad_[r];
      h += hess_[r];
    }
    const double lambda = config_.lambda;
    tree_[id].weight = -g / (h + lambda);
    if (depth >= config_.max_depth || rows.size() < 2 * config_.min_leaf) return;

    const double parent = g * g / (h + lambda);
    double best_gain = 0.0;
    std::size_t best_feature = 0, best_bin = 0;
    bool found = false;
    std::vector<double> hg, hh;
    std::vector<std::size_t> hc;
    for (std::size_t f = 0; f < bins_.size(); ++f) {
      const std::size_t k = bins_[f].bin_count;
      hg.assign(k, 0.0);
      hh.assign(k, 0.0);
      hc.assign(k, 0);
      for (auto r : rows) {
        const auto b = ordinal(f, r);
        hg[b] += grad_[r];
        hh[b] += hess_[r];
        ++hc[b];
      }
      double gl = 0, hl = 0;
      std::size_t cl = 0;
      for (std::size_t b = 0; b + 1 < k; ++b) {
        gl += hg[b];
        hl += hh[b];
        cl += hc[b];
        if (hc[b] == 0 && b > 0) continue;  // same partition as the previous bin
        const std::size_t cr = rows.size() - cl;
        if (cl < config_.min_leaf || cr < config_.min_leaf) continue;
        const double gr = g - gl, hr = h - hl;
        const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = f;
          best_bin = b;
          found = true;
        }
      }
    }
    if (!found) return;

    const auto& fb = bins_[best_feature];
    GbdtModel::Node split;
    split.feature = static_cast<int>(fb.column);
    if (fb.categorical) {
      split.left_categories.assign(fb.bin_count, false);
      for (std::size_t i = 0; i <= best_bin; ++i) split.left_categories[order_[best_feature][i]] = true;
    } else {
      // skip empty bins so the threshold sits between occupied neighbours
      split.threshold = 0.5 * (fb.upper[best_bin] + fb.next_min[best_bin]);
    }
    std::vector<std::uint32_t> left, right;
    for (auto r : rows) (ordinal(best_feature, r) <= best_bin ? left : right).push_back(r);
    rows.clear();
    rows.shrink_to_fit();

    split.weight = tree_[id].weight;
    split.left = static_cast<int>(tree_.size());
    split.right = static_cast<int>(tree_.size() + 1);
    tree_[id] = std::move(split);
    tree_.emplace_back();
    tree_.emplace_back();
    const auto left_id = static_cast<std::size_t>(tree_[id].left);
    const auto right_id = static_cast<std::size_t>(tree_[id].right);
    grow(left_id, left, depth + 1);
    grow(right_id, right, depth + 1);
  }

  const std::vector<FeatureBins>& bins_;
  const GbdtConfig& config_;
  std::span<const double> grad_, hess_;
  std::vector<std::vector<std::uint16_t>> rank_;
  std::vector<std::vector<std::size_t>> order_;
  GbdtModel::Tree tree_;
};

}  // namespace detail

inline GbdtModel train(const Dataset& d, const GbdtConfig& config) {
  config.validate();
  const std::size_t n = d.rows();
  std::size_t positives = 0;
  for (std::size_t r = 0; r < n; ++r) positives += static_cast<std::size_t>(d.label(r));
  if (n < 2 || positives == 0 || positives == n)
    throw Error(ErrorCode::SingleClassTraining, std::to_string(positives) + " positives in " + std::to_string(n) +
                                                    " rows");

  GbdtModel model;
  model.schema_ = d.schema();
  model.config_ = config;
  model.category_count_.resize(d.cols());
  for (std::size_t c = 0; c < d.cols(); ++c) model.category_count_[c] = d.category_count(c);
  for (std::size_t c = 0; c < d.cols(); ++c)
    if (d.schema()[c].role == ColumnRole::Feature) model.features_.push_back(c);

  const double rate = static_cast<double>(positives) / static_cast<double>(n);
  model.base_score_ = std::log(rate / (1.0 - rate));

  std::vector<detail::FeatureBins> bins;
  for (auto f : model.features_) bins.push_back(detail::bin_feature(d, f));

  std::vector<int> y(n);
  for (std::size_t r = 0; r < n; ++r) y[r] = d.label(r);
  std::vector<double> margin(n, model.base_score_), grad(n), hess(n);
  auto mean_loss = [&] {
    double s = 0;
    for (std::size_t r = 0; r < n; ++r) s += logistic::loss(margin[r], y[r]);
    return s / static_cast<double>(n);
  };
  model.loss_history_.push_back(mean_loss());

  for (std::size_t t = 0; t < config.rounds; ++t) {
    for (std::size_t r = 0; r < n; ++r) {
      grad[r] = logistic::gradient(margin[r], y[r]);
      hess[r] = logistic::hessian(margin[r]);
    }
    auto tree = detail::BoostedTreeBuilder(bins, config, grad, hess).build();
    for (std::size_t r = 0; r < n; ++r)
      margin[r] += config.learning_rate * tree[GbdtModel::leaf_of(tree, d.row(r))].weight;
    model.trees_.push_back(std::move(tree));
    model.loss_history_.push_back(mean_loss());
  }
  return model;
}

}  // namespace fairsynth
