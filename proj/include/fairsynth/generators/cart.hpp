#pragma once

#include <algorithm>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include "fairsynth/dataset.hpp"
#include "fairsynth/random.hpp"

namespace fairsynth {

/// Sequential CART synthesis. Columns are visited in schema order: the first
/// is bootstrapped from its empirical values, every later column is drawn
/// from the donor values of the leaf that the partially generated row falls
/// into, in a tree grown on the preceding columns.
class CartChainModel {
 public:
  static constexpr std::size_t kMinLeaf = 5;
  static constexpr std::size_t kMaxDepth = 16;

  static CartChainModel fit(const Dataset& d, std::span<const std::size_t> rows) {
    if (rows.size() < 2) throw Error(ErrorCode::TooFewRows, std::to_string(rows.size()));
    CartChainModel model;
    model.fit_set_ = RowBatch(d.cols());
    model.fit_set_.reserve(rows.size());
    for (auto r : rows) model.fit_set_.push_back(d.row(r));
    model.discrete_.resize(d.cols());
    model.category_count_.resize(d.cols());
    for (std::size_t c = 0; c < d.cols(); ++c) {
      model.discrete_[c] = d.schema().is_discrete(c);
      model.category_count_[c] = d.category_count(c);
    }
    model.trees_.resize(d.cols());
    for (std::size_t j = 1; j < d.cols(); ++j) model.trees_[j] = TreeBuilder(model, j).build();
    return model;
  }

  RowBatch sample(std::size_t n, std::uint64_t seed) const {
    const std::size_t m = fit_set_.cols();
    RowBatch out(m);
    out.reserve(n);
    Rng rng(seed);
    std::vector<double> row(m);
    for (std::size_t i = 0; i < n; ++i) {
      row[0] = fit_set_.at(uniform_index(rng, fit_set_.rows()), 0);
      for (std::size_t j = 1; j < m; ++j) {
        const auto& tree = trees_[j];
        const Node* node = &tree.nodes[0];
        while (!node->leaf()) {
          const double v = row[static_cast<std::size_t>(node->feature)];
          const bool left = discrete_[static_cast<std::size_t>(node->feature)]
                                ? node->left_categories[static_cast<std::size_t>(v)]
                                : v <= node->threshold;
          node = &tree.nodes[static_cast<std::size_t>(left ? node->left : node->right)];
        }
        const auto span = node->donor_end - node->donor_begin;
        const auto donor = tree.donors[node->donor_begin + uniform_index(rng, span)];
        row[j] = fit_set_.at(donor, j);
      }
      out.push_back(row);
    }
    return out;
  }

  /// Leaf sizes of the tree for column j (diagnostics and tests).
  std::vector<std::size_t> leaf_sizes(std::size_t j) const {
    std::vector<std::size_t> out;
    for (const auto& node : trees_.at(j).nodes)
      if (node.leaf()) out.push_back(node.donor_end - node.donor_begin);
    return out;
  }

  /// Largest predictor column referenced by the tree for column j, or -1.
  int max_referenced_column(std::size_t j) const {
    int out = -1;
    for (const auto& node : trees_.at(j).nodes) out = std::max(out, node.feature);
    return out;
  }

 private:
  struct Node {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    std::vector<bool> left_categories;
    int left = -1, right = -1;
    std::size_t donor_begin = 0, donor_end = 0;
    bool leaf() const { return feature < 0; }
  };
  struct Tree {
    std::vector<Node> nodes;
    std::vector<std::uint32_t> donors;
  };

  class TreeBuilder {
   public:
    TreeBuilder(const CartChainModel& model, std::size_t target) : model_(model), target_(target) {
      const std::size_t n = model.fit_set_.rows();
      goes_left_.resize(n);
      if (model_.discrete_[target_]) target_classes_ = model_.category_count_[target_];
    }

    Tree build() {
      const std::size_t n = model_.fit_set_.rows();
      std::vector<std::uint32_t> rows(n);
      std::iota(rows.begin(), rows.end(), 0u);
      std::vector<std::vector<std::uint32_t>> sorted;
      for (std::size_t f = 0; f < target_; ++f) {
        if (model_.discrete_[f]) {
          sorted.emplace_back();
          continue;
        }
        auto s = rows;
        std::stable_sort(s.begin(), s.end(), [&](auto a, auto b) { return value(a, f) < value(b, f); });
        sorted.push_back(std::move(s));
      }
      tree_.nodes.emplace_back();
      grow(0, std::move(rows), std::move(sorted), 0);
      return std::move(tree_);
    }

   private:
    struct Split {
      double gain = 0.0;
      int feature = -1;
      double threshold = 0.0;
      std::vector<bool> left_categories;
    };

    double value(std::size_t r, std::size_t c) const { return model_.fit_set_.at(r, c); }

    // Sufficient statistic of the target over a row set; score() is the
    // between-group term whose increase equals the impurity decrease
    // (SSE for continuous targets, n-weighted Gini for discrete ones).
    struct Stats {
      std::size_t n = 0;
      double sum = 0.0;
      std::vector<std::size_t> counts;
      double sumsq_counts = 0.0;

      void add(double y, bool discrete) {
        ++n;
        if (discrete) {
          auto& c = counts[static_cast<std::size_t>(y)];
          sumsq_counts += 2.0 * static_cast<double>(c) + 1.0;
          ++c;
        } else {
          sum += y;
        }
      }
      void remove(double y, bool discrete) {
        --n;
        if (discrete) {
          auto& c = counts[static_cast<std::size_t>(y)];
          sumsq_counts -= 2.0 * static_cast<double>(c) - 1.0;
          --c;
        } else {
          sum -= y;
        }
      }
      double score(bool discrete) const {
        if (n == 0) return 0.0;
        return (discrete ? sumsq_counts : sum * sum) / static_cast<double>(n);
      }
    };

    Stats empty_stats() const {
      Stats s;
      s.counts.assign(target_classes_, 0);
      return s;
    }

    void make_leaf(std::size_t id, std::vector<std::uint32_t>& rows) {
      std::sort(rows.begin(), rows.end());
      auto& node = tree_.nodes[id];
      node.donor_begin = tree_.donors.size();
      tree_.donors.insert(tree_.donors.end(), rows.begin(), rows.end());
      node.donor_end = tree_.donors.size();
    }

    void grow(std::size_t id, std::vector<std::uint32_t> rows, std::vector<std::vector<std::uint32_t>> sorted,
              std::size_t depth) {
      const bool discrete = model_.discrete_[target_];
      const std::size_t n = rows.size();
      if (depth >= kMaxDepth || n < 2 * kMinLeaf || target_ == 0) return make_leaf(id, rows);

      Stats total = empty_stats();
      for (auto r : rows) total.add(value(r, target_), discrete);
      const double parent = total.score(discrete);
      const double tol = 1e-12 * std::max(1.0, std::abs(parent));

      Split best;
      for (std::size_t f = 0; f < target_; ++f) {
        if (model_.discrete_[f]) consider_discrete(f, rows, total, parent, best);
        else consider_continuous(f, sorted[f], total, parent, best);
      }
      if (best.feature < 0 || best.gain <= tol) return make_leaf(id, rows);

      const auto f = static_cast<std::size_t>(best.feature);
      for (auto r : rows)
        goes_left_[r] = model_.discrete_[f] ? best.left_categories[static_cast<std::size_t>(value(r, f))]
                                            : value(r, f) <= best.threshold;
      auto split_list = [&](const std::vector<std::uint32_t>& list) {
        std::pair<std::vector<std::uint32_t>, std::vector<std::uint32_t>> out;
        for (auto r : list) (goes_left_[r] ? out.first : out.second).push_back(r);
        return out;
      };
      auto [left_rows, right_rows] = split_list(rows);
      std::vector<std::vector<std::uint32_t>> left_sorted(sorted.size()), right_sorted(sorted.size());
      for (std::size_t g = 0; g < sorted.size(); ++g) {
        if (sorted[g].empty()) continue;
        auto [l, r] = split_list(sorted[g]);
        left_sorted[g] = std::move(l);
        right_sorted[g] = std::move(r);
      }
      sorted.clear();
      rows.clear();
      rows.shrink_to_fit();

      const auto left_id = tree_.nodes.size();
      tree_.nodes.emplace_back();
      const auto right_id = tree_.nodes.size();
      tree_.nodes.emplace_back();
      {
        auto& node = tree_.nodes[id];
        node.feature = best.feature;
        node.threshold = best.threshold;
        node.left_categories = std::move(best.left_categories);
        node.left = static_cast<int>(left_id);
        node.right = static_cast<int>(right_id);
      }
      grow(left_id, std::move(left_rows), std::move(left_sorted), depth + 1);
      grow(right_id, std::move(right_rows), std::move(right_sorted), depth + 1);
    }

    void consider_continuous(std::size_t f, const std::vector<std::uint32_t>& order, const Stats& total,
                             double parent, Split& best) const {
      const bool discrete = model_.discrete_[target_];
      Stats left = empty_stats();
      Stats right = total;
      const std::size_t n = order.size();
      for (std::size_t i = 0; i + 1 < n; ++i) {
        const double y = value(order[i], target_);
        left.add(y, discrete);
        right.remove(y, discrete);
        const double a = value(order[i], f), b = value(order[i + 1], f);
        if (a == b || left.n < kMinLeaf || right.n < kMinLeaf) continue;
        const double gain = left.score(discrete) + right.score(discrete) - parent;
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = static_cast<int>(f);
          best.threshold = a + 0.5 * (b - a);
          best.left_categories.clear();
        }
      }
    }

    void consider_discrete(std::size_t f, const std::vector<std::uint32_t>& rows, const Stats& total, double parent,
                           Split& best) const {
      const bool discrete = model_.discrete_[target_];
      const std::size_t k = model_.category_count_[f];
      std::vector<std::vector<std::uint32_t>> members(k);
      std::vector<double> target_sum(k, 0.0);
      for (auto r : rows) {
        const auto c = static_cast<std::size_t>(value(r, f));
        members[c].push_back(r);
        target_sum[c] += value(r, target_);
      }
      std::vector<std::size_t> present;
      for (std::size_t c = 0; c < k; ++c)
        if (!members[c].empty()) present.push_back(c);
      if (present.size() < 2) return;
      // order categories by mean ordinal-encoded target, ties by index
      std::stable_sort(present.begin(), present.end(), [&](auto a, auto b) {
        return target_sum[a] / static_cast<double>(members[a].size()) <
               target_sum[b] / static_cast<double>(members[b].size());
      });
      Stats left = empty_stats();
      Stats right = total;
      for (std::size_t i = 0; i + 1 < present.size(); ++i) {
        for (auto r : members[present[i]]) {
          left.add(value(r, target_), discrete);
          right.remove(value(r, target_), discrete);
        }
        if (left.n < kMinLeaf || right.n < kMinLeaf) continue;
        const double gain = left.score(discrete) + right.score(discrete) - parent;
        if (gain > best.gain) {
          best.gain = gain;
          best.feature = static_cast<int>(f);
          best.threshold = 0.0;
          best.left_categories.assign(k, false);
          for (std::size_t t = 0; t <= i; ++t) best.left_categories[present[t]] = true;
          // categories absent from this node follow the larger child
          const bool largest_left = left.n >= right.n;
          for (std::size_t c = 0; c < k; ++c)
            if (members[c].empty()) best.left_categories[c] = largest_left;
        }
      }
    }

    const CartChainModel& model_;
    std::size_t target_;
    std::size_t target_classes_ = 0;
    std::vector<char> goes_left_;
    Tree tree_;
  };

  RowBatch fit_set_;
  std::vector<bool> discrete_;
  std::vector<std::size_t> category_count_;
  std::vector<Tree> trees_;
};

}  // namespace fairsynth
