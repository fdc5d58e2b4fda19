#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "fairsynth/dataset.hpp"
#include "fairsynth/random.hpp"

namespace fairsynth {

/// SMOTE-NC over one homogeneous row set.
///
/// Distances are Euclidean over standardised continuous cells; each
/// categorical mismatch adds median_std^2, where median_std is the median
/// standard deviation of the standardised continuous columns (1 unless some
/// columns are constant). New continuous cells interpolate between a random
/// base row and one of its k nearest neighbours; categorical cells take the
/// majority value among the k neighbours.
class SmoteModel {
 public:
  static constexpr std::size_t kNeighbors = 5;

  /// Provenance of one synthetic row.
  struct Trace {
    std::size_t base = 0;
    std::size_t neighbor = 0;
    double u = 0.0;
  };

  static SmoteModel fit(const Dataset& d, std::span<const std::size_t> rows) {
    SmoteModel model;
    for (std::size_t c = 0; c < d.cols(); ++c)
      (d.schema().is_discrete(c) ? model.discrete_cols_ : model.continuous_cols_).push_back(c);
    if (model.continuous_cols_.empty())
      throw Error(ErrorCode::NotApplicable, "SMOTE-NC requires a continuous column");
    const std::size_t n = rows.size();
    if (n < 2) throw Error(ErrorCode::TooFewRows, std::to_string(n));

    model.n_ = n;
    model.width_ = d.cols();
    model.k_ = std::min(kNeighbors, n - 1);
    const std::size_t nc = model.continuous_cols_.size(), nd = model.discrete_cols_.size();
    model.mean_.assign(nc, 0.0);
    model.scale_.assign(nc, 1.0);
    model.z_.resize(n * nc);
    model.cat_.resize(n * nd);
    std::vector<double> standardized_sd(nc, 0.0);
    for (std::size_t j = 0; j < nc; ++j) {
      const auto c = model.continuous_cols_[j];
      double mean = 0;
      for (auto r : rows) mean += d.at(r, c);
      mean /= static_cast<double>(n);
      double var = 0;
      for (auto r : rows) var += (d.at(r, c) - mean) * (d.at(r, c) - mean);
      const double sd = std::sqrt(var / static_cast<double>(n));
      model.mean_[j] = mean;
      if (sd > 0) {
        model.scale_[j] = sd;
        standardized_sd[j] = 1.0;
      }
      for (std::size_t i = 0; i < n; ++i) model.z_[i * nc + j] = (d.at(rows[i], c) - mean) / model.scale_[j];
    }
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < nd; ++j) model.cat_[i * nd + j] = d.at(rows[i], model.discrete_cols_[j]);
    std::sort(standardized_sd.begin(), standardized_sd.end());
    model.median_std_ = nc % 2 ? standardized_sd[nc / 2]
                               : 0.5 * (standardized_sd[nc / 2 - 1] + standardized_sd[nc / 2]);
    return model;
  }

  RowBatch sample(std::size_t n, std::uint64_t seed, std::vector<Trace>* trace = nullptr) const {
    RowBatch out(width_);
    out.reserve(n);
    if (trace) trace->clear();
    Rng rng(seed);
    const std::size_t nc = continuous_cols_.size(), nd = discrete_cols_.size();
    std::vector<double> row(width_);
    std::vector<std::pair<double, std::size_t>> dist(n_);
    std::vector<std::size_t> votes;
    for (std::size_t s = 0; s < n; ++s) {
      const std::size_t base = uniform_index(rng, n_);
      const auto neighbors = nearest(base, dist);
      const std::size_t nb = neighbors[uniform_index(rng, neighbors.size())];
      const double u = uniform01(rng);
      for (std::size_t j = 0; j < nc; ++j) {
        const double a = z_[base * nc + j], b = z_[nb * nc + j];
        row[continuous_cols_[j]] = mean_[j] + scale_[j] * (a + u * (b - a));
      }
      for (std::size_t j = 0; j < nd; ++j) row[discrete_cols_[j]] = vote(base, j, neighbors, votes);
      out.push_back(row);
      if (trace) trace->push_back({base, nb, u});
    }
    return out;
  }

  std::size_t k() const noexcept { return k_; }
  double median_std() const noexcept { return median_std_; }

 private:
  // k nearest rows to `base`, excluding itself; equal distances resolve by row order
  std::vector<std::size_t> nearest(std::size_t base, std::vector<std::pair<double, std::size_t>>& dist) const {
    const std::size_t nc = continuous_cols_.size(), nd = discrete_cols_.size();
    const double penalty = median_std_ * median_std_;
    dist.clear();
    for (std::size_t i = 0; i < n_; ++i) {
      if (i == base) continue;
      double d2 = 0;
      for (std::size_t j = 0; j < nc; ++j) {
        const double diff = z_[i * nc + j] - z_[base * nc + j];
        d2 += diff * diff;
      }
      for (std::size_t j = 0; j < nd; ++j)
        if (cat_[i * nd + j] != cat_[base * nd + j]) d2 += penalty;
      dist.emplace_back(d2, i);
    }
    std::partial_sort(dist.begin(), dist.begin() + static_cast<std::ptrdiff_t>(k_), dist.end());
    std::vector<std::size_t> out(k_);
    for (std::size_t i = 0; i < k_; ++i) out[i] = dist[i].second;
    return out;
  }

  double vote(std::size_t base, std::size_t j, const std::vector<std::size_t>& neighbors,
              std::vector<std::size_t>& votes) const {
    const std::size_t nd = discrete_cols_.size();
    std::size_t top = 0;
    for (auto i : neighbors) top = std::max(top, static_cast<std::size_t>(cat_[i * nd + j]));
    votes.assign(top + 1, 0);
    for (auto i : neighbors) ++votes[static_cast<std::size_t>(cat_[i * nd + j])];
    const std::size_t best = *std::max_element(votes.begin(), votes.end());
    const auto own = static_cast<std::size_t>(cat_[base * nd + j]);
    if (own < votes.size() && votes[own] == best) return static_cast<double>(own);
    return static_cast<double>(std::find(votes.begin(), votes.end(), best) - votes.begin());
  }

  std::vector<std::size_t> continuous_cols_, discrete_cols_;
  std::vector<double> mean_, scale_;
  std::vector<double> z_;    // n x continuous, standardised
  std::vector<double> cat_;  // n x discrete
  std::size_t n_ = 0, width_ = 0, k_ = 0;
  double median_std_ = 0.0;
};

}  // namespace fairsynth
