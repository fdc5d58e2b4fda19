#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <span>
#include <vector>

#include <Eigen/Cholesky>
#include <Eigen/Dense>
#include <boost/math/distributions/normal.hpp>

#include "fairsynth/dataset.hpp"
#include "fairsynth/random.hpp"

namespace fairsynth {

namespace detail {

inline double normal_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

inline double normal_quantile(double u) {
  constexpr double eps = 1e-12;
  u = std::clamp(u, eps, 1.0 - eps);
  return boost::math::quantile(boost::math::normal_distribution<double>(), u);
}

}  // namespace detail

/// Gaussian copula over empirical marginals.
///
/// Continuous columns are scored through mid-ranks, z = Phi^-1((rank - 0.5)/n),
/// and inverted by linear interpolation of the empirical quantile function,
/// so samples never leave the observed range. Discrete columns are dithered
/// uniformly inside their category's CDF band before scoring and inverted by
/// band lookup. The score correlation is regularised with a ridge that starts
/// at 1e-6 and grows tenfold until the Cholesky factorisation succeeds.
class CopulaModel {
 public:
  static CopulaModel fit(const Dataset& d, std::span<const std::size_t> rows, std::uint64_t seed) {
    const std::size_t n = rows.size(), m = d.cols();
    if (n < 2) throw Error(ErrorCode::TooFewRows, std::to_string(n));
    Rng rng(derive_seed(seed, {0x636f70756c61ULL}));

    CopulaModel model;
    model.marginals_.resize(m);
    Eigen::MatrixXd scores(n, m);
    for (std::size_t c = 0; c < m; ++c) {
      auto& marg = model.marginals_[c];
      marg.discrete = d.schema().is_discrete(c);
      if (marg.discrete) {
        std::vector<std::size_t> freq(d.category_count(c), 0);
        for (auto r : rows) ++freq[static_cast<std::size_t>(d.at(r, c))];
        double cum = 0;
        std::vector<double> lower(freq.size(), 0.0);
        for (std::size_t k = 0; k < freq.size(); ++k) {
          if (!freq[k]) continue;
          lower[k] = cum;
          cum += static_cast<double>(freq[k]) / static_cast<double>(n);
          marg.categories.push_back(static_cast<double>(k));
          marg.upper.push_back(cum);
        }
        marg.upper.back() = 1.0;
        for (std::size_t i = 0; i < n; ++i) {
          const auto k = static_cast<std::size_t>(d.at(rows[i], c));
          const double width = static_cast<double>(freq[k]) / static_cast<double>(n);
          scores(i, c) = detail::normal_quantile(lower[k] + uniform_open01(rng) * width);
        }
      } else {
        std::vector<std::size_t> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(),
                         [&](auto a, auto b) { return d.at(rows[a], c) < d.at(rows[b], c); });
        marg.sorted.resize(n);
        for (std::size_t i = 0; i < n; ++i) marg.sorted[i] = d.at(rows[order[i]], c);
        for (std::size_t i = 0; i < n;) {
          std::size_t j = i;
          while (j + 1 < n && marg.sorted[j + 1] == marg.sorted[i]) ++j;
          // mid-rank of the tie block, 1-based
          const double rank = 0.5 * static_cast<double>(i + j) + 1.0;
          const double z = detail::normal_quantile((rank - 0.5) / static_cast<double>(n));
          for (std::size_t t = i; t <= j; ++t) scores(order[t], c) = z;
          i = j + 1;
        }
      }
    }

    Eigen::RowVectorXd mean = scores.colwise().mean();
    Eigen::MatrixXd centered = scores.rowwise() - mean;
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);
    Eigen::VectorXd sd = cov.diagonal().cwiseSqrt();
    model.correlation_ = Eigen::MatrixXd::Identity(m, m);
    for (std::size_t a = 0; a < m; ++a)
      for (std::size_t b = 0; b < m; ++b)
        if (a != b && sd(a) > 1e-12 && sd(b) > 1e-12)
          model.correlation_(a, b) = std::clamp(cov(a, b) / (sd(a) * sd(b)), -1.0, 1.0);

    for (model.ridge_ = 1e-6;; model.ridge_ *= 10) {
      Eigen::MatrixXd reg = model.correlation_ + model.ridge_ * Eigen::MatrixXd::Identity(m, m);
      reg /= 1.0 + model.ridge_;
      Eigen::LLT<Eigen::MatrixXd> llt(reg);
      if (llt.info() == Eigen::Success) {
        model.factor_ = llt.matrixL();
        break;
      }
      if (model.ridge_ > 1e6) throw Error(ErrorCode::InvalidArgument, "correlation matrix cannot be factorised");
    }
    return model;
  }

  RowBatch sample(std::size_t n, std::uint64_t seed) const {
    const std::size_t m = marginals_.size();
    RowBatch out(m);
    out.reserve(n);
    Rng rng(seed);
    Eigen::VectorXd z(static_cast<Eigen::Index>(m));
    std::vector<double> row(m);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t c = 0; c < m; ++c) z(c) = detail::normal_quantile(uniform_open01(rng));
      Eigen::VectorXd x = factor_ * z;
      for (std::size_t c = 0; c < m; ++c) row[c] = marginals_[c].invert(detail::normal_cdf(x(c)));
      out.push_back(row);
    }
    return out;
  }

  const Eigen::MatrixXd& correlation() const noexcept { return correlation_; }
  double ridge() const noexcept { return ridge_; }

 private:
  struct Marginal {
    bool discrete = false;
    std::vector<double> sorted;      // continuous: fit values ascending
    std::vector<double> categories;  // discrete: observed category indices
    std::vector<double> upper;       // discrete: cumulative frequency per observed category

    double invert(double u) const {
      if (discrete) {
        auto it = std::upper_bound(upper.begin(), upper.end(), u);
        if (it == upper.end()) --it;
        return categories[static_cast<std::size_t>(it - upper.begin())];
      }
      const double n = static_cast<double>(sorted.size());
      const double pos = u * n - 0.5;
      if (pos <= 0) return sorted.front();
      if (pos >= n - 1) return sorted.back();
      const auto lo = static_cast<std::size_t>(pos);
      const double frac = pos - static_cast<double>(lo);
      return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
    }
  };

  std::vector<Marginal> marginals_;
  Eigen::MatrixXd correlation_;
  Eigen::MatrixXd factor_;
  double ridge_ = 0.0;
};

}  // namespace fairsynth
