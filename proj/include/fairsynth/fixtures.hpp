#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "fairsynth/dataset.hpp"
#include "fairsynth/generators/copula.hpp"
#include "fairsynth/random.hpp"

// Synthetic datasets with known structure, used by the tests, the acceptance
// suite and the fixture tool.
namespace fairsynth::fixtures {

namespace detail {

inline double normal(Rng& rng) { return fairsynth::detail::normal_quantile(uniform_open01(rng)); }

inline std::vector<std::string> level_names(std::size_t k) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < k; ++i) out.push_back((i < 10 ? "c0" : "c") + std::to_string(i));
  return out;
}

inline double round_to(double v, double step) { return std::round(v / step) * step; }

}  // namespace detail

/// Imbalanced credit-style table with an injected group disparity: about two
/// thirds of the rows are "M"; the positive rate is roughly 30% for "M" and
/// 10% for "F". `hours` is a proxy for the protected column, which itself is
/// never visible to the classifier.
///
/// Columns: age, hours, capital (continuous); education, occupation
/// (discrete); sex (protected, F/M); income (target, 0/1).
inline Dataset credit_fixture(std::size_t n = 5000, std::uint64_t seed = 7) {
  Rng rng(derive_seed(seed, {0x637265646974ULL}));
  DatasetSchema schema({{"age", ColumnKind::Continuous, ColumnRole::Feature},
                        {"hours", ColumnKind::Continuous, ColumnRole::Feature},
                        {"capital", ColumnKind::Continuous, ColumnRole::Feature},
                        {"education", ColumnKind::Discrete, ColumnRole::Feature},
                        {"occupation", ColumnKind::Discrete, ColumnRole::Feature},
                        {"sex", ColumnKind::Discrete, ColumnRole::Protected},
                        {"income", ColumnKind::Discrete, ColumnRole::Target}});
  Dictionaries dict{{}, {}, {}, detail::level_names(4), detail::level_names(5), {"F", "M"}, {"0", "1"}};
  RowBatch cells(schema.size());
  cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const bool male = uniform01(rng) < 0.67;
    const double age = std::clamp(detail::round_to(40 + 12 * detail::normal(rng), 1.0), 17.0, 90.0);
    const double hours = std::clamp(detail::round_to((male ? 44 : 34) + 8 * detail::normal(rng), 1.0), 1.0, 99.0);
    const double edu_latent = 0.03 * (age - 40) + detail::normal(rng);
    const double education = edu_latent < -0.8 ? 0 : edu_latent < 0.3 ? 1 : edu_latent < 1.2 ? 2 : 3;
    const double occupation = static_cast<double>(uniform_index(rng, 5));
    const double capital = std::max(0.0, detail::round_to(std::exp(7 + 0.4 * education + detail::normal(rng)) - 1500, 10.0));
    const double logit = -3.3 + 0.045 * (age - 40) + 0.09 * (hours - 40) + 0.75 * education +
                         0.35 * (occupation == 4) + 0.0004 * capital + 0.5 * detail::normal(rng);
    const double label = uniform01(rng) < 1.0 / (1.0 + std::exp(-logit)) ? 1 : 0;
    const std::vector<double> row{age, hours, capital, education, occupation, male ? 1.0 : 0.0, label};
    cells.push_back(row);
  }
  return Dataset(schema, dict, std::move(cells), std::vector<Origin>(n, Origin::Real));
}

/// Three continuous and three discrete columns with known dependencies:
///   x1 ~ N(0,1), x2 = 0.8 x1 + 0.6 e, x3 = exp(0.5 x1 + 0.3 e')
///   tier in {c00..c03} is a noisy quartile of x1, group (protected) and
///   label (target) depend on x2.
inline Dataset mixed_fixture(std::size_t n = 5000, std::uint64_t seed = 11) {
  Rng rng(derive_seed(seed, {0x6d69786564ULL}));
  DatasetSchema schema({{"x1", ColumnKind::Continuous, ColumnRole::Feature},
                        {"x2", ColumnKind::Continuous, ColumnRole::Feature},
                        {"x3", ColumnKind::Continuous, ColumnRole::Feature},
                        {"tier", ColumnKind::Discrete, ColumnRole::Feature},
                        {"group", ColumnKind::Discrete, ColumnRole::Protected},
                        {"label", ColumnKind::Discrete, ColumnRole::Target}});
  Dictionaries dict{{}, {}, {}, detail::level_names(4), {"a", "b"}, {"0", "1"}};
  RowBatch cells(schema.size());
  cells.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x1 = detail::normal(rng);
    const double x2 = 0.8 * x1 + 0.6 * detail::normal(rng);
    const double x3 = std::exp(0.5 * x1 + 0.3 * detail::normal(rng));
    const double t = x1 + 0.3 * detail::normal(rng);
    const double tier = t < -0.67 ? 0 : t < 0 ? 1 : t < 0.67 ? 2 : 3;
    const double group = uniform01(rng) < (x2 > 0 ? 0.75 : 0.5) ? 1 : 0;
    const double label = uniform01(rng) < 1.0 / (1.0 + std::exp(-(1.5 * x2 - 1.0))) ? 1 : 0;
    const std::vector<double> row{x1, x2, x3, tier, group, label};
    cells.push_back(row);
  }
  return Dataset(schema, dict, std::move(cells), std::vector<Origin>(n, Origin::Real));
}

/// Adult-shaped table: 6 continuous and 9 discrete columns (sex protected,
/// income target), used for runtime checks.
inline Dataset wide_fixture(std::size_t n = 45000, std::uint64_t seed = 13) {
  Rng rng(derive_seed(seed, {0x77696465ULL}));
  std::vector<ColumnSchema> cols;
  Dictionaries dict;
  for (int c = 0; c < 6; ++c) {
    cols.push_back({"num" + std::to_string(c), ColumnKind::Continuous, ColumnRole::Feature});
    dict.emplace_back();
  }
  const std::size_t levels[7] = {16, 7, 14, 6, 5, 41, 3};
  for (int c = 0; c < 7; ++c) {
    cols.push_back({"cat" + std::to_string(c), ColumnKind::Discrete, ColumnRole::Feature});
    dict.push_back(detail::level_names(levels[c]));
  }
  cols.push_back({"sex", ColumnKind::Discrete, ColumnRole::Protected});
  dict.push_back({"F", "M"});
  cols.push_back({"income", ColumnKind::Discrete, ColumnRole::Target});
  dict.push_back({"0", "1"});
  DatasetSchema schema(std::move(cols));
  RowBatch cells(schema.size());
  cells.reserve(n);
  std::vector<double> row(schema.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double latent = detail::normal(rng);
    for (int c = 0; c < 6; ++c) row[c] = detail::round_to(10 * (0.6 * latent + 0.8 * detail::normal(rng)) + 50, 0.5);
    for (int c = 0; c < 7; ++c) {
      const double u = std::clamp(0.5 + 0.2 * latent + 0.25 * detail::normal(rng), 0.0, 0.999);
      row[6 + c] = std::floor(u * static_cast<double>(levels[c]));
    }
    row[13] = uniform01(rng) < 0.67 ? 1 : 0;
    row[14] = uniform01(rng) < 1.0 / (1.0 + std::exp(-(1.2 * latent - 1.2 + 0.4 * row[13]))) ? 1 : 0;
    cells.push_back(row);
  }
  return Dataset(schema, dict, std::move(cells), std::vector<Origin>(n, Origin::Real));
}

/// Census-style table with only discrete columns (sex protected, occupation
/// target). SMOTE-NC is not applicable to it.
inline Dataset discrete_fixture(std::size_t n = 2000, std::uint64_t seed = 17) {
  Rng rng(derive_seed(seed, {0x64697363ULL}));
  std::vector<ColumnSchema> cols;
  Dictionaries dict;
  for (int c = 0; c < 10; ++c) {
    cols.push_back({"attr" + std::to_string(c), ColumnKind::Discrete, ColumnRole::Feature});
    dict.push_back(detail::level_names(3 + c % 4));
  }
  cols.push_back({"sex", ColumnKind::Discrete, ColumnRole::Protected});
  dict.push_back({"F", "M"});
  cols.push_back({"occupation", ColumnKind::Discrete, ColumnRole::Target});
  dict.push_back({"0", "1"});
  DatasetSchema schema(std::move(cols));
  RowBatch cells(schema.size());
  std::vector<double> row(schema.size());
  for (std::size_t i = 0; i < n; ++i) {
    const double latent = detail::normal(rng);
    for (int c = 0; c < 10; ++c) {
      const auto k = static_cast<double>(3 + c % 4);
      row[c] = std::floor(std::clamp(0.5 + 0.2 * latent + 0.2 * detail::normal(rng), 0.0, 0.999) * k);
    }
    row[10] = uniform01(rng) < 0.5 ? 1 : 0;
    row[11] = uniform01(rng) < 1.0 / (1.0 + std::exp(-(latent + 0.3 * row[10]))) ? 1 : 0;
    cells.push_back(row);
  }
  return Dataset(schema, dict, std::move(cells), std::vector<Origin>(n, Origin::Real));
}

}  // namespace fairsynth::fixtures
