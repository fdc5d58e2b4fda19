#include <gtest/gtest.h>

#include <cmath>
#include <numeric>

#include "fairsynth/fixtures.hpp"
#include "fairsynth/generators.hpp"
#include "fairsynth/strategies.hpp"
#include "oracles.hpp"

using namespace fairsynth;

namespace {

std::vector<std::size_t> all_rows(const Dataset& d) {
  std::vector<std::size_t> r(d.rows());
  std::iota(r.begin(), r.end(), std::size_t{0});
  return r;
}

std::vector<double> column(const RowBatch& b, std::size_t c) {
  std::vector<double> out;
  for (std::size_t r = 0; r < b.rows(); ++r) out.push_back(b.at(r, c));
  return out;
}

std::vector<double> column(const Dataset& d, std::size_t c) { return column(d.cells(), c); }

// schema: x (continuous), a, b (discrete, 3 levels), s (protected), y (target)
Dataset dependent_discrete(std::size_t n, std::uint64_t seed) {
  DatasetSchema schema({{"x", ColumnKind::Continuous, ColumnRole::Feature},
                        {"a", ColumnKind::Discrete, ColumnRole::Feature},
                        {"b", ColumnKind::Discrete, ColumnRole::Feature},
                        {"s", ColumnKind::Discrete, ColumnRole::Protected},
                        {"y", ColumnKind::Discrete, ColumnRole::Target}});
  std::mt19937_64 gen(seed);
  RowBatch cells(5);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = static_cast<double>(gen() % 3);
    cells.push_back(std::vector<double>{std::uniform_real_distribution<double>(0, 10)(gen), a, a,
                                        static_cast<double>(gen() % 2), static_cast<double>(gen() % 2)});
  }
  return Dataset(schema, {{}, {"p", "q", "r"}, {"p", "q", "r"}, {"f", "m"}, {"0", "1"}}, std::move(cells),
                 std::vector<Origin>(n, Origin::Real));
}

// single discrete feature with P(A) = 0.7 ahead of the protected and target columns
Dataset seventy_thirty(std::size_t n) {
  DatasetSchema schema({{"v", ColumnKind::Discrete, ColumnRole::Feature},
                        {"s", ColumnKind::Discrete, ColumnRole::Protected},
                        {"y", ColumnKind::Discrete, ColumnRole::Target}});
  RowBatch cells(3);
  for (std::size_t i = 0; i < n; ++i)
    cells.push_back(std::vector<double>{i % 10 < 7 ? 0.0 : 1.0, static_cast<double>(i % 2), static_cast<double>((i / 2) % 2)});
  return Dataset(schema, {{"A", "B"}, {"f", "m"}, {"0", "1"}}, std::move(cells), std::vector<Origin>(n, Origin::Real));
}

Dataset correlated_pair(std::size_t n, double rho, std::uint64_t seed) {
  DatasetSchema schema({{"u", ColumnKind::Continuous, ColumnRole::Feature},
                        {"v", ColumnKind::Continuous, ColumnRole::Feature},
                        {"s", ColumnKind::Discrete, ColumnRole::Protected},
                        {"y", ColumnKind::Discrete, ColumnRole::Target}});
  std::mt19937_64 gen(seed);
  std::normal_distribution<double> z;
  RowBatch cells(4);
  for (std::size_t i = 0; i < n; ++i) {
    const double a = z(gen), b = rho * a + std::sqrt(1 - rho * rho) * z(gen);
    cells.push_back(std::vector<double>{std::exp(a), b * b * b, static_cast<double>(gen() % 2), static_cast<double>(gen() % 2)});
  }
  return Dataset(schema, {{}, {}, {"f", "m"}, {"0", "1"}}, std::move(cells), std::vector<Origin>(n, Origin::Real));
}

std::vector<double> frequencies(const std::vector<double>& v, std::size_t k) {
  std::vector<double> f(k, 0.0);
  for (double x : v) f[static_cast<std::size_t>(x)] += 1.0 / static_cast<double>(v.size());
  return f;
}

// Every cell respects the schema of d
void expect_conformant(const Dataset& d, const RowBatch& b) {
  ASSERT_EQ(b.cols(), d.cols());
  for (std::size_t r = 0; r < b.rows(); ++r)
    for (std::size_t c = 0; c < d.cols(); ++c) {
      const double v = b.at(r, c);
      ASSERT_TRUE(std::isfinite(v));
      if (d.schema().is_discrete(c)) {
        ASSERT_EQ(v, std::floor(v));
        ASSERT_GE(v, 0);
        ASSERT_LT(v, static_cast<double>(d.category_count(c)));
      }
    }
  EXPECT_NO_THROW(Dataset(d.schema(), d.dictionaries(), b, std::vector<Origin>(b.rows(), Origin::Synthetic)));
}

}  // namespace

TEST(Generators, NamesRoundTrip) {
  for (auto g : kAllGenerators) EXPECT_EQ(parse_generator(to_string(g)), g);
  EXPECT_FALSE(parse_generator("ctgan").has_value());
}

TEST(Generators, PreconditionErrors) {
  auto d = fixtures::discrete_fixture(200, 1);
  auto rows = all_rows(d);
  try {
    fit(GeneratorKind::SmoteNC, d, rows, 0);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotApplicable);
  }
  auto m = fixtures::mixed_fixture(100, 1);
  std::vector<std::size_t> one{3};
  for (auto g : kAllGenerators) {
    try {
      fit(g, m, one, 0);
      FAIL() << to_string(g);
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), ErrorCode::TooFewRows);
    }
  }
  std::vector<std::size_t> two{3, 4};
  EXPECT_EQ(fit(GeneratorKind::CartChain, m, two, 0).sample(20, 1).rows(), 20u);
  EXPECT_EQ(fit(GeneratorKind::SmoteNC, m, two, 0).sample(20, 1).rows(), 20u);
}

TEST(Generators, ZeroRowsGivesEmptyBatch) {
  auto d = fixtures::mixed_fixture(300, 2);
  auto rows = all_rows(d);
  for (auto g : kAllGenerators) {
    auto b = fit(g, d, rows, 5).sample(0, 9);
    EXPECT_EQ(b.rows(), 0u);
    EXPECT_EQ(b.cols(), d.cols());
  }
}

TEST(Generators, DeterministicForFixedSeed) {
  auto d = fixtures::mixed_fixture(600, 3);
  auto rows = all_rows(d);
  for (auto g : kAllGenerators) {
    auto a = fit(g, d, rows, 12).sample(500, 99);
    auto b = fit(g, d, rows, 12).sample(500, 99);
    EXPECT_EQ(a, b) << to_string(g);
    EXPECT_NE(a, fit(g, d, rows, 12).sample(500, 100)) << to_string(g);
  }
}

TEST(Generators, SchemaConformanceFuzz) {
  std::mt19937_64 gen(8);
  for (int trial = 0; trial < 30; ++trial) {
    auto d = trial % 2 ? fixtures::mixed_fixture(50 + gen() % 400, gen()) : fixtures::credit_fixture(50 + gen() % 400, gen());
    std::vector<std::size_t> rows;
    for (std::size_t r = 0; r < d.rows(); ++r)
      if (gen() % 3) rows.push_back(r);
    if (rows.size() < 2) continue;
    for (auto g : kAllGenerators) expect_conformant(d, fit(g, d, rows, gen()).sample(200, gen()));
  }
}

TEST(Cart, BootstrapsFirstColumnMarginal) {
  auto d = seventy_thirty(1000);
  auto rows = all_rows(d);
  auto b = CartChainModel::fit(d, rows).sample(10000, 3);
  const double share = frequencies(column(b, 0), 2)[0];
  EXPECT_GE(share, 0.65);
  EXPECT_LE(share, 0.75);
}

TEST(Cart, PreservesFunctionalDependency) {
  auto d = dependent_discrete(3000, 4);
  auto rows = all_rows(d);
  auto b = CartChainModel::fit(d, rows).sample(10000, 5);
  std::size_t same = 0;
  for (std::size_t r = 0; r < b.rows(); ++r) same += b.at(r, 1) == b.at(r, 2);
  EXPECT_GE(static_cast<double>(same) / 10000.0, 0.99);
}

TEST(Cart, TreesRespectLeafSizeAndOrder) {
  auto d = fixtures::credit_fixture(2000, 6);
  auto rows = all_rows(d);
  auto model = CartChainModel::fit(d, rows);
  for (std::size_t j = 1; j < d.cols(); ++j) {
    for (auto s : model.leaf_sizes(j)) EXPECT_GE(s, CartChainModel::kMinLeaf);
    EXPECT_LT(model.max_referenced_column(j), static_cast<int>(j));
  }
}

TEST(Cart, DiscreteMarginalsWithinTotalVariation) {
  auto d = fixtures::mixed_fixture(5000, 11);
  auto b = CartChainModel::fit(d, all_rows(d)).sample(10000, 21);
  for (std::size_t c = 0; c < d.cols(); ++c) {
    if (!d.schema().is_discrete(c)) continue;
    EXPECT_LE(oracle::tv_distance(column(d, c), column(b, c)), 0.05)
        << d.schema()[c].name;
  }
}

TEST(Copula, ContinuousMarginalsWithinKs) {
  auto d = fixtures::mixed_fixture(5000, 11);
  auto b = CopulaModel::fit(d, all_rows(d), 1).sample(10000, 2);
  for (std::size_t c = 0; c < d.cols(); ++c) {
    if (d.schema().is_discrete(c)) continue;
    EXPECT_LE(oracle::ks_distance(column(d, c), column(b, c)), 0.05) << d.schema()[c].name;
  }
}

TEST(Copula, KeepsRankCorrelation) {
  auto d = correlated_pair(5000, 0.81, 3);
  auto model = CopulaModel::fit(d, all_rows(d), 4);
  auto b = model.sample(5000, 5);
  const double fit_rho = oracle::spearman(column(d, 0), column(d, 1));
  EXPECT_NEAR(fit_rho, 0.8, 0.03);
  EXPECT_NEAR(oracle::spearman(column(b, 0), column(b, 1)), fit_rho, 0.1);
  const auto& corr = model.correlation();
  for (Eigen::Index i = 0; i < corr.rows(); ++i) EXPECT_DOUBLE_EQ(corr(i, i), 1.0);
  EXPECT_TRUE(corr.isApprox(corr.transpose()));
}

TEST(Copula, SamplesStayInsideObservedRange) {
  auto d = fixtures::credit_fixture(500, 8);
  auto b = CopulaModel::fit(d, all_rows(d), 1).sample(3000, 2);
  for (std::size_t c = 0; c < d.cols(); ++c) {
    auto real = column(d, c);
    auto [lo, hi] = std::minmax_element(real.begin(), real.end());
    for (double v : column(b, c)) {
      EXPECT_GE(v, *lo);
      EXPECT_LE(v, *hi);
    }
  }
}

TEST(Copula, DegenerateColumnsStillFactorise) {
  // duplicated continuous column makes the score correlation singular
  auto base = correlated_pair(300, 0.5, 9);
  RowBatch cells(4);
  for (std::size_t r = 0; r < base.rows(); ++r)
    cells.push_back(std::vector<double>{base.at(r, 0), base.at(r, 0), base.at(r, 2), base.at(r, 3)});
  Dataset d(base.schema(), base.dictionaries(), cells, base.origins());
  auto model = CopulaModel::fit(d, all_rows(d), 0);
  EXPECT_GE(model.ridge(), 1e-6);
  expect_conformant(d, model.sample(100, 1));
}

TEST(Smote, InterpolatesInsideHull) {
  DatasetSchema schema({{"x", ColumnKind::Continuous, ColumnRole::Feature},
                        {"s", ColumnKind::Discrete, ColumnRole::Protected},
                        {"y", ColumnKind::Discrete, ColumnRole::Target}});
  Dataset d(schema, {{}, {"f", "m"}, {"0", "1"}}, RowBatch(3, {0.0, 0, 1, 1.0, 1, 1}),
            {Origin::Real, Origin::Real});
  std::vector<std::size_t> rows{0, 1};
  auto model = SmoteModel::fit(d, rows);
  EXPECT_EQ(model.k(), 1u);
  for (double v : column(model.sample(1000, 3), 0)) {
    EXPECT_GE(v, 0.0);
    EXPECT_LE(v, 1.0);
  }
}

TEST(Smote, EachRowLiesOnItsSegment) {
  auto d = fixtures::mixed_fixture(2000, 12);
  auto rows = all_rows(d);
  auto model = SmoteModel::fit(d, rows);
  EXPECT_EQ(model.k(), 5u);
  std::vector<SmoteModel::Trace> trace;
  auto b = model.sample(2000, 7, &trace);
  ASSERT_EQ(trace.size(), b.rows());
  for (std::size_t i = 0; i < b.rows(); ++i) {
    const auto base = d.row(rows[trace[i].base]);
    const auto nb = d.row(rows[trace[i].neighbor]);
    EXPECT_NE(trace[i].base, trace[i].neighbor);
    for (std::size_t c = 0; c < d.cols(); ++c) {
      if (d.schema().is_discrete(c)) continue;
      const double expect = base[c] + trace[i].u * (nb[c] - base[c]);
      const double scale = std::max({1.0, std::fabs(base[c]), std::fabs(nb[c])});
      EXPECT_LE(std::fabs(b.at(i, c) - expect), 1e-9 * scale);
    }
  }
}

TEST(Smote, CategoricalVoteFollowsNeighbours) {
  // two tight clusters with different categories; votes never mix them
  DatasetSchema schema({{"x", ColumnKind::Continuous, ColumnRole::Feature},
                        {"c", ColumnKind::Discrete, ColumnRole::Feature},
                        {"s", ColumnKind::Discrete, ColumnRole::Protected},
                        {"y", ColumnKind::Discrete, ColumnRole::Target}});
  RowBatch cells(4);
  for (int i = 0; i < 12; ++i) cells.push_back(std::vector<double>{i < 6 ? 0.01 * i : 100 + 0.01 * i, i < 6 ? 1.0 : 0.0, 0, 1});
  Dataset d(schema, {{}, {"far", "near"}, {"f", "m"}, {"0", "1"}}, cells, std::vector<Origin>(12, Origin::Real));
  auto b = SmoteModel::fit(d, all_rows(d)).sample(500, 1);
  for (std::size_t r = 0; r < b.rows(); ++r) EXPECT_EQ(b.at(r, 1), b.at(r, 0) < 50 ? 1.0 : 0.0);
}

TEST(Plan, BatchesMatchPlanCounts) {
  // Male(200 pos, 600 neg), Female(50 pos, 150 neg) built from the mixed fixture columns
  auto src = fixtures::mixed_fixture(1000, 5);
  RowBatch cells(src.cols());
  auto add = [&](std::size_t n, double group, double label) {
    for (std::size_t i = 0; i < n; ++i) {
      auto r = std::vector<double>(src.row(i).begin(), src.row(i).end());
      r[4] = group;
      r[5] = label;
      cells.push_back(r);
    }
  };
  add(200, 1, 1);
  add(600, 1, 0);
  add(50, 0, 1);
  add(150, 0, 0);
  Dataset d(src.schema(), src.dictionaries(), cells, std::vector<Origin>(1000, Origin::Real));
  auto part = partition(d);
  auto p = plan(StrategyKind::Class, counts_of(part));
  auto batches = fit_and_sample_plan(GeneratorKind::CartChain, d, part, p, 3);
  EXPECT_EQ(batches.at({{1}, 1}).rows(), 400u);
  EXPECT_EQ(batches.at({{0}, 1}).rows(), 100u);
  EXPECT_EQ(batches.at({{1}, 0}).rows(), 0u);
  EXPECT_EQ(batches.at({{0}, 0}).rows(), 0u);
  for (auto& [key, b] : batches)
    for (std::size_t r = 0; r < b.rows(); ++r) {
      EXPECT_EQ(b.at(r, 4), key.protected_values[0]);
      EXPECT_EQ(b.at(r, 5), key.class_label);
    }
  auto aug = augment(d, batches);
  EXPECT_EQ(aug.rows(), 1500u);

  auto zero = fit_and_sample_plan(GeneratorKind::CartChain, d, part, plan(StrategyKind::ClassRatio, counts_of(part)), 3);
  for (auto& [key, b] : zero) EXPECT_EQ(b.rows(), 0u);
}

TEST(Plan, SubgroupErrorsNameTheKey) {
  auto src = fixtures::mixed_fixture(60, 5);
  RowBatch cells(src.cols());
  for (std::size_t i = 0; i < 60; ++i) {
    auto r = std::vector<double>(src.row(i).begin(), src.row(i).end());
    r[4] = i < 50 ? 1 : 0;
    r[5] = i < 25 || i == 59 ? 1 : 0;  // group a: 1 positive, 9 negatives
    cells.push_back(r);
  }
  Dataset d(src.schema(), src.dictionaries(), cells, std::vector<Origin>(60, Origin::Real));
  auto part = partition(d);
  auto p = plan(StrategyKind::Class, counts_of(part));
  try {
    fit_and_sample_plan(GeneratorKind::SmoteNC, d, part, p, 1);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TooFewRows);
    EXPECT_NE(std::string(e.what()).find("(a, 1)"), std::string::npos) << e.what();
  }
}
