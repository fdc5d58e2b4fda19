#pragma once

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <functional>
#include <limits>
#include <mutex>
#include <numeric>
#include <optional>
#include <span>
#include <string>
#include <thread>
#include <vector>

#include "fairsynth/classifier.hpp"
#include "fairsynth/folds.hpp"
#include "fairsynth/generators.hpp"
#include "fairsynth/metrics.hpp"
#include "fairsynth/partition.hpp"
#include "fairsynth/strategies.hpp"

namespace fairsynth {

/// One grid cell. Both fields empty means the real-only baseline.
struct CellKey {
  std::optional<StrategyKind> strategy;
  std::optional<GeneratorKind> generator;

  bool baseline() const { return !strategy; }
  std::string strategy_name() const { return strategy ? std::string(to_string(*strategy)) : "real"; }
  std::string generator_name() const { return generator ? std::string(to_string(*generator)) : "none"; }
};

struct RunRecord {
  std::size_t cell = 0;
  std::uint32_t repeat = 0;
  std::uint32_t fold = 0;
  std::uint64_t seed = 0;
  bool ok = false;
  std::string error;
  MetricReport metrics;
  double r_aug = 0.0;
  std::size_t train_rows = 0;
  std::size_t synthetic_rows = 0;
  std::size_t test_rows = 0;
};

/// Source-row indices a run touched; handed to ExperimentConfig::observer.
struct RunRows {
  std::span<const std::size_t> generator_fit;
  std::span<const std::size_t> classifier_train;
  std::span<const std::size_t> test;
};

struct ExperimentConfig {
  std::uint32_t folds = 3;
  std::uint32_t repeats = 2;
  std::uint64_t base_seed = 0;
  std::vector<StrategyKind> strategies{kAllStrategies.begin(), kAllStrategies.end()};
  std::vector<GeneratorKind> generators{kAllGenerators.begin(), kAllGenerators.end()};
  GbdtConfig classifier;
  bool include_real_baseline = true;
  /// Worker threads; 0 reads FAIRSYNTH_THREADS, then falls back to the
  /// machine's parallelism.
  std::size_t threads = 0;
  /// Called once per run from a worker thread; must be thread-safe.
  std::function<void(const RunRecord&, const RunRows&)> observer;

  void validate() const {
    if (folds < 2) throw Error(ErrorCode::InvalidArgument, "folds must be >= 2");
    if (repeats < 1) throw Error(ErrorCode::InvalidArgument, "repeats must be >= 1");
    classifier.validate();
  }
};

struct Summary {
  double mean = std::numeric_limits<double>::quiet_NaN();
  double std = std::numeric_limits<double>::quiet_NaN();
};

/// Mean and sample standard deviation (n - 1 denominator; 0 for one value).
inline Summary summarize(std::span<const double> values) {
  Summary s;
  if (values.empty()) return s;
  double sum = 0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double ss = 0;
  for (double v : values) ss += (v - s.mean) * (v - s.mean);
  s.std = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
  return s;
}

struct CellResult {
  CellKey key;
  std::size_t runs = 0;
  Summary accuracy, roc_auc, f1, eq_odds, stat_parity, eq_opp;
  double r_aug = std::numeric_limits<double>::quiet_NaN();
  std::string note;  ///< first failure; empty when every run succeeded

  bool failed() const { return !note.empty(); }
};

struct ExperimentResult {
  std::vector<CellResult> cells;  ///< baseline first, then strategies x generators in config order
  std::vector<RunRecord> runs;    ///< cell-major, then repeat, then fold
  std::size_t leakage_checks = 0;
};

inline std::size_t worker_count(std::size_t requested) {
  if (requested) return requested;
  if (const char* env = std::getenv("FAIRSYNTH_THREADS")) {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && v > 0) return static_cast<std::size_t>(v);
  }
  return std::max(1u, std::thread::hardware_concurrency());
}

/// Runs tasks 0..count-1 on up to `threads` workers. Results must be written
/// to pre-allocated slots so completion order never matters.
inline void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& task) {
  threads = std::min(threads, count);
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) task(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  std::vector<std::thread> pool;
  for (std::size_t t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (std::size_t i; (i = next.fetch_add(1)) < count;) {
        try {
          task(i);
        } catch (...) {
          std::lock_guard lock(failure_mutex);
          if (!failure) failure = std::current_exception();
        }
      }
    });
  for (auto& th : pool) th.join();
  if (failure) std::rethrow_exception(failure);
}

namespace detail {

inline void assert_disjoint(std::span<const std::size_t> sorted_a, std::span<const std::size_t> sorted_b,
                            const char* what) {
  auto a = sorted_a.begin();
  auto b = sorted_b.begin();
  while (a != sorted_a.end() && b != sorted_b.end()) {
    if (*a == *b) throw Error(ErrorCode::LeakageDetected, std::string(what) + " uses test row " + std::to_string(*a));
    (*a < *b) ? ++a : ++b;
  }
}

inline std::uint64_t cell_tag(const CellKey& key) {
  const std::uint64_t s = key.strategy ? static_cast<std::uint64_t>(*key.strategy) + 1 : 0;
  const std::uint64_t g = key.generator ? static_cast<std::uint64_t>(*key.generator) + 1 : 0;
  return s * 16 + g;
}

}  // namespace detail

/// Cross-validated fit / augment / train / evaluate over the configured grid.
///
/// Every repeat draws its own stratified folds. Inside a fold the plan and
/// the generators only see the training rows, the classifier is trained on
/// the augmented training rows and all metrics come from the untouched real
/// test rows. A run that fails (for example SMOTE-NC on all-discrete data)
/// marks its cell with a note; other cells continue.
inline ExperimentResult run_grid(const Dataset& d, const ExperimentConfig& config) {
  config.validate();
  ExperimentResult result;
  if (config.include_real_baseline) result.cells.emplace_back();
  for (auto s : config.strategies)
    for (auto g : config.generators) {
      CellResult c;
      c.key = CellKey{s, g};
      result.cells.push_back(c);
    }

  std::vector<FoldAssignment> folds;
  for (std::uint32_t r = 0; r < config.repeats; ++r)
    folds.push_back(stratified_kfold(d, config.folds, derive_seed(config.base_seed, {0x7265706561ULL, r})));
  const auto groups = all_group_tuples(d);

  const std::size_t per_cell = static_cast<std::size_t>(config.folds) * config.repeats;
  result.runs.resize(result.cells.size() * per_cell);
  std::atomic<std::size_t> checks{0};

  parallel_for(result.runs.size(), worker_count(config.threads), [&](std::size_t task) {
    RunRecord rec;
    rec.cell = task / per_cell;
    rec.repeat = static_cast<std::uint32_t>(task % per_cell / config.folds);
    rec.fold = static_cast<std::uint32_t>(task % config.folds);
    const CellKey& key = result.cells[rec.cell].key;
    rec.seed = derive_seed(config.base_seed, {rec.repeat, rec.fold, detail::cell_tag(key)});

    const auto& assignment = folds[rec.repeat];
    const auto train_idx = assignment.train_rows(rec.fold);
    const auto test_idx = assignment.test_rows(rec.fold);
    rec.train_rows = train_idx.size();
    rec.test_rows = test_idx.size();
    detail::assert_disjoint(train_idx, test_idx, "classifier training");

    try {
      const Dataset train_set = d.select(train_idx);
      Dataset augmented = train_set;
      std::vector<std::size_t> fit_rows;
      if (!key.baseline()) {
        const auto part = partition(train_set);
        const auto p = plan(*key.strategy, counts_of(part));
        rec.r_aug = p.r_aug;
        for (const auto& [k, n] : p.to_sample)
          if (n > 0)
            for (auto local : part.groups.at(k)) fit_rows.push_back(train_idx[local]);
        std::sort(fit_rows.begin(), fit_rows.end());
        detail::assert_disjoint(fit_rows, test_idx, "generator fitting");
        augmented = augment(train_set, fit_and_sample_plan(*key.generator, train_set, part, p, rec.seed));
        rec.synthetic_rows = augmented.rows() - train_set.rows();
      }
      checks.fetch_add(1);

      GbdtConfig cc = config.classifier;
      cc.seed = rec.seed;
      const auto model = train(augmented, cc);
      const Dataset test_set = d.select(test_idx);
      EvalFrame frame;
      frame.y_score = model.predict_proba(test_set);
      frame.known_groups = groups;
      for (std::size_t i = 0; i < test_set.rows(); ++i) {
        frame.y_true.push_back(test_set.label(i));
        frame.y_pred.push_back(frame.y_score[i] >= 0.5 ? 1 : 0);
        frame.group_of_row.push_back(test_set.protected_tuple(i));
      }
      rec.metrics = evaluate(frame);
      rec.ok = true;
      if (config.observer) config.observer(rec, RunRows{fit_rows, train_idx, test_idx});
    } catch (const Error& e) {
      if (e.code() == ErrorCode::LeakageDetected) throw;
      rec.ok = false;
      rec.error = e.what();
    }
    result.runs[task] = std::move(rec);
  });
  result.leakage_checks = checks.load();

  for (std::size_t c = 0; c < result.cells.size(); ++c) {
    auto& cell = result.cells[c];
    std::vector<double> acc, auc, f1v, eo, sp, eopp, raug;
    for (std::size_t i = c * per_cell; i < (c + 1) * per_cell; ++i) {
      const auto& run = result.runs[i];
      if (!run.ok) {
        if (cell.note.empty()) cell.note = run.error;
        continue;
      }
      acc.push_back(run.metrics.accuracy);
      auc.push_back(run.metrics.roc_auc);
      f1v.push_back(run.metrics.f1);
      eo.push_back(run.metrics.eq_odds);
      sp.push_back(run.metrics.stat_parity);
      eopp.push_back(run.metrics.eq_opp);
      raug.push_back(run.r_aug);
    }
    if (cell.failed()) continue;
    cell.runs = acc.size();
    cell.accuracy = summarize(acc);
    cell.roc_auc = summarize(auc);
    cell.f1 = summarize(f1v);
    cell.eq_odds = summarize(eo);
    cell.stat_parity = summarize(sp);
    cell.eq_opp = summarize(eopp);
    cell.r_aug = summarize(raug).mean;
  }
  return result;
}

struct RuntimeRow {
  GeneratorKind generator = GeneratorKind::CartChain;
  std::size_t trials = 0;
  Summary fit_s, sample_s, overall_s;
  std::string note;
};

struct RuntimeProfile {
  std::size_t n_sample = 0;
  std::vector<RuntimeRow> rows;
};

/// Wall-clock timing of fit on the whole dataset and of sampling n rows,
/// single-threaded. Overall time is the sum of the two measured phases.
inline RuntimeProfile profile_runtime(const Dataset& d, std::span<const GeneratorKind> generators,
                                      std::size_t n_sample = 10000, std::size_t trials = 3, std::uint64_t seed = 0) {
  if (trials < 1) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
  using clock = std::chrono::steady_clock;
  RuntimeProfile profile;
  profile.n_sample = n_sample;
  std::vector<std::size_t> all(d.rows());
  std::iota(all.begin(), all.end(), std::size_t{0});
  for (auto g : generators) {
    RuntimeRow row;
    row.generator = g;
    std::vector<double> fit_s, sample_s, overall_s;
    try {
      for (std::size_t t = 0; t < trials; ++t) {
        const auto t0 = clock::now();
        const auto model = fit(g, d, all, derive_seed(seed, {t, 1}));
        const auto t1 = clock::now();
        const auto batch = model.sample(n_sample, derive_seed(seed, {t, 2}));
        const auto t2 = clock::now();
        if (batch.rows() != n_sample) throw Error(ErrorCode::InvalidArgument, "sample size mismatch");
        const double a = std::chrono::duration<double>(t1 - t0).count();
        const double b = std::chrono::duration<double>(t2 - t1).count();
        fit_s.push_back(a);
        sample_s.push_back(b);
        overall_s.push_back(a + b);
      }
      row.trials = trials;
      row.fit_s = summarize(fit_s);
      row.sample_s = summarize(sample_s);
      row.overall_s = summarize(overall_s);
    } catch (const Error& e) {
      row.note = e.what();
    }
    profile.rows.push_back(row);
  }
  return profile;
}

}  // namespace fairsynth
