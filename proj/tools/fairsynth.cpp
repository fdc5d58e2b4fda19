// fairsynth command-line front end: inspect, augment, benchmark, profile.
//
// Exit codes: 0 success, 1 usage error, 2 data error, 3 some benchmark cells
// failed while at least one succeeded.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "fairsynth/fairsynth.hpp"

namespace fs = std::filesystem;
using namespace fairsynth;

namespace {

constexpr int kUsage = 1;
constexpr int kData = 2;
constexpr int kPartial = 3;

std::vector<std::string> strategy_names() {
  std::vector<std::string> out;
  for (auto s : kAllStrategies) out.emplace_back(to_string(s));
  return out;
}

std::vector<std::string> generator_names() {
  std::vector<std::string> out;
  for (auto g : kAllGenerators) out.emplace_back(to_string(g));
  return out;
}

struct DataOptions {
  std::string data;
  std::string schema;
  std::vector<std::string> protected_columns;

  void add_to(CLI::App* app) {
    app->add_option("--data", data, "input CSV (header row required)")->required()->check(CLI::ExistingFile);
    app->add_option("--schema", schema, "JSON schema listing name/kind/role per column")
        ->required()
        ->check(CLI::ExistingFile);
    app->add_option("--protected", protected_columns, "override protected columns, e.g. sex,race")->delimiter(',');
  }

  Dataset load() const {
    auto s = load_schema(schema);
    if (!protected_columns.empty()) s = with_protected(s, protected_columns);
    return load_csv(data, s);
  }
};

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::Io, "cannot write '" + path + "'");
  return out;
}

void print_table(const Dataset& d, const DistributionTable& t) {
  std::cout << "strategy " << to_string(t.strategy) << "  r_aug " << report::fixed6(t.r_aug) << '\n';
  std::cout << "  group                class      real  synthetic   real_pct\n";
  for (const auto& row : t.rows) {
    char line[256];
    std::snprintf(line, sizeof line, "  %-20s %-8s %7zu %10zu %10s\n",
                  group_label(d, row.key.protected_values).c_str(),
                  d.categories(d.schema().target_index())[static_cast<std::size_t>(row.key.class_label)].c_str(),
                  row.real_count, row.synthetic_count, report::fixed6(row.real_pct).c_str());
    std::cout << line;
  }
}

int run_inspect(const DataOptions& opt, const std::string& out_path) {
  const auto d = opt.load();
  const auto counts = counts_of(partition(d));
  std::cout << d.rows() << " rows, " << d.schema().continuous_count() << " continuous / "
            << d.schema().discrete_count() << " discrete columns, " << counts.size() << " subgroups\n\n";
  std::ofstream out;
  if (!out_path.empty()) {
    out = open_out(out_path);
    report::write_distribution_header(out, true);
  }
  for (auto s : kAllStrategies) {
    try {
      const auto table = summarize_distribution(counts, plan(s, counts));
      print_table(d, table);
      if (out) report::write_distribution_rows(out, d, table, true);
    } catch (const Error& e) {
      std::cout << "strategy " << to_string(s) << "  not applicable: " << e.what() << '\n';
    }
    std::cout << '\n';
  }
  return 0;
}

int run_augment(const DataOptions& opt, const std::string& strategy, const std::string& generator,
                std::uint64_t seed, const std::string& out_path) {
  const auto d = opt.load();
  const auto part = partition(d);
  const auto p = plan(*parse_strategy(strategy), counts_of(part));
  std::cout << "plan (" << strategy << ")\n";
  for (const auto& [key, n] : p.to_sample) std::cout << "  " << key_label(d, key) << " +" << n << '\n';
  std::cout << "r_aug " << report::fixed6(p.r_aug) << '\n';
  const auto augmented = augment(d, fit_and_sample_plan(*parse_generator(generator), d, part, p, seed));
  auto out = open_out(out_path);
  write_csv(out, augmented, true);
  std::cout << "wrote " << augmented.rows() << " rows (" << augmented.rows() - d.rows() << " synthetic) to "
            << out_path << '\n';
  return 0;
}

struct BenchmarkOptions {
  std::vector<std::string> strategies = strategy_names();
  std::vector<std::string> generators = generator_names();
  std::uint32_t folds = 3;
  std::uint32_t repeats = 2;
  std::uint64_t seed = 0;
  std::string out_dir;
  GbdtConfig classifier;
  bool no_baseline = false;
};

int run_benchmark(const DataOptions& opt, const BenchmarkOptions& b) {
  const auto d = opt.load();
  ExperimentConfig config;
  config.folds = b.folds;
  config.repeats = b.repeats;
  config.base_seed = b.seed;
  config.classifier = b.classifier;
  config.include_real_baseline = !b.no_baseline;
  config.strategies.clear();
  for (const auto& s : b.strategies) config.strategies.push_back(*parse_strategy(s));
  config.generators.clear();
  for (const auto& g : b.generators) config.generators.push_back(*parse_generator(g));

  const auto result = run_grid(d, config);
  fs::create_directories(b.out_dir);
  {
    auto out = open_out((fs::path(b.out_dir) / "results.csv").string());
    report::write_results_csv(out, result);
  }
  {
    auto out = open_out((fs::path(b.out_dir) / "runs.jsonl").string());
    report::write_run_log(out, result);
  }

  std::size_t failed = 0;
  std::cout << "strategy         generator  roc_auc   sp        eq_odds   r_aug\n";
  for (const auto& c : result.cells) {
    char line[256];
    if (c.failed()) {
      ++failed;
      std::snprintf(line, sizeof line, "%-16s %-10s failed: %s\n", c.key.strategy_name().c_str(),
                    c.key.generator_name().c_str(), c.note.c_str());
    } else {
      std::snprintf(line, sizeof line, "%-16s %-10s %-9s %-9s %-9s %s\n", c.key.strategy_name().c_str(),
                    c.key.generator_name().c_str(), report::fixed6(c.roc_auc.mean).c_str(),
                    report::fixed6(c.stat_parity.mean).c_str(), report::fixed6(c.eq_odds.mean).c_str(),
                    report::fixed6(c.r_aug).c_str());
    }
    std::cout << line;
  }
  std::cout << "results written to " << b.out_dir << '\n';
  if (failed == result.cells.size()) return kData;
  return failed ? kPartial : 0;
}

int run_profile(const DataOptions& opt, const std::vector<std::string>& generators, std::size_t n,
                std::size_t trials, std::uint64_t seed, const std::string& out_path) {
  const auto d = opt.load();
  std::vector<GeneratorKind> kinds;
  for (const auto& g : generators) kinds.push_back(*parse_generator(g));
  const auto profile = profile_runtime(d, kinds, n, trials, seed);
  if (out_path.empty()) {
    report::write_profile_csv(std::cout, profile);
  } else {
    auto out = open_out(out_path);
    report::write_profile_csv(out, profile);
    report::write_profile_csv(std::cout, profile);
  }
  for (const auto& row : profile.rows)
    if (!row.note.empty()) std::cerr << to_string(row.generator) << ": " << row.note << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Class- and group-imbalance mitigation with per-subgroup synthetic data"};
  app.require_subcommand(1);

  DataOptions data;

  auto* inspect = app.add_subcommand("inspect", "subgroup distribution and sampling plan per strategy");
  std::string inspect_out;
  data.add_to(inspect);
  inspect->add_option("--out", inspect_out, "write the distribution tables as CSV");

  auto* aug = app.add_subcommand("augment", "write real plus synthetic rows for one strategy and generator");
  std::string strategy, generator, aug_out;
  std::uint64_t aug_seed = 0;
  data.add_to(aug);
  aug->add_option("--strategy", strategy)->required()->check(CLI::IsMember(strategy_names()));
  aug->add_option("--generator", generator)->required()->check(CLI::IsMember(generator_names()));
  aug->add_option("--seed", aug_seed)->capture_default_str();
  aug->add_option("--out", aug_out, "augmented CSV with an origin column")->required();

  auto* bench = app.add_subcommand("benchmark", "cross-validated grid of strategies x generators");
  BenchmarkOptions b;
  data.add_to(bench);
  bench->add_option("--strategies", b.strategies)
      ->delimiter(',')
      ->check(CLI::IsMember(strategy_names()))
      ->capture_default_str();
  bench->add_option("--generators", b.generators)
      ->delimiter(',')
      ->check(CLI::IsMember(generator_names()))
      ->capture_default_str();
  bench->add_option("--folds", b.folds)->check(CLI::Range(2u, 1000u))->capture_default_str();
  bench->add_option("--repeats", b.repeats)->check(CLI::Range(1u, 1000u))->capture_default_str();
  bench->add_option("--seed", b.seed)->capture_default_str();
  bench->add_option("--out-dir", b.out_dir, "directory for results.csv and runs.jsonl")->required();
  bench->add_option("--rounds", b.classifier.rounds)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--learning-rate", b.classifier.learning_rate)->check(CLI::Range(1e-9, 1.0))->capture_default_str();
  bench->add_option("--max-depth", b.classifier.max_depth)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_option("--min-leaf", b.classifier.min_leaf)->check(CLI::PositiveNumber)->capture_default_str();
  bench->add_flag("--no-baseline", b.no_baseline, "omit the real-only baseline row");

  auto* prof = app.add_subcommand("profile", "fit and sampling runtime per generator");
  std::vector<std::string> prof_generators = generator_names();
  std::size_t prof_n = 10000, prof_trials = 3;
  std::uint64_t prof_seed = 0;
  std::string prof_out;
  data.add_to(prof);
  prof->add_option("--generators", prof_generators)
      ->delimiter(',')
      ->check(CLI::IsMember(generator_names()))
      ->capture_default_str();
  prof->add_option("--n", prof_n, "rows sampled per trial")->capture_default_str();
  prof->add_option("--trials", prof_trials)->check(CLI::PositiveNumber)->capture_default_str();
  prof->add_option("--seed", prof_seed)->capture_default_str();
  prof->add_option("--out", prof_out, "runtime CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (*inspect) return run_inspect(data, inspect_out);
    if (*aug) return run_augment(data, strategy, generator, aug_seed, aug_out);
    if (*bench) return run_benchmark(data, b);
    if (*prof) return run_profile(data, prof_generators, prof_n, prof_trials, prof_seed, prof_out);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kData;
  }
  return kUsage;
}
