// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <sstream>
#include <string>

#include "fairsynth/fairsynth.hpp"
#include "fairsynth/fixtures.hpp"
#include "oracles.hpp"
#include "random_cases.hpp"

using namespace fairsynth;

namespace {

using clock_type = std::chrono::steady_clock;

double seconds_since(clock_type::time_point t0) {
  return std::chrono::duration<double>(clock_type::now() - t0).count();
}

struct Outcome {
  bool pass = true;
  std::string detail;
};

int failures = 0;

void criterion(int id, const std::string& title, const std::function<Outcome()>& body) {
  const auto t0 = clock_type::now();
  Outcome o;
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(),
              seconds_since(t0));
  std::fflush(stdout);
}

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

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

Outcome strategy_oracles() {
  const auto t0 = clock_type::now();
  std::mt19937_64 gen(1);
  std::size_t plans = 0, bad = 0;
  std::string first;
  for (int trial = 0; trial < 1000; ++trial) {
    auto c = cases::random_counts(gen);
    for (auto s : kAllStrategies) {
      auto p = plan(s, c.counts);
      ++plans;
      auto why = oracle::check_postcondition(std::string(to_string(s)), c.table, cases::additions(c, p.to_sample));
      if (!why.empty() && bad++ == 0) first = std::string(to_string(s)) + ": " + why;
    }
  }
  const double t = seconds_since(t0);
  return {bad == 0 && t < 10.0,
          std::to_string(plans) + " plans, " + std::to_string(bad) + " violations" +
              (first.empty() ? "" : " (" + first + ")") + ", " + fmt("%.2f s", t)};
}

Outcome metric_oracles() {
  const auto t0 = clock_type::now();
  std::mt19937_64 gen(2);
  double worst = 0;
  std::size_t undefined = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    auto c = cases::random_frame(gen);
    const auto& f = c.frame;
    auto diff = [&](double a, double b) { worst = std::max(worst, std::fabs(a - b)); };
    diff(accuracy(f), oracle::accuracy(c.y, c.yhat));
    diff(f1(f), oracle::f1(c.y, c.yhat));
    diff(roc_auc(f), oracle::auc_all_pairs(c.y, c.score));
    diff(equalized_odds(f), oracle::eq_odds(c.y, c.yhat, c.group, c.groups));
    diff(statistical_parity(f), oracle::stat_parity(c.y, c.yhat, c.group, c.groups));
    try {
      diff(equal_opportunity(f), oracle::eq_opp(c.y, c.yhat, c.group, c.groups));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::AllRatesUndefined) throw;
      ++undefined;
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-12 && t < 30.0, "1000 frames, max abs diff " + fmt("%.3g", worst) + ", " +
                                          std::to_string(undefined) + " frames without any TPR, " + fmt("%.2f s", t)};
}

Outcome worked_examples() {
  std::vector<std::string> wrong;
  auto check = [&](bool ok, const std::string& what) {
    if (!ok) wrong.push_back(what);
  };
  auto counts = [](std::size_t m1, std::size_t m0, std::size_t f1, std::size_t f0) {
    return GroupClassCounts{{{{1}, 1}, m1}, {{{1}, 0}, m0}, {{{0}, 1}, f1}, {{{0}, 0}, f0}};
  };
  auto at = [](const SamplingPlan& p, std::uint32_t g, int c) { return p.to_sample.at({{g}, c}); };
  const auto base = counts(200, 600, 50, 150);

  auto cls = plan(StrategyKind::Class, base);
  check(at(cls, 1, 1) == 400 && at(cls, 0, 1) == 100 && cls.total() == 500, "class plan");
  check(fmt("%.4f", cls.r_aug) == "0.3333", "class r_aug");

  auto cap = plan(StrategyKind::ClassAndProtected, base);
  check(at(cap, 1, 1) == 400 && at(cap, 0, 1) == 550 && at(cap, 0, 0) == 450 && cap.total() == 1400,
        "class-protected plan");
  check(fmt("%.4f", cap.r_aug) == "0.5833", "class-protected r_aug");

  auto ratio = plan(StrategyKind::ClassRatio, counts(200, 600, 30, 170));
  check(at(ratio, 0, 1) == 27 && ratio.total() == 27, "class-ratio plan");

  auto frame = [](std::vector<int> y, std::vector<int> yhat, std::vector<std::uint32_t> g, std::vector<double> s) {
    EvalFrame f;
    f.y_true = y;
    f.y_pred = yhat;
    f.y_score = s.empty() ? std::vector<double>(y.size(), 0.0) : s;
    for (auto v : g) f.group_of_row.push_back({v});
    return f;
  };
  auto eo = frame({1, 1, 0, 0, 1, 0}, {1, 0, 0, 0, 1, 1}, {0, 0, 0, 0, 1, 1}, {});
  check(equalized_odds(eo) == 1.5, "eq_odds 1.5");
  check(equal_opportunity(eo) == 0.5, "eq_opp 0.5");
  auto sp = frame({0, 0, 0, 0, 0, 0, 0, 0}, {1, 1, 0, 0, 1, 0, 0, 0}, {0, 0, 0, 0, 1, 1, 1, 1}, {});
  check(statistical_parity(sp) == 0.25, "sp 0.25");
  auto auc = frame({1, 0, 1, 0}, {0, 0, 0, 0}, {0, 0, 0, 0}, {0.9, 0.8, 0.3, 0.2});
  check(roc_auc(auc) == 0.75, "auc 0.75");

  std::string detail = wrong.empty() ? "class, class-protected, class-ratio plans and metric frames exact" : "";
  for (const auto& w : wrong) detail += (detail.empty() ? "" : ", ") + w;
  return {wrong.empty(), detail};
}

Outcome generator_fidelity() {
  const auto d = fixtures::mixed_fixture(5000, 11);
  const auto rows = all_rows(d);
  std::ostringstream out;
  bool ok = true;

  auto cart = CartChainModel::fit(d, rows).sample(10000, 101);
  double worst_tv = 0;
  for (std::size_t c = 0; c < d.cols(); ++c)
    if (d.schema().is_discrete(c))
      worst_tv = std::max(worst_tv, oracle::tv_distance(column(d.cells(), c), column(cart, c)));
  ok &= worst_tv <= 0.05;
  out << "CART max TV " << fmt("%.4f", worst_tv);

  auto cop = CopulaModel::fit(d, rows, 102).sample(10000, 103);
  double worst_ks = 0;
  for (std::size_t c = 0; c < d.cols(); ++c)
    if (!d.schema().is_discrete(c))
      worst_ks = std::max(worst_ks, oracle::ks_distance(column(d.cells(), c), column(cop, c)));
  ok &= worst_ks <= 0.05;
  out << ", copula max KS " << fmt("%.4f", worst_ks);

  std::vector<SmoteModel::Trace> trace;
  auto smote = SmoteModel::fit(d, rows).sample(10000, 104, &trace);
  std::size_t on_segment = 0;
  for (std::size_t i = 0; i < smote.rows(); ++i) {
    const auto a = d.row(trace[i].base), b = d.row(trace[i].neighbor);
    // recover u from every continuous column independently and require agreement
    bool good = trace[i].base != trace[i].neighbor;
    double u_ref = -1;
    for (std::size_t c = 0; c < d.cols() && good; ++c) {
      if (d.schema().is_discrete(c)) continue;
      const double scale = std::max({1.0, std::fabs(a[c]), std::fabs(b[c])});
      const double x = smote.at(i, c);
      if (std::fabs(b[c] - a[c]) <= 1e-9 * scale) {
        good = std::fabs(x - a[c]) <= 1e-9 * scale;
        continue;
      }
      const double u = (x - a[c]) / (b[c] - a[c]);
      good = u >= -1e-9 && u <= 1 + 1e-9 && (u_ref < 0 || std::fabs(u - u_ref) <= 1e-9 * scale / std::fabs(b[c] - a[c]) + 1e-9);
      if (u_ref < 0) u_ref = u;
    }
    on_segment += good;
  }
  ok &= on_segment == smote.rows();
  out << ", SMOTE-NC on segment " << on_segment << "/" << smote.rows();

  bool not_applicable = false;
  try {
    auto disc = fixtures::discrete_fixture(2000, 17);
    SmoteModel::fit(disc, all_rows(disc));
  } catch (const Error& e) {
    not_applicable = e.code() == ErrorCode::NotApplicable;
  }
  ok &= not_applicable;
  out << ", SMOTE-NC all-discrete " << (not_applicable ? "NotApplicable" : "accepted");
  return {ok, out.str()};
}

Outcome classifier_checks() {
  std::ostringstream out;
  bool ok = true;
  std::vector<std::pair<std::string, Dataset>> sets{{"credit", fixtures::credit_fixture(5000, 7)},
                                                    {"mixed", fixtures::mixed_fixture(5000, 11)},
                                                    {"discrete", fixtures::discrete_fixture(2000, 17)},
                                                    {"wide", fixtures::wide_fixture(5000, 13)}};
  std::size_t worse = 0;
  for (const auto& [name, d] : sets) {
    const auto model = train(d, GbdtConfig{});
    const auto& h = model.loss_history();
    if (h.back() > h.front() + 1e-9) ++worse;
    // blindness: shuffle protected cells, scores must not move
    RowBatch cells = d.cells();
    std::mt19937_64 gen(5);
    for (auto c : d.schema().protected_indices())
      for (std::size_t r = cells.rows(); r > 1; --r) std::swap(cells.at(r - 1, c), cells.at(gen() % r, c));
    const Dataset shuffled(d.schema(), d.dictionaries(), cells, d.origins());
    if (model.predict_proba(d) != model.predict_proba(shuffled)) {
      ok = false;
      out << name << " not protected-blind; ";
    }
  }
  ok &= worse == 0;
  out << "log-loss above constant model on " << worse << "/" << sets.size() << " fixtures";

  std::mt19937_64 gen(6);
  std::uniform_real_distribution<double> s(-6, 6);
  double worst = 0;
  const double h = 1e-3;
  for (int i = 0; i < 10000; ++i) {
    const double m = s(gen);
    const int y = static_cast<int>(gen() % 2);
    const double lp = logistic::loss(m + h, y), l0 = logistic::loss(m, y), lm = logistic::loss(m - h, y);
    const double g = logistic::gradient(m, y), hs = logistic::hessian(m);
    worst = std::max(worst, std::fabs((lp - lm) / (2 * h) - g) / std::fabs(g));
    worst = std::max(worst, std::fabs((lp - 2 * l0 + lm) / (h * h) - hs) / hs);
  }
  ok &= worst <= 1e-6;
  out << ", finite-difference max rel err " << fmt("%.2g", worst) << ", protected-blind "
      << (ok ? "bit-identical" : "see above");
  return {ok, out.str()};
}

Outcome directional() {
  const auto t0 = clock_type::now();
  const auto d = fixtures::credit_fixture(5000, 7);
  ExperimentConfig cfg;
  cfg.base_seed = 2024;
  cfg.strategies = {StrategyKind::Class, StrategyKind::ClassAndProtected, StrategyKind::ClassRatio};
  cfg.generators = {GeneratorKind::CartChain};
  const auto res = run_grid(d, cfg);
  const std::size_t per = cfg.folds * cfg.repeats;
  auto metric = [&](std::size_t cell, std::size_t run, double MetricReport::*m) {
    return res.runs[cell * per + run].metrics.*m;
  };
  std::map<std::string, std::size_t> cell_of;
  for (std::size_t c = 0; c < res.cells.size(); ++c) cell_of[res.cells[c].key.strategy_name()] = c;

  auto wins = [&](const std::string& s, double MetricReport::*m, bool higher) {
    std::size_t w = 0;
    for (std::size_t r = 0; r < per; ++r) {
      const double a = metric(cell_of[s], r, m), b = metric(cell_of["real"], r, m);
      w += higher ? a >= b : a <= b;
    }
    return w;
  };
  const auto& base = res.cells[cell_of["real"]];
  const auto& cls = res.cells[cell_of["class"]];
  const auto& cap = res.cells[cell_of["class-protected"]];
  const auto& ratio = res.cells[cell_of["class-ratio"]];
  for (const auto* c : {&base, &cls, &cap, &ratio})
    if (c->failed()) return {false, c->key.strategy_name() + " failed: " + c->note};

  const std::size_t auc_class = wins("class", &MetricReport::roc_auc, true);
  const std::size_t auc_cap = wins("class-protected", &MetricReport::roc_auc, true);
  const std::size_t sp_ratio = wins("class-ratio", &MetricReport::stat_parity, false);
  const double t = seconds_since(t0);
  const bool a = std::max(auc_class, auc_cap) >= 4;
  const bool b = sp_ratio >= 4;
  std::ostringstream out;
  out << "AUC real " << fmt("%.4f", base.roc_auc.mean) << " vs class " << fmt("%.4f", cls.roc_auc.mean) << " ("
      << auc_class << "/6) and class-protected " << fmt("%.4f", cap.roc_auc.mean) << " (" << auc_cap
      << "/6); SP real " << fmt("%.4f", base.stat_parity.mean) << " vs class-ratio "
      << fmt("%.4f", ratio.stat_parity.mean) << " (" << sp_ratio << "/6); " << fmt("%.1f s", t);
  return {a && b && t < 300.0, out.str()};
}

Outcome leakage_and_reproducibility() {
  const auto d = fixtures::credit_fixture(5000, 7);
  ExperimentConfig cfg;
  cfg.base_seed = 99;
  std::size_t overlaps = 0, observed = 0;
  std::mutex m;
  cfg.observer = [&](const RunRecord&, const RunRows& rows) {
    std::vector<char> in_test(d.rows(), 0);
    for (auto r : rows.test) in_test[r] = 1;
    std::size_t o = 0;
    for (auto r : rows.generator_fit) o += in_test[r];
    for (auto r : rows.classifier_train) o += in_test[r];
    std::lock_guard lock(m);
    overlaps += o;
    ++observed;
  };
  std::string leak;
  ExperimentResult first, second;
  try {
    first = run_grid(d, cfg);
    second = run_grid(d, cfg);
  } catch (const Error& e) {
    if (e.code() != ErrorCode::LeakageDetected) throw;
    leak = e.what();
  }
  if (!leak.empty()) return {false, "leakage assertion fired: " + leak};
  std::ostringstream a, b;
  report::write_results_csv(a, first);
  report::write_results_csv(b, second);
  const bool identical = a.str() == b.str() && !a.str().empty();
  std::ostringstream out;
  out << first.cells.size() << " cells, " << first.leakage_checks + second.leakage_checks
      << " guarded runs, leakage assertion silent, " << overlaps << " overlapping rows in " << observed
      << " observed runs, result CSVs " << (identical ? "byte-identical" : "differ");
  return {identical && overlaps == 0, out.str()};
}

Outcome runtime() {
  const auto d = fixtures::wide_fixture(45000, 13);
  const std::vector<GeneratorKind> gens{GeneratorKind::CartChain, GeneratorKind::GaussianCopula};
  const auto p = profile_runtime(d, gens, 10000, 1, 3);
  const double cart = p.rows[0].overall_s.mean, cop = p.rows[1].overall_s.mean;
  const bool ok = p.rows[0].note.empty() && p.rows[1].note.empty() && cart <= 60.0 && cop <= 120.0;
  return {ok, std::to_string(d.rows()) + " x " + std::to_string(d.cols()) + ": CART fit+sample " + fmt("%.2f s", cart) +
                  " (limit 60), copula " + fmt("%.2f s", cop) + " (limit 120)"};
}

}  // namespace

int main() {
  criterion(1, "strategy oracle suite", strategy_oracles);
  criterion(2, "metric oracle suite", metric_oracles);
  criterion(3, "hand-derived fixtures", worked_examples);
  criterion(4, "generator fidelity", generator_fidelity);
  criterion(5, "classifier checks", classifier_checks);
  criterion(6, "directional end-to-end", directional);
  criterion(7, "leakage and reproducibility", leakage_and_reproducibility);
  criterion(8, "runtime sanity", runtime);
  std::printf("%d of 8 criteria failed\n", failures);
  return failures ? 1 : 0;
}
