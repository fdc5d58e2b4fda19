#pragma once

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include <json.hpp>

#include "fairsynth/csv.hpp"
#include "fairsynth/harness.hpp"
#include "fairsynth/partition.hpp"
#include "fairsynth/strategies.hpp"

namespace fairsynth::report {

/// Six decimal places; exact binary ties round half to even. NaN prints empty.
inline std::string fixed6(double v) {
  if (std::isnan(v)) return "";
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.6f", v);
  std::string s(buf);
  return s == "-0.000000" ? "0.000000" : s;
}

inline void write_distribution_header(std::ostream& out, bool with_strategy) {
  csv::Record h;
  if (with_strategy) h.push_back("strategy");
  for (const char* c : {"group", "class", "real_count", "synthetic_count", "real_pct", "r_aug"}) h.push_back(c);
  csv::write_record(out, h);
}

/// Rows of one distribution table: group, class, real_count,
/// synthetic_count, real_pct, r_aug (optionally prefixed by the strategy).
inline void write_distribution_rows(std::ostream& out, const Dataset& d, const DistributionTable& t,
                                    bool with_strategy) {
  for (const auto& row : t.rows) {
    csv::Record rec;
    if (with_strategy) rec.emplace_back(to_string(t.strategy));
    rec.push_back(group_label(d, row.key.protected_values));
    rec.push_back(d.categories(d.schema().target_index())[static_cast<std::size_t>(row.key.class_label)]);
    rec.push_back(std::to_string(row.real_count));
    rec.push_back(std::to_string(row.synthetic_count));
    rec.push_back(fixed6(row.real_pct));
    rec.push_back(fixed6(t.r_aug));
    csv::write_record(out, rec);
  }
}

inline void write_results_csv(std::ostream& out, const ExperimentResult& r) {
  csv::write_record(out, {"strategy", "generator", "accuracy_mean", "accuracy_std", "roc_auc_mean", "roc_auc_std",
                          "f1_mean", "f1_std", "eq_odds_mean", "eq_odds_std", "sp_mean", "sp_std", "eq_opp_mean",
                          "eq_opp_std", "r_aug", "note"});
  for (const auto& c : r.cells) {
    csv::write_record(out, {c.key.strategy_name(), c.key.generator_name(), fixed6(c.accuracy.mean),
                            fixed6(c.accuracy.std), fixed6(c.roc_auc.mean), fixed6(c.roc_auc.std),
                            fixed6(c.f1.mean), fixed6(c.f1.std), fixed6(c.eq_odds.mean), fixed6(c.eq_odds.std),
                            fixed6(c.stat_parity.mean), fixed6(c.stat_parity.std), fixed6(c.eq_opp.mean),
                            fixed6(c.eq_opp.std), fixed6(c.r_aug), c.note});
  }
}

/// One JSON object per line and run. Metric values use the same six-decimal
/// strings as the result table so the log is byte-stable.
inline void write_run_log(std::ostream& out, const ExperimentResult& r) {
  for (const auto& run : r.runs) {
    const auto& key = r.cells[run.cell].key;
    nlohmann::ordered_json j;
    j["strategy"] = key.strategy_name();
    j["generator"] = key.generator_name();
    j["repeat"] = run.repeat;
    j["fold"] = run.fold;
    j["seed"] = run.seed;
    j["ok"] = run.ok;
    j["train_rows"] = run.train_rows;
    j["synthetic_rows"] = run.synthetic_rows;
    j["test_rows"] = run.test_rows;
    j["r_aug"] = fixed6(run.r_aug);
    if (run.ok) {
      const auto& m = run.metrics;
      j["accuracy"] = fixed6(m.accuracy);
      j["roc_auc"] = fixed6(m.roc_auc);
      j["f1"] = fixed6(m.f1);
      j["eq_odds"] = fixed6(m.eq_odds);
      j["sp"] = fixed6(m.stat_parity);
      j["eq_opp"] = fixed6(m.eq_opp);
      auto flags = nlohmann::json::array();
      for (const auto& f : m.undefined_flags) flags.push_back(f.metric + "@" + f.group);
      j["undefined"] = flags;
    } else {
      j["error"] = run.error;
    }
    out << j.dump() << '\n';
  }
}

inline void write_profile_csv(std::ostream& out, const RuntimeProfile& p) {
  csv::write_record(out, {"generator", "fit_s_mean", "fit_s_std", "sample_s_mean", "sample_s_std", "overall_s_mean",
                          "overall_s_std"});
  for (const auto& row : p.rows)
    csv::write_record(out, {std::string(to_string(row.generator)), fixed6(row.fit_s.mean), fixed6(row.fit_s.std),
                            fixed6(row.sample_s.mean), fixed6(row.sample_s.std), fixed6(row.overall_s.mean),
                            fixed6(row.overall_s.std)});
}

}  // namespace fairsynth::report
