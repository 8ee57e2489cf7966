#pragma once

// Hand-built benchmark records and member predictions whose aggregates are
// worked out by hand in the comments next to each expectation.

#include <cmath>
#include <sstream>
#include <string>
#include <vector>

#include "roman/bench.hpp"
#include "roman/errors.hpp"

namespace roman::testing {

inline bench::BenchmarkRecord make_record(const std::string& dataset, int scales, std::uint64_t seed,
                                          double accuracy, double t_roman = 0.0, double t_fit = 1.0,
                                          double t_predict = 1.0,
                                          bench::ProbeKind probe = bench::ProbeKind::pooled) {
  bench::BenchmarkRecord r;
  r.dataset = dataset;
  r.config = {scales, 0.5, probe};
  r.seed = seed;
  r.accuracy = accuracy;
  r.t_roman = t_roman;
  r.t_fit = t_fit;
  r.t_predict = t_predict;
  return r;
}

/// Three datasets, two seeds each. Seed-mean differences (S=4 minus S=1):
/// A +0.02 (win), B +0.004 (tie), C -0.01 (loss).
inline std::vector<bench::BenchmarkRecord> wtl_fixture() {
  return {
      make_record("A", 1, 0, 0.80), make_record("A", 1, 1, 0.70),
      make_record("A", 4, 0, 0.83), make_record("A", 4, 1, 0.71),  // +0.03, +0.01
      make_record("B", 1, 0, 0.50), make_record("B", 1, 1, 0.60),
      make_record("B", 4, 0, 0.508), make_record("B", 4, 1, 0.60),  // +0.008, 0
      make_record("C", 1, 0, 0.90), make_record("C", 1, 1, 0.90),
      make_record("C", 4, 0, 0.88), make_record("C", 4, 1, 0.90),  // -0.02, 0
  };
}

/// Five datasets, one seed. Differences in pp: D1 +3, D2 -1, D3 0, D4 +2,
/// D5 +0.5 (a tie at the margin). Sorted [-1, 0, 0.5, 2, 3]: median 0.5, Q1 0 (rank 1), Q3 2
/// (rank 3). Absolute [0, 0.5, 1, 2, 3]: median 1, Q1 0.5, Q3 2.
/// Baseline times: t_fit 4, t_predict 2. Arm: t_roman 1, 0, 2, 3, 4 with
/// t_fit = t_predict = 1, so arm train and inference times are both 2, 1, 3,
/// 4, 5. Train ratios over 4: median 0.75. Inference ratios over 2: median 1.5.
inline std::vector<bench::BenchmarkRecord> quartile_fixture() {
  std::vector<bench::BenchmarkRecord> out;
  const double diff[] = {0.03, -0.01, 0.0, 0.02, 0.005};
  const double roman_time[] = {1.0, 0.0, 2.0, 3.0, 4.0};
  for (int k = 0; k < 5; ++k) {
    const std::string id = "D" + std::to_string(k + 1);
    out.push_back(make_record(id, 1, 7, 0.5, 0.0, 4.0, 2.0));
    out.push_back(make_record(id, 4, 7, 0.5 + diff[k], roman_time[k], 1.0, 1.0));
  }
  return out;
}

/// Ensemble predictions for dataset "D" (3 instances, truth 0, 1, 2) and
/// dataset "E" (2 instances, every member right).
///
/// Baseline members S1 seeds 0..4, mixed members S1 seeds 0, 1 and S2, S3, S4
/// seed 0.
///   instance 0: S1 = 0 1 1 1 0, S2 0, S3 0, S4 2
///     baseline {0,1,1,1,0} -> 1 (wrong); mixed {0,1,0,0,2} -> 0 (right)
///   instance 1: S1 = 1 1 0 0 2, S2 1, S3 2, S4 0
///     baseline {1,1,0,0,2} -> 0 by the tie rule (wrong); mixed {1,1,1,2,0} -> 1
///   instance 2: S1 = 2 2 2 2 2, S2 0, S3 1, S4 2
///     baseline 2; mixed {2,2,0,1,2} -> 2
/// D: baseline 1/3, mixed 3/3, delta +2/3 (win). E: delta 0 (tie).
inline std::vector<bench::PredictionRow> ensemble_fixture() {
  std::vector<bench::PredictionRow> rows;
  const int s1[3][5] = {{0, 1, 1, 1, 0}, {1, 1, 0, 0, 2}, {2, 2, 2, 2, 2}};
  const int deeper[3][3] = {{0, 0, 2}, {1, 2, 0}, {0, 1, 2}};
  for (std::size_t i = 0; i < 3; ++i) {
    const int truth = static_cast<int>(i);
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
      rows.push_back({"D", bench::ProbeKind::pooled, 1, seed, i, truth, s1[i][seed]});
    }
    for (int s = 2; s <= 4; ++s) rows.push_back({"D", bench::ProbeKind::pooled, s, 0, i, truth, deeper[i][s - 2]});
  }
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::uint64_t seed = 0; seed < 5; ++seed) rows.push_back({"E", bench::ProbeKind::pooled, 1, seed, i, 1, 1});
    for (int s = 2; s <= 4; ++s) rows.push_back({"E", bench::ProbeKind::pooled, s, 0, i, 1, 1});
  }
  return rows;
}

inline bool close(double a, double b) { return std::abs(a - b) < 1e-9; }

/// Empty when the summarizer reproduces every hand-computed fixture value.
inline std::string summarizer_violation() {
  std::ostringstream err;
  {
    const auto rows = bench::summarize(wtl_fixture());
    if (rows.size() != 1) return "expected one comparison row";
    const auto& r = rows[0];
    if (r.wins != 1 || r.ties != 1 || r.losses != 1) {
      err << "W/T/L " << r.wins << "/" << r.ties << "/" << r.losses << ", expected 1/1/1";
      return err.str();
    }
    // Differences [+2, +0.4, -1] pp: median 0.4, Q1 -0.3, Q3 1.2.
    if (!close(r.acc_diff_pp.median, 0.4) || !close(r.acc_diff_pp.q1, -0.3) || !close(r.acc_diff_pp.q3, 1.2)) {
      return "W/T/L fixture quartiles";
    }
  }
  {
    const auto rows = bench::summarize(quartile_fixture());
    const auto& r = rows.at(0);
    if (r.wins != 2 || r.ties != 2 || r.losses != 1) return "quartile fixture W/T/L";
    if (!close(r.acc_diff_pp.median, 0.5) || !close(r.acc_diff_pp.q1, 0.0) || !close(r.acc_diff_pp.q3, 2.0)) {
      err << "accuracy quartiles " << r.acc_diff_pp.q1 << " " << r.acc_diff_pp.median << " " << r.acc_diff_pp.q3;
      return err.str();
    }
    if (!close(r.abs_acc_diff_pp.median, 1.0) || !close(r.abs_acc_diff_pp.q1, 0.5) ||
        !close(r.abs_acc_diff_pp.q3, 2.0)) {
      return "absolute accuracy quartiles";
    }
    if (!close(r.train_ratio, 0.75) || !close(r.infer_ratio, 1.5)) {
      err << "time ratios " << r.train_ratio << " " << r.infer_ratio;
      return err.str();
    }
  }
  {
    // Self-comparison: every dataset ties with unit time ratios.
    const auto records = wtl_fixture();
    const auto r = bench::compare_configs(records, records[2].config, records[2].config);
    if (r.ties != 3 || r.wins + r.losses != 0 || r.train_ratio != 1.0 || r.infer_ratio != 1.0) {
      return "self-comparison is not all ties";
    }
  }
  {
    auto records = wtl_fixture();
    records.erase(records.begin() + 1);  // A, S=1, seed 1
    try {
      (void)bench::summarize(records);
      return "missing baseline not reported";
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::missing_baseline) return "wrong error kind for a missing baseline";
    }
  }
  // Tie margin is inclusive.
  if (bench::classify(0.005) != bench::Outcome::tie || bench::classify(-0.005) != bench::Outcome::tie ||
      bench::classify(0.805 - 0.8) != bench::Outcome::tie || bench::classify(0.0051) != bench::Outcome::win ||
      bench::classify(-0.0051) != bench::Outcome::loss) {
    return "tie margin";
  }
  return {};
}

/// Empty when both ensembles reproduce the hand votes.
inline std::string ensemble_violation() {
  const int votes_a[] = {0, 0, 1, 1, 1};
  const int votes_b[] = {0, 0, 1, 1, 2};
  const int votes_c[] = {2, 1, 0};
  if (bench::hard_vote(votes_a) != 1 || bench::hard_vote(votes_b) != 0 || bench::hard_vote(votes_c) != 0) {
    return "hard vote";
  }
  const auto summaries = bench::run_ensemble(ensemble_fixture());
  if (summaries.size() != 1 || summaries[0].datasets.size() != 2) return "ensemble grouping";
  const auto& s = summaries[0];
  const auto& d = s.datasets[0];
  if (d.dataset != "D" || d.baseline_votes != std::vector<int>{1, 0, 2} || d.mixed_votes != std::vector<int>{0, 1, 2}) {
    return "dataset D votes";
  }
  if (!close(d.baseline_accuracy, 1.0 / 3.0) || !close(d.mixed_accuracy, 1.0) || !close(d.delta, 2.0 / 3.0)) {
    return "dataset D accuracies";
  }
  if (s.wins != 1 || s.ties != 1 || s.losses != 0) return "ensemble W/T/L";
  // Deltas [0, 66.67] pp: median 33.33.
  if (!close(s.delta_pp.median, 100.0 / 3.0)) return "ensemble delta median";

  auto rows = ensemble_fixture();
  std::erase_if(rows, [](const bench::PredictionRow& r) { return r.dataset == "D" && r.scales == 3; });
  try {
    (void)bench::run_ensemble(rows);
    return "missing member not reported";
  } catch (const Error& e) {
    if (e.kind() != ErrorKind::missing_member) return "wrong error kind for a missing member";
  }
  return {};
}

}  // namespace roman::testing
