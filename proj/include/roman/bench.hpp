#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "roman/dataset.hpp"

namespace roman::bench {

enum class ProbeKind { pooled, flatten };

std::string_view to_string(ProbeKind kind) noexcept;
ProbeKind probe_from_string(std::string_view name);

/// One experimental arm: ROMAN depth/overlap in front of a probe.
struct GridConfig {
  int scales = 1;
  double alpha = 0.5;
  ProbeKind probe = ProbeKind::pooled;

  bool operator==(const GridConfig&) const = default;
};

struct BenchmarkRecord {
  std::string dataset;
  GridConfig config;
  std::uint64_t seed = 0;
  double accuracy = 0.0;
  double t_roman = 0.0;  // preprocessing + routing of both splits, seconds
  double t_fit = 0.0;
  double t_predict = 0.0;
  bool ok = true;
  std::string error;
  std::vector<int> predictions;  // test predictions, kept on request
  std::vector<int> truth;

  double t_train() const noexcept { return t_roman + t_fit; }
  double t_infer() const noexcept { return t_roman + t_predict; }
};

/// Supplies the split for a seed. Fixed datasets ignore the seed; synthetic
/// sources generate one realisation per seed.
struct DatasetSource {
  std::string id;
  std::function<SplitDataset(std::uint64_t seed)> load;
};

struct GridOptions {
  std::size_t pooled_kernels = 2000;
  std::size_t flatten_kernels = 128;
  /// Worker count across grid cells. Each cell's timed phases run on a
  /// single thread regardless.
  unsigned threads = 1;
  /// Lets the probe use `threads` workers inside a cell. Timings are then
  /// no longer comparable across configs.
  bool parallel_probe = false;
  bool keep_predictions = false;
};

/// Runs one (dataset split, config, seed) cell. Preprocessing and routing
/// are timed together as t_roman, also for S = 1.
BenchmarkRecord run_cell(const SplitDataset& data, std::string dataset_id,
                         const GridConfig& config, std::uint64_t seed,
                         const GridOptions& options);

/// One record per (dataset, config, seed), ordered dataset-major, then config,
/// then seed. A failing cell yields a record with ok = false; the grid
/// continues.
std::vector<BenchmarkRecord> run_grid(std::span<const DatasetSource> datasets,
                                      std::span<const GridConfig> configs,
                                      std::span<const std::uint64_t> seeds,
                                      const GridOptions& options);

// -- aggregation -------------------------------------------------------------

/// A dataset counts as a tie when |mean accuracy difference| <= 0.005.
inline constexpr double kTieMargin = 0.005;

enum class Outcome { win, tie, loss };
Outcome classify(double mean_difference) noexcept;

/// Quantile with linear interpolation between closest ranks, inclusive
/// (position p * (n - 1)). Throws invalid_argument on an empty input.
double quantile(std::vector<double> values, double p);

struct Quartiles {
  double median = 0.0;
  double q1 = 0.0;
  double q3 = 0.0;
};
Quartiles quartiles(const std::vector<double>& values);

struct SummaryRow {
  GridConfig config;
  GridConfig baseline;
  std::size_t wins = 0;
  std::size_t ties = 0;
  std::size_t losses = 0;
  Quartiles acc_diff_pp;      // percentage points
  Quartiles abs_acc_diff_pp;  // percentage points
  double train_ratio = 1.0;   // median of per-dataset seed-mean ratios
  double infer_ratio = 1.0;
  std::vector<std::string> dropped;  // datasets excluded due to failures

  std::size_t datasets() const noexcept { return wins + ties + losses; }
};

/// Compares one config against a baseline config (which may be the same
/// config). Seeds are paired; per-dataset means are taken in seed order so
/// the result does not depend on record order.
SummaryRow compare_configs(std::span<const BenchmarkRecord> records, const GridConfig& config,
                           const GridConfig& baseline);

/// Compares every non-baseline config with the `baseline_scales` config of
/// the same probe. Accuracy differences are paired by seed and averaged per
/// dataset before classification. A dataset with any failed record on
/// either side is dropped from that comparison. Throws missing_baseline when
/// a compared (dataset, seed) has no baseline record.
std::vector<SummaryRow> summarize(std::span<const BenchmarkRecord> records,
                                  int baseline_scales = 1);

// -- ensembles ---------------------------------------------------------------

enum class EnsembleMode { baseline_only, mixed_scale };

struct EnsembleMember {
  int scales = 1;
  std::uint64_t seed = 0;
};

/// baseline_only: S=1 seeds 0..4. mixed_scale: S=1 seeds 0,1 and seed 0 of
/// S=2,3,4.
std::vector<EnsembleMember> ensemble_members(EnsembleMode mode);

/// Majority vote; ties go to the lowest class index.
int hard_vote(std::span<const int> votes);

/// One member prediction for one test instance.
struct PredictionRow {
  std::string dataset;
  ProbeKind probe = ProbeKind::pooled;
  int scales = 1;
  std::uint64_t seed = 0;
  std::size_t instance = 0;
  int truth = 0;
  int prediction = 0;
};

std::vector<PredictionRow> prediction_rows(std::span<const BenchmarkRecord> records);

struct EnsembleDatasetResult {
  std::string dataset;
  ProbeKind probe = ProbeKind::pooled;
  double baseline_accuracy = 0.0;
  double mixed_accuracy = 0.0;
  double delta = 0.0;  // mixed - baseline
  std::vector<int> baseline_votes;
  std::vector<int> mixed_votes;
};

struct EnsembleSummary {
  ProbeKind probe = ProbeKind::pooled;
  std::size_t wins = 0;
  std::size_t ties = 0;
  std::size_t losses = 0;
  Quartiles delta_pp;
  std::vector<EnsembleDatasetResult> datasets;
};

/// Hard votes of the given members for one dataset/probe. Throws
/// missing_member when a member or an instance prediction is absent.
std::vector<int> ensemble_votes(std::span<const PredictionRow> rows, std::string_view dataset,
                                ProbeKind probe, std::span<const EnsembleMember> members,
                                std::vector<int>* truth_out = nullptr);

/// Both ensembles for every (probe, dataset) present, ordered by probe then
/// dataset name.
std::vector<EnsembleSummary> run_ensemble(std::span<const PredictionRow> rows);

// -- serialisation -----------------------------------------------------------

/// dataset,scales,alpha,probe,seed,accuracy,t_roman,t_fit,t_predict,t_train,t_infer,status,error
inline constexpr std::string_view kRecordsHeader =
    "dataset,scales,alpha,probe,seed,accuracy,t_roman,t_fit,t_predict,t_train,t_infer,status,error";
inline constexpr std::string_view kSummaryHeader =
    "probe,scales,alpha,baseline_scales,datasets,wins,ties,losses,"
    "acc_diff_median_pp,acc_diff_q1_pp,acc_diff_q3_pp,"
    "abs_acc_diff_median_pp,abs_acc_diff_q1_pp,abs_acc_diff_q3_pp,train_ratio,infer_ratio";
inline constexpr std::string_view kPredictionsHeader =
    "dataset,probe,scales,seed,instance,truth,prediction";
inline constexpr std::string_view kEnsembleHeader =
    "probe,dataset,baseline_accuracy,mixed_accuracy,delta";

void write_records_csv(std::ostream& out, std::span<const BenchmarkRecord> records);
std::vector<BenchmarkRecord> read_records_csv(std::istream& in);
/// JSON lines; predictions and truth are included when present.
void write_records_jsonl(std::ostream& out, std::span<const BenchmarkRecord> records);
std::vector<BenchmarkRecord> read_records_jsonl(std::istream& in);

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows);
void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows);
std::vector<PredictionRow> read_predictions_csv(std::istream& in);
void write_ensemble_csv(std::ostream& out, std::span<const EnsembleSummary> summaries);

}  // namespace roman::bench
