#include "roman/bench.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <istream>
#include <limits>
#include <map>
#include <optional>
#include <ostream>
#include <set>
#include <sstream>
#include <tuple>

#include "json.hpp"

#include "roman/errors.hpp"
#include "roman/io.hpp"
#include "roman/parallel.hpp"
#include "roman/probes.hpp"
#include "roman/routing.hpp"

namespace roman::bench {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// Preprocessing plus routing of one split; this is the timed ROMAN stage.
std::vector<Series> roman_stage(const TimeSeriesDataset& ds, const RomanConfig& config) {
  std::vector<Series> prepared = ds.series;
  for (auto& s : prepared) io::preprocess_series(s);
  return apply_roman_batch(prepared, config, nullptr, 1);
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[32];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, ptr);
}

double parse_double(const std::string& s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::parse_error, "invalid number '" + s + "'");
  }
  return v;
}

template <typename Int>
Int parse_int(const std::string& s) {
  Int v{};
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || ptr != s.data() + s.size()) {
    throw Error(ErrorKind::parse_error, "invalid integer '" + s + "'");
  }
  return v;
}

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

std::vector<std::string> split_csv_line(const std::string& line, std::size_t line_no) {
  std::vector<std::string> fields;
  std::string current;
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        current += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        current += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      fields.push_back(std::move(current));
      current.clear();
    } else if (c != '\r') {
      current += c;
    }
  }
  if (quoted) throw ParseError(ErrorKind::parse_error, line_no, 0, "unterminated quoted field");
  fields.push_back(std::move(current));
  return fields;
}

// Reads a CSV with a required header; returns rows of fields.
std::vector<std::vector<std::string>> read_csv(std::istream& in, std::string_view header) {
  std::string line;
  std::size_t line_no = 0;
  std::vector<std::vector<std::string>> rows;
  bool seen_header = false;
  const std::size_t columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',')) + 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (!seen_header) {
      if (line != header) {
        throw ParseError(ErrorKind::parse_error, line_no, 1, "unexpected CSV header, expected '" + std::string(header) + "'");
      }
      seen_header = true;
      continue;
    }
    auto fields = split_csv_line(line, line_no);
    if (fields.size() != columns) {
      throw ParseError(ErrorKind::parse_error, line_no, 0,
                       "expected " + std::to_string(columns) + " fields, found " + std::to_string(fields.size()));
    }
    rows.push_back(std::move(fields));
  }
  if (!seen_header) throw ParseError(ErrorKind::parse_error, 1, 0, "missing CSV header");
  return rows;
}

double mean_of(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x;
  return sum / static_cast<double>(v.size());
}

double median_or_nan(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN() : quantile(v, 0.5);
}

Quartiles quartiles_or_nan(const std::vector<double>& v) {
  if (v.empty()) {
    const double nan = std::numeric_limits<double>::quiet_NaN();
    return {nan, nan, nan};
  }
  return quartiles(v);
}

bool config_less(const GridConfig& a, const GridConfig& b) {
  return std::tuple(static_cast<int>(a.probe), a.scales, a.alpha) <
         std::tuple(static_cast<int>(b.probe), b.scales, b.alpha);
}

}  // namespace

std::string_view to_string(ProbeKind kind) noexcept {
  return kind == ProbeKind::pooled ? "pooled" : "flatten";
}

ProbeKind probe_from_string(std::string_view name) {
  if (name == "pooled") return ProbeKind::pooled;
  if (name == "flatten") return ProbeKind::flatten;
  throw Error(ErrorKind::invalid_argument, "unknown probe '" + std::string(name) + "'");
}

// -- grid ----------------------------------------------------------------------

BenchmarkRecord run_cell(const SplitDataset& data, std::string dataset_id, const GridConfig& config,
                         std::uint64_t seed, const GridOptions& options) {
  BenchmarkRecord record;
  record.dataset = std::move(dataset_id);
  record.config = config;
  record.seed = seed;
  try {
    const RomanConfig roman = RomanConfig::with_scales(config.scales, config.alpha);
    roman.validate();
    const unsigned probe_threads = options.parallel_probe ? options.threads : 1;

    auto start = Clock::now();
    const auto train = roman_stage(data.train, roman);
    const auto test = roman_stage(data.test, roman);
    record.t_roman = seconds_since(start);

    probes::ProbeModel model;
    start = Clock::now();
    if (config.probe == ProbeKind::pooled) {
      probes::PooledConvProbeConfig pc;
      pc.n_kernels = options.pooled_kernels;
      pc.seed = seed;
      pc.threads = probe_threads;
      model = probes::fit_pooled_probe(train, data.train.labels, pc);
    } else {
      probes::FlattenProbeConfig fc;
      fc.n_kernels = options.flatten_kernels;
      fc.seed = seed;
      fc.threads = probe_threads;
      model = probes::fit_flatten_probe(train, data.train.labels, fc);
    }
    record.t_fit = seconds_since(start);

    start = Clock::now();
    const auto predictions = probes::predict(model, test);
    record.t_predict = seconds_since(start);

    std::size_t correct = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
      correct += predictions[i] == data.test.labels[i] ? 1 : 0;
    }
    record.accuracy = predictions.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(predictions.size());
    if (options.keep_predictions) {
      record.predictions = predictions;
      record.truth = data.test.labels;
    }
  } catch (const std::exception& e) {
    record.ok = false;
    record.error = e.what();
  }
  return record;
}

std::vector<BenchmarkRecord> run_grid(std::span<const DatasetSource> datasets,
                                      std::span<const GridConfig> configs,
                                      std::span<const std::uint64_t> seeds, const GridOptions& options) {
  const std::size_t per_dataset = configs.size() * seeds.size();
  std::vector<BenchmarkRecord> records(datasets.size() * per_dataset);
  // One work item per (dataset, seed): the split is loaded once and shared by
  // all configs.
  const std::size_t items = datasets.size() * seeds.size();
  const unsigned workers = options.parallel_probe ? 1 : options.threads;
  parallel_for(items, workers, [&](std::size_t item) {
    const std::size_t d = item / seeds.size();
    const std::size_t s = item % seeds.size();
    const auto slot = [&](std::size_t c) -> BenchmarkRecord& { return records[d * per_dataset + c * seeds.size() + s]; };
    SplitDataset data;
    try {
      data = datasets[d].load(seeds[s]);
      data.train.validate();
      data.test.validate();
    } catch (const std::exception& e) {
      for (std::size_t c = 0; c < configs.size(); ++c) {
        auto& r = slot(c);
        r.dataset = datasets[d].id;
        r.config = configs[c];
        r.seed = seeds[s];
        r.ok = false;
        r.error = std::string("load failed: ") + e.what();
      }
      return;
    }
    for (std::size_t c = 0; c < configs.size(); ++c) {
      slot(c) = run_cell(data, datasets[d].id, configs[c], seeds[s], options);
    }
  });
  return records;
}

// -- aggregation -----------------------------------------------------------------

Outcome classify(double mean_difference) noexcept {
  // The margin is inclusive; the slack absorbs representation error of
  // differences such as 0.805 - 0.8.
  constexpr double kSlack = 1e-12;
  if (std::abs(mean_difference) <= kTieMargin + kSlack) return Outcome::tie;
  return mean_difference > 0.0 ? Outcome::win : Outcome::loss;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw Error(ErrorKind::invalid_argument, "quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = p * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return frac == 0.0 ? values[lo] : values[lo] + frac * (values[hi] - values[lo]);
}

Quartiles quartiles(const std::vector<double>& values) {
  return {quantile(values, 0.5), quantile(values, 0.25), quantile(values, 0.75)};
}

SummaryRow compare_configs(std::span<const BenchmarkRecord> records, const GridConfig& config,
                           const GridConfig& baseline) {
  // dataset -> seed -> record, so every aggregate is taken in a fixed order.
  std::map<std::string, std::map<std::uint64_t, const BenchmarkRecord*>> arm, base;
  for (const auto& r : records) {
    if (r.config == config) arm[r.dataset][r.seed] = &r;
    if (r.config == baseline) base[r.dataset][r.seed] = &r;
  }
  SummaryRow row;
  row.config = config;
  row.baseline = baseline;
  std::vector<double> diffs, abs_diffs, train_ratios, infer_ratios;
  for (const auto& [dataset, seeds] : arm) {
    const auto base_it = base.find(dataset);
    bool failed = false;
    for (const auto& [seed, r] : seeds) {
      if (base_it == base.end() || !base_it->second.contains(seed)) {
        throw Error(ErrorKind::missing_baseline, "no baseline record for dataset '" + dataset + "' seed " +
                                                     std::to_string(seed));
      }
      failed = failed || !r->ok || !base_it->second.at(seed)->ok;
    }
    if (failed) {
      row.dropped.push_back(dataset);
      continue;
    }
    std::vector<double> d, arm_train, arm_infer, base_train, base_infer;
    for (const auto& [seed, r] : seeds) {
      const BenchmarkRecord* b = base_it->second.at(seed);
      d.push_back(r->accuracy - b->accuracy);
      arm_train.push_back(r->t_train());
      arm_infer.push_back(r->t_infer());
      base_train.push_back(b->t_train());
      base_infer.push_back(b->t_infer());
    }
    const double mean_diff = mean_of(d);
    switch (classify(mean_diff)) {
      case Outcome::win: ++row.wins; break;
      case Outcome::tie: ++row.ties; break;
      case Outcome::loss: ++row.losses; break;
    }
    diffs.push_back(100.0 * mean_diff);
    abs_diffs.push_back(100.0 * std::abs(mean_diff));
    train_ratios.push_back(mean_of(arm_train) / mean_of(base_train));
    infer_ratios.push_back(mean_of(arm_infer) / mean_of(base_infer));
  }
  row.acc_diff_pp = quartiles_or_nan(diffs);
  row.abs_acc_diff_pp = quartiles_or_nan(abs_diffs);
  row.train_ratio = median_or_nan(train_ratios);
  row.infer_ratio = median_or_nan(infer_ratios);
  return row;
}

std::vector<SummaryRow> summarize(std::span<const BenchmarkRecord> records, int baseline_scales) {
  std::vector<GridConfig> configs;
  for (const auto& r : records) {
    if (std::find(configs.begin(), configs.end(), r.config) == configs.end()) configs.push_back(r.config);
  }
  std::sort(configs.begin(), configs.end(), config_less);
  std::vector<SummaryRow> rows;
  for (const auto& config : configs) {
    if (config.scales == baseline_scales) continue;
    // Baseline of the same probe; same alpha when present, else the smallest.
    std::optional<GridConfig> baseline;
    for (const auto& candidate : configs) {
      if (candidate.probe != config.probe || candidate.scales != baseline_scales) continue;
      if (!baseline || candidate.alpha == config.alpha) baseline = candidate;
      if (candidate.alpha == config.alpha) break;
    }
    if (!baseline) {
      throw Error(ErrorKind::missing_baseline,
                  "no S=" + std::to_string(baseline_scales) + " records for probe " +
                      std::string(to_string(config.probe)));
    }
    rows.push_back(compare_configs(records, config, *baseline));
  }
  return rows;
}

// -- ensembles -------------------------------------------------------------------

std::vector<EnsembleMember> ensemble_members(EnsembleMode mode) {
  if (mode == EnsembleMode::baseline_only) return {{1, 0}, {1, 1}, {1, 2}, {1, 3}, {1, 4}};
  return {{1, 0}, {1, 1}, {2, 0}, {3, 0}, {4, 0}};
}

int hard_vote(std::span<const int> votes) {
  if (votes.empty()) throw Error(ErrorKind::missing_member, "hard vote over no members");
  std::map<int, std::size_t> counts;
  for (int v : votes) ++counts[v];
  int best = counts.begin()->first;
  std::size_t best_count = 0;
  for (const auto& [label, count] : counts) {  // ascending label order
    if (count > best_count) {
      best = label;
      best_count = count;
    }
  }
  return best;
}

std::vector<PredictionRow> prediction_rows(std::span<const BenchmarkRecord> records) {
  std::vector<PredictionRow> rows;
  for (const auto& r : records) {
    if (!r.ok) continue;
    for (std::size_t i = 0; i < r.predictions.size(); ++i) {
      rows.push_back({r.dataset, r.config.probe, r.config.scales, r.seed, i,
                      i < r.truth.size() ? r.truth[i] : -1, r.predictions[i]});
    }
  }
  return rows;
}

std::vector<int> ensemble_votes(std::span<const PredictionRow> rows, std::string_view dataset, ProbeKind probe,
                                std::span<const EnsembleMember> members, std::vector<int>* truth_out) {
  std::map<std::size_t, std::vector<int>> by_instance;
  std::map<std::size_t, int> truth;
  std::vector<std::size_t> member_rows(members.size(), 0);
  for (const auto& row : rows) {
    if (row.dataset != dataset || row.probe != probe) continue;
    for (std::size_t m = 0; m < members.size(); ++m) {
      if (row.scales == members[m].scales && row.seed == members[m].seed) {
        auto& slots = by_instance[row.instance];
        slots.resize(members.size(), -1);
        slots[m] = row.prediction;
        truth[row.instance] = row.truth;
        ++member_rows[m];
      }
    }
  }
  for (std::size_t m = 0; m < members.size(); ++m) {
    if (member_rows[m] == 0) {
      throw Error(ErrorKind::missing_member,
                  "dataset '" + std::string(dataset) + "' has no predictions for S=" +
                      std::to_string(members[m].scales) + " seed " + std::to_string(members[m].seed));
    }
  }
  std::vector<int> votes;
  for (const auto& [instance, slots] : by_instance) {
    if (std::find(slots.begin(), slots.end(), -1) != slots.end()) {
      throw Error(ErrorKind::missing_member, "dataset '" + std::string(dataset) + "' instance " +
                                                 std::to_string(instance) + " lacks a member prediction");
    }
    votes.push_back(hard_vote(slots));
    if (truth_out) truth_out->push_back(truth[instance]);
  }
  return votes;
}

std::vector<EnsembleSummary> run_ensemble(std::span<const PredictionRow> rows) {
  std::set<std::pair<int, std::string>> keys;
  for (const auto& r : rows) keys.emplace(static_cast<int>(r.probe), r.dataset);
  const auto baseline_members = ensemble_members(EnsembleMode::baseline_only);
  const auto mixed_members = ensemble_members(EnsembleMode::mixed_scale);

  std::vector<EnsembleSummary> out;
  for (const auto& [probe_id, dataset] : keys) {
    const auto probe = static_cast<ProbeKind>(probe_id);
    if (out.empty() || out.back().probe != probe) {
      out.emplace_back();
      out.back().probe = probe;
    }
    EnsembleDatasetResult result;
    result.dataset = dataset;
    result.probe = probe;
    std::vector<int> truth_base, truth_mixed;
    result.baseline_votes = ensemble_votes(rows, dataset, probe, baseline_members, &truth_base);
    result.mixed_votes = ensemble_votes(rows, dataset, probe, mixed_members, &truth_mixed);
    if (truth_base != truth_mixed) {
      throw Error(ErrorKind::missing_member, "dataset '" + dataset + "': ensembles cover different instances");
    }
    const auto accuracy = [&](const std::vector<int>& votes) {
      std::size_t correct = 0;
      for (std::size_t i = 0; i < votes.size(); ++i) correct += votes[i] == truth_base[i] ? 1 : 0;
      return votes.empty() ? 0.0 : static_cast<double>(correct) / static_cast<double>(votes.size());
    };
    result.baseline_accuracy = accuracy(result.baseline_votes);
    result.mixed_accuracy = accuracy(result.mixed_votes);
    result.delta = result.mixed_accuracy - result.baseline_accuracy;
    out.back().datasets.push_back(std::move(result));
  }
  for (auto& summary : out) {
    std::vector<double> deltas;
    for (const auto& d : summary.datasets) {
      switch (classify(d.delta)) {
        case Outcome::win: ++summary.wins; break;
        case Outcome::tie: ++summary.ties; break;
        case Outcome::loss: ++summary.losses; break;
      }
      deltas.push_back(100.0 * d.delta);
    }
    summary.delta_pp = quartiles_or_nan(deltas);
  }
  return out;
}

// -- serialisation -----------------------------------------------------------------

void write_records_csv(std::ostream& out, std::span<const BenchmarkRecord> records) {
  out << kRecordsHeader << "\n";
  for (const auto& r : records) {
    out << csv_field(r.dataset) << ',' << r.config.scales << ',' << format_double(r.config.alpha) << ','
        << to_string(r.config.probe) << ',' << r.seed << ',' << format_double(r.accuracy) << ','
        << format_double(r.t_roman) << ',' << format_double(r.t_fit) << ',' << format_double(r.t_predict) << ','
        << format_double(r.t_train()) << ',' << format_double(r.t_infer()) << ','
        << (r.ok ? "ok" : "failed") << ',' << csv_field(r.error) << "\n";
  }
}

std::vector<BenchmarkRecord> read_records_csv(std::istream& in) {
  std::vector<BenchmarkRecord> records;
  for (const auto& f : read_csv(in, kRecordsHeader)) {
    BenchmarkRecord r;
    r.dataset = f[0];
    r.config.scales = parse_int<int>(f[1]);
    r.config.alpha = parse_double(f[2]);
    r.config.probe = probe_from_string(f[3]);
    r.seed = parse_int<std::uint64_t>(f[4]);
    r.accuracy = parse_double(f[5]);
    r.t_roman = parse_double(f[6]);
    r.t_fit = parse_double(f[7]);
    r.t_predict = parse_double(f[8]);
    r.ok = f[11] == "ok";
    r.error = f[12];
    records.push_back(std::move(r));
  }
  return records;
}

void write_records_jsonl(std::ostream& out, std::span<const BenchmarkRecord> records) {
  for (const auto& r : records) {
    nlohmann::json j = {
        {"dataset", r.dataset}, {"scales", r.config.scales}, {"alpha", r.config.alpha},
        {"probe", to_string(r.config.probe)}, {"seed", r.seed}, {"accuracy", r.accuracy},
        {"t_roman", r.t_roman}, {"t_fit", r.t_fit}, {"t_predict", r.t_predict},
        {"t_train", r.t_train()}, {"t_infer", r.t_infer()}, {"status", r.ok ? "ok" : "failed"},
        {"error", r.error},
    };
    if (!r.predictions.empty()) {
      j["predictions"] = r.predictions;
      j["truth"] = r.truth;
    }
    out << j.dump() << "\n";
  }
}

namespace {

// JSON has no NaN; it is written as null.
double number_or_nan(const nlohmann::json& j, const char* key) {
  const auto& v = j.at(key);
  return v.is_null() ? std::numeric_limits<double>::quiet_NaN() : v.get<double>();
}

}  // namespace

std::vector<BenchmarkRecord> read_records_jsonl(std::istream& in) {
  std::vector<BenchmarkRecord> records;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      BenchmarkRecord r;
      r.dataset = j.at("dataset").get<std::string>();
      r.config.scales = j.at("scales").get<int>();
      r.config.alpha = j.at("alpha").get<double>();
      r.config.probe = probe_from_string(j.at("probe").get<std::string>());
      r.seed = j.at("seed").get<std::uint64_t>();
      r.accuracy = number_or_nan(j, "accuracy");
      r.t_roman = number_or_nan(j, "t_roman");
      r.t_fit = number_or_nan(j, "t_fit");
      r.t_predict = number_or_nan(j, "t_predict");
      r.ok = j.value("status", "ok") == "ok";
      r.error = j.value("error", "");
      if (j.contains("predictions")) {
        r.predictions = j.at("predictions").get<std::vector<int>>();
        r.truth = j.at("truth").get<std::vector<int>>();
      }
      records.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(ErrorKind::parse_error, line_no, 0, e.what());
    }
  }
  return records;
}

void write_summary_csv(std::ostream& out, std::span<const SummaryRow> rows) {
  out << kSummaryHeader << "\n";
  for (const auto& r : rows) {
    out << to_string(r.config.probe) << ',' << r.config.scales << ',' << format_double(r.config.alpha) << ','
        << r.baseline.scales << ',' << r.datasets() << ',' << r.wins << ',' << r.ties << ',' << r.losses << ','
        << format_double(r.acc_diff_pp.median) << ',' << format_double(r.acc_diff_pp.q1) << ','
        << format_double(r.acc_diff_pp.q3) << ',' << format_double(r.abs_acc_diff_pp.median) << ','
        << format_double(r.abs_acc_diff_pp.q1) << ',' << format_double(r.abs_acc_diff_pp.q3) << ','
        << format_double(r.train_ratio) << ',' << format_double(r.infer_ratio) << "\n";
  }
}

void write_predictions_csv(std::ostream& out, std::span<const PredictionRow> rows) {
  out << kPredictionsHeader << "\n";
  for (const auto& r : rows) {
    out << csv_field(r.dataset) << ',' << to_string(r.probe) << ',' << r.scales << ',' << r.seed << ','
        << r.instance << ',' << r.truth << ',' << r.prediction << "\n";
  }
}

std::vector<PredictionRow> read_predictions_csv(std::istream& in) {
  std::vector<PredictionRow> rows;
  for (const auto& f : read_csv(in, kPredictionsHeader)) {
    rows.push_back({f[0], probe_from_string(f[1]), parse_int<int>(f[2]), parse_int<std::uint64_t>(f[3]),
                    parse_int<std::size_t>(f[4]), parse_int<int>(f[5]), parse_int<int>(f[6])});
  }
  return rows;
}

void write_ensemble_csv(std::ostream& out, std::span<const EnsembleSummary> summaries) {
  out << kEnsembleHeader << "\n";
  for (const auto& s : summaries) {
    for (const auto& d : s.datasets) {
      out << to_string(s.probe) << ',' << csv_field(d.dataset) << ',' << format_double(d.baseline_accuracy)
          << ',' << format_double(d.mixed_accuracy) << ',' << format_double(d.delta) << "\n";
    }
  }
}

}  // namespace roman::bench
