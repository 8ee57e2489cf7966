#include "roman/cli.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "roman/bench.hpp"
#include "roman/errors.hpp"
#include "roman/io.hpp"
#include "roman/probes.hpp"
#include "roman/routing.hpp"
#include "roman/synth.hpp"
#include "roman/version.hpp"

namespace roman::cli {

namespace fs = std::filesystem;

namespace {

struct Common {
  std::uint64_t seed = 0;
  std::string out;
  unsigned threads = 1;
  std::string format = "csv";
};

struct TransformArgs {
  std::string input;
  int scales = 0;
  std::size_t min_base = 0;
  double alpha = 0.5;
  bool raw = false;
};

struct SynthArgs {
  std::string family;
  std::size_t length = 512;
  std::size_t n_train = 500;
  std::size_t n_test = 250;
};

struct BenchArgs {
  std::vector<std::string> synth;
  std::vector<std::string> data;
  std::vector<int> scales{1, 4};
  std::vector<double> alphas{0.5};
  std::vector<std::string> probes{"pooled"};
  std::size_t seeds = 10;
  std::size_t length = 512;
  std::size_t n_train = 500;
  std::size_t n_test = 250;
  std::size_t pooled_kernels = 2000;
  std::size_t flatten_kernels = 128;
  bool parallel_probe = false;
  std::string predictions;
  std::string summary;
};

struct SummarizeArgs {
  std::string input;
  int baseline_scales = 1;
};

struct EnsembleArgs {
  std::string input;
};

int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::parse_error:
    case ErrorKind::unequal_length:
    case ErrorKind::unknown_class_label:
    case ErrorKind::version_mismatch:
    case ErrorKind::checksum_mismatch:
    case ErrorKind::shape_mismatch:
      return kExitParse;
    case ErrorKind::missing_baseline:
    case ErrorKind::missing_member:
      return kExitMissing;
    case ErrorKind::io_error:
      return kExitIo;
    default:
      return kExitConfig;
  }
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io_error, "cannot write '" + path.string() + "'");
  return f;
}

std::ifstream open_input(const fs::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorKind::io_error, "cannot read '" + path.string() + "'");
  return f;
}

// Writes through `write` either to the --out file or to stdout.
template <typename Fn>
void emit(const std::string& out_path, std::ostream& out, Fn&& write) {
  if (out_path.empty()) {
    write(out);
  } else {
    auto f = open_output(out_path);
    write(f);
  }
}

bool is_jsonl(const std::string& path, const std::string& format) {
  return format == "jsonl" || fs::path(path).extension() == ".jsonl";
}

nlohmann::json version_json() {
  return {{"name", "roman"},
          {"version", kVersion},
          {"tensor_format", io::kTensorFormatVersion},
          {"model_format", probes::kModelFormatVersion}};
}

RomanConfig transform_config(const TransformArgs& a) {
  if ((a.scales > 0) == (a.min_base > 0)) {
    throw Error(ErrorKind::invalid_argument, "exactly one of --scales or --min-base is required");
  }
  RomanConfig config = a.scales > 0 ? RomanConfig::with_scales(a.scales, a.alpha)
                                    : RomanConfig::with_min_base(a.min_base, a.alpha);
  config.validate();
  return config;
}

int cmd_transform(const TransformArgs& a, const Common& common, std::ostream& out) {
  const RomanConfig config = transform_config(a);
  TimeSeriesDataset ds = io::load_ts(a.input);
  if (!a.raw) ds = io::preprocess(std::move(ds));
  if (ds.size() == 0) throw Error(ErrorKind::parse_error, "input holds no series");

  // Unlabelled inputs carry null labels.
  const auto label_of = [&](std::size_t i) {
    return ds.labels.empty() ? nlohmann::json(nullptr) : nlohmann::json(ds.labels[i]);
  };
  RoutingPlan plan;
  const auto routed = apply_roman_batch(ds.series, config, &plan, common.threads);
  nlohmann::json depth = a.scales > 0 ? nlohmann::json{{"scales", a.scales}}
                                      : nlohmann::json{{"min_base_length", a.min_base}};
  const nlohmann::json header = {
      {"dataset", ds.id},
      {"instances", ds.size()},
      {"config", {{"depth", depth}, {"alpha", a.alpha}}},
      {"preprocessed", !a.raw},
      {"nan_policy", ds.provenance.nan_policy},
      {"nan_count", ds.provenance.nan_count},
      {"class_names", ds.class_names},
      {"plan", io::plan_to_json(plan)},
  };

  if (common.out.empty()) {
    // JSON lines: the header, then one object per routed instance.
    out << header.dump() << "\n";
    for (std::size_t i = 0; i < routed.size(); ++i) {
      const auto values = routed[i].values();
      out << nlohmann::json{{"instance", i},
                            {"label", label_of(i)},
                            {"dims", {routed[i].channels(), routed[i].length()}},
                            {"data", std::vector<double>(values.begin(), values.end())}}
                 .dump()
          << "\n";
    }
    return kExitOk;
  }

  const fs::path dir(common.out);
  fs::create_directories(dir);
  {
    auto f = open_output(dir / "plan.json");
    f << header.dump(2) << "\n";
  }
  for (std::size_t i = 0; i < routed.size(); ++i) {
    io::Tensor t;
    t.dims = {routed[i].channels(), routed[i].length()};
    const auto values = routed[i].values();
    t.data.assign(values.begin(), values.end());
    t.metadata = {{"dataset", ds.id},
                  {"instance", i},
                  {"label", label_of(i)},
                  {"config", header["config"]},
                  {"plan", header["plan"]}};
    char name[32];
    std::snprintf(name, sizeof(name), "instance_%06zu", i);
    io::save_tensor(dir / name, t);
  }
  return kExitOk;
}

synth::SynthTaskSpec synth_spec(const std::string& family, std::uint64_t seed, std::size_t length,
                                std::size_t n_train, std::size_t n_test) {
  synth::SynthTaskSpec spec;
  spec.family = synth::family_from_string(family);
  spec.seed = seed;
  spec.length = length;
  spec.n_train = n_train;
  spec.n_test = n_test;
  return spec;
}

int cmd_synth(const SynthArgs& a, const Common& common, std::ostream& err) {
  if (common.out.empty()) throw Error(ErrorKind::invalid_argument, "synth requires --out DIR");
  auto spec = synth_spec(a.family, common.seed, a.length, a.n_train, a.n_test);
  spec.threads = common.threads;
  const auto data = synth::generate(spec);
  const fs::path dir(common.out);
  fs::create_directories(dir);
  const std::string stem(synth::to_string(spec.family));
  io::save_ts(dir / (stem + "_TRAIN.ts"), data.train.data);
  io::save_ts(dir / (stem + "_TEST.ts"), data.test.data);
  auto f = open_output(dir / (stem + "_metadata.json"));
  f << data.metadata.dump(2) << "\n";
  err << "wrote " << (dir / (stem + "_{TRAIN,TEST}.ts")).string() << "\n";
  return kExitOk;
}

bench::DatasetSource data_source(const std::string& arg) {
  const auto eq = arg.find('=');
  const auto comma = arg.find(',', eq == std::string::npos ? 0 : eq);
  if (eq == std::string::npos || comma == std::string::npos) {
    throw Error(ErrorKind::invalid_argument, "--data expects NAME=TRAIN,TEST, got '" + arg + "'");
  }
  const std::string name = arg.substr(0, eq);
  const fs::path train_path = arg.substr(eq + 1, comma - eq - 1);
  const fs::path test_path = arg.substr(comma + 1);
  // Loaded eagerly so parse errors surface before the grid starts.
  auto split = std::make_shared<SplitDataset>();
  split->train = io::load_ts(train_path);
  split->test = io::load_ts(test_path, split->train.class_names);
  split->train.id = name;
  split->test.id = name;
  return {name, [split](std::uint64_t) { return *split; }};
}

int cmd_bench(const BenchArgs& a, const Common& common, std::ostream& out) {
  std::vector<bench::DatasetSource> sources;
  for (const auto& family : a.synth) {
    const auto base = synth_spec(family, 0, a.length, a.n_train, a.n_test);
    synth::generate([&] {  // geometry check up front
      auto s = base;
      s.n_train = 2;
      s.n_test = 2;
      return s;
    }());
    sources.push_back({std::string(synth::to_string(base.family)), [base](std::uint64_t seed) {
                         auto spec = base;
                         spec.seed = seed;
                         auto d = synth::generate(spec);
                         return SplitDataset{std::move(d.train.data), std::move(d.test.data)};
                       }});
  }
  for (const auto& d : a.data) sources.push_back(data_source(d));
  if (sources.empty()) throw Error(ErrorKind::invalid_argument, "bench needs at least one --synth or --data");

  std::vector<bench::GridConfig> configs;
  for (const auto& p : a.probes) {
    const auto probe = bench::probe_from_string(p);
    for (int s : a.scales) {
      for (double alpha : a.alphas) {
        RomanConfig::with_scales(s, alpha).validate();
        configs.push_back({s, alpha, probe});
      }
    }
  }
  std::vector<std::uint64_t> seeds(a.seeds);
  for (std::size_t i = 0; i < a.seeds; ++i) seeds[i] = common.seed + i;

  bench::GridOptions options;
  options.pooled_kernels = a.pooled_kernels;
  options.flatten_kernels = a.flatten_kernels;
  options.threads = common.threads;
  options.parallel_probe = a.parallel_probe;
  options.keep_predictions = !a.predictions.empty();
  const auto records = bench::run_grid(sources, configs, seeds, options);

  emit(common.out, out, [&](std::ostream& o) {
    if (is_jsonl(common.out, common.format)) {
      bench::write_records_jsonl(o, records);
    } else {
      bench::write_records_csv(o, records);
    }
  });
  if (!a.predictions.empty()) {
    auto f = open_output(a.predictions);
    bench::write_predictions_csv(f, bench::prediction_rows(records));
  }
  if (!a.summary.empty()) {
    auto f = open_output(a.summary);
    bench::write_summary_csv(f, bench::summarize(records));
  }
  return kExitOk;
}

int cmd_summarize(const SummarizeArgs& a, const Common& common, std::ostream& out) {
  auto f = open_input(a.input);
  const auto records = is_jsonl(a.input, common.format == "jsonl" ? "jsonl" : "")
                           ? bench::read_records_jsonl(f)
                           : bench::read_records_csv(f);
  const auto rows = bench::summarize(records, a.baseline_scales);
  emit(common.out, out, [&](std::ostream& o) { bench::write_summary_csv(o, rows); });
  return kExitOk;
}

int cmd_ensemble(const EnsembleArgs& a, const Common& common, std::ostream& out) {
  auto f = open_input(a.input);
  const auto rows = bench::read_predictions_csv(f);
  const auto summaries = bench::run_ensemble(rows);
  emit(common.out, out, [&](std::ostream& o) { bench::write_ensemble_csv(o, summaries); });
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Multiscale routing operator for time series"};
  app.name("roman");
  app.fallthrough();
  app.require_subcommand(0, 1);

  Common common;
  bool show_version = false;
  app.add_flag("--version", show_version, "Print version information as JSON");
  app.add_option("--seed", common.seed, "Base seed")->capture_default_str();
  app.add_option("--out", common.out, "Output path (stdout when absent)");
  app.add_option("--threads", common.threads, "Worker cap (0 = all cores)")
      ->envname("ROMAN_THREADS")
      ->capture_default_str();
  app.add_option("--format", common.format, "Record format")
      ->check(CLI::IsMember({"csv", "jsonl"}))
      ->capture_default_str();

  TransformArgs transform;
  auto* t = app.add_subcommand("transform", "Route a dataset through ROMAN");
  t->add_option("--input", transform.input, "Input .ts or TSV file")->required();
  auto* scales_opt = t->add_option("--scales", transform.scales, "Pyramid depth S")->check(CLI::PositiveNumber);
  auto* min_base_opt =
      t->add_option("--min-base", transform.min_base, "Deepest S keeping L_S >= this")->check(CLI::PositiveNumber);
  scales_opt->excludes(min_base_opt);
  t->add_option("--alpha", transform.alpha, "Window overlap in [0, 1)")->capture_default_str();
  t->add_flag("--raw", transform.raw, "Skip NaN imputation and z-normalisation");

  SynthArgs synth_args;
  auto* s = app.add_subcommand("synth", "Generate a synthetic mechanism task");
  s->add_option("--family", synth_args.family, "position|longrange|multiscale|invariance")->required();
  s->add_option("--length", synth_args.length)->capture_default_str();
  s->add_option("--n-train", synth_args.n_train)->capture_default_str();
  s->add_option("--n-test", synth_args.n_test)->capture_default_str();

  BenchArgs bench_args;
  auto* b = app.add_subcommand("bench", "Run a benchmark grid");
  b->add_option("--synth", bench_args.synth, "Synthetic family; seed k generates realisation k");
  b->add_option("--data", bench_args.data, "NAME=TRAIN,TEST archive files");
  b->add_option("--scales", bench_args.scales, "Depths to compare")->delimiter(',')->capture_default_str();
  b->add_option("--alpha", bench_args.alphas, "Overlaps")->delimiter(',')->capture_default_str();
  b->add_option("--probe", bench_args.probes, "pooled|flatten")->delimiter(',')->capture_default_str();
  b->add_option("--seeds", bench_args.seeds, "Number of seeds, starting at --seed")->capture_default_str();
  b->add_option("--length", bench_args.length, "Synthetic series length")->capture_default_str();
  b->add_option("--n-train", bench_args.n_train)->capture_default_str();
  b->add_option("--n-test", bench_args.n_test)->capture_default_str();
  b->add_option("--pooled-kernels", bench_args.pooled_kernels)->capture_default_str();
  b->add_option("--flatten-kernels", bench_args.flatten_kernels, "0 flattens raw values")->capture_default_str();
  b->add_flag("--parallel-probe", bench_args.parallel_probe, "Use --threads inside timed sections");
  b->add_option("--predictions", bench_args.predictions, "Write per-instance predictions CSV");
  b->add_option("--summary", bench_args.summary, "Also write the summary CSV");

  SummarizeArgs summarize_args;
  auto* m = app.add_subcommand("summarize", "Win/tie/loss and ratio summary of records");
  m->add_option("--input", summarize_args.input, "Records CSV or JSONL")->required();
  m->add_option("--baseline-scales", summarize_args.baseline_scales)->capture_default_str();

  EnsembleArgs ensemble_args;
  auto* e = app.add_subcommand("ensemble", "Baseline vs mixed-scale hard-vote ensembles");
  e->add_option("--input", ensemble_args.input, "Predictions CSV")->required();

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& ex) {
    err << "roman: " << ex.what() << "\n";
    return kExitConfig;
  }

  if (show_version) {
    out << version_json().dump() << "\n";
    return kExitOk;
  }

  try {
    if (t->parsed()) return cmd_transform(transform, common, out);
    if (s->parsed()) return cmd_synth(synth_args, common, err);
    if (b->parsed()) return cmd_bench(bench_args, common, out);
    if (m->parsed()) return cmd_summarize(summarize_args, common, out);
    if (e->parsed()) return cmd_ensemble(ensemble_args, common, out);
    err << app.help();
    return kExitConfig;
  } catch (const ParseError& ex) {
    err << "roman: parse error at line " << ex.line();
    if (ex.column() > 0) err << ", column " << ex.column();
    err << ": " << ex.what() << "\n";
    return exit_code(ex.kind());
  } catch (const Error& ex) {
    err << "roman: " << to_string(ex.kind()) << ": " << ex.what() << "\n";
    return exit_code(ex.kind());
  } catch (const fs::filesystem_error& ex) {
    err << "roman: " << ex.what() << "\n";
    return kExitIo;
  } catch (const std::exception& ex) {
    err << "roman: internal error: " << ex.what() << "\n";
    return kExitInternal;
  }
}

}  // namespace roman::cli
