#include "roman/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "roman/errors.hpp"
#include "roman/io.hpp"
#include "roman/parallel.hpp"
#include "roman/rng.hpp"

namespace roman::synth {

namespace {

constexpr std::uint8_t kTrainSplit = 0;
constexpr std::uint8_t kTestSplit = 1;
constexpr std::uint8_t kLibraryStream = 2;
constexpr int kMaxAttempts = 10000;

[[noreturn]] void infeasible(const std::string& what) {
  throw Error(ErrorKind::infeasible_geometry, what);
}

RandomStream instance_stream(const SynthTaskSpec& spec, std::uint8_t split, std::size_t index) {
  return RandomStream(spec.seed, stream_id(static_cast<std::uint8_t>(spec.family), split, index));
}

// Uniform over all sorted offset sets in [0, window) with consecutive gaps
// of at least `spacing`: draw from the compressed range, then re-expand.
Pattern draw_pattern(RandomStream& rng, std::size_t window, std::size_t spikes, std::size_t spacing) {
  const std::size_t shrink = (spikes - 1) * (spacing > 0 ? spacing - 1 : 0);
  const std::size_t pool = window - shrink;
  std::vector<std::size_t> chosen;
  chosen.reserve(spikes);
  // Floyd's sampling keeps the draw count fixed at `spikes`.
  for (std::size_t j = pool - spikes; j < pool; ++j) {
    const std::size_t t = rng.below(j + 1);
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(j);
    }
  }
  std::sort(chosen.begin(), chosen.end());
  for (std::size_t i = 0; i < chosen.size(); ++i) chosen[i] += i * (spacing > 0 ? spacing - 1 : 0);
  return chosen;
}

void check_pattern_geometry(std::size_t window, std::size_t spikes, std::size_t spacing, const char* what) {
  if (spikes == 0) infeasible(std::string(what) + ": need at least one spike");
  const std::size_t shrink = (spikes - 1) * (spacing > 0 ? spacing - 1 : 0);
  if (window < shrink || window - shrink < spikes) {
    infeasible(std::string(what) + ": " + std::to_string(spikes) + " spikes with spacing " +
               std::to_string(spacing) + " do not fit in " + std::to_string(window) + " samples");
  }
}

nlohmann::json patterns_json(const std::vector<Pattern>& library) {
  nlohmann::json out = nlohmann::json::array();
  for (const auto& p : library) out.push_back(p);
  return out;
}

void add_noise(RandomStream& rng, std::span<double> row, double sigma) {
  if (sigma == 0.0) return;
  for (double& v : row) v += sigma * rng.normal();
}

template <typename MakeInstance>
LabeledSet build_split(const SynthTaskSpec& spec, std::uint8_t split, std::size_t count,
                       MakeInstance&& make) {
  LabeledSet set;
  set.data.id = std::string(to_string(spec.family)) + (split == kTrainSplit ? "_TRAIN" : "_TEST");
  set.data.class_names = {"0", "1"};
  set.data.series.resize(count);
  set.data.labels.resize(count);
  set.info.resize(count);
  parallel_for(count, spec.threads, [&](std::size_t i) {
    RandomStream rng = instance_stream(spec, split, i);
    const int label = static_cast<int>(i % 2);
    std::vector<double> values(spec.length, 0.0);
    InstanceInfo info = make(rng, label, values);
    info.label = label;
    if (spec.normalize) io::znormalize(values);
    set.data.series[i] = Series::univariate(std::move(values));
    set.data.labels[i] = label;
    set.info[i] = std::move(info);
  });
  set.data.provenance.normalized = spec.normalize;
  set.data.provenance.notes.push_back("synthetic:" + std::string(to_string(spec.family)) +
                                      " seed=" + std::to_string(spec.seed));
  return set;
}

nlohmann::json base_metadata(const SynthTaskSpec& spec) {
  return {
      {"family", to_string(spec.family)},
      {"seed", spec.seed},
      {"length", spec.length},
      {"n_train", spec.n_train},
      {"n_test", spec.n_test},
      {"normalized", spec.normalize},
      {"normalization", "per-series z-score, population std, constant series -> zeros"},
      {"rng", {{"generator", "philox4x32-10"},
               {"key", "seed"},
               {"stream", "family<<56 | split<<48 | instance (split: 0 train, 1 test, 2 library)"}}},
      {"labels", "instance i has label i mod 2"},
  };
}

void check_common(const SynthTaskSpec& spec) {
  if (spec.length == 0) infeasible("series length must be positive");
}

// Draws `count` pairwise-distinct patterns; `accept` vets each candidate
// against those already drawn.
template <typename Accept>
std::vector<Pattern> draw_library(RandomStream& rng, std::size_t count, std::size_t window,
                                  std::size_t spikes, std::size_t spacing, Accept&& accept) {
  std::vector<Pattern> library;
  int attempts = 0;
  while (library.size() < count) {
    if (++attempts > kMaxAttempts) {
      infeasible("could not draw a pattern library of size " + std::to_string(count) +
                 " under the distance constraint");
    }
    Pattern candidate = draw_pattern(rng, window, spikes, spacing);
    if (accept(library, candidate)) library.push_back(std::move(candidate));
  }
  return library;
}

}  // namespace

std::string_view to_string(Family family) noexcept {
  switch (family) {
    case Family::position: return "position";
    case Family::longrange: return "longrange";
    case Family::multiscale: return "multiscale";
    case Family::invariance: return "invariance";
  }
  return "unknown";
}

Family family_from_string(std::string_view name) {
  for (Family f : {Family::position, Family::longrange, Family::multiscale, Family::invariance}) {
    if (name == to_string(f)) return f;
  }
  throw Error(ErrorKind::invalid_argument, "unknown synthetic family '" + std::string(name) + "'");
}

std::size_t pattern_distance(const Pattern& a, const Pattern& b) noexcept {
  std::size_t d = 0;
  const std::size_t n = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < n; ++i) d += a[i] > b[i] ? a[i] - b[i] : b[i] - a[i];
  return d;
}

std::pair<DistanceRange, DistanceRange> position_class_ranges(const PositionParams& p) {
  const std::size_t lo = p.min_distance;
  const std::size_t hi = p.center_margin;
  if (hi <= lo) infeasible("position task: empty admissible distance interval");
  const std::size_t mid = lo + (hi - lo) / 2;
  const std::size_t left_cut = p.gap / 2;
  const std::size_t right_cut = p.gap - left_cut;
  if (mid < lo + left_cut + 1 || mid + right_cut + 1 > hi) {
    infeasible("position task: the class gap leaves an empty class range");
  }
  return {DistanceRange{lo, mid - left_cut}, DistanceRange{mid + right_cut, hi}};
}

std::pair<std::size_t, std::size_t> longrange_centers(std::size_t length) noexcept {
  return {length / 6, 5 * length / 6};
}

SynthDataset gen_position(const SynthTaskSpec& spec) {
  check_common(spec);
  const auto& p = spec.position;
  const auto [near, far] = position_class_ranges(p);
  if (2 * far.hi > spec.length) {
    infeasible("position task: spikes would cross the series centre");
  }
  if (p.amplitude_hi < p.amplitude_lo) infeasible("position task: empty amplitude range");

  auto make = [&](RandomStream& rng, int label, std::vector<double>& x) {
    const DistanceRange range = label == 0 ? near : far;
    const auto d = static_cast<std::size_t>(rng.between(static_cast<std::int64_t>(range.lo),
                                                        static_cast<std::int64_t>(range.hi)));
    const double amplitude = rng.uniform(p.amplitude_lo, p.amplitude_hi);
    x[d] += amplitude;
    x[spec.length - 1 - d] += amplitude;
    add_noise(rng, x, p.noise);
    InstanceInfo info;
    info.distance = d;
    info.amplitude = amplitude;
    info.positions = {d, spec.length - 1 - d};
    return info;
  };

  SynthDataset out{build_split(spec, kTrainSplit, spec.n_train, make),
                   build_split(spec, kTestSplit, spec.n_test, make), base_metadata(spec)};
  out.metadata["params"] = {{"min_distance", p.min_distance}, {"center_margin", p.center_margin},
                            {"gap", p.gap},
                            {"amplitude", {p.amplitude_lo, p.amplitude_hi}},
                            {"noise", p.noise}};
  out.metadata["class_ranges"] = {{"0", {near.lo, near.hi}}, {"1", {far.lo, far.hi}}};
  out.metadata["class_range_rule"] =
      "split [min_distance, center_margin) at its midpoint and remove gap/2 on each side; half-open";
  return out;
}

SynthDataset gen_longrange(const SynthTaskSpec& spec) {
  check_common(spec);
  const auto& p = spec.longrange;
  if (p.library_size < 2) {
    infeasible("long-range task: class 1 needs at least two library patterns");
  }
  check_pattern_geometry(p.burst_length, p.spikes, p.min_spacing, "long-range task");
  const auto [c1, c2] = longrange_centers(spec.length);
  const std::size_t half = p.burst_length / 2;
  if (c1 < half || c2 - half + p.burst_length > spec.length || c1 - half + p.burst_length > c2 - half) {
    infeasible("long-range task: burst windows do not fit the series");
  }
  const std::size_t start1 = c1 - half;
  const std::size_t start2 = c2 - half;

  RandomStream lib_rng(spec.seed, stream_id(static_cast<std::uint8_t>(spec.family), kLibraryStream, 0));
  const auto library = draw_library(lib_rng, p.library_size, p.burst_length, p.spikes, p.min_spacing,
                                    [&](const std::vector<Pattern>& lib, const Pattern& cand) {
                                      for (const auto& q : lib) {
                                        if (pattern_distance(q, cand) < p.min_pattern_distance) return false;
                                      }
                                      return true;
                                    });
  const auto lib_size = static_cast<std::uint64_t>(library.size());

  auto make = [&](RandomStream& rng, int label, std::vector<double>& x) {
    const auto first = static_cast<int>(rng.below(lib_size));
    const int second =
        label == 0 ? first : static_cast<int>((static_cast<std::uint64_t>(first) + 1 + rng.below(lib_size - 1)) % lib_size);
    for (auto o : library[static_cast<std::size_t>(first)]) x[start1 + o] += p.amplitude;
    for (auto o : library[static_cast<std::size_t>(second)]) x[start2 + o] += p.amplitude;
    add_noise(rng, x, p.noise);
    InstanceInfo info;
    info.positions = {start1, start2};
    info.patterns = {first, second};
    info.amplitude = p.amplitude;
    return info;
  };

  SynthDataset out{build_split(spec, kTrainSplit, spec.n_train, make),
                   build_split(spec, kTestSplit, spec.n_test, make), base_metadata(spec)};
  out.metadata["params"] = {{"burst_length", p.burst_length}, {"spikes", p.spikes},
                            {"min_spacing", p.min_spacing},
                            {"min_pattern_distance", p.min_pattern_distance},
                            {"library_size", p.library_size}, {"amplitude", p.amplitude},
                            {"noise", p.noise}};
  out.metadata["burst_starts"] = {start1, start2};
  out.metadata["burst_centers"] = {c1, c2};
  out.metadata["library"] = patterns_json(library);
  out.metadata["pattern_distance"] = "sum of absolute differences between sorted spike offsets";
  return out;
}

SynthDataset gen_multiscale(const SynthTaskSpec& spec) {
  check_common(spec);
  const auto& p = spec.multiscale;
  if (p.phases < 2) infeasible("multiscale task: class 1 needs at least two phases");
  if (p.mask_length > spec.length || p.burst_length == 0) {
    infeasible("multiscale task: mask longer than the series");
  }
  const std::size_t mask_start = (spec.length - p.mask_length) / 2;
  const std::size_t burst_start = spec.length >= p.burst_length ? (spec.length - p.burst_length) / 2 : 0;
  if (p.burst_length > p.mask_length || burst_start < mask_start ||
      burst_start + p.burst_length > mask_start + p.mask_length) {
    infeasible("multiscale task: the mask does not contain the burst");
  }
  const double two_pi = 2.0 * std::numbers::pi;
  const auto phases = static_cast<std::uint64_t>(p.phases);

  auto make = [&](RandomStream& rng, int label, std::vector<double>& x) {
    const auto coarse = static_cast<int>(rng.below(phases));
    const int fine =
        label == 0 ? coarse : static_cast<int>((static_cast<std::uint64_t>(coarse) + 1 + rng.below(phases - 1)) % phases);
    const double coarse_phase = two_pi * coarse / static_cast<double>(p.phases);
    const double fine_phase = two_pi * fine / static_cast<double>(p.phases);
    const double length = static_cast<double>(spec.length);
    for (std::size_t t = 0; t < spec.length; ++t) {
      if (t >= mask_start && t < mask_start + p.mask_length) continue;
      x[t] += p.coarse_amplitude *
              std::cos(two_pi * static_cast<double>(p.coarse_cycles) * static_cast<double>(t) / length + coarse_phase);
    }
    for (std::size_t k = 0; k < p.burst_length; ++k) {
      x[burst_start + k] += p.fine_amplitude *
                            std::cos(two_pi * static_cast<double>(p.fine_cycles) * static_cast<double>(k) /
                                         static_cast<double>(p.burst_length) +
                                     fine_phase);
    }
    add_noise(rng, x, p.noise);
    InstanceInfo info;
    info.positions = {mask_start, burst_start};
    info.phases = {coarse, fine};
    info.amplitude = p.fine_amplitude;
    return info;
  };

  SynthDataset out{build_split(spec, kTrainSplit, spec.n_train, make),
                   build_split(spec, kTestSplit, spec.n_test, make), base_metadata(spec)};
  out.metadata["params"] = {{"coarse_cycles", p.coarse_cycles}, {"burst_length", p.burst_length},
                            {"fine_cycles", p.fine_cycles}, {"mask_length", p.mask_length},
                            {"phases", p.phases}, {"fine_amplitude", p.fine_amplitude},
                            {"coarse_amplitude", p.coarse_amplitude}, {"noise", p.noise}};
  out.metadata["mask"] = {mask_start, mask_start + p.mask_length};
  out.metadata["burst"] = {burst_start, burst_start + p.burst_length};
  out.metadata["phase_values"] = "2*pi*k/phases, k = 0..phases-1";
  return out;
}

SynthDataset gen_invariance(const SynthTaskSpec& spec) {
  check_common(spec);
  const auto& p = spec.invariance;
  if (p.distractor_patterns < 1) infeasible("invariance task: need at least one distractor pattern");
  if (p.motif_length > spec.length) infeasible("invariance task: motif longer than the series");
  check_pattern_geometry(p.motif_length, p.spikes, p.min_spacing, "invariance task");
  const std::size_t instances = p.distractor_instances + 1;
  const std::size_t positions = spec.length - p.motif_length + 1;
  if ((instances - 1) * p.min_separation + 1 > positions) {
    infeasible("invariance task: " + std::to_string(instances) + " motifs cannot be separated by " +
               std::to_string(p.min_separation) + " samples");
  }

  // Pattern 0 is the target, 1..D are distractors.
  RandomStream lib_rng(spec.seed, stream_id(static_cast<std::uint8_t>(spec.family), kLibraryStream, 0));
  const auto library =
      draw_library(lib_rng, p.distractor_patterns + 1, p.motif_length, p.spikes, p.min_spacing,
                   [&](const std::vector<Pattern>& lib, const Pattern& cand) {
                     if (lib.empty()) return true;
                     if (pattern_distance(lib.front(), cand) < p.min_pattern_distance) return false;
                     for (const auto& q : lib) {
                       if (q == cand) return false;
                     }
                     return true;
                   });
  const auto distractors = static_cast<std::uint64_t>(p.distractor_patterns);

  auto make = [&](RandomStream& rng, int label, std::vector<double>& x) {
    std::vector<std::size_t> starts;
    int attempts = 0;
    while (starts.size() < instances) {
      if (++attempts > kMaxAttempts) infeasible("invariance task: could not place motif instances");
      const auto candidate = static_cast<std::size_t>(rng.below(positions));
      bool ok = true;
      for (auto s : starts) {
        const std::size_t gap = s > candidate ? s - candidate : candidate - s;
        if (gap < p.min_separation) ok = false;
      }
      if (ok) starts.push_back(candidate);
    }
    InstanceInfo info;
    for (std::size_t slot = 0; slot < instances; ++slot) {
      const int pattern = (label == 1 && slot == 0) ? 0 : 1 + static_cast<int>(rng.below(distractors));
      for (auto o : library[static_cast<std::size_t>(pattern)]) x[starts[slot] + o] += p.amplitude;
      info.patterns.push_back(pattern);
    }
    add_noise(rng, x, p.noise);
    info.positions = std::move(starts);
    info.amplitude = p.amplitude;
    return info;
  };

  SynthDataset out{build_split(spec, kTrainSplit, spec.n_train, make),
                   build_split(spec, kTestSplit, spec.n_test, make), base_metadata(spec)};
  out.metadata["params"] = {{"motif_length", p.motif_length}, {"spikes", p.spikes},
                            {"min_spacing", p.min_spacing},
                            {"distractor_patterns", p.distractor_patterns},
                            {"distractor_instances", p.distractor_instances},
                            {"min_pattern_distance", p.min_pattern_distance},
                            {"min_separation", p.min_separation}, {"amplitude", p.amplitude},
                            {"noise", p.noise}};
  out.metadata["library"] = patterns_json(library);
  out.metadata["target_pattern"] = 0;
  out.metadata["pattern_distance"] = "sum of absolute differences between sorted spike offsets";
  out.metadata["positive_class"] = 1;
  return out;
}

SynthDataset generate(const SynthTaskSpec& spec) {
  switch (spec.family) {
    case Family::position: return gen_position(spec);
    case Family::longrange: return gen_longrange(spec);
    case Family::multiscale: return gen_multiscale(spec);
    case Family::invariance: return gen_invariance(spec);
  }
  throw Error(ErrorKind::invalid_argument, "unknown synthetic family");
}

}  // namespace roman::synth
