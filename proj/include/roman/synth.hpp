#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "json.hpp"

#include "roman/dataset.hpp"

namespace roman::synth {

enum class Family : std::uint8_t { position = 1, longrange = 2, multiscale = 3, invariance = 4 };

std::string_view to_string(Family family) noexcept;
/// Throws invalid_argument for an unknown name.
Family family_from_string(std::string_view name);

/// Two identical single-sample spikes at distances d from each border.
struct PositionParams {
  std::size_t min_distance = 32;    // d_min
  std::size_t center_margin = 128;  // admissible d is [min_distance, center_margin)
  std::size_t gap = 16;             // removed around the class split point
  double amplitude_lo = 4.0;
  double amplitude_hi = 4.5;
  double noise = 1.0;
};

/// Two sparse bursts near L/6 and 5L/6; class 0 iff they share a pattern.
struct LongRangeParams {
  std::size_t burst_length = 33;
  std::size_t spikes = 4;
  std::size_t min_spacing = 6;
  std::size_t min_pattern_distance = 6;
  std::size_t library_size = 3;
  double amplitude = 4.0;
  double noise = 1.0;
};

/// Full-length coarse cosine, masked centre, fine burst inside the mask;
/// class 0 iff the fine phase equals the coarse phase.
struct MultiscaleParams {
  std::size_t coarse_cycles = 1;
  std::size_t burst_length = 32;
  std::size_t fine_cycles = 4;
  std::size_t mask_length = 96;
  std::size_t phases = 4;
  double fine_amplitude = 4.0;
  double coarse_amplitude = 2.0;
  double noise = 0.75;
};

/// Sparse motifs at random positions; positives replace one distractor slot
/// with the target motif.
struct InvarianceParams {
  std::size_t motif_length = 33;
  std::size_t spikes = 4;
  std::size_t min_spacing = 3;
  std::size_t distractor_patterns = 2;
  std::size_t distractor_instances = 1;
  std::size_t min_pattern_distance = 6;
  std::size_t min_separation = 16;
  double amplitude = 6.0;
  double noise = 1.0;
};

struct SynthTaskSpec {
  Family family = Family::position;
  std::size_t length = 512;
  std::size_t n_train = 500;
  std::size_t n_test = 250;
  std::uint64_t seed = 0;
  bool normalize = true;
  unsigned threads = 1;  // instance-parallel generation; output is identical for any value
  PositionParams position;
  LongRangeParams longrange;
  MultiscaleParams multiscale;
  InvarianceParams invariance;
};

/// Per-instance ground truth used by geometry checks and oracles. Positions
/// are 0-based sample indices before normalisation.
struct InstanceInfo {
  int label = 0;
  std::vector<std::size_t> positions;  // spike indices / burst or motif starts
  std::vector<int> patterns;           // library ids (longrange, invariance)
  std::vector<int> phases;             // {coarse, fine} (multiscale)
  double amplitude = 0.0;
  std::size_t distance = 0;            // d (position)
};

struct LabeledSet {
  TimeSeriesDataset data;
  std::vector<InstanceInfo> info;
};

/// A spike pattern as sorted offsets inside its burst/motif window.
using Pattern = std::vector<std::size_t>;

/// Sum of absolute displacements between the sorted offset vectors.
std::size_t pattern_distance(const Pattern& a, const Pattern& b) noexcept;

struct SynthDataset {
  LabeledSet train;
  LabeledSet test;
  /// Resolved geometry: class ranges, pattern library, definitions.
  nlohmann::json metadata;
};

SynthDataset gen_position(const SynthTaskSpec& spec);
SynthDataset gen_longrange(const SynthTaskSpec& spec);
SynthDataset gen_multiscale(const SynthTaskSpec& spec);
SynthDataset gen_invariance(const SynthTaskSpec& spec);

/// Dispatches on spec.family.
SynthDataset generate(const SynthTaskSpec& spec);

/// Class ranges of the position task as half-open [lo, hi) distance
/// intervals. Throws infeasible_geometry when either is empty.
struct DistanceRange {
  std::size_t lo = 0;
  std::size_t hi = 0;
};
std::pair<DistanceRange, DistanceRange> position_class_ranges(const PositionParams& p);

/// Burst centres used by the long-range task.
std::pair<std::size_t, std::size_t> longrange_centers(std::size_t length) noexcept;

}  // namespace roman::synth
