#pragma once

#include <cstddef>
#include <span>
#include <variant>
#include <vector>

#include "roman/series.hpp"

namespace roman {

struct ExplicitDepth {
  int scales = 1;
};

/// Select the deepest pyramid whose coarsest level keeps at least `length`
/// samples.
struct MinBaseLength {
  std::size_t length = 1;
};

struct RomanConfig {
  std::variant<ExplicitDepth, MinBaseLength> depth = ExplicitDepth{1};
  double alpha = 0.5;

  static RomanConfig with_scales(int scales, double alpha = 0.5) {
    return {ExplicitDepth{scales}, alpha};
  }
  static RomanConfig with_min_base(std::size_t min_base, double alpha = 0.5) {
    return {MinBaseLength{min_base}, alpha};
  }

  /// Throws invalid_alpha or invalid_argument.
  void validate() const;
};

/// Returns S for a series of the given length. In min-base mode this walks
/// the exact length recursion. Throws base_length_unreachable when
/// length < L_min.
int resolve_depth(std::size_t length, const RomanConfig& config);

/// Identifies one routed row by its 1-based scale, window and original
/// channel.
struct Pseudochannel {
  int scale = 1;
  std::size_t window = 1;
  std::size_t channel = 1;

  bool operator==(const Pseudochannel&) const = default;
};

struct RoutingPlan {
  std::size_t channel_count = 0;
  std::size_t base_length = 0;
  double alpha = 0.5;
  std::vector<std::size_t> level_lengths;  // L_1..L_S
  std::vector<std::size_t> window_counts;  // W_1..W_S
  /// starts[s][w] is the 1-based start a_{s+1,w+1}.
  std::vector<std::vector<std::size_t>> starts;
  /// Scale-major, then window, then channel.
  std::vector<Pseudochannel> order;

  int scales() const noexcept { return static_cast<int>(level_lengths.size()); }
  std::size_t total_pseudochannels() const noexcept { return order.size(); }
};

/// W = 1 + ceil((level - base) / ((1 - alpha) * base)), computed without
/// floating-point rounding. Returns 1 when level == base.
std::size_t window_count(std::size_t level_length, std::size_t base_length,
                         double alpha);

/// 1-based starts 1 + floor((w - 1)(level - base) / (W - 1)).
std::vector<std::size_t> window_starts(std::size_t level_length,
                                       std::size_t base_length,
                                       std::size_t count);

/// The only place where a 1-based start becomes a tensor offset.
constexpr std::size_t start_offset(std::size_t one_based_start) noexcept {
  return one_based_start - 1;
}

/// Throws invalid_alpha when alpha is outside [0, 1) and invalid_argument for
/// malformed lengths.
RoutingPlan plan_routing(std::span<const std::size_t> level_lengths,
                         std::size_t channels, double alpha);

/// |Z| = C' * L_base.
std::size_t representation_size(const RoutingPlan& plan) noexcept;

struct RoutedRepresentation {
  Series tensor;  // C' x L_base
  RoutingPlan plan;
};

/// ROMAN_{S,alpha}. With S = 1 the tensor is a bit-exact copy of `x`.
RoutedRepresentation apply_roman(const Series& x, const RomanConfig& config);

/// Routes every series of a batch (all must share a shape). Work is split
/// across at most `threads` workers; 0 means hardware concurrency.
std::vector<Series> apply_roman_batch(std::span<const Series> batch,
                                      const RomanConfig& config,
                                      RoutingPlan* plan_out = nullptr,
                                      unsigned threads = 1);

}  // namespace roman
