#pragma once

#include <cstddef>
#include <vector>

#include "roman/series.hpp"

namespace roman {

/// Edge rule for the 3-tap smoothing filter. `reflect` mirrors without
/// repeating the edge sample (x[-1] = x[1], x[L] = x[L-2]).
enum class Boundary { reflect, replicate, zero };

inline constexpr Boundary kPyramidBoundary = Boundary::reflect;

/// Channelwise convolution with the binomial kernel [1, 2, 1] / 4.
/// A length-1 series is returned unchanged under `reflect` and `replicate`.
Series smooth(const Series& x, Boundary boundary = kPyramidBoundary);

/// Keeps samples 0, 2, 4, ... so the result has ceil(L / 2) samples.
Series decimate(const Series& x);

constexpr std::size_t decimated_length(std::size_t length) noexcept {
  return (length + 1) / 2;
}

/// Level lengths L_1..L_S produced by the smooth/decimate recursion, without
/// touching any data.
std::vector<std::size_t> level_lengths(std::size_t length, int scales);

struct Pyramid {
  std::vector<Series> levels;  // levels[0] is the input, finest first

  int scales() const noexcept { return static_cast<int>(levels.size()); }
  std::vector<std::size_t> lengths() const;
};

/// Builds X^(1..S) with X^(s) = decimate(smooth(X^(s-1))).
/// Throws depth_too_large when S < 1 or a level would be empty.
Pyramid build_pyramid(const Series& x, int scales);

}  // namespace roman
