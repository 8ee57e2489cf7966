#pragma once

#include <array>
#include <cstdint>

namespace roman {

/// Philox4x32-10 (Salmon et al., SC'11): a counter-based generator whose
/// output is a pure function of (counter, key).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key) noexcept;

/// A sequential view over one Philox stream.
///
/// The 64-bit seed is the Philox key. The 128-bit counter is split into a
/// 64-bit stream id (high words) and a 64-bit block index (low words), so
/// any (seed, stream) pair yields an independent sequence that can be
/// regenerated without replaying other streams. Callers derive stream ids
/// with `stream_id`.
class RandomStream {
 public:
  RandomStream(std::uint64_t seed, std::uint64_t stream) noexcept;

  std::uint32_t next_u32() noexcept;
  std::uint64_t next_u64() noexcept;

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept;
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }

  /// Uniform integer on [0, bound). bound must be > 0. Unbiased (rejection).
  std::uint64_t below(std::uint64_t bound) noexcept;

  /// Uniform integer on [lo, hi).
  std::int64_t between(std::int64_t lo, std::int64_t hi) noexcept {
    return lo + static_cast<std::int64_t>(below(static_cast<std::uint64_t>(hi - lo)));
  }

  /// Standard normal via Box-Muller; the second variate is cached.
  double normal() noexcept;

 private:
  void refill() noexcept;

  std::array<std::uint32_t, 2> key_;
  std::uint64_t stream_;
  std::uint64_t block_ = 0;
  std::array<std::uint32_t, 4> buffer_{};
  unsigned used_ = 4;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// Stream id layout: bits 56..63 domain tag, 48..55 sub-stream (e.g. split),
/// 0..47 index (e.g. instance).
constexpr std::uint64_t stream_id(std::uint8_t domain, std::uint8_t sub,
                                  std::uint64_t index) noexcept {
  return (std::uint64_t{domain} << 56) | (std::uint64_t{sub} << 48) |
         (index & 0x0000FFFFFFFFFFFFull);
}

}  // namespace roman
