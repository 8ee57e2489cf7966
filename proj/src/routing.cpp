#include "roman/routing.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <string>

#include "roman/errors.hpp"
#include "roman/parallel.hpp"
#include "roman/pyramid.hpp"

namespace roman {

namespace {

using u128 = unsigned __int128;

// Keeps span * 2^96 and base * 2^96 inside 128 bits.
constexpr std::size_t kMaxLength = std::size_t{1} << 31;

void check_alpha(double alpha) {
  if (!(alpha >= 0.0 && alpha < 1.0)) {
    throw Error(ErrorKind::invalid_alpha,
                "alpha must lie in [0, 1), got " + std::to_string(alpha));
  }
}

// alpha = mantissa / 2^exponent exactly, with the mantissa odd (or zero).
struct Dyadic {
  std::uint64_t mantissa = 0;
  int exponent = 0;
};

Dyadic to_dyadic(double alpha) noexcept {
  if (alpha == 0.0) return {};
  int e = 0;
  const double f = std::frexp(alpha, &e);  // alpha = f * 2^e, f in [0.5, 1)
  auto m = static_cast<std::uint64_t>(std::ldexp(f, 53));
  int k = 53 - e;
  while ((m & 1u) == 0 && k > 0) {
    m >>= 1;
    --k;
  }
  return {m, k};
}

u128 ceil_div(u128 num, u128 den) noexcept { return num / den + (num % den != 0 ? 1 : 0); }

}  // namespace

void RomanConfig::validate() const {
  check_alpha(alpha);
  if (const auto* explicit_depth = std::get_if<ExplicitDepth>(&depth)) {
    if (explicit_depth->scales < 1) {
      throw Error(ErrorKind::invalid_argument,
                  "scale depth must be at least 1, got " +
                      std::to_string(explicit_depth->scales));
    }
  } else if (std::get<MinBaseLength>(depth).length < 1) {
    throw Error(ErrorKind::invalid_argument, "minimum base length must be at least 1");
  }
}

int resolve_depth(std::size_t length, const RomanConfig& config) {
  config.validate();
  if (const auto* explicit_depth = std::get_if<ExplicitDepth>(&config.depth)) {
    return explicit_depth->scales;
  }
  const std::size_t min_base = std::get<MinBaseLength>(config.depth).length;
  if (length < min_base) {
    throw Error(ErrorKind::base_length_unreachable,
                "series length " + std::to_string(length) + " is shorter than the minimum base length " +
                    std::to_string(min_base));
  }
  int scales = 1;
  std::size_t current = length;
  // Stops at length 1 where the recursion reaches its fixed point.
  while (current > 1 && decimated_length(current) >= min_base) {
    current = decimated_length(current);
    ++scales;
  }
  return scales;
}

std::size_t window_count(std::size_t level_length, std::size_t base_length, double alpha) {
  check_alpha(alpha);
  if (base_length == 0 || level_length < base_length) {
    throw Error(ErrorKind::invalid_argument,
                "level length " + std::to_string(level_length) + " below base length " +
                    std::to_string(base_length));
  }
  if (level_length > kMaxLength) {
    throw Error(ErrorKind::invalid_argument, "series too long for exact window arithmetic");
  }
  const std::uint64_t span = level_length - base_length;
  if (span == 0) return 1;

  // ceil(span / ((1 - alpha) * base)) with alpha = m / 2^k:
  //   = ceil(span * 2^k / (base * (2^k - m))).
  const Dyadic a = to_dyadic(alpha);
  if (a.exponent <= 96) {
    const u128 scale = u128{1} << a.exponent;
    const u128 num = u128{span} * scale;
    const u128 den = u128{base_length} * (scale - a.mantissa);
    return 1 + static_cast<std::size_t>(ceil_div(num, den));
  }
  // Here alpha < 2^-43, so span * alpha / (1 - alpha) < 1: the quotient can
  // only move past an integer it equals exactly.
  const std::uint64_t whole = span / base_length;
  return 1 + static_cast<std::size_t>(whole + 1);
}

std::vector<std::size_t> window_starts(std::size_t level_length, std::size_t base_length,
                                       std::size_t count) {
  if (count == 0 || level_length < base_length) {
    throw Error(ErrorKind::invalid_argument, "invalid window geometry");
  }
  std::vector<std::size_t> starts(count, 1);
  if (count == 1) return starts;
  const std::uint64_t span = level_length - base_length;
  for (std::size_t w = 0; w < count; ++w) {
    starts[w] = 1 + static_cast<std::size_t>((u128{w} * span) / (count - 1));
  }
  return starts;
}

RoutingPlan plan_routing(std::span<const std::size_t> lengths, std::size_t channels,
                         double alpha) {
  check_alpha(alpha);
  if (lengths.empty()) throw Error(ErrorKind::invalid_argument, "no pyramid levels");
  if (channels == 0) throw Error(ErrorKind::invalid_argument, "channel count must be positive");
  for (std::size_t s = 1; s < lengths.size(); ++s) {
    if (lengths[s] > lengths[s - 1]) {
      throw Error(ErrorKind::invalid_argument, "level lengths must be non-increasing");
    }
  }
  if (lengths.back() < 1) throw Error(ErrorKind::depth_too_large, "coarsest level is empty");

  RoutingPlan plan;
  plan.channel_count = channels;
  plan.alpha = alpha;
  plan.base_length = lengths.back();
  plan.level_lengths.assign(lengths.begin(), lengths.end());
  for (std::size_t s = 0; s < lengths.size(); ++s) {
    const std::size_t count = window_count(lengths[s], plan.base_length, alpha);
    plan.window_counts.push_back(count);
    plan.starts.push_back(window_starts(lengths[s], plan.base_length, count));
    for (std::size_t w = 0; w < count; ++w) {
      for (std::size_t c = 0; c < channels; ++c) {
        plan.order.push_back({static_cast<int>(s) + 1, w + 1, c + 1});
      }
    }
  }
  return plan;
}

std::size_t representation_size(const RoutingPlan& plan) noexcept {
  return plan.total_pseudochannels() * plan.base_length;
}

namespace {

Series route(const Pyramid& pyramid, const RoutingPlan& plan) {
  Series z(plan.total_pseudochannels(), plan.base_length);
  const std::size_t base = plan.base_length;
  std::size_t row = 0;
  for (std::size_t s = 0; s < plan.starts.size(); ++s) {
    const Series& level = pyramid.levels[s];
    for (std::size_t start : plan.starts[s]) {
      const std::size_t offset = start_offset(start);
      for (std::size_t c = 0; c < plan.channel_count; ++c, ++row) {
        const auto src = level.channel(c).subspan(offset, base);
        std::copy(src.begin(), src.end(), z.channel(row).begin());
      }
    }
  }
  return z;
}

void require_finite(const Series& x) {
  if (x.empty()) throw Error(ErrorKind::invalid_argument, "series is empty");
  if (!x.all_finite()) {
    throw Error(ErrorKind::invalid_argument,
                "series contains non-finite values; run preprocessing first");
  }
}

}  // namespace

RoutedRepresentation apply_roman(const Series& x, const RomanConfig& config) {
  require_finite(x);
  const int scales = resolve_depth(x.length(), config);
  const auto lengths = level_lengths(x.length(), scales);
  RoutedRepresentation out{Series{}, plan_routing(lengths, x.channels(), config.alpha)};
  if (scales == 1) {
    out.tensor = x;
    return out;
  }
  out.tensor = route(build_pyramid(x, scales), out.plan);
  return out;
}

std::vector<Series> apply_roman_batch(std::span<const Series> batch, const RomanConfig& config,
                                      RoutingPlan* plan_out, unsigned threads) {
  std::vector<Series> out(batch.size());
  if (batch.empty()) return out;
  const std::size_t channels = batch.front().channels();
  const std::size_t length = batch.front().length();
  for (const auto& x : batch) {
    if (x.channels() != channels || x.length() != length) {
      throw Error(ErrorKind::shape_mismatch, "batch series must share one shape");
    }
  }
  const int scales = resolve_depth(length, config);
  const RoutingPlan plan = plan_routing(level_lengths(length, scales), channels, config.alpha);
  parallel_for(batch.size(), threads, [&](std::size_t i) {
    require_finite(batch[i]);
    out[i] = scales == 1 ? batch[i] : route(build_pyramid(batch[i], scales), plan);
  });
  if (plan_out) *plan_out = plan;
  return out;
}

}  // namespace roman
