#pragma once

// Brute-force reference pyramid and window bookkeeping, written independently
// of the library.

#include <algorithm>
#include <cstring>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "roman/routing.hpp"

namespace roman::testing {

inline std::vector<std::vector<double>> oracle_levels(std::vector<double> x, int scales) {
  std::vector<std::vector<double>> levels{x};
  for (int s = 1; s < scales; ++s) {
    const auto& prev = levels.back();
    const std::size_t n = prev.size();
    std::vector<double> next;
    for (std::size_t t = 0; t < n; t += 2) {
      const double left = t == 0 ? prev[n > 1 ? 1 : 0] : prev[t - 1];
      const double right = t + 1 == n ? prev[n > 1 ? n - 2 : 0] : prev[t + 1];
      next.push_back(0.25 * left + 0.5 * prev[t] + 0.25 * right);
    }
    levels.push_back(std::move(next));
  }
  return levels;
}

// W = 1 + ceil(4 (L_s - L_b) / ((4 - q) L_b)) for alpha = q / 4.
inline std::size_t oracle_windows(std::size_t level, std::size_t base, int quarter) {
  if (level == base) return 1;
  const std::size_t num = 4 * (level - base);
  const std::size_t den = static_cast<std::size_t>(4 - quarter) * base;
  return 1 + (num + den - 1) / den;
}

inline std::vector<double> random_values(std::mt19937_64& gen, std::size_t n) {
  std::normal_distribution<double> dist;
  std::vector<double> v(n);
  for (auto& e : v) e = dist(gen);
  return v;
}

/// Empty when every routed row over L in {8..256 step 8}, S in {1..5},
/// alpha in {0, 1/4, 1/2, 3/4} and C in {1, 2, 3} equals its oracle slice and
/// the element count is C' * L_base.
inline std::string routing_oracle_violation(std::uint64_t seed) {
  std::mt19937_64 gen(seed);
  std::ostringstream err;
  for (std::size_t length = 8; length <= 256; length += 8) {
    for (int scales = 1; scales <= 5; ++scales) {
      for (int quarter = 0; quarter < 4; ++quarter) {
        for (std::size_t channels = 1; channels <= 3; ++channels) {
          err.str("");
          err << "L=" << length << " S=" << scales << " alpha=" << quarter / 4.0 << " C=" << channels << ": ";
          const auto values = random_values(gen, channels * length);
          const Series x(channels, length, values);
          const auto routed = apply_roman(x, RomanConfig::with_scales(scales, quarter / 4.0));
          const auto& plan = routed.plan;
          std::vector<std::vector<std::vector<double>>> levels;  // [channel][scale]
          for (std::size_t c = 0; c < channels; ++c) {
            levels.push_back(oracle_levels({values.begin() + c * length, values.begin() + (c + 1) * length}, scales));
          }
          const std::size_t base = levels[0].back().size();
          if (plan.base_length != base) return err.str() + "base length";
          std::size_t rows = 0;
          for (int s = 0; s < scales; ++s) {
            const std::size_t level = levels[0][s].size();
            const std::size_t w = oracle_windows(level, base, quarter);
            if (plan.window_counts[s] != w || plan.starts[s].size() != w) return err.str() + "window count";
            for (std::size_t k = 0; k < w; ++k) {
              const std::size_t expect = w == 1 ? 1 : 1 + (k * (level - base)) / (w - 1);
              if (plan.starts[s][k] != expect) return err.str() + "window start";
            }
            rows += w * channels;
          }
          if (routed.tensor.channels() != rows || plan.order.size() != rows) return err.str() + "row count";
          if (routed.tensor.size() != rows * base || representation_size(plan) != rows * base) {
            return err.str() + "element count is not C' * L_base";
          }
          std::size_t r = 0;
          for (int s = 1; s <= scales; ++s) {
            for (std::size_t w = 1; w <= plan.window_counts[s - 1]; ++w) {
              for (std::size_t c = 1; c <= channels; ++c, ++r) {
                if (plan.order[r] != Pseudochannel{s, w, c}) return err.str() + "pseudochannel order";
                const auto& level = levels[c - 1][s - 1];
                const std::size_t start = plan.starts[s - 1][w - 1] - 1;
                if (std::memcmp(routed.tensor.channel(r).data(), level.data() + start, base * sizeof(double)) != 0) {
                  return err.str() + "row differs from the oracle slice";
                }
              }
            }
          }
        }
      }
    }
  }
  return {};
}

}  // namespace roman::testing
