#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include "roman/ridge.hpp"
#include "roman/series.hpp"

namespace roman::probes {

/// Global-pooling probe: random dilated kernels, per-kernel channel mixing,
/// proportion-of-positive-values pooling, ridge head.
struct PooledConvProbeConfig {
  std::size_t n_kernels = 2000;
  std::size_t kernel_length = 9;
  std::size_t max_mixed_channels = 9;
  std::uint64_t seed = 0;
  unsigned threads = 1;  // kernel-parallel feature extraction; not serialised
};

/// Position-sensitive probe: no pooling anywhere. With n_kernels = 0 the
/// features are the standardised raw values of the flattened input; otherwise
/// each kernel mixes all channels over `kernel_length` taps, is rectified,
/// and every (kernel, time) response is kept.
struct FlattenProbeConfig {
  std::size_t n_kernels = 128;
  std::size_t kernel_length = 9;
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

struct PooledKernel {
  std::vector<double> weights;  // kernel_length taps, zero mean
  std::size_t dilation = 1;
  std::vector<std::uint32_t> channels;
  std::vector<double> channel_weights;
  double bias = 0.0;
};

struct PooledConvProbe {
  PooledConvProbeConfig config;
  std::size_t channels = 0;
  std::size_t length = 0;
  std::vector<PooledKernel> kernels;
  RidgeModel head;
};

struct FlattenKernel {
  std::vector<double> weights;  // channels x kernel_length, channel-major
};

struct FlattenProbe {
  FlattenProbeConfig config;
  std::size_t channels = 0;
  std::size_t length = 0;
  std::vector<FlattenKernel> kernels;
  RidgeModel head;
};

using ProbeModel = std::variant<PooledConvProbe, FlattenProbe>;

/// Same-length zero-padded dilated convolution centred on the middle tap.
void convolve_same(std::span<const double> x, std::span<const double> taps,
                   std::size_t dilation, std::span<double> out) noexcept;

/// Exponential dilation draw: floor(2^u), u ~ U[0, log2((L - 1) / (k - 1))].
std::size_t max_dilation(std::size_t length, std::size_t kernel_length) noexcept;

/// Throws invalid_argument (fewer than two classes, empty batch),
/// shape_mismatch (unequal shapes) or degenerate_features.
PooledConvProbe fit_pooled_probe(std::span<const Series> train, std::span<const int> labels,
                                 const PooledConvProbeConfig& config);
FlattenProbe fit_flatten_probe(std::span<const Series> train, std::span<const int> labels,
                               const FlattenProbeConfig& config);

FeatureMatrix pooled_features(const PooledConvProbe& model, std::span<const Series> batch);
FeatureMatrix flatten_features(const FlattenProbe& model, std::span<const Series> batch);

/// Throws shape_mismatch when the batch shape differs from the fitted one.
std::vector<int> predict(const PooledConvProbe& model, std::span<const Series> batch);
std::vector<int> predict(const FlattenProbe& model, std::span<const Series> batch);
std::vector<int> predict(const ProbeModel& model, std::span<const Series> batch);

// Versioned binary blob: magic "RMNPROBE", format version, probe kind, the
// full config and seed, kernels, then the ridge head. Little-endian.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize(const ProbeModel& model);
/// Throws version_mismatch or io_error.
ProbeModel deserialize(std::span<const std::uint8_t> bytes);

}  // namespace roman::probes
