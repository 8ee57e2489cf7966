#include "roman/probes.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <string>

#include "roman/errors.hpp"
#include "roman/parallel.hpp"
#include "roman/rng.hpp"

namespace roman::probes {

namespace {

constexpr std::uint8_t kPooledDomain = 0x21;
constexpr std::uint8_t kFlattenDomain = 0x22;

struct Shape {
  std::size_t channels = 0;
  std::size_t length = 0;
};

Shape check_batch(std::span<const Series> batch) {
  if (batch.empty()) throw Error(ErrorKind::invalid_argument, "empty training batch");
  const Shape shape{batch.front().channels(), batch.front().length()};
  if (shape.channels == 0 || shape.length == 0) {
    throw Error(ErrorKind::invalid_argument, "training series are empty");
  }
  for (const auto& s : batch) {
    if (s.channels() != shape.channels || s.length() != shape.length) {
      throw Error(ErrorKind::shape_mismatch, "all series in a batch must share one shape");
    }
  }
  return shape;
}

void check_predict_batch(std::span<const Series> batch, std::size_t channels, std::size_t length) {
  for (const auto& s : batch) {
    if (s.channels() != channels || s.length() != length) {
      throw Error(ErrorKind::shape_mismatch,
                  "model was fitted on " + std::to_string(channels) + "x" + std::to_string(length) +
                      " inputs, got " + std::to_string(s.channels()) + "x" + std::to_string(s.length()));
    }
  }
}

int check_labels(std::span<const int> labels, std::size_t n) {
  if (labels.size() != n) throw Error(ErrorKind::invalid_argument, "one label per training series required");
  int max_label = -1;
  for (int y : labels) {
    if (y < 0) throw Error(ErrorKind::invalid_argument, "labels must be non-negative");
    max_label = std::max(max_label, y);
  }
  const bool two_classes =
      std::any_of(labels.begin(), labels.end(), [&](int y) { return y != labels.front(); });
  if (!two_classes) throw Error(ErrorKind::invalid_argument, "need at least two classes to fit a probe");
  return max_label + 1;
}

std::vector<std::uint32_t> draw_channels(RandomStream& rng, std::size_t channels, std::size_t count) {
  std::vector<std::uint32_t> chosen;
  for (std::size_t j = channels - count; j < channels; ++j) {
    const auto t = static_cast<std::uint32_t>(rng.below(j + 1));
    if (std::find(chosen.begin(), chosen.end(), t) == chosen.end()) {
      chosen.push_back(t);
    } else {
      chosen.push_back(static_cast<std::uint32_t>(j));
    }
  }
  std::sort(chosen.begin(), chosen.end());
  return chosen;
}

// Linear-interpolation quantile of an unsorted buffer (sorted in place).
double buffer_quantile(std::vector<double>& values, double q) {
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (pos - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

// Weighted channel sum, then one convolution: the kernel taps are shared by
// all mixed channels, so mixing first is exact and costs O(k L) instead of
// O(k L taps).
void pooled_response(const PooledKernel& kernel, const Series& x, std::vector<double>& mixed,
                     std::vector<double>& out) {
  const std::size_t length = x.length();
  mixed.assign(length, 0.0);
  for (std::size_t j = 0; j < kernel.channels.size(); ++j) {
    const double w = kernel.channel_weights[j];
    const auto row = x.channel(kernel.channels[j]);
    for (std::size_t t = 0; t < length; ++t) mixed[t] += w * row[t];
  }
  out.resize(length);
  convolve_same(mixed, kernel.weights, kernel.dilation, out);
}

double ppv(std::span<const double> response, double bias) noexcept {
  std::size_t positive = 0;
  for (double v : response) positive += v > bias ? 1 : 0;
  return static_cast<double>(positive) / static_cast<double>(response.size());
}

PooledKernel draw_pooled_kernel(const PooledConvProbeConfig& config, std::size_t k, Shape shape,
                                std::size_t n_train, std::size_t& example, double& quantile) {
  RandomStream rng(config.seed, stream_id(kPooledDomain, 0, k));
  PooledKernel kernel;
  kernel.weights.resize(config.kernel_length);
  double mean = 0.0;
  for (double& w : kernel.weights) {
    w = rng.normal();
    mean += w;
  }
  mean /= static_cast<double>(config.kernel_length);
  for (double& w : kernel.weights) w -= mean;
  const double top = std::log2(static_cast<double>(max_dilation(shape.length, config.kernel_length)));
  kernel.dilation = static_cast<std::size_t>(std::floor(std::exp2(rng.uniform(0.0, top))));
  kernel.dilation = std::max<std::size_t>(1, kernel.dilation);
  const std::size_t max_mixed = std::max<std::size_t>(1, std::min(shape.channels, config.max_mixed_channels));
  const std::size_t count = 1 + static_cast<std::size_t>(rng.below(max_mixed));
  kernel.channels = draw_channels(rng, shape.channels, count);
  kernel.channel_weights.resize(count);
  for (double& w : kernel.channel_weights) w = rng.normal();
  example = static_cast<std::size_t>(rng.below(n_train));
  quantile = rng.uniform();
  return kernel;
}

FlattenKernel draw_flatten_kernel(const FlattenProbeConfig& config, std::size_t k, Shape shape) {
  RandomStream rng(config.seed, stream_id(kFlattenDomain, 0, k));
  FlattenKernel kernel;
  kernel.weights.resize(shape.channels * config.kernel_length);
  const double scale = 1.0 / std::sqrt(static_cast<double>(kernel.weights.size()));
  for (double& w : kernel.weights) w = scale * rng.normal();
  return kernel;
}

void flatten_row(const FlattenProbe& model, const Series& x, std::span<double> out,
                 std::vector<double>& response, std::vector<double>& scratch) {
  const std::size_t length = model.length;
  if (model.kernels.empty()) {
    std::copy(x.values().begin(), x.values().end(), out.begin());
    return;
  }
  const std::size_t taps = model.config.kernel_length;
  response.resize(length);
  scratch.resize(length);
  for (std::size_t k = 0; k < model.kernels.size(); ++k) {
    std::fill(response.begin(), response.end(), 0.0);
    const auto& w = model.kernels[k].weights;
    for (std::size_t c = 0; c < model.channels; ++c) {
      convolve_same(x.channel(c), std::span<const double>(w).subspan(c * taps, taps), 1, scratch);
      for (std::size_t t = 0; t < length; ++t) response[t] += scratch[t];
    }
    auto dst = out.subspan(k * length, length);
    for (std::size_t t = 0; t < length; ++t) dst[t] = response[t] > 0.0 ? response[t] : 0.0;
  }
}

}  // namespace

void convolve_same(std::span<const double> x, std::span<const double> taps, std::size_t dilation,
                   std::span<double> out) noexcept {
  const auto n = static_cast<std::ptrdiff_t>(x.size());
  std::fill(out.begin(), out.end(), 0.0);
  const auto center = static_cast<std::ptrdiff_t>(taps.size() / 2);
  const double* src = x.data();
  double* dst = out.data();
  for (std::size_t j = 0; j < taps.size(); ++j) {
    const std::ptrdiff_t shift = (static_cast<std::ptrdiff_t>(j) - center) * static_cast<std::ptrdiff_t>(dilation);
    const double w = taps[j];
    const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -shift);
    const std::ptrdiff_t hi = std::min<std::ptrdiff_t>(n, n - shift);
    for (std::ptrdiff_t t = lo; t < hi; ++t) dst[t] += w * src[t + shift];
  }
}

std::size_t max_dilation(std::size_t length, std::size_t kernel_length) noexcept {
  if (kernel_length < 2 || length < kernel_length) return 1;
  return std::max<std::size_t>(1, (length - 1) / (kernel_length - 1));
}

// -- pooled -------------------------------------------------------------------

PooledConvProbe fit_pooled_probe(std::span<const Series> train, std::span<const int> labels,
                                 const PooledConvProbeConfig& config) {
  const Shape shape = check_batch(train);
  const int classes = check_labels(labels, train.size());
  if (config.n_kernels == 0 || config.kernel_length == 0) {
    throw Error(ErrorKind::invalid_argument, "pooled probe needs at least one kernel with at least one tap");
  }
  PooledConvProbe model;
  model.config = config;
  model.channels = shape.channels;
  model.length = shape.length;
  model.kernels.resize(config.n_kernels);

  FeatureMatrix features(static_cast<Eigen::Index>(train.size()), static_cast<Eigen::Index>(config.n_kernels));
  parallel_for(config.n_kernels, config.threads, [&](std::size_t k) {
    std::size_t example = 0;
    double quantile = 0.0;
    PooledKernel kernel = draw_pooled_kernel(config, k, shape, train.size(), example, quantile);
    std::vector<double> mixed, response;
    pooled_response(kernel, train[example], mixed, response);
    kernel.bias = buffer_quantile(response, quantile);
    for (std::size_t i = 0; i < train.size(); ++i) {
      pooled_response(kernel, train[i], mixed, response);
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = ppv(response, kernel.bias);
    }
    model.kernels[k] = std::move(kernel);
  });
  model.head = fit_ridge(std::move(features), labels, classes, default_lambda_grid());
  return model;
}

FeatureMatrix pooled_features(const PooledConvProbe& model, std::span<const Series> batch) {
  check_predict_batch(batch, model.channels, model.length);
  FeatureMatrix features(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(model.kernels.size()));
  parallel_for(model.kernels.size(), model.config.threads, [&](std::size_t k) {
    std::vector<double> mixed, response;
    for (std::size_t i = 0; i < batch.size(); ++i) {
      pooled_response(model.kernels[k], batch[i], mixed, response);
      features(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(k)) = ppv(response, model.kernels[k].bias);
    }
  });
  return features;
}

std::vector<int> predict(const PooledConvProbe& model, std::span<const Series> batch) {
  if (batch.empty()) return {};
  return argmax_rows(decision_function(model.head, pooled_features(model, batch)));
}

// -- flatten ------------------------------------------------------------------

FeatureMatrix flatten_features(const FlattenProbe& model, std::span<const Series> batch) {
  check_predict_batch(batch, model.channels, model.length);
  const std::size_t width =
      model.kernels.empty() ? model.channels * model.length : model.kernels.size() * model.length;
  FeatureMatrix features(static_cast<Eigen::Index>(batch.size()), static_cast<Eigen::Index>(width));
  parallel_for(batch.size(), model.config.threads, [&](std::size_t i) {
    std::vector<double> response, scratch;
    flatten_row(model, batch[i], std::span<double>(features.row(static_cast<Eigen::Index>(i)).data(), width),
                response, scratch);
  });
  return features;
}

FlattenProbe fit_flatten_probe(std::span<const Series> train, std::span<const int> labels,
                               const FlattenProbeConfig& config) {
  const Shape shape = check_batch(train);
  const int classes = check_labels(labels, train.size());
  if (config.n_kernels > 0 && config.kernel_length == 0) {
    throw Error(ErrorKind::invalid_argument, "flatten probe kernels need at least one tap");
  }
  FlattenProbe model;
  model.config = config;
  model.channels = shape.channels;
  model.length = shape.length;
  for (std::size_t k = 0; k < config.n_kernels; ++k) model.kernels.push_back(draw_flatten_kernel(config, k, shape));
  model.head = fit_ridge(flatten_features(model, train), labels, classes, default_lambda_grid());
  return model;
}

std::vector<int> predict(const FlattenProbe& model, std::span<const Series> batch) {
  if (batch.empty()) return {};
  return argmax_rows(decision_function(model.head, flatten_features(model, batch)));
}

std::vector<int> predict(const ProbeModel& model, std::span<const Series> batch) {
  return std::visit([&](const auto& m) { return predict(m, batch); }, model);
}

// -- serialisation --------------------------------------------------------------

namespace {

constexpr char kMagic[8] = {'R', 'M', 'N', 'P', 'R', 'O', 'B', 'E'};
constexpr std::uint32_t kPooledKind = 1;
constexpr std::uint32_t kFlattenKind = 2;

class Writer {
 public:
  void bytes(const void* data, std::size_t n) {
    const auto* p = static_cast<const std::uint8_t*>(data);
    out_.insert(out_.end(), p, p + n);
  }
  void u32(std::uint32_t v) {
    for (int b = 0; b < 4; ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  void u64(std::uint64_t v) {
    for (int b = 0; b < 8; ++b) out_.push_back(static_cast<std::uint8_t>(v >> (8 * b)));
  }
  void f64(double v) { u64(std::bit_cast<std::uint64_t>(v)); }
  template <typename Range>
  void f64s(const Range& values) {
    u64(static_cast<std::uint64_t>(values.size()));
    for (double v : values) f64(v);
  }
  std::vector<std::uint8_t> take() && { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class Reader {
 public:
  explicit Reader(std::span<const std::uint8_t> in) : in_(in) {}
  void need(std::size_t n) const {
    if (pos_ + n > in_.size()) throw Error(ErrorKind::io_error, "probe model blob is truncated");
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int b = 3; b >= 0; --b) v = (v << 8) | in_[pos_ + static_cast<std::size_t>(b)];
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int b = 7; b >= 0; --b) v = (v << 8) | in_[pos_ + static_cast<std::size_t>(b)];
    pos_ += 8;
    return v;
  }
  double f64() { return std::bit_cast<double>(u64()); }
  std::size_t count(std::size_t element_bytes) {
    const auto n = u64();
    if (element_bytes && n > (in_.size() - pos_) / element_bytes) {
      throw Error(ErrorKind::io_error, "probe model blob is truncated");
    }
    return static_cast<std::size_t>(n);
  }
  std::vector<double> f64s() {
    const std::size_t n = count(8);
    std::vector<double> v(n);
    for (double& x : v) x = f64();
    return v;
  }
  void magic() {
    need(sizeof(kMagic));
    if (std::memcmp(in_.data(), kMagic, sizeof(kMagic)) != 0) {
      throw Error(ErrorKind::io_error, "not a roman probe model");
    }
    pos_ += sizeof(kMagic);
  }
  bool done() const noexcept { return pos_ == in_.size(); }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_head(Writer& w, const RidgeModel& head) {
  w.u64(static_cast<std::uint64_t>(head.features()));
  w.u32(static_cast<std::uint32_t>(head.classes()));
  w.f64(head.lambda);
  w.f64s(head.feature_mean);
  w.f64s(head.feature_scale);
  w.f64s(head.intercept);
  for (Eigen::Index c = 0; c < head.weights.cols(); ++c) {
    for (Eigen::Index r = 0; r < head.weights.rows(); ++r) w.f64(head.weights(r, c));
  }
  w.f64s(head.loo_errors);
}

RidgeModel read_head(Reader& r) {
  RidgeModel head;
  const auto features = static_cast<Eigen::Index>(r.u64());
  const auto classes = static_cast<Eigen::Index>(r.u32());
  head.lambda = r.f64();
  const auto to_vector = [](const std::vector<double>& v) {
    return Eigen::VectorXd(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
  };
  head.feature_mean = to_vector(r.f64s());
  head.feature_scale = to_vector(r.f64s());
  head.intercept = to_vector(r.f64s());
  if (head.feature_mean.size() != features || head.feature_scale.size() != features ||
      head.intercept.size() != classes) {
    throw Error(ErrorKind::io_error, "probe model head is inconsistent");
  }
  r.need(static_cast<std::size_t>(features * classes) * 8);
  head.weights.resize(features, classes);
  for (Eigen::Index c = 0; c < classes; ++c) {
    for (Eigen::Index i = 0; i < features; ++i) head.weights(i, c) = r.f64();
  }
  head.loo_errors = r.f64s();
  return head;
}

}  // namespace

std::vector<std::uint8_t> serialize(const ProbeModel& model) {
  Writer w;
  w.bytes(kMagic, sizeof(kMagic));
  w.u32(kModelFormatVersion);
  if (const auto* pooled = std::get_if<PooledConvProbe>(&model)) {
    w.u32(kPooledKind);
    w.u64(pooled->config.n_kernels);
    w.u64(pooled->config.kernel_length);
    w.u64(pooled->config.max_mixed_channels);
    w.u64(pooled->config.seed);
    w.u64(pooled->channels);
    w.u64(pooled->length);
    w.u64(pooled->kernels.size());
    for (const auto& k : pooled->kernels) {
      w.f64s(k.weights);
      w.u64(k.dilation);
      w.u64(k.channels.size());
      for (auto c : k.channels) w.u32(c);
      w.f64s(k.channel_weights);
      w.f64(k.bias);
    }
    write_head(w, pooled->head);
  } else {
    const auto& flat = std::get<FlattenProbe>(model);
    w.u32(kFlattenKind);
    w.u64(flat.config.n_kernels);
    w.u64(flat.config.kernel_length);
    w.u64(flat.config.seed);
    w.u64(flat.channels);
    w.u64(flat.length);
    w.u64(flat.kernels.size());
    for (const auto& k : flat.kernels) w.f64s(k.weights);
    write_head(w, flat.head);
  }
  return std::move(w).take();
}

ProbeModel deserialize(std::span<const std::uint8_t> bytes) {
  Reader r(bytes);
  r.magic();
  const auto version = r.u32();
  if (version != kModelFormatVersion) {
    throw Error(ErrorKind::version_mismatch, "probe model format version " + std::to_string(version) +
                                                 " is not supported (expected " +
                                                 std::to_string(kModelFormatVersion) + ")");
  }
  const auto kind = r.u32();
  ProbeModel out;
  if (kind == kPooledKind) {
    PooledConvProbe m;
    m.config.n_kernels = r.u64();
    m.config.kernel_length = r.u64();
    m.config.max_mixed_channels = r.u64();
    m.config.seed = r.u64();
    m.channels = r.u64();
    m.length = r.u64();
    m.kernels.resize(r.count(8));
    for (auto& k : m.kernels) {
      k.weights = r.f64s();
      k.dilation = r.u64();
      k.channels.resize(r.count(4));
      for (auto& c : k.channels) c = r.u32();
      k.channel_weights = r.f64s();
      k.bias = r.f64();
    }
    m.head = read_head(r);
    out = std::move(m);
  } else if (kind == kFlattenKind) {
    FlattenProbe m;
    m.config.n_kernels = r.u64();
    m.config.kernel_length = r.u64();
    m.config.seed = r.u64();
    m.channels = r.u64();
    m.length = r.u64();
    m.kernels.resize(r.count(8));
    for (auto& k : m.kernels) k.weights = r.f64s();
    m.head = read_head(r);
    out = std::move(m);
  } else {
    throw Error(ErrorKind::io_error, "unknown probe kind " + std::to_string(kind));
  }
  if (!r.done()) throw Error(ErrorKind::io_error, "trailing bytes after probe model");
  return out;
}

}  // namespace roman::probes
