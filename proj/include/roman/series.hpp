#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace roman {

/// A multivariate series stored channel-major: one contiguous row of
/// `length()` samples per channel.
class Series {
 public:
  Series() = default;
  Series(std::size_t channels, std::size_t length, double fill = 0.0);
  Series(std::size_t channels, std::size_t length, std::vector<double> values);

  static Series univariate(std::vector<double> values);

  std::size_t channels() const noexcept { return channels_; }
  std::size_t length() const noexcept { return length_; }
  std::size_t size() const noexcept { return values_.size(); }
  bool empty() const noexcept { return values_.empty(); }

  std::span<double> channel(std::size_t c) noexcept {
    return {values_.data() + c * length_, length_};
  }
  std::span<const double> channel(std::size_t c) const noexcept {
    return {values_.data() + c * length_, length_};
  }

  double& operator()(std::size_t c, std::size_t t) noexcept {
    return values_[c * length_ + t];
  }
  double operator()(std::size_t c, std::size_t t) const noexcept {
    return values_[c * length_ + t];
  }

  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::vector<double> release() && { return std::move(values_); }

  bool all_finite() const noexcept;

  /// Elementwise comparison of the stored bit patterns (distinguishes -0.0
  /// from 0.0 and compares NaN payloads).
  bool bit_equal(const Series& other) const noexcept;

 private:
  std::size_t channels_ = 0;
  std::size_t length_ = 0;
  std::vector<double> values_;
};

}  // namespace roman
