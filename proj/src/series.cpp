#include "roman/series.hpp"

#include <cmath>
#include <cstring>

#include "roman/errors.hpp"

namespace roman {

Series::Series(std::size_t channels, std::size_t length, double fill)
    : channels_(channels), length_(length), values_(channels * length, fill) {}

Series::Series(std::size_t channels, std::size_t length, std::vector<double> values)
    : channels_(channels), length_(length), values_(std::move(values)) {
  if (values_.size() != channels_ * length_) {
    throw Error(ErrorKind::shape_mismatch,
                "series payload has " + std::to_string(values_.size()) + " values, expected " +
                    std::to_string(channels_) + "x" + std::to_string(length_));
  }
}

Series Series::univariate(std::vector<double> values) {
  const std::size_t n = values.size();
  return Series(1, n, std::move(values));
}

bool Series::all_finite() const noexcept {
  for (double v : values_) {
    if (!std::isfinite(v)) return false;
  }
  return true;
}

bool Series::bit_equal(const Series& other) const noexcept {
  return channels_ == other.channels_ && length_ == other.length_ &&
         (values_.empty() ||
          std::memcmp(values_.data(), other.values_.data(), values_.size() * sizeof(double)) == 0);
}

}  // namespace roman
