#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "roman/series.hpp"

namespace roman {

struct Provenance {
  bool normalized = false;
  std::size_t nan_count = 0;
  std::string nan_policy;  // empty until preprocess runs
  std::vector<std::string> notes;
};

/// N equal-shape series with integer labels in [0, class_names.size()).
struct TimeSeriesDataset {
  std::string id;
  std::vector<Series> series;
  std::vector<int> labels;
  std::vector<std::string> class_names;
  Provenance provenance;

  std::size_t size() const noexcept { return series.size(); }
  std::size_t channels() const noexcept { return series.empty() ? 0 : series.front().channels(); }
  std::size_t length() const noexcept { return series.empty() ? 0 : series.front().length(); }
  int class_count() const noexcept { return static_cast<int>(class_names.size()); }

  /// Throws unequal_length, shape_mismatch or unknown_class_label.
  void validate() const;
};

/// A train/test pair sharing one class vocabulary.
struct SplitDataset {
  TimeSeriesDataset train;
  TimeSeriesDataset test;
};

}  // namespace roman
