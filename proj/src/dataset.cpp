#include "roman/dataset.hpp"

#include <string>

#include "roman/errors.hpp"

namespace roman {

void TimeSeriesDataset::validate() const {
  if (!labels.empty() && labels.size() != series.size()) {
    throw Error(ErrorKind::shape_mismatch, "dataset '" + id + "' has " +
                                               std::to_string(series.size()) + " series but " +
                                               std::to_string(labels.size()) + " labels");
  }
  for (std::size_t i = 0; i < series.size(); ++i) {
    if (series[i].length() != length()) {
      throw Error(ErrorKind::unequal_length,
                  "dataset '" + id + "': series " + std::to_string(i) + " has length " +
                      std::to_string(series[i].length()) + ", expected " + std::to_string(length()));
    }
    if (series[i].channels() != channels()) {
      throw Error(ErrorKind::shape_mismatch,
                  "dataset '" + id + "': series " + std::to_string(i) + " has " +
                      std::to_string(series[i].channels()) + " channels, expected " +
                      std::to_string(channels()));
    }
  }
  for (std::size_t i = 0; i < labels.size(); ++i) {
    if (labels[i] < 0 || labels[i] >= class_count()) {
      throw Error(ErrorKind::unknown_class_label,
                  "dataset '" + id + "': label " + std::to_string(labels[i]) + " of series " +
                      std::to_string(i) + " is outside the class range");
    }
  }
}

}  // namespace roman
