#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "roman/dataset.hpp"
#include "roman/routing.hpp"

namespace roman::io {

/// Reads a `.ts` archive file (see docs/ts_format.md) or, for any other
/// extension, a label-first TSV table. Missing values (`?`, `NaN`) load as NaN
/// and are counted in the provenance.
TimeSeriesDataset load_ts(const std::filesystem::path& path);
TimeSeriesDataset parse_ts(std::string_view text, std::string id = {});
TimeSeriesDataset parse_tsv(std::string_view text, std::string id = {});

/// Label vocabulary override: when a test split is loaded after its train
/// split, the train class order must be reused so labels line up.
TimeSeriesDataset load_ts(const std::filesystem::path& path,
                          const std::vector<std::string>& class_names);

void write_ts(std::ostream& out, const TimeSeriesDataset& ds);
void save_ts(const std::filesystem::path& path, const TimeSeriesDataset& ds);

inline constexpr std::string_view kNanPolicy = "series-mean";

/// NaN imputation by the finite mean of the containing channel (all-NaN
/// channels become zeros), then per-channel z-normalisation with the
/// population standard deviation. Constant channels become zeros.
TimeSeriesDataset preprocess(TimeSeriesDataset ds);
void preprocess_series(Series& series);
void znormalize(std::span<double> row) noexcept;

// Tensor container: a raw little-endian float64 payload plus a JSON sidecar
// holding dims, a payload checksum and free-form metadata.
inline constexpr int kTensorFormatVersion = 1;

struct Tensor {
  std::vector<std::size_t> dims;
  std::vector<double> data;
  nlohmann::json metadata = nlohmann::json::object();
};

/// FNV-1a 64 over the little-endian payload bytes.
std::uint64_t payload_checksum(std::span<const double> data) noexcept;

/// Writes `<stem>.bin` and `<stem>.json`; `path` may name either or the stem.
void save_tensor(const std::filesystem::path& path, const Tensor& tensor);
/// Throws version_mismatch, checksum_mismatch or io_error.
Tensor load_tensor(const std::filesystem::path& path);

nlohmann::json plan_to_json(const RoutingPlan& plan);
RoutingPlan plan_from_json(const nlohmann::json& j);

Tensor routed_tensor(const RoutedRepresentation& routed, const RomanConfig& config);

}  // namespace roman::io
