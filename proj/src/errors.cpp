#include "roman/errors.hpp"

namespace roman {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::invalid_argument: return "InvalidArgument";
    case ErrorKind::depth_too_large: return "DepthTooLarge";
    case ErrorKind::base_length_unreachable: return "BaseLengthUnreachable";
    case ErrorKind::invalid_alpha: return "InvalidAlpha";
    case ErrorKind::infeasible_geometry: return "InfeasibleGeometry";
    case ErrorKind::degenerate_features: return "DegenerateFeatures";
    case ErrorKind::shape_mismatch: return "ShapeMismatch";
    case ErrorKind::missing_baseline: return "MissingBaseline";
    case ErrorKind::missing_member: return "MissingMember";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::unequal_length: return "UnequalLength";
    case ErrorKind::unknown_class_label: return "UnknownClassLabel";
    case ErrorKind::version_mismatch: return "VersionMismatch";
    case ErrorKind::checksum_mismatch: return "ChecksumMismatch";
    case ErrorKind::io_error: return "IoError";
  }
  return "Unknown";
}

ParseError::ParseError(ErrorKind kind, std::size_t line, std::size_t column,
                       const std::string& message)
    : Error(kind, "line " + std::to_string(line) +
                      (column ? ", column " + std::to_string(column) : std::string{}) +
                      ": " + message),
      line_(line),
      column_(column) {}

}  // namespace roman
