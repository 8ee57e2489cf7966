#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace roman {

enum class ErrorKind {
  invalid_argument,
  depth_too_large,
  base_length_unreachable,
  invalid_alpha,
  infeasible_geometry,
  degenerate_features,
  shape_mismatch,
  missing_baseline,
  missing_member,
  parse_error,
  unequal_length,
  unknown_class_label,
  version_mismatch,
  checksum_mismatch,
  io_error,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Every failure raised by the library carries one of the kinds above so the
/// CLI and the Python binding can map it without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Located parse failure. Line and column are 1-based; column 0 means the
/// whole line.
class ParseError : public Error {
 public:
  ParseError(ErrorKind kind, std::size_t line, std::size_t column,
             const std::string& message);

  std::size_t line() const noexcept { return line_; }
  std::size_t column() const noexcept { return column_; }

 private:
  std::size_t line_;
  std::size_t column_;
};

}  // namespace roman
