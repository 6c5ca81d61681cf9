#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace evrange {

/// Failure categories. Pipeline stages report them as the `reason` of an
/// invalid range estimate, so the string forms are part of the CSV output.
enum class ErrorKind {
  Parse,
  Ordering,
  OutOfBounds,
  Io,
  Config,
  EmptyRoi,
  DegenerateInput,
  SeparationFailure,
  DimensionMismatch,
  NumericalIntegrity,
  LowConfidence,
  Domain,
  Projection,
};

constexpr std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::Parse: return "parse_error";
    case ErrorKind::Ordering: return "ordering_error";
    case ErrorKind::OutOfBounds: return "out_of_bounds";
    case ErrorKind::Io: return "io_error";
    case ErrorKind::Config: return "config_error";
    case ErrorKind::EmptyRoi: return "empty_roi";
    case ErrorKind::DegenerateInput: return "degenerate_input";
    case ErrorKind::SeparationFailure: return "separation_failure";
    case ErrorKind::DimensionMismatch: return "dimension_mismatch";
    case ErrorKind::NumericalIntegrity: return "numerical_integrity";
    case ErrorKind::LowConfidence: return "low_confidence";
    case ErrorKind::Domain: return "domain_error";
    case ErrorKind::Projection: return "projection_error";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace evrange
