#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace gass {

enum class ErrorKind {
  NearZeroVector,
  RankDeficient,
  NonOrthogonalBasis,
  DimensionTooSmall,
  DimensionMismatch,
  TooFewPoints,
  NumericalError,
  DegenerateBatch,
  NearZeroImage,
  LengthMismatch,
  ZeroSigma,
  NumericalDivergence,
  InvalidArgument,
  ParseError,
  MissingAnchor,
  DuplicateAnchor,
  IoError,
};

constexpr std::string_view to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::NearZeroVector: return "NearZeroVector";
    case ErrorKind::RankDeficient: return "RankDeficient";
    case ErrorKind::NonOrthogonalBasis: return "NonOrthogonalBasis";
    case ErrorKind::DimensionTooSmall: return "DimensionTooSmall";
    case ErrorKind::DimensionMismatch: return "DimensionMismatch";
    case ErrorKind::TooFewPoints: return "TooFewPoints";
    case ErrorKind::NumericalError: return "NumericalError";
    case ErrorKind::DegenerateBatch: return "DegenerateBatch";
    case ErrorKind::NearZeroImage: return "NearZeroImage";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::ZeroSigma: return "ZeroSigma";
    case ErrorKind::NumericalDivergence: return "NumericalDivergence";
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::MissingAnchor: return "MissingAnchor";
    case ErrorKind::DuplicateAnchor: return "DuplicateAnchor";
    case ErrorKind::IoError: return "IoError";
  }
  return "Unknown";
}

// Every failure in the library surfaces as this exception; callers branch on kind().
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace gass
