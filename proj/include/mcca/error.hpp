#pragma once

#include <stdexcept>
#include <string>

namespace mcca {

// Every failure mode in the library maps to one of these codes. The split
// into validation/numerical/io drives the process exit status: bad inputs
// are the caller's problem (exit 1), numerical breakdown is ours (exit 2).
enum class ErrorCode {
  NonFinite,
  NotSymmetric,
  AllTruncated,
  DimensionMismatch,
  ShapeMismatch,
  MissingCell,
  DuplicateCell,
  NonNumericValue,
  InconsistentShape,
  UnknownKey,
  InvalidValue,
  DegenerateDistances,
  InsufficientRank,
  InvalidComponentIndex,
  InvalidVariableIndex,
  EvenBasisSize,
  OutOfInterval,
  UnderdeterminedFit,
  SingularDesign,
  InsufficientUnits,
  TooManyProbes,
  DegenerateRegion,
  OutOfRange,
  SingularCovariance,
  Io,
};

enum class ErrorKind { Validation, Numerical, Io };

inline ErrorKind error_kind_of(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite:
    case ErrorCode::NotSymmetric:
    case ErrorCode::AllTruncated:
    case ErrorCode::DegenerateDistances:
    case ErrorCode::InsufficientRank:
    case ErrorCode::SingularDesign:
    case ErrorCode::DegenerateRegion:
    case ErrorCode::SingularCovariance:
      return ErrorKind::Numerical;
    case ErrorCode::Io:
      return ErrorKind::Io;
    default:
      return ErrorKind::Validation;
  }
}

inline const char* error_code_name(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFinite: return "NonFinite";
    case ErrorCode::NotSymmetric: return "NotSymmetric";
    case ErrorCode::AllTruncated: return "AllTruncated";
    case ErrorCode::DimensionMismatch: return "DimensionMismatch";
    case ErrorCode::ShapeMismatch: return "ShapeMismatch";
    case ErrorCode::MissingCell: return "MissingCell";
    case ErrorCode::DuplicateCell: return "DuplicateCell";
    case ErrorCode::NonNumericValue: return "NonNumericValue";
    case ErrorCode::InconsistentShape: return "InconsistentShape";
    case ErrorCode::UnknownKey: return "UnknownKey";
    case ErrorCode::InvalidValue: return "InvalidValue";
    case ErrorCode::DegenerateDistances: return "DegenerateDistances";
    case ErrorCode::InsufficientRank: return "InsufficientRank";
    case ErrorCode::InvalidComponentIndex: return "InvalidComponentIndex";
    case ErrorCode::InvalidVariableIndex: return "InvalidVariableIndex";
    case ErrorCode::EvenBasisSize: return "EvenBasisSize";
    case ErrorCode::OutOfInterval: return "OutOfInterval";
    case ErrorCode::UnderdeterminedFit: return "UnderdeterminedFit";
    case ErrorCode::SingularDesign: return "SingularDesign";
    case ErrorCode::InsufficientUnits: return "InsufficientUnits";
    case ErrorCode::TooManyProbes: return "TooManyProbes";
    case ErrorCode::DegenerateRegion: return "DegenerateRegion";
    case ErrorCode::OutOfRange: return "OutOfRange";
    case ErrorCode::SingularCovariance: return "SingularCovariance";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(error_code_name(code)) + ": " + message),
        code_(code) {}

  ErrorCode code() const { return code_; }
  ErrorKind kind() const { return error_kind_of(code_); }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& message) {
  throw Error(code, message);
}

}  // namespace mcca
