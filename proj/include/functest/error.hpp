#pragma once

#include <stdexcept>
#include <string>

namespace functest {

enum class ErrorCode {
  InvalidArgument,
  NegativeProbability,
  MassNotOne,
  DuplicateAtom,
  SupportMismatch,
  EnumerationTooLarge,
  QuadratureNonConvergence,
  DegenerateGradient,
  NonpositiveDensity,
  ZeroNormEstimate,
  QuantileDomain,
  BaseMismatch,
};

inline const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NegativeProbability: return "NegativeProbability";
    case ErrorCode::MassNotOne: return "MassNotOne";
    case ErrorCode::DuplicateAtom: return "DuplicateAtom";
    case ErrorCode::SupportMismatch: return "SupportMismatch";
    case ErrorCode::EnumerationTooLarge: return "EnumerationTooLarge";
    case ErrorCode::QuadratureNonConvergence: return "QuadratureNonConvergence";
    case ErrorCode::DegenerateGradient: return "DegenerateGradient";
    case ErrorCode::NonpositiveDensity: return "NonpositiveDensity";
    case ErrorCode::ZeroNormEstimate: return "ZeroNormEstimate";
    case ErrorCode::QuantileDomain: return "QuantileDomain";
    case ErrorCode::BaseMismatch: return "BaseMismatch";
  }
  return "Unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

}  // namespace functest
