#pragma once

#include <stdexcept>
#include <string>
#include <utility>

namespace mfbel {

enum class ErrorCode {
  invalid_argument,
  degenerate_denominator,
  non_finite,
  no_convergence,
  ellipticity_floor,
  tangent_degenerate,
  unknown_model,
  missing_parameter,
  payoff_not_differentiable,
  weight_not_applicable,
  config_parse,
};

const char* to_string(ErrorCode code) noexcept;

/// Base class for every failure raised by the library. The code lets callers
/// (and the CLI) distinguish recoverable conditions such as NoConvergence.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "InvalidArgument";
    case ErrorCode::degenerate_denominator: return "DegenerateDenominator";
    case ErrorCode::non_finite: return "NonFinite";
    case ErrorCode::no_convergence: return "NoConvergence";
    case ErrorCode::ellipticity_floor: return "EllipticityFloor";
    case ErrorCode::tangent_degenerate: return "TangentDegenerate";
    case ErrorCode::unknown_model: return "UnknownModel";
    case ErrorCode::missing_parameter: return "MissingParameter";
    case ErrorCode::payoff_not_differentiable: return "PayoffNotDifferentiable";
    case ErrorCode::weight_not_applicable: return "WeightNotApplicable";
    case ErrorCode::config_parse: return "ConfigParse";
  }
  return "Unknown";
}

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) { throw Error(code, what); }

inline void require(bool condition, const std::string& what) {
  if (!condition) fail(ErrorCode::invalid_argument, what);
}

}  // namespace mfbel
