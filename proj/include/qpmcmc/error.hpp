#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qpmcmc {

enum class ErrorCode {
  degenerate_selection,
  enumeration_unavailable,
  superposition_width,
  unbounded_target,
  acceptance_starvation,
  immutable_observed_trait,
  antiferromagnetic_coupling,
  state_space_too_large,
  invalid_network,
  parse_error,
  no_eligible_pair,
  zero_variance,
  invalid_argument,
  io_error,
  mismatched_inputs,
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::degenerate_selection: return "degenerate_selection";
    case ErrorCode::enumeration_unavailable: return "enumeration_unavailable";
    case ErrorCode::superposition_width: return "superposition_width";
    case ErrorCode::unbounded_target: return "unbounded_target";
    case ErrorCode::acceptance_starvation: return "acceptance_starvation";
    case ErrorCode::immutable_observed_trait: return "immutable_observed_trait";
    case ErrorCode::antiferromagnetic_coupling: return "antiferromagnetic_coupling";
    case ErrorCode::state_space_too_large: return "state_space_too_large";
    case ErrorCode::invalid_network: return "invalid_network";
    case ErrorCode::parse_error: return "parse_error";
    case ErrorCode::no_eligible_pair: return "no_eligible_pair";
    case ErrorCode::zero_variance: return "zero_variance";
    case ErrorCode::invalid_argument: return "invalid_argument";
    case ErrorCode::io_error: return "io_error";
    case ErrorCode::mismatched_inputs: return "mismatched_inputs";
  }
  return "unknown";
}

/// Base exception for the library. The code is stable and machine-readable;
/// the message is for humans.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace qpmcmc
