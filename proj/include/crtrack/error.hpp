#pragma once

#include <stdexcept>
#include <string>

namespace crtrack {

enum class Errc {
  cycle_detected,
  bad_index,
  empty_model,
  degenerate_weights,
  instance_too_large,
  bad_group,
  already_processed,
  not_fully_processed,
  io_error,
  config_error,
  insufficient_data,
};

inline const char* to_string(Errc code) {
  switch (code) {
    case Errc::cycle_detected: return "CycleDetected";
    case Errc::bad_index: return "BadIndex";
    case Errc::empty_model: return "EmptyModel";
    case Errc::degenerate_weights: return "DegenerateWeights";
    case Errc::instance_too_large: return "InstanceTooLarge";
    case Errc::bad_group: return "BadGroup";
    case Errc::already_processed: return "AlreadyProcessed";
    case Errc::not_fully_processed: return "NotFullyProcessed";
    case Errc::io_error: return "IoError";
    case Errc::config_error: return "ConfigError";
    case Errc::insufficient_data: return "InsufficientData";
  }
  return "Unknown";
}

/// Library-wide exception. `code()` identifies the failure class so callers
/// can branch without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace crtrack
