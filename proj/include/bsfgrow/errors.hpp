#pragma once

#include <array>
#include <stdexcept>
#include <string>

namespace bsfgrow {

/// Problem with configuration input: malformed file, missing or unknown key,
/// value outside its admissible range.
class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Thrown when the integrator produces a non-finite state component.
/// Carries the time of the offending step and the last finite state.
class IntegrationError : public std::runtime_error {
 public:
  IntegrationError(const std::string& what, double time,
                   const std::array<double, 3>& last_state)
      : std::runtime_error(what), time_(time), last_state_(last_state) {}

  double time() const { return time_; }
  const std::array<double, 3>& last_state() const { return last_state_; }

 private:
  double time_;
  std::array<double, 3> last_state_;
};

}  // namespace bsfgrow
