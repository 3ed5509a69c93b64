#pragma once

#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace bsfgrow {

struct ConstantSignal {
  double value = 0.0;
};

/// Jumps from `before` to `after` at t = `time` (right-continuous).
struct StepSignal {
  double time = 0.0;
  double before = 0.0;
  double after = 0.0;
};

/// mean + amplitude * sin(2 pi t / period + phase)
struct SinusoidSignal {
  double mean = 0.0;
  double amplitude = 0.0;
  double period = 1.0;
  double phase = 0.0;
};

/// Linear interpolation through (time, value) knots with strictly increasing
/// times; held constant outside the knot range.
struct PiecewiseLinearSignal {
  std::vector<std::pair<double, double>> knots;
};

using SignalSpec =
    std::variant<ConstantSignal, StepSignal, SinusoidSignal, PiecewiseLinearSignal>;

double signal_value(const SignalSpec& s, double t);

/// Time derivative where it exists; step discontinuities and the flat
/// extensions of a piecewise-linear signal report 0.
double signal_derivative(const SignalSpec& s, double t);

/// Throws ConfigError on structural problems (empty or non-increasing knots,
/// nonpositive period).
void validate_signal(const SignalSpec& s, const std::string& name);

struct SignalSet {
  SignalSpec u1 = ConstantSignal{0.0};
  SignalSpec u2 = ConstantSignal{0.0};
  SignalSpec d = ConstantSignal{0.0};
};

}  // namespace bsfgrow
