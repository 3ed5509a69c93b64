#include "bsfgrow/signals.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bsfgrow/errors.hpp"

namespace bsfgrow {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// Index of the knot interval containing t, or -1 / knots.size()-1 outside.
std::size_t lower_knot(const std::vector<std::pair<double, double>>& knots, double t) {
  auto it = std::upper_bound(knots.begin(), knots.end(), t,
                             [](double v, const auto& k) { return v < k.first; });
  if (it == knots.begin()) return 0;
  return static_cast<std::size_t>(it - knots.begin()) - 1;
}

}  // namespace

double signal_value(const SignalSpec& s, double t) {
  return std::visit(
      [t](const auto& sig) -> double {
        using T = std::decay_t<decltype(sig)>;
        if constexpr (std::is_same_v<T, ConstantSignal>) {
          return sig.value;
        } else if constexpr (std::is_same_v<T, StepSignal>) {
          return t >= sig.time ? sig.after : sig.before;
        } else if constexpr (std::is_same_v<T, SinusoidSignal>) {
          return sig.mean + sig.amplitude * std::sin(kTwoPi * t / sig.period + sig.phase);
        } else {
          const auto& knots = sig.knots;
          if (t <= knots.front().first) return knots.front().second;
          if (t >= knots.back().first) return knots.back().second;
          const std::size_t i = lower_knot(knots, t);
          const auto& [t0, v0] = knots[i];
          const auto& [t1, v1] = knots[i + 1];
          const double w = (t - t0) / (t1 - t0);
          return v0 + w * (v1 - v0);
        }
      },
      s);
}

double signal_derivative(const SignalSpec& s, double t) {
  return std::visit(
      [t](const auto& sig) -> double {
        using T = std::decay_t<decltype(sig)>;
        if constexpr (std::is_same_v<T, ConstantSignal>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, StepSignal>) {
          return 0.0;
        } else if constexpr (std::is_same_v<T, SinusoidSignal>) {
          const double w = kTwoPi / sig.period;
          return sig.amplitude * w * std::cos(w * t + sig.phase);
        } else {
          const auto& knots = sig.knots;
          if (t < knots.front().first || t > knots.back().first) return 0.0;
          const std::size_t i = lower_knot(knots, t);
          const std::size_t j = std::min(i + 1, knots.size() - 1);
          if (j == i) return 0.0;
          const auto& [t0, v0] = knots[i];
          const auto& [t1, v1] = knots[j];
          return (v1 - v0) / (t1 - t0);
        }
      },
      s);
}

void validate_signal(const SignalSpec& s, const std::string& name) {
  std::visit(
      [&name](const auto& sig) {
        using T = std::decay_t<decltype(sig)>;
        if constexpr (std::is_same_v<T, SinusoidSignal>) {
          if (!(sig.period > 0.0)) {
            std::ostringstream os;
            os << "signal " << name << ": sinusoid period must be positive (got "
               << sig.period << ")";
            throw ConfigError(os.str());
          }
        } else if constexpr (std::is_same_v<T, PiecewiseLinearSignal>) {
          if (sig.knots.empty()) {
            throw ConfigError("signal " + name + ": piecewise-linear needs at least one knot");
          }
          for (std::size_t i = 1; i < sig.knots.size(); ++i) {
            if (!(sig.knots[i].first > sig.knots[i - 1].first)) {
              std::ostringstream os;
              os << "signal " << name << ": knot times must be strictly increasing "
                 << "(knot " << i << " at t=" << sig.knots[i].first << ")";
              throw ConfigError(os.str());
            }
          }
        } else {
          (void)sig;
        }
      },
      s);
}

}  // namespace bsfgrow
