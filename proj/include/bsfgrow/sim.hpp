#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "bsfgrow/errors.hpp"
#include "bsfgrow/model.hpp"
#include "bsfgrow/signals.hpp"

namespace bsfgrow {

/// One classical fourth-order Runge-Kutta step of x' = f(t, x).
/// Vec may be any type closed under addition and scalar multiplication
/// (double, Eigen vectors, ...).
template <typename Vec, typename F>
Vec rk4_step(F&& f, double t, const Vec& x, double dt) {
  const Vec s1 = f(t, x);
  const Vec s2 = f(t + 0.5 * dt, Vec(x + (0.5 * dt) * s1));
  const Vec s3 = f(t + 0.5 * dt, Vec(x + (0.5 * dt) * s2));
  const Vec s4 = f(t + dt, Vec(x + dt * s3));
  return Vec(x + (dt / 6.0) * (s1 + 2.0 * s2 + 2.0 * s3 + s4));
}

/// Additive Gaussian measurement noise, one std per channel, in degC.
struct NoiseSpec {
  double std_y1 = 0.0;
  double std_y2 = 0.0;
  double std_d = 0.0;
  std::uint64_t seed = 0;
};

struct ScenarioSpec {
  State x0;
  double t_end = 1.0;  ///< [h]
  double dt = 0.01;    ///< [h]
  SignalSet signals;
  NoiseSpec noise;
};

/// Uniformly sampled solution. All vectors share the same length; y is the
/// exact output projection of x.
struct Trajectory {
  double dt = 0.0;
  std::string method = "rk4";
  std::vector<double> t;
  std::vector<State> x;
  std::vector<Output> y;
  std::vector<double> u1, u2, d;
  std::size_t size() const { return t.size(); }
};

/// What a sensor suite delivers: sampled outputs plus the signals the
/// estimator is allowed to know.
struct MeasurementSeries {
  std::vector<double> t, y1, y2, u1, u2, d;
  std::size_t size() const { return t.size(); }
};

/// Fixed-step RK4 integration of the model from t = 0 to t_end, signals
/// evaluated at the stage times. Samples at t_i = i dt including both ends.
/// Throws IntegrationError on the first non-finite state.
Trajectory integrate(const State& x0, const SignalSet& signals,
                     const LumpedParameters& params, double t_end, double dt);

Trajectory integrate(const ScenarioSpec& scenario, const LumpedParameters& params);

/// Projects a trajectory to measurements and adds channel noise. Exactly
/// reproducible for a given seed and build; a zero std leaves the channel
/// bit-identical to the trajectory. Noise draws are consumed for every
/// channel at every sample regardless of the stds, so the y1/y2/d streams
/// stay aligned when a subset of stds is zeroed.
MeasurementSeries sample_measurements(const Trajectory& traj, const NoiseSpec& noise);

/// Reads a scenario file (JSON). Validates ranges (dt > 0, t_end >= dt,
/// x1(0) >= 0, u1 nonnegative, noise stds nonnegative).
ScenarioSpec load_scenario(const std::string& path);

}  // namespace bsfgrow
