#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <cmath>
#include <fstream>
#include <random>

#include "bsfgrow/errors.hpp"
#include "bsfgrow/sim.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bsfgrow;

namespace {

SignalSet constant_signals(double u1, double u2, double d) {
  SignalSet s;
  s.u1 = ConstantSignal{u1};
  s.u2 = ConstantSignal{u2};
  s.d = ConstantSignal{d};
  return s;
}

}  // namespace

TEST_CASE("signal evaluation and derivatives") {
  SUBCASE("constant") {
    const SignalSpec s = ConstantSignal{3.5};
    CHECK(signal_value(s, 0.0) == 3.5);
    CHECK(signal_value(s, 100.0) == 3.5);
    CHECK(signal_derivative(s, 4.0) == 0.0);
  }
  SUBCASE("step is right-continuous") {
    const SignalSpec s = StepSignal{2.0, 1.0, 5.0};
    CHECK(signal_value(s, 1.999) == 1.0);
    CHECK(signal_value(s, 2.0) == 5.0);
    CHECK(signal_derivative(s, 2.0) == 0.0);
  }
  SUBCASE("sinusoid") {
    const SignalSpec s = SinusoidSignal{20.0, 5.0, 24.0, 0.0};
    CHECK(signal_value(s, 0.0) == doctest::Approx(20.0).epsilon(1e-14));
    CHECK(signal_value(s, 6.0) == doctest::Approx(25.0).epsilon(1e-12));
    const double w = 2.0 * 3.14159265358979323846 / 24.0;
    CHECK(signal_derivative(s, 0.0) == doctest::Approx(5.0 * w).epsilon(1e-12));
  }
  SUBCASE("piecewise linear holds flat outside the knots") {
    const SignalSpec s = PiecewiseLinearSignal{{{0.0, 10.0}, {2.0, 14.0}, {5.0, 8.0}}};
    CHECK(signal_value(s, -1.0) == 10.0);
    CHECK(signal_value(s, 1.0) == doctest::Approx(12.0).epsilon(1e-14));
    CHECK(signal_value(s, 3.5) == doctest::Approx(11.0).epsilon(1e-14));
    CHECK(signal_value(s, 99.0) == 8.0);
    CHECK(signal_derivative(s, 1.0) == doctest::Approx(2.0).epsilon(1e-14));
    CHECK(signal_derivative(s, 3.0) == doctest::Approx(-2.0).epsilon(1e-14));
    CHECK(signal_derivative(s, 99.0) == 0.0);
  }
  SUBCASE("knot ordering is validated") {
    const SignalSpec s = PiecewiseLinearSignal{{{0.0, 1.0}, {0.0, 2.0}}};
    CHECK_THROWS_AS(validate_signal(s, "d"), ConfigError);
  }
}

TEST_CASE("rk4_step integrates exponential decay at fourth order") {
  // Generic harness check on x' = -x, scalar state.
  auto f = [](double, double x) { return -x; };
  double x = 1.0;
  const double dt = 0.01;
  for (int i = 0; i < 100; ++i) x = rk4_step(f, i * dt, x, dt);
  CHECK(std::abs(x - std::exp(-1.0)) <= 1e-9);
}

TEST_CASE("halving the step shrinks the endpoint error sixteenfold") {
  const LumpedParameters p = testsup::reference_params();
  const State x0{0.05, 25.0, 25.0};
  const SignalSet sig = constant_signals(0.1, 0.5, 20.0);
  const double t_end = 2.0;

  auto endpoint = [&](double dt) {
    const Trajectory traj = integrate(x0, sig, p, t_end, dt);
    return traj.x.back().vector();
  };
  const auto ref = endpoint(0.005);  // dt/8 of the coarse run
  const double e_coarse = (endpoint(0.04) - ref).norm();
  const double e_fine = (endpoint(0.02) - ref).norm();
  const double ratio = e_coarse / e_fine;
  CHECK(ratio >= 14.0);
  CHECK(ratio <= 18.0);
}

TEST_CASE("zero biomass is preserved exactly by the integrator") {
  const LumpedParameters p = testsup::reference_params();
  const State x0{0.0, 25.0, 25.0};
  const Trajectory traj = integrate(x0, constant_signals(0.2, 0.3, 18.0), p, 10.0, 0.01);
  for (const State& s : traj.x) CHECK(s.x1 == 0.0);
}

TEST_CASE("trajectory bookkeeping: spacing, outputs, signal samples") {
  const LumpedParameters p = testsup::reference_params();
  SignalSet sig;
  sig.u1 = StepSignal{1.0, 0.0, 0.5};
  sig.u2 = ConstantSignal{0.2};
  sig.d = SinusoidSignal{20.0, 2.0, 24.0, 0.0};
  const Trajectory traj = integrate(State{0.05, 25.0, 25.0}, sig, p, 2.0, 0.25);

  REQUIRE(traj.size() == 9);
  CHECK(traj.method == "rk4");
  CHECK(traj.dt == 0.25);
  for (std::size_t i = 0; i < traj.size(); ++i) {
    CHECK(traj.t[i] == doctest::Approx(0.25 * i).epsilon(1e-15));
    CHECK(traj.y[i].y1 == traj.x[i].x2);  // outputs are exact projections
    CHECK(traj.y[i].y2 == traj.x[i].x3);
    CHECK(traj.u1[i] == signal_value(sig.u1, traj.t[i]));
    CHECK(traj.d[i] == signal_value(sig.d, traj.t[i]));
  }
}

TEST_CASE("biomass stays inside [0, k2] on benign scenarios") {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const LumpedParameters p = testsup::reference_params();
    const State x0{p.k2 * u01(rng), 15.0 + 20.0 * u01(rng), 15.0 + 20.0 * u01(rng)};
    const SignalSet sig = constant_signals(u01(rng), u01(rng), 15.0 + 10.0 * u01(rng));
    const Trajectory traj = integrate(x0, sig, p, 20.0, 0.01);
    for (const State& s : traj.x) {
      CHECK(s.x1 >= -1e-9);
      CHECK(s.x1 <= p.k2 + 1e-6);
    }
  }
}

TEST_CASE("divergence raises IntegrationError with time and last state") {
  LumpedParameters p = testsup::reference_params();
  // A strong positive feedback loop between the two temperatures.
  p.k5 = 1e8;
  p.k9 = 1e8;
  p.k4 = 1e-8;
  p.k10 = 1e-8;
  const State x0{0.1, 25.0, 25.0};
  try {
    integrate(x0, constant_signals(0.0, 0.0, 20.0), p, 100.0, 1.0);
    FAIL("expected IntegrationError");
  } catch (const IntegrationError& e) {
    CHECK(e.time() >= 0.0);
    CHECK(e.time() < 100.0);
    for (double v : e.last_state()) CHECK(std::isfinite(v));
  }
}

TEST_CASE("integration rejects bad step configuration") {
  const LumpedParameters p = testsup::reference_params();
  const SignalSet sig = constant_signals(0.0, 0.0, 20.0);
  CHECK_THROWS_AS(integrate(State{0.1, 25, 25}, sig, p, 1.0, 0.0), ConfigError);
  CHECK_THROWS_AS(integrate(State{0.1, 25, 25}, sig, p, 0.005, 0.01), ConfigError);
}

TEST_CASE("measurement sampling is seed-deterministic") {
  const LumpedParameters p = testsup::reference_params();
  const Trajectory traj =
      integrate(State{0.05, 25.0, 25.0}, constant_signals(0.1, 0.5, 20.0), p, 5.0, 0.01);

  NoiseSpec noise;
  noise.std_y1 = 0.1;
  noise.std_y2 = 0.05;
  noise.std_d = 0.2;
  noise.seed = 99;
  const MeasurementSeries a = sample_measurements(traj, noise);
  const MeasurementSeries b = sample_measurements(traj, noise);
  REQUIRE(a.size() == b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(a.y1[i] == b.y1[i]);
    CHECK(a.y2[i] == b.y2[i]);
    CHECK(a.d[i] == b.d[i]);
  }

  noise.seed = 100;
  const MeasurementSeries c = sample_measurements(traj, noise);
  bool any_different = false;
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (a.y1[i] != c.y1[i]) any_different = true;
  }
  CHECK(any_different);
}

TEST_CASE("zero noise reproduces the trajectory bit for bit") {
  const LumpedParameters p = testsup::reference_params();
  const Trajectory traj =
      integrate(State{0.05, 25.0, 25.0}, constant_signals(0.1, 0.5, 20.0), p, 5.0, 0.01);
  const MeasurementSeries m = sample_measurements(traj, NoiseSpec{});
  for (std::size_t i = 0; i < m.size(); ++i) {
    CHECK(m.y1[i] == traj.y[i].y1);
    CHECK(m.y2[i] == traj.y[i].y2);
    CHECK(m.d[i] == traj.d[i]);
    CHECK(m.u1[i] == traj.u1[i]);
  }
}

TEST_CASE("noise magnitude matches the requested std") {
  const LumpedParameters p = testsup::reference_params();
  const Trajectory traj =
      integrate(State{0.0, 25.0, 25.0}, constant_signals(0.0, 0.0, 25.0), p, 100.0, 0.01);
  NoiseSpec noise;
  noise.std_y1 = 0.1;
  noise.seed = 7;
  const MeasurementSeries m = sample_measurements(traj, noise);
  double sum = 0.0, sq = 0.0;
  for (std::size_t i = 0; i < m.size(); ++i) {
    const double r = m.y1[i] - traj.y[i].y1;
    sum += r;
    sq += r * r;
  }
  const double n = static_cast<double>(m.size());
  const double std_est = std::sqrt(sq / n - (sum / n) * (sum / n));
  CHECK(std_est == doctest::Approx(0.1).epsilon(0.05));
}

TEST_CASE("scenario files load with validation") {
  testsup::TempDir tmp;
  const std::string path = tmp.file("scenario.json");
  SUBCASE("valid scenario") {
    std::ofstream(path) << R"({
      "x0": {"x1": 0.05, "x2": 25, "x3": 25},
      "t_end": 10, "dt": 0.01,
      "signals": {
        "u1": {"kind": "step", "time": 2, "before": 0, "after": 0.5},
        "u2": {"kind": "constant", "value": 0.2},
        "d": {"kind": "sinusoid", "mean": 20, "amplitude": 3, "period": 24}
      },
      "noise": {"std_y1": 0.1, "seed": 5}})";
    const ScenarioSpec sc = load_scenario(path);
    CHECK(sc.x0.x1 == 0.05);
    CHECK(sc.t_end == 10.0);
    CHECK(sc.noise.std_y1 == 0.1);
    CHECK(sc.noise.std_y2 == 0.0);
    CHECK(sc.noise.seed == 5);
    CHECK(signal_value(sc.signals.u1, 3.0) == 0.5);
  }
  SUBCASE("negative u1 sinusoid rejected") {
    std::ofstream(path) << R"({
      "x0": {"x1": 0.05, "x2": 25, "x3": 25},
      "t_end": 10, "dt": 0.01,
      "signals": {
        "u1": {"kind": "sinusoid", "mean": 0.5, "amplitude": 1.0, "period": 24},
        "u2": {"kind": "constant", "value": 0},
        "d": {"kind": "constant", "value": 20}
      }})";
    CHECK_THROWS_WITH_AS(load_scenario(path), doctest::Contains("u1"), ConfigError);
  }
  SUBCASE("negative initial biomass rejected") {
    std::ofstream(path) << R"({
      "x0": {"x1": -0.05, "x2": 25, "x3": 25},
      "t_end": 10, "dt": 0.01,
      "signals": {
        "u1": {"kind": "constant", "value": 0},
        "u2": {"kind": "constant", "value": 0},
        "d": {"kind": "constant", "value": 20}
      }})";
    CHECK_THROWS_WITH_AS(load_scenario(path), doctest::Contains("x1"), ConfigError);
  }
  SUBCASE("unknown signal kind rejected") {
    std::ofstream(path) << R"({
      "x0": {"x1": 0.05, "x2": 25, "x3": 25},
      "t_end": 10, "dt": 0.01,
      "signals": {
        "u1": {"kind": "ramp", "value": 0},
        "u2": {"kind": "constant", "value": 0},
        "d": {"kind": "constant", "value": 20}
      }})";
    CHECK_THROWS_WITH_AS(load_scenario(path), doctest::Contains("ramp"), ConfigError);
  }
}
