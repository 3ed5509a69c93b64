#include "bsfgrow/sim.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

#include "json.hpp"

namespace bsfgrow {

namespace {

bool finite(const Vec3<double>& v) {
  return std::isfinite(v[0]) && std::isfinite(v[1]) && std::isfinite(v[2]);
}

}  // namespace

Trajectory integrate(const State& x0, const SignalSet& signals,
                     const LumpedParameters& params, double t_end, double dt) {
  if (!(dt > 0.0)) throw ConfigError("integrate: dt must be positive");
  if (!(t_end >= dt)) throw ConfigError("integrate: t_end must be at least dt");

  const auto n_steps = static_cast<std::size_t>(std::floor(t_end / dt + 1e-9));

  auto rhs = [&](double t, const Vec3<double>& v) -> Vec3<double> {
    const State s = State::from_vector(v);
    const ControlInput u{signal_value(signals.u1, t), signal_value(signals.u2, t)};
    const Disturbance dist{signal_value(signals.d, t)};
    return dynamics(s, u, dist, params);
  };

  Trajectory traj;
  traj.dt = dt;
  traj.t.reserve(n_steps + 1);
  traj.x.reserve(n_steps + 1);
  traj.y.reserve(n_steps + 1);
  traj.u1.reserve(n_steps + 1);
  traj.u2.reserve(n_steps + 1);
  traj.d.reserve(n_steps + 1);

  auto record = [&](double t, const State& s) {
    traj.t.push_back(t);
    traj.x.push_back(s);
    traj.y.push_back(output(s));
    traj.u1.push_back(signal_value(signals.u1, t));
    traj.u2.push_back(signal_value(signals.u2, t));
    traj.d.push_back(signal_value(signals.d, t));
  };

  Vec3<double> v = x0.vector();
  record(0.0, x0);
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t = static_cast<double>(i) * dt;
    const Vec3<double> next = rk4_step(rhs, t, v, dt);
    if (!finite(next)) {
      std::ostringstream os;
      os << "integration diverged: non-finite state after the step at t=" << t;
      throw IntegrationError(os.str(), t, {v[0], v[1], v[2]});
    }
    v = next;
    record(static_cast<double>(i + 1) * dt, State::from_vector(v));
  }
  return traj;
}

Trajectory integrate(const ScenarioSpec& scenario, const LumpedParameters& params) {
  return integrate(scenario.x0, scenario.signals, params, scenario.t_end, scenario.dt);
}

MeasurementSeries sample_measurements(const Trajectory& traj, const NoiseSpec& noise) {
  if (!(noise.std_y1 >= 0.0) || !(noise.std_y2 >= 0.0) || !(noise.std_d >= 0.0)) {
    throw ConfigError("sample_measurements: noise stds must be nonnegative");
  }
  std::mt19937_64 rng(noise.seed);
  std::normal_distribution<double> normal(0.0, 1.0);

  MeasurementSeries m;
  m.t = traj.t;
  m.u1 = traj.u1;
  m.u2 = traj.u2;
  const std::size_t n = traj.size();
  m.y1.resize(n);
  m.y2.resize(n);
  m.d.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    // Three draws per sample unconditionally, so the streams are invariant
    // to which stds are zero. A zero std adds exactly 0.0.
    const double z1 = normal(rng);
    const double z2 = normal(rng);
    const double z3 = normal(rng);
    m.y1[i] = traj.y[i].y1 + noise.std_y1 * z1;
    m.y2[i] = traj.y[i].y2 + noise.std_y2 * z2;
    m.d[i] = traj.d[i] + noise.std_d * z3;
  }
  return m;
}

namespace {

using ordered_json = nlohmann::ordered_json;

double take_number(ordered_json& obj, const std::string& context, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) {
    throw ConfigError(context + ": missing required key \"" + key + "\"");
  }
  if (!it->is_number()) {
    throw ConfigError(context + ": key \"" + key + "\" must be a number");
  }
  double v = it->get<double>();
  obj.erase(it);
  return v;
}

void reject_leftovers(const ordered_json& obj, const std::string& context) {
  if (obj.empty()) return;
  std::string msg = context + ": unknown key(s):";
  for (const auto& item : obj.items()) msg += " \"" + item.key() + "\"";
  throw ConfigError(msg);
}

SignalSpec signal_from_json(const ordered_json& j, const std::string& name) {
  const std::string context = "signal " + name;
  if (!j.is_object()) throw ConfigError(context + ": must be an object");
  ordered_json obj = j;
  auto kind_it = obj.find("kind");
  if (kind_it == obj.end() || !kind_it->is_string()) {
    throw ConfigError(context + ": missing string key \"kind\"");
  }
  const std::string kind = kind_it->get<std::string>();
  obj.erase(kind_it);

  SignalSpec spec;
  if (kind == "constant") {
    ConstantSignal s;
    s.value = take_number(obj, context, "value");
    spec = s;
  } else if (kind == "step") {
    StepSignal s;
    s.time = take_number(obj, context, "time");
    s.before = take_number(obj, context, "before");
    s.after = take_number(obj, context, "after");
    spec = s;
  } else if (kind == "sinusoid") {
    SinusoidSignal s;
    s.mean = take_number(obj, context, "mean");
    s.amplitude = take_number(obj, context, "amplitude");
    s.period = take_number(obj, context, "period");
    s.phase = obj.contains("phase") ? take_number(obj, context, "phase") : 0.0;
    spec = s;
  } else if (kind == "piecewise-linear") {
    auto it = obj.find("knots");
    if (it == obj.end() || !it->is_array()) {
      throw ConfigError(context + ": piecewise-linear needs a \"knots\" array");
    }
    PiecewiseLinearSignal s;
    for (const auto& k : *it) {
      if (!k.is_array() || k.size() != 2 || !k[0].is_number() || !k[1].is_number()) {
        throw ConfigError(context + ": each knot must be a [time, value] pair");
      }
      s.knots.emplace_back(k[0].get<double>(), k[1].get<double>());
    }
    obj.erase(it);
    spec = s;
  } else {
    throw ConfigError(context + ": unknown kind \"" + kind + "\"");
  }
  reject_leftovers(obj, context);
  validate_signal(spec, name);
  return spec;
}

// u1 drives the ventilator; it must never go negative anywhere on the axis.
void require_nonnegative_signal(const SignalSpec& s, const std::string& name) {
  const bool ok = std::visit(
      [](const auto& sig) {
        using T = std::decay_t<decltype(sig)>;
        if constexpr (std::is_same_v<T, ConstantSignal>) {
          return sig.value >= 0.0;
        } else if constexpr (std::is_same_v<T, StepSignal>) {
          return sig.before >= 0.0 && sig.after >= 0.0;
        } else if constexpr (std::is_same_v<T, SinusoidSignal>) {
          return sig.mean - std::abs(sig.amplitude) >= 0.0;
        } else {
          for (const auto& k : sig.knots)
            if (k.second < 0.0) return false;
          return true;
        }
      },
      s);
  if (!ok) throw ConfigError("signal " + name + ": must be nonnegative everywhere");
}

}  // namespace

ScenarioSpec load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open scenario file: " + path);
  ordered_json doc;
  try {
    doc = ordered_json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("scenario file " + path + ": " + e.what());
  }
  if (!doc.is_object()) {
    throw ConfigError("scenario file " + path + ": top level must be an object");
  }
  for (const auto& item : doc.items()) {
    const std::string& key = item.key();
    if (key != "x0" && key != "t_end" && key != "dt" && key != "signals" &&
        key != "noise") {
      throw ConfigError("scenario file " + path + ": unknown key \"" + key + "\"");
    }
  }
  if (!doc.contains("x0") || !doc["x0"].is_object()) {
    throw ConfigError("scenario file " + path + ": missing \"x0\" object");
  }
  if (!doc.contains("signals") || !doc["signals"].is_object()) {
    throw ConfigError("scenario file " + path + ": missing \"signals\" object");
  }

  ScenarioSpec sc;
  {
    ordered_json x0 = doc["x0"];
    sc.x0.x1 = take_number(x0, "x0", "x1");
    sc.x0.x2 = take_number(x0, "x0", "x2");
    sc.x0.x3 = take_number(x0, "x0", "x3");
    reject_leftovers(x0, "x0");
  }
  {
    ordered_json top = doc;
    top.erase("x0");
    top.erase("signals");
    if (top.contains("noise")) top.erase("noise");
    sc.t_end = take_number(top, "scenario", "t_end");
    sc.dt = take_number(top, "scenario", "dt");
  }
  {
    ordered_json sig = doc["signals"];
    for (const auto& item : sig.items()) {
      const std::string& key = item.key();
      if (key != "u1" && key != "u2" && key != "d") {
        throw ConfigError("signals: unknown key \"" + key + "\"");
      }
    }
    if (!sig.contains("u1") || !sig.contains("u2") || !sig.contains("d")) {
      throw ConfigError("signals: u1, u2 and d are all required");
    }
    sc.signals.u1 = signal_from_json(sig["u1"], "u1");
    sc.signals.u2 = signal_from_json(sig["u2"], "u2");
    sc.signals.d = signal_from_json(sig["d"], "d");
  }
  if (doc.contains("noise")) {
    ordered_json nz = doc["noise"];
    if (!nz.is_object()) throw ConfigError("scenario noise: must be an object");
    if (nz.contains("std_y1")) sc.noise.std_y1 = take_number(nz, "noise", "std_y1");
    if (nz.contains("std_y2")) sc.noise.std_y2 = take_number(nz, "noise", "std_y2");
    if (nz.contains("std_d")) sc.noise.std_d = take_number(nz, "noise", "std_d");
    if (nz.contains("seed")) {
      auto it = nz.find("seed");
      if (!it->is_number_unsigned()) {
        throw ConfigError("noise: key \"seed\" must be a nonnegative integer");
      }
      sc.noise.seed = it->get<std::uint64_t>();
      nz.erase(it);
    }
    reject_leftovers(nz, "noise");
  }

  if (!(sc.dt > 0.0)) throw ConfigError("scenario: dt must be positive");
  if (!(sc.t_end >= sc.dt)) throw ConfigError("scenario: t_end must be at least dt");
  if (!(sc.x0.x1 >= 0.0)) throw ConfigError("scenario: x0.x1 must be nonnegative");
  if (sc.noise.std_y1 < 0.0 || sc.noise.std_y2 < 0.0 || sc.noise.std_d < 0.0) {
    throw ConfigError("scenario: noise stds must be nonnegative");
  }
  require_nonnegative_signal(sc.signals.u1, "u1");
  return sc;
}

}  // namespace bsfgrow
