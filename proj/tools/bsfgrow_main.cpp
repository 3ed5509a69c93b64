#include <cinttypes>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bsfgrow/csv_io.hpp"
#include "bsfgrow/errors.hpp"
#include "bsfgrow/estimator.hpp"
#include "bsfgrow/observability.hpp"
#include "bsfgrow/params.hpp"
#include "bsfgrow/sim.hpp"
#include "json.hpp"

namespace {

using bsfgrow::ConfigError;
using ordered_json = nlohmann::ordered_json;

ordered_json report_to_json(const bsfgrow::ObservabilityReport& rep) {
  ordered_json j;
  j["condition_holds"] = rep.condition_holds;
  j["condition_margin"] = rep.condition_margin;
  j["x1_star"] = rep.x1_star;
  j["omega1_max"] = rep.omega1_max;
  j["omega1_roots"] = {rep.omega1_roots[0], rep.omega1_roots[1]};
  j["m"] = rep.map_dimension;
  if (rep.certificate) {
    const auto& c = *rep.certificate;
    ordered_json cj;
    cj["nu_star"] = c.nu_star;
    cj["delta"] = c.delta;
    cj["k67"] = c.k67;
    cj["x1_pair"] = {c.x1_pair[0], c.x1_pair[1]};
    cj["omega2_residual"] = c.omega2_residual;
    j["certificate"] = cj;
  } else {
    j["certificate"] = nullptr;
  }
  return j;
}

struct SimulateOpts {
  std::string params_path, scenario_path, out_path;
  std::string measurements_out;
};

int run_simulate(const SimulateOpts& o) {
  const auto bundle = bsfgrow::load_config(o.params_path);
  const auto scenario = bsfgrow::load_scenario(o.scenario_path);
  const auto traj = bsfgrow::integrate(scenario, bundle.lumped);
  bsfgrow::write_trajectory_csv(o.out_path, traj);
  std::printf("simulated %zu samples over %.17g h (dt=%.17g) -> %s\n", traj.size(),
              traj.t.back(), traj.dt, o.out_path.c_str());
  if (!o.measurements_out.empty()) {
    const auto m = bsfgrow::sample_measurements(traj, scenario.noise);
    bsfgrow::write_measurements_csv(o.measurements_out, m);
    std::printf("measurements (seed=%" PRIu64 ") -> %s\n", scenario.noise.seed,
                o.measurements_out.c_str());
  }
  return 0;
}

struct CheckOpts {
  std::string params_path;
  bool json = false;
};

int run_check(const CheckOpts& o) {
  const auto bundle = bsfgrow::load_config(o.params_path);
  const auto rep = bsfgrow::check_observability(bundle.lumped);
  if (o.json) {
    std::cout << report_to_json(rep).dump(2) << "\n";
  } else if (rep.condition_holds) {
    std::printf("OBSERVABLE, margin %+g\n", rep.condition_margin);
  } else {
    std::printf("NOT OBSERVABLE, margin %+g\n", rep.condition_margin);
    const auto& c = *rep.certificate;
    std::printf("certificate: nu*=%.17g delta=%.17g pair=(%.17g, %.17g) "
                "omega2_residual=%.3g\n",
                c.nu_star, c.delta, c.x1_pair[0], c.x1_pair[1], c.omega2_residual);
  }
  return rep.condition_holds ? 0 : 3;
}

struct TraceOpts {
  std::string params_path, out_path;
  int grid = 10000;
};

int run_trace_curve(const TraceOpts& o) {
  if (o.grid < 100) throw ConfigError("trace-curve: --grid must be at least 100");
  const auto bundle = bsfgrow::load_config(o.params_path);
  const auto trace = bsfgrow::curve_trace(bundle.lumped, o.grid);
  bsfgrow::write_curve_csv(o.out_path, trace);
  if (!trace.self_intersects) {
    std::printf("no self-intersection (%d points) -> %s\n",
                static_cast<int>(trace.points.size()), o.out_path.c_str());
  } else {
    for (const auto& hit : trace.intersections) {
      std::printf("self-intersection at (omega1,omega2)=(%.6g, %.6g), "
                  "x1=(%.6g, %.6g)\n",
                  hit.omega1, hit.omega2, hit.x1_a, hit.x1_b);
    }
    std::printf("%d self-intersection(s) (%d points) -> %s\n",
                static_cast<int>(trace.intersections.size()),
                static_cast<int>(trace.points.size()), o.out_path.c_str());
  }
  return 0;
}

struct ReconstructOpts {
  std::string params_path, measurements_path, out_path, truth_path;
  int window = 11;
  int poly = 3;
  bool force = false;
};

int run_reconstruct(const ReconstructOpts& o) {
  const auto bundle = bsfgrow::load_config(o.params_path);
  const double margin = bsfgrow::observability_margin(bundle.lumped);
  if (margin < 0.0 && !o.force) {
    std::fprintf(stderr,
                 "reconstruction refused: injectivity condition fails "
                 "(margin %+g); pass --force to proceed with ambiguity flags\n",
                 margin);
    return 4;
  }
  if (margin < 0.0) {
    std::fprintf(stderr,
                 "warning: injectivity condition fails (margin %+g); branch "
                 "choices rely on continuity and omega2 agreement\n",
                 margin);
  }
  const auto m = bsfgrow::read_measurements_csv(o.measurements_path);
  const bsfgrow::DifferentiatorSpec spec{o.window, o.poly};
  const auto est = bsfgrow::reconstruct(m, bundle.lumped, spec);
  bsfgrow::write_estimates_csv(o.out_path, est);
  std::printf("reconstructed %zu samples (window=%d, poly=%d) -> %s\n",
              est.samples.size(), o.window, o.poly, o.out_path.c_str());

  if (!o.truth_path.empty()) {
    const auto truth = bsfgrow::read_trajectory_csv(o.truth_path);
    if (truth.size() != est.samples.size()) {
      std::ostringstream os;
      os << "truth trajectory has " << truth.size() << " samples, estimates have "
         << est.samples.size();
      throw ConfigError(os.str());
    }
    std::vector<double> truth_x1(truth.size());
    for (std::size_t i = 0; i < truth.size(); ++i) truth_x1[i] = truth.x[i].x1;
    const auto metrics = bsfgrow::error_metrics(est, truth_x1);
    std::printf("reconstruction error: max_abs=%.6g max_rel=%.6g rmse=%.6g "
                "interior=%zu\n",
                metrics.max_abs, metrics.max_rel, metrics.rmse, metrics.n_interior);
  }
  return 0;
}

struct SweepOpts {
  std::string out_path;
  int n = 1000;
  std::uint64_t seed = 0;
  int grid = 10000;
};

int run_sweep(const SweepOpts& o) {
  if (o.n < 0) throw ConfigError("sweep: --n must be nonnegative");
  if (o.grid < 100) throw ConfigError("sweep: --grid must be at least 100");
  const auto rows = bsfgrow::oracle_sweep(o.n, o.seed, o.grid);

  std::ofstream out(o.out_path);
  if (!out) throw ConfigError("cannot write file: " + o.out_path);
  out << "index";
  for (int j = 1; j <= 13; ++j) out << ",k" << j;
  out << ",margin,near_threshold,theorem_injective,scan_injective,curve_injective,agree\n";
  int near = 0, off_agree = 0, off_total = 0;
  char buf[40];
  for (std::size_t i = 0; i < rows.size(); ++i) {
    const auto& row = rows[i];
    out << i;
    for (const double k : row.k) {
      std::snprintf(buf, sizeof(buf), "%.17g", k);
      out << ',' << buf;
    }
    std::snprintf(buf, sizeof(buf), "%.17g", row.margin);
    out << ',' << buf << ',' << (row.near_threshold ? 1 : 0) << ','
        << (row.theorem_injective ? 1 : 0) << ',' << (row.scan_injective ? 1 : 0)
        << ',' << (row.curve_injective ? 1 : 0) << ',' << (row.agree() ? 1 : 0)
        << '\n';
    if (row.near_threshold) {
      ++near;
    } else {
      ++off_total;
      if (row.agree()) ++off_agree;
    }
  }
  std::printf("sweep: %zu sets, %d near-threshold, off-threshold agreement %d/%d -> %s\n",
              rows.size(), near, off_agree, off_total, o.out_path.c_str());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"growth chamber model: simulation, observability analysis, "
               "biomass reconstruction"};
  app.require_subcommand(1);

  SimulateOpts sim_opts;
  auto* sim = app.add_subcommand("simulate", "integrate a scenario and write the trajectory");
  sim->add_option("--params", sim_opts.params_path, "parameter JSON file")->required();
  sim->add_option("--scenario", sim_opts.scenario_path, "scenario JSON file")->required();
  sim->add_option("--out", sim_opts.out_path, "output trajectory CSV")->required();
  sim->add_option("--measurements-out", sim_opts.measurements_out,
                  "also write a (possibly noisy) measurement CSV");

  CheckOpts check_opts;
  auto* check = app.add_subcommand("check", "evaluate the global injectivity condition");
  check->add_option("--params", check_opts.params_path, "parameter JSON file")->required();
  check->add_flag("--json", check_opts.json, "print the full report as JSON");

  TraceOpts trace_opts;
  auto* trace = app.add_subcommand("trace-curve", "trace the (omega1, omega2) curve");
  trace->add_option("--params", trace_opts.params_path, "parameter JSON file")->required();
  trace->add_option("--out", trace_opts.out_path, "output curve CSV")->required();
  trace->add_option("--grid", trace_opts.grid, "number of grid intervals (>= 100)");

  ReconstructOpts rec_opts;
  auto* rec = app.add_subcommand("reconstruct", "estimate biomass from measurements");
  rec->add_option("--params", rec_opts.params_path, "parameter JSON file")->required();
  rec->add_option("--measurements", rec_opts.measurements_path, "measurement CSV")->required();
  rec->add_option("--out", rec_opts.out_path, "output estimate CSV")->required();
  rec->add_option("--truth", rec_opts.truth_path, "trajectory CSV to score against");
  rec->add_option("--window", rec_opts.window, "differentiator window (odd, >= 5)");
  rec->add_option("--poly", rec_opts.poly, "differentiator polynomial order");
  rec->add_flag("--force", rec_opts.force, "proceed even if the injectivity condition fails");

  SweepOpts sweep_opts;
  auto* sweep = app.add_subcommand("sweep", "randomized cross-validation of the injectivity oracles");
  sweep->add_option("--n", sweep_opts.n, "number of parameter sets")->required();
  sweep->add_option("--seed", sweep_opts.seed, "RNG seed");
  sweep->add_option("--out", sweep_opts.out_path, "output CSV")->required();
  sweep->add_option("--grid", sweep_opts.grid, "scan/trace grid intervals (>= 100)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*sim) return run_simulate(sim_opts);
    if (*check) return run_check(check_opts);
    if (*trace) return run_trace_curve(trace_opts);
    if (*rec) return run_reconstruct(rec_opts);
    if (*sweep) return run_sweep(sweep_opts);
  } catch (const bsfgrow::IntegrationError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 2;
  } catch (const ConfigError& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "internal error: %s\n", e.what());
    return 1;
  }
  return 0;
}
