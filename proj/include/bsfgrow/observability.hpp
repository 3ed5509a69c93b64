#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <vector>

#include "bsfgrow/model.hpp"
#include "bsfgrow/params.hpp"

namespace bsfgrow {

/// First observability map component: the biomass-dependent heating term
///   omega1(x1) = (k6 (1 - x1/k2) + k7) x1,
/// a downward parabola with roots 0 and k2 (1 + k7/k6).
double omega1(double x1, const LumpedParameters& p);

/// Second component, the directional derivative of omega1 along the growth
/// flow with the temperature factor removed:
///   omega2(x1) = (k6 + k7 - 2 (k6/k2) x1) (k1 - k3 - (k1/k2) x1) x1.
double omega2(double x1, const LumpedParameters& p);

/// Abscissa of the parabola vertex, x1* = (k6 + k7) k2 / (2 k6). Equals the
/// midpoint of the analysis interval [0, k2 (1 + k7/k6)].
double omega1_vertex_abscissa(const LumpedParameters& p);

/// Vertex value (k6 + k7)^2 k2 / (4 k6), the maximum of omega1 on the
/// analysis interval.
double omega1_vertex_value(const LumpedParameters& p);

/// Nonzero root of omega1, the right end of the analysis interval.
double omega1_positive_root(const LumpedParameters& p);

/// Margin of the global injectivity condition k7 >= (1 - 2 k3/k1) k6,
/// i.e. k7 - (1 - 2 k3/k1) k6. Nonnegative iff the condition holds.
double observability_margin(const LumpedParameters& p);

/// Constructive counterexample to injectivity: two distinct biomass values on
/// [0, k2 (1 + k7/k6)] with equal omega1 and equal omega2. Exists exactly
/// when the margin is negative.
struct NoninjectivityCertificate {
  double nu_star = 0.0;               ///< shared omega1 level of the pair
  double delta = 0.0;                 ///< discriminant of the level equation
  double k67 = 0.0;                   ///< k6 + k7
  std::array<double, 2> x1_pair{};    ///< the two biomass values, ascending
  double omega2_residual = 0.0;       ///< |omega2(lo) - omega2(hi)|
};

struct ObservabilityReport {
  bool condition_holds = false;
  double condition_margin = 0.0;
  double x1_star = 0.0;
  double omega1_max = 0.0;
  std::array<double, 2> omega1_roots{};
  int map_dimension = 2;  ///< number of map components that decide injectivity
  std::optional<NoninjectivityCertificate> certificate;
};

/// Evaluates the injectivity condition and fills the report; attaches a
/// certificate exactly when the condition fails.
ObservabilityReport check_observability(const LumpedParameters& p);

/// Builds the certificate pair from the closed-form level nu* at which the
/// two parabola branches share their omega2 value. Residuals are verified
/// before returning (omega1 agreement to 1e-12 and omega2 agreement to 1e-9,
/// both relative to the natural scale of the respective map component).
/// Throws std::logic_error when the condition holds (no counterexample
/// exists), std::runtime_error if verification fails.
NoninjectivityCertificate noninjective_pair(const LumpedParameters& p);

/// Verdict of the grid-based injectivity search. When non-injective, the
/// refined colliding pair is reported.
struct ScanResult {
  bool injective = true;
  std::optional<std::array<double, 2>> colliding_pair;
  double omega2_gap = 0.0;  ///< |omega2 difference| at the reported pair
};

/// Numerical injectivity oracle, independent of the closed-form certificate:
/// samples omega1/omega2 on a grid over [0, k2 (1 + k7/k6)], matches omega1
/// levels across the two parabola branches, and refines any omega2 sign
/// change by bisection. Pairs closer than sep_frac times the interval length
/// are treated as the same point. n_grid >= 100 required.
ScanResult injectivity_scan(const LumpedParameters& p, int n_grid,
                            double tol = 1e-9, double sep_frac = 0.01);

struct CurvePoint {
  double x1 = 0.0;
  double omega1 = 0.0;
  double omega2 = 0.0;
};

struct CurveIntersection {
  double omega1 = 0.0;
  double omega2 = 0.0;
  double x1_a = 0.0;
  double x1_b = 0.0;
};

/// Polyline trace of x1 -> (omega1(x1), omega2(x1)) over the analysis
/// interval, with a sweep-line self-intersection check over non-adjacent
/// segments.
struct CurveTrace {
  std::vector<CurvePoint> points;
  bool self_intersects = false;
  std::vector<CurveIntersection> intersections;
};

CurveTrace curve_trace(const LumpedParameters& p, int n_grid);

/// Rank of the numeric Jacobian of (y1, y2, y1', y2') with respect to the
/// state, via central differences and SVD. Threshold is relative to the
/// largest singular value.
struct RankResult {
  int rank = 0;
  std::array<double, 3> singular_values{};
  double threshold = 0.0;
};

RankResult local_rank_check(const State& x, const ControlInput& u,
                            const Disturbance& d, const LumpedParameters& p,
                            double fd_step = 1e-6, double rank_rel_tol = 1e-8);

/// One row of the randomized cross-validation sweep: a parameter set drawn
/// log-uniformly, its condition margin, and the three injectivity verdicts.
struct SweepRow {
  std::array<double, 13> k{};
  double margin = 0.0;
  bool near_threshold = false;  ///< |margin| <= near_frac * k6
  bool theorem_injective = false;
  bool scan_injective = false;
  bool curve_injective = false;
  bool agree() const {
    return theorem_injective == scan_injective && scan_injective == curve_injective;
  }
};

/// Draws n parameter sets with every k_i log-uniform on [1e-2, 1e2] and runs
/// the three injectivity oracles on each. Deterministic for a given seed.
std::vector<SweepRow> oracle_sweep(int n, std::uint64_t seed, int n_grid = 10000,
                                   double near_frac = 0.01);

}  // namespace bsfgrow
