#pragma once

#include <array>
#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "bsfgrow/params.hpp"
#include "bsfgrow/sim.hpp"

namespace bsfgrow {

/// Savitzky-Golay differentiator configuration. window must be odd and larger
/// than poly_order; poly_order >= 2 so second derivatives exist.
struct DifferentiatorSpec {
  int window = 11;
  int poly_order = 3;
};

/// Smoothed value and first and second derivatives of one channel, in
/// original units (per hour for the derivatives). d0 is the least-squares
/// fit evaluated at the sample, i.e. the denoised signal.
struct DerivativeChannel {
  std::vector<double> d0, d1, d2;
};

/// Smoothed derivatives of all measurement channels. edge[i] marks samples
/// whose fitting window could not be centered (first and last half-window).
struct DerivativeSet {
  DerivativeChannel y1, y2, d;
  std::vector<bool> edge;
};

/// Least-squares polynomial differentiation on the uniform grid of the
/// series. Exact on polynomials up to poly_order, edges included (the edge
/// windows evaluate the fit off-center). Throws ConfigError on bad spec,
/// non-uniform sampling, or a series shorter than the window.
DerivativeSet differentiate(const MeasurementSeries& m, const DifferentiatorSpec& spec);

/// Measurement-side reconstruction of omega1(x1):
///   v1 = (y1' + k4 y1 - k5 y2 + k8 d) / r(y1).
double omega1_from_measurements(double y1, double y1_dot, double y2, double d,
                                const LumpedParameters& p);

/// Measurement-side reconstruction of omega2(x1):
///   v2 = (y1'' + k4 y1' - k5 y2' + k8 d') / r^2
///      - (y1' + k4 y1 - k5 y2 + k8 d) r' / r^3,   r' = dr/dT(y1) y1'.
double omega2_from_measurements(double y1, double y1_dot, double y1_ddot,
                                double y2, double y2_dot, double d, double d_dot,
                                const LumpedParameters& p);

/// Pre-images of a level v1 under the omega1 parabola, restricted to
/// [0, k2 (1 + k7/k6)]. Two candidates below the vertex value, one at it,
/// none above (flagged); negative levels clamp to the single candidate 0.
struct InversionResult {
  std::array<double, 2> candidates{};  ///< ascending; only the first n_candidates valid
  int n_candidates = 0;
  bool clamped_negative = false;
  bool above_vertex = false;
};

InversionResult invert_omega1(double v1, const LumpedParameters& p);

/// Flags accumulated per estimate sample. Serialized as semicolon-joined
/// tokens in the estimate CSV.
enum EstimateFlag : unsigned {
  kFlagEdge = 1u << 0,            ///< derivative window off-center here
  kFlagSingle = 1u << 1,          ///< only one pre-image existed
  kFlagContinuity = 1u << 2,      ///< branch picked by closeness to previous estimate
  kFlagOmega2Init = 1u << 3,      ///< branch picked by omega2 agreement (no history)
  kFlagHoldLast = 1u << 4,        ///< no candidate; previous estimate held
  kFlagClampNegativeV1 = 1u << 5, ///< v1 < 0 clamped to the zero-biomass branch
  kFlagClampAboveVertex = 1u << 6 ///< v1 above the parabola maximum; pinned to x1*
};

std::string flag_tokens(unsigned flags);

struct DisambiguationResult {
  double estimate = 0.0;
  unsigned flags = 0;
  double margin = 0.0;  ///< decision margin of the rule that fired
};

/// Picks one branch of the pre-image set: by continuity when a previous
/// estimate exists, otherwise by omega2 agreement with v2. An empty
/// candidate set holds the previous estimate (flagged).
DisambiguationResult disambiguate(std::span<const double> candidates, double v2,
                                  std::optional<double> previous,
                                  const LumpedParameters& p);

struct EstimateSample {
  double t = 0.0;
  double x1_estimate = 0.0;
  double cand_lo = 0.0;  ///< lower pre-image (or the single/pinned candidate)
  double cand_hi = 0.0;  ///< upper pre-image (equals cand_lo when single)
  double v1 = 0.0;
  double v2 = 0.0;
  unsigned flags = 0;
};

struct EstimateSeries {
  std::vector<EstimateSample> samples;
  bool condition_holds = false;
  double condition_margin = 0.0;
  DifferentiatorSpec spec;
};

/// Full pipeline: smooth and differentiate the measured temperatures, map
/// them through the observability relations (levels taken from the smoothed
/// fit, not the raw samples, so channel noise does not pass straight into
/// the maps), invert the parabola, disambiguate. Estimates are clamped to
/// [0, infinity). Runs regardless of the injectivity condition;
/// condition_holds/condition_margin record it and ambiguous samples carry
/// their rule flags.
EstimateSeries reconstruct(const MeasurementSeries& m, const LumpedParameters& p,
                           const DifferentiatorSpec& spec);

/// Reconstruction error against an aligned truth series (same sampling).
/// Interior metrics only: edge-flagged samples are excluded. max_rel skips
/// samples with zero truth.
struct ErrorMetrics {
  double max_abs = 0.0;
  double max_rel = 0.0;
  double rmse = 0.0;
  std::size_t n_interior = 0;
};

ErrorMetrics error_metrics(const EstimateSeries& est, std::span<const double> truth_x1);

}  // namespace bsfgrow
