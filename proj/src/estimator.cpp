#include "bsfgrow/estimator.hpp"

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

#include "bsfgrow/errors.hpp"
#include "bsfgrow/model.hpp"
#include "bsfgrow/observability.hpp"

namespace bsfgrow {

namespace {

void check_spec(const DifferentiatorSpec& spec) {
  if (spec.window < 5 || spec.window % 2 == 0) {
    std::ostringstream os;
    os << "differentiator window must be odd and at least 5 (got " << spec.window << ")";
    throw ConfigError(os.str());
  }
  if (spec.poly_order < 2 || spec.poly_order >= spec.window) {
    std::ostringstream os;
    os << "differentiator poly_order must be in [2, window) (got " << spec.poly_order << ")";
    throw ConfigError(os.str());
  }
}

// Least-squares polynomial fit weights on the window, with offsets
// normalized to [-1, 1] for conditioning. fit_coeffs() row k carries the
// weights of the normalized k-th polynomial coefficient.
class SgKernel {
 public:
  SgKernel(int window, int order) : half_((window - 1) / 2) {
    const int w = window;
    Eigen::MatrixXd a(w, order + 1);
    for (int r = 0; r < w; ++r) {
      const double tau = static_cast<double>(r - half_) / half_;
      double pw = 1.0;
      for (int c = 0; c <= order; ++c) {
        a(r, c) = pw;
        pw *= tau;
      }
    }
    coeffs_ = (a.transpose() * a).ldlt().solve(a.transpose());
  }

  // Weight vectors of the fitted polynomial's value and first and second
  // derivative, evaluated at normalized offset tau, derivatives scaled back
  // to the sample grid spacing dt.
  void weights(double tau, double half_dt, Eigen::VectorXd* w0,
               Eigen::VectorXd* w1, Eigen::VectorXd* w2) const {
    const int order = static_cast<int>(coeffs_.rows()) - 1;
    *w0 = Eigen::VectorXd::Zero(coeffs_.cols());
    *w1 = Eigen::VectorXd::Zero(coeffs_.cols());
    *w2 = Eigen::VectorXd::Zero(coeffs_.cols());
    double pw = 1.0;  // tau^k
    for (int k = 0; k <= order; ++k) {
      *w0 += pw * coeffs_.row(k).transpose();
      pw *= tau;
    }
    pw = 1.0;  // tau^(k-1)
    for (int k = 1; k <= order; ++k) {
      *w1 += k * pw * coeffs_.row(k).transpose();
      pw *= tau;
    }
    pw = 1.0;  // tau^(k-2)
    for (int k = 2; k <= order; ++k) {
      *w2 += k * (k - 1) * pw * coeffs_.row(k).transpose();
      pw *= tau;
    }
    *w1 /= half_dt;
    *w2 /= half_dt * half_dt;
  }

  int half() const { return half_; }

 private:
  int half_;
  Eigen::MatrixXd coeffs_;
};

double uniform_dt(const std::vector<double>& t) {
  const double dt = t[1] - t[0];
  if (!(dt > 0.0)) throw ConfigError("measurement times must be strictly increasing");
  for (std::size_t i = 1; i + 1 < t.size(); ++i) {
    if (std::abs(t[i + 1] - t[i] - dt) > 1e-9 * std::max(1.0, std::abs(dt))) {
      std::ostringstream os;
      os << "measurement times must be uniformly spaced (break near t=" << t[i] << ")";
      throw ConfigError(os.str());
    }
  }
  return dt;
}

}  // namespace

DerivativeSet differentiate(const MeasurementSeries& m, const DifferentiatorSpec& spec) {
  check_spec(spec);
  const std::size_t n = m.size();
  if (n < static_cast<std::size_t>(spec.window)) {
    std::ostringstream os;
    os << "series of length " << n << " is shorter than the differentiator window "
       << spec.window;
    throw ConfigError(os.str());
  }
  const double dt = uniform_dt(m.t);

  const SgKernel kernel(spec.window, spec.poly_order);
  const int half = kernel.half();
  const double half_dt = half * dt;

  // Offsets in use: 0 for interior samples, +-1..half/half for the edge
  // windows. Precompute one weight triple per needed offset index.
  std::vector<Eigen::VectorXd> w0_at(2 * half + 1), w1_at(2 * half + 1),
      w2_at(2 * half + 1);
  for (int e = -half; e <= half; ++e) {
    kernel.weights(static_cast<double>(e) / half, half_dt, &w0_at[e + half],
                   &w1_at[e + half], &w2_at[e + half]);
  }

  DerivativeSet out;
  out.edge.assign(n, false);
  auto run_channel = [&](const std::vector<double>& v, DerivativeChannel* ch) {
    ch->d0.assign(n, 0.0);
    ch->d1.assign(n, 0.0);
    ch->d2.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      // Window start and the evaluation offset within it. Edge windows are
      // pinned to the series ends and evaluated off-center.
      std::size_t start;
      int e;
      if (i < static_cast<std::size_t>(half)) {
        start = 0;
        e = static_cast<int>(i) - half;
      } else if (i + half >= n) {
        start = n - 2 * half - 1;
        e = static_cast<int>(i - (n - 1 - half));
      } else {
        start = i - half;
        e = 0;
      }
      const Eigen::VectorXd& w0 = w0_at[e + half];
      const Eigen::VectorXd& w1 = w1_at[e + half];
      const Eigen::VectorXd& w2 = w2_at[e + half];
      double s0 = 0.0, s1 = 0.0, s2 = 0.0;
      for (int r = 0; r <= 2 * half; ++r) {
        const double y = v[start + r];
        s0 += w0[r] * y;
        s1 += w1[r] * y;
        s2 += w2[r] * y;
      }
      ch->d0[i] = s0;
      ch->d1[i] = s1;
      ch->d2[i] = s2;
    }
  };
  run_channel(m.y1, &out.y1);
  run_channel(m.y2, &out.y2);
  run_channel(m.d, &out.d);
  for (std::size_t i = 0; i < n; ++i) {
    out.edge[i] = i < static_cast<std::size_t>(half) || i + half >= n;
  }
  return out;
}

double omega1_from_measurements(double y1, double y1_dot, double y2, double d,
                                const LumpedParameters& p) {
  const double rt = temp_rate(y1, p.logan);
  return (y1_dot + p.k4 * y1 - p.k5 * y2 + p.k8 * d) / rt;
}

double omega2_from_measurements(double y1, double y1_dot, double y1_ddot,
                                double y2, double y2_dot, double d, double d_dot,
                                const LumpedParameters& p) {
  const double rt = temp_rate(y1, p.logan);
  const double rt_dot = temp_rate_derivative(y1, p.logan) * y1_dot;
  const double num1 = y1_dot + p.k4 * y1 - p.k5 * y2 + p.k8 * d;
  const double num2 = y1_ddot + p.k4 * y1_dot - p.k5 * y2_dot + p.k8 * d_dot;
  return num2 / (rt * rt) - num1 * rt_dot / (rt * rt * rt);
}

InversionResult invert_omega1(double v1, const LumpedParameters& p) {
  InversionResult res;
  if (v1 < 0.0) {
    res.candidates[0] = 0.0;
    res.n_candidates = 1;
    res.clamped_negative = true;
    return res;
  }
  const double k67 = p.k6 + p.k7;
  const double delta = k67 * k67 - 4.0 * p.k6 / p.k2 * v1;
  if (delta < 0.0) {
    res.above_vertex = true;
    return res;
  }
  if (delta == 0.0) {
    res.candidates[0] = omega1_vertex_abscissa(p);
    res.n_candidates = 1;
    return res;
  }
  const double s = std::sqrt(delta);
  // Stable quadratic roots of (k6/k2) x^2 - k67 x + v1: the larger root
  // directly, the smaller via the product identity (no cancellation).
  res.candidates[0] = 2.0 * v1 / (k67 + s);
  res.candidates[1] = 0.5 * p.k2 / p.k6 * (k67 + s);
  res.n_candidates = 2;
  return res;
}

std::string flag_tokens(unsigned flags) {
  static const std::pair<EstimateFlag, const char*> kNames[] = {
      {kFlagEdge, "edge"},
      {kFlagSingle, "single"},
      {kFlagContinuity, "continuity"},
      {kFlagOmega2Init, "omega2_init"},
      {kFlagHoldLast, "hold_last"},
      {kFlagClampNegativeV1, "clamp_negative_v1"},
      {kFlagClampAboveVertex, "clamp_above_vertex"},
  };
  std::string out;
  for (const auto& [bit, name] : kNames) {
    if (flags & bit) {
      if (!out.empty()) out += ';';
      out += name;
    }
  }
  return out;
}

DisambiguationResult disambiguate(std::span<const double> candidates, double v2,
                                  std::optional<double> previous,
                                  const LumpedParameters& p) {
  DisambiguationResult res;
  if (candidates.empty()) {
    if (!previous) {
      throw std::invalid_argument(
          "disambiguate: no candidates and no previous estimate to hold");
    }
    res.estimate = *previous;
    res.flags = kFlagHoldLast;
    res.margin = 0.0;
    return res;
  }
  if (candidates.size() == 1) {
    res.estimate = candidates[0];
    res.flags = kFlagSingle;
    res.margin = 0.0;
    return res;
  }
  if (previous) {
    const double d0 = std::abs(candidates[0] - *previous);
    const double d1 = std::abs(candidates[1] - *previous);
    res.estimate = d0 <= d1 ? candidates[0] : candidates[1];
    res.flags = kFlagContinuity;
    res.margin = std::abs(d1 - d0);
    return res;
  }
  const double r0 = std::abs(omega2(candidates[0], p) - v2);
  const double r1 = std::abs(omega2(candidates[1], p) - v2);
  res.estimate = r0 <= r1 ? candidates[0] : candidates[1];
  res.flags = kFlagOmega2Init;
  res.margin = std::abs(r1 - r0);
  return res;
}

EstimateSeries reconstruct(const MeasurementSeries& m, const LumpedParameters& p,
                           const DifferentiatorSpec& spec) {
  const DerivativeSet der = differentiate(m, spec);
  const std::size_t n = m.size();

  EstimateSeries series;
  series.spec = spec;
  series.condition_margin = observability_margin(p);
  series.condition_holds = series.condition_margin >= 0.0;
  series.samples.reserve(n);

  std::optional<double> previous;
  for (std::size_t i = 0; i < n; ++i) {
    EstimateSample s;
    s.t = m.t[i];
    // Levels come from the smoothed fit: raw-sample noise on y1/y2/d would
    // otherwise enter the maps unattenuated and dominate the estimate.
    s.v1 = omega1_from_measurements(der.y1.d0[i], der.y1.d1[i], der.y2.d0[i],
                                    der.d.d0[i], p);
    s.v2 = omega2_from_measurements(der.y1.d0[i], der.y1.d1[i], der.y1.d2[i],
                                    der.y2.d0[i], der.y2.d1[i], der.d.d0[i],
                                    der.d.d1[i], p);
    if (der.edge[i]) s.flags |= kFlagEdge;

    const InversionResult inv = invert_omega1(s.v1, p);
    if (inv.above_vertex) {
      // The level is unreachable; the closest admissible biomass is the
      // parabola vertex.
      s.x1_estimate = omega1_vertex_abscissa(p);
      s.cand_lo = s.cand_hi = s.x1_estimate;
      s.flags |= kFlagClampAboveVertex;
    } else {
      if (inv.clamped_negative) s.flags |= kFlagClampNegativeV1;
      const std::span<const double> cands(inv.candidates.data(),
                                          static_cast<std::size_t>(inv.n_candidates));
      const DisambiguationResult dis = disambiguate(cands, s.v2, previous, p);
      s.x1_estimate = dis.estimate;
      s.flags |= dis.flags;
      s.cand_lo = inv.n_candidates > 0 ? inv.candidates[0] : dis.estimate;
      s.cand_hi = inv.n_candidates > 1 ? inv.candidates[1] : s.cand_lo;
    }
    if (s.x1_estimate < 0.0) s.x1_estimate = 0.0;
    previous = s.x1_estimate;
    series.samples.push_back(s);
  }
  return series;
}

ErrorMetrics error_metrics(const EstimateSeries& est, std::span<const double> truth_x1) {
  if (est.samples.size() != truth_x1.size()) {
    std::ostringstream os;
    os << "error_metrics: series length mismatch (" << est.samples.size()
       << " estimates vs " << truth_x1.size() << " truth samples)";
    throw std::invalid_argument(os.str());
  }
  ErrorMetrics metrics;
  double sq_sum = 0.0;
  for (std::size_t i = 0; i < truth_x1.size(); ++i) {
    const EstimateSample& s = est.samples[i];
    if (s.flags & kFlagEdge) continue;
    const double err = std::abs(s.x1_estimate - truth_x1[i]);
    metrics.max_abs = std::max(metrics.max_abs, err);
    if (truth_x1[i] != 0.0) {
      metrics.max_rel = std::max(metrics.max_rel, err / std::abs(truth_x1[i]));
    }
    sq_sum += err * err;
    ++metrics.n_interior;
  }
  if (metrics.n_interior > 0) {
    metrics.rmse = std::sqrt(sq_sum / static_cast<double>(metrics.n_interior));
  }
  return metrics;
}

}  // namespace bsfgrow
