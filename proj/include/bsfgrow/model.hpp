#pragma once

#include <Eigen/Core>
#include <cmath>

#include "bsfgrow/params.hpp"

namespace bsfgrow {

template <typename Scalar>
using Vec3 = Eigen::Matrix<Scalar, 3, 1>;

/// System state. x1 lives in [0, k2] under the flow; the temperatures are
/// unconstrained.
template <typename Scalar = double>
struct StateT {
  Scalar x1{};  ///< dry biomass per larva [mg]
  Scalar x2{};  ///< medium temperature [degC]
  Scalar x3{};  ///< chamber air temperature [degC]

  Vec3<Scalar> vector() const { return Vec3<Scalar>(x1, x2, x3); }
  static StateT from_vector(const Vec3<Scalar>& v) { return {v[0], v[1], v[2]}; }
};
using State = StateT<double>;

template <typename Scalar = double>
struct ControlInputT {
  Scalar u1{};  ///< ventilator command, nonnegative
  Scalar u2{};  ///< heater/cooler command
};
using ControlInput = ControlInputT<double>;

template <typename Scalar = double>
struct DisturbanceT {
  Scalar d{};  ///< outside temperature [degC]
};
using Disturbance = DisturbanceT<double>;

/// Measured outputs: both temperatures, biomass unmeasured.
template <typename Scalar = double>
struct OutputT {
  Scalar y1{};  ///< = x2
  Scalar y2{};  ///< = x3
};
using Output = OutputT<double>;

/// Temperature response of larval growth. Strictly positive for finite
/// temperature, unimodal, bounded by k_rmaxT.
template <typename Scalar>
Scalar temp_rate(Scalar t_med, const LoganParameters& lg) {
  using std::exp;
  const Scalar low = lg.k_gamma * exp(-lg.k_rhoT * (t_med - lg.k_Tbase));
  const Scalar high = exp(-(lg.k_Tmax - t_med) / lg.k_DeltaT);
  return lg.k_rmaxT / (Scalar(1) + low + high);
}

/// d temp_rate / d t_med, in closed form.
template <typename Scalar>
Scalar temp_rate_derivative(Scalar t_med, const LoganParameters& lg) {
  using std::exp;
  const Scalar low = lg.k_gamma * exp(-lg.k_rhoT * (t_med - lg.k_Tbase));
  const Scalar high = exp(-(lg.k_Tmax - t_med) / lg.k_DeltaT);
  const Scalar den = Scalar(1) + low + high;
  const Scalar dden = -lg.k_rhoT * low + high / lg.k_DeltaT;
  return -lg.k_rmaxT * dden / (den * den);
}

/// Temperature-driven maintenance rate, normalized to [0, 1).
template <typename Scalar>
Scalar maint_rate(Scalar t_med, const LumpedParameters& p) {
  return temp_rate(t_med, p.logan) / p.logan.k_rmaxT;
}

/// Assimilation rate with logistic biomass saturation; equals maint_rate at
/// x1 = 0 and vanishes at x1 = k2.
template <typename Scalar>
Scalar assim_rate(Scalar x1, Scalar t_med, const LumpedParameters& p) {
  return (Scalar(1) - x1 / p.k2) * maint_rate(t_med, p);
}

/// Right-hand side of the three-state model:
///   x1' = (k1 (1 - x1/k2) - k3) r(x2) x1
///   x2' = -k4 x2 + k5 x3 + (k6 (1 - x1/k2) + k7) r(x2) x1 - k8 d
///   x3' = k9 x2 - k10 x3 + k11 u2 - k12 x3 u1 + k13 d + k12 d u1
/// with r the temperature response above.
template <typename Scalar>
Vec3<Scalar> dynamics(const StateT<Scalar>& x, const ControlInputT<Scalar>& u,
                      const DisturbanceT<Scalar>& d, const LumpedParameters& p) {
  const Scalar rt = temp_rate(x.x2, p.logan);
  const Scalar depletion = Scalar(1) - x.x1 / p.k2;
  Vec3<Scalar> dx;
  dx[0] = (p.k1 * depletion - p.k3) * rt * x.x1;
  dx[1] = -p.k4 * x.x2 + p.k5 * x.x3 +
          (p.k6 * depletion + p.k7) * rt * x.x1 - p.k8 * d.d;
  dx[2] = p.k9 * x.x2 - p.k10 * x.x3 + p.k11 * u.u2 - p.k12 * x.x3 * u.u1 +
          p.k13 * d.d + p.k12 * d.d * u.u1;
  return dx;
}

template <typename Scalar>
OutputT<Scalar> output(const StateT<Scalar>& x) {
  return {x.x2, x.x3};
}

/// Analytic state Jacobian of dynamics() at (x, u, d).
inline Eigen::Matrix3d jacobian_x(const State& x, const ControlInput& u,
                                  const Disturbance& /*d*/,
                                  const LumpedParameters& p) {
  const double rt = temp_rate(x.x2, p.logan);
  const double drt = temp_rate_derivative(x.x2, p.logan);
  const double depletion = 1.0 - x.x1 / p.k2;
  Eigen::Matrix3d j;
  j(0, 0) = (p.k1 - p.k3 - 2.0 * p.k1 / p.k2 * x.x1) * rt;
  j(0, 1) = (p.k1 * depletion - p.k3) * x.x1 * drt;
  j(0, 2) = 0.0;
  j(1, 0) = (p.k6 + p.k7 - 2.0 * p.k6 / p.k2 * x.x1) * rt;
  j(1, 1) = -p.k4 + (p.k6 * depletion + p.k7) * x.x1 * drt;
  j(1, 2) = p.k5;
  j(2, 0) = 0.0;
  j(2, 1) = p.k9;
  j(2, 2) = -p.k10 - p.k12 * u.u1;
  return j;
}

}  // namespace bsfgrow
