#include "bsfgrow/observability.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <sstream>
#include <stdexcept>

namespace bsfgrow {

double omega1(double x1, const LumpedParameters& p) {
  return (p.k6 * (1.0 - x1 / p.k2) + p.k7) * x1;
}

double omega2(double x1, const LumpedParameters& p) {
  return (p.k6 + p.k7 - 2.0 * p.k6 / p.k2 * x1) *
         (p.k1 - p.k3 - p.k1 / p.k2 * x1) * x1;
}

double omega1_vertex_abscissa(const LumpedParameters& p) {
  return 0.5 * (p.k6 + p.k7) * p.k2 / p.k6;
}

double omega1_vertex_value(const LumpedParameters& p) {
  const double k67 = p.k6 + p.k7;
  return 0.25 * k67 * k67 * p.k2 / p.k6;
}

double omega1_positive_root(const LumpedParameters& p) {
  return p.k2 * (1.0 + p.k7 / p.k6);
}

double observability_margin(const LumpedParameters& p) {
  return p.k7 - (1.0 - 2.0 * p.k3 / p.k1) * p.k6;
}

namespace {

// Scale of |omega2| over the analysis interval, from a fixed coarse grid.
// Used as the denominator of relative omega2 residuals; the pointwise value
// can legitimately sit at a root of the cubic, so pointwise-relative errors
// would blow up spuriously.
double omega2_scale(const LumpedParameters& p) {
  const double r = omega1_positive_root(p);
  double m = 0.0;
  constexpr int kN = 1024;
  for (int i = 0; i <= kN; ++i) {
    m = std::max(m, std::abs(omega2(r * i / kN, p)));
  }
  return std::max(m, std::numeric_limits<double>::min());
}

}  // namespace

NoninjectivityCertificate noninjective_pair(const LumpedParameters& p) {
  if (observability_margin(p) >= 0.0) {
    throw std::logic_error(
        "noninjective_pair: the injectivity condition holds, no counterexample exists");
  }
  const double k67 = p.k6 + p.k7;
  // Level at which the two parabola branches carry equal omega2.
  const double nu = 0.5 * p.k2 / p.k6 * (p.k7 + p.k6 / p.k1 * p.k3) * k67;
  const double delta = k67 * k67 - 4.0 * p.k6 / p.k2 * nu;
  if (!(delta > 0.0)) {
    throw std::runtime_error("noninjective_pair: discriminant not positive");
  }
  const double s = std::sqrt(delta);
  // Quadratic roots of (k6/k2) x^2 - k67 x + nu, in the cancellation-free
  // arrangement (the smaller root via the product identity).
  const double hi = 0.5 * p.k2 / p.k6 * (k67 + s);
  const double lo = 2.0 * nu / (k67 + s);

  NoninjectivityCertificate cert;
  cert.nu_star = nu;
  cert.delta = delta;
  cert.k67 = k67;
  cert.x1_pair = {lo, hi};

  const double w2_lo = omega2(lo, p);
  const double w2_hi = omega2(hi, p);
  cert.omega2_residual = std::abs(w2_lo - w2_hi);

  // Verify before returning: equal omega1 at the map's value scale, equal
  // omega2 at the cubic's value scale, distinct points inside the interval.
  const double w1_gap = std::abs(omega1(lo, p) - omega1(hi, p));
  const double scale1 = omega1_vertex_value(p);
  const double scale2 = omega2_scale(p);
  std::ostringstream problem;
  if (!(w1_gap <= 1e-12 * scale1)) {
    problem << "omega1 residual " << w1_gap << " exceeds 1e-12 of scale " << scale1;
  } else if (!(cert.omega2_residual <= 1e-9 * scale2)) {
    problem << "omega2 residual " << cert.omega2_residual
            << " exceeds 1e-9 of scale " << scale2;
  } else if (!(lo >= 0.0 && hi <= omega1_positive_root(p) && lo < hi)) {
    problem << "pair (" << lo << ", " << hi << ") not ordered inside the interval";
  }
  const std::string msg = problem.str();
  if (!msg.empty()) {
    throw std::runtime_error("noninjective_pair: verification failed: " + msg);
  }
  return cert;
}

ObservabilityReport check_observability(const LumpedParameters& p) {
  ObservabilityReport rep;
  rep.condition_margin = observability_margin(p);
  rep.condition_holds = rep.condition_margin >= 0.0;
  rep.x1_star = omega1_vertex_abscissa(p);
  rep.omega1_max = omega1_vertex_value(p);
  rep.omega1_roots = {0.0, omega1_positive_root(p)};
  rep.map_dimension = 2;
  if (!rep.condition_holds) rep.certificate = noninjective_pair(p);
  return rep;
}

namespace {

// Bisection solve of omega1(x) = nu on the rising branch [0, peak].
// Converges to adjacent doubles; assumes 0 <= nu <= omega1(peak).
double rising_branch_inverse(double nu, double peak, const LumpedParameters& p) {
  double lo = 0.0, hi = peak;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;
    if (omega1(mid, p) < nu) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  return 0.5 * (lo + hi);
}

}  // namespace

ScanResult injectivity_scan(const LumpedParameters& p, int n_grid, double tol,
                            double sep_frac) {
  if (n_grid < 100) {
    throw std::invalid_argument("injectivity_scan: n_grid must be at least 100");
  }
  const double r = omega1_positive_root(p);
  const int n = n_grid;
  std::vector<double> xs(n + 1), w1(n + 1), w2(n + 1);
  for (int i = 0; i <= n; ++i) {
    xs[i] = r * i / n;
    w1[i] = omega1(xs[i], p);
    w2[i] = omega2(xs[i], p);
  }
  const int imax = static_cast<int>(
      std::max_element(w1.begin(), w1.end()) - w1.begin());
  const double sep_min = sep_frac * r;
  double range2 = std::numeric_limits<double>::min();
  for (int i = 0; i <= n; ++i) range2 = std::max(range2, std::abs(w2[i]));

  // Locate the rising-branch cell holding level nu. The sampled w1 is
  // monotone only up to roundoff near the peak, so the binary search result
  // is verified and nudged. Returns -1 when no bracketing cell is found.
  auto left_cell = [&](double nu) -> int {
    if (imax < 1) return -1;
    auto begin = w1.begin();
    auto it = std::upper_bound(begin, begin + imax + 1, nu);
    int i = static_cast<int>(it - begin) - 1;
    i = std::clamp(i, 0, imax - 1);
    for (int cand = i - 2; cand <= i + 2; ++cand) {
      if (cand < 0 || cand >= imax) continue;
      if (w1[cand] <= nu && nu <= w1[cand + 1]) return cand;
    }
    return -1;
  };

  // Phase 1: walk the falling branch, interpolate the rising branch at the
  // same omega1 level, and watch the omega2 difference for sign changes.
  // Levels whose pair separation is below sep_min are the vertex
  // neighborhood, where the two pre-images merge; they are skipped.
  struct Bracket {
    int ja, jb;
  };
  std::vector<Bracket> brackets;
  int prev_j = -1;
  double prev_delta = 0.0;
  for (int j = imax + 1; j <= n; ++j) {
    const double nu = w1[j];
    const int i = left_cell(nu);
    if (i < 0) continue;
    double x_left, w2_left;
    if (w1[i + 1] == w1[i]) {
      x_left = xs[i];
      w2_left = w2[i];
    } else {
      const double f = (nu - w1[i]) / (w1[i + 1] - w1[i]);
      x_left = xs[i] + f * (xs[i + 1] - xs[i]);
      w2_left = w2[i] + f * (w2[i + 1] - w2[i]);
    }
    if (!(xs[j] - x_left > sep_min)) continue;
    const double delta = w2_left - w2[j];
    if (prev_j >= 0 && ((prev_delta < 0.0 && delta >= 0.0) ||
                        (prev_delta > 0.0 && delta <= 0.0))) {
      brackets.push_back({prev_j, j});
    }
    prev_j = j;
    prev_delta = delta;
  }

  ScanResult result;
  if (brackets.empty()) return result;

  // Phase 2: refine each sign change by bisection in the falling-branch
  // abscissa, matching the rising branch exactly at every iterate.
  const double peak = xs[imax];
  auto gfun = [&](double x_right, double* x_left_out) -> double {
    const double x_left = rising_branch_inverse(omega1(x_right, p), peak, p);
    if (x_left_out) *x_left_out = x_left;
    return omega2(x_left, p) - omega2(x_right, p);
  };

  for (const auto& br : brackets) {
    double a = xs[br.ja], b = xs[br.jb];
    double ga = gfun(a, nullptr), gb = gfun(b, nullptr);
    if (ga * gb > 0.0) {
      // Interpolation noise flipped an endpoint; look for a straddling
      // subinterval before giving up on this bracket.
      bool found = false;
      constexpr int kProbes = 32;
      double prev_x = a, prev_g = ga;
      for (int q = 1; q <= kProbes; ++q) {
        const double x = a + (b - a) * q / kProbes;
        const double g = gfun(x, nullptr);
        if (prev_g * g <= 0.0) {
          a = prev_x;
          b = x;
          ga = prev_g;
          gb = g;
          found = true;
          break;
        }
        prev_x = x;
        prev_g = g;
      }
      if (!found) continue;
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (a + b);
      if (mid <= a || mid >= b) break;
      const double gm = gfun(mid, nullptr);
      if ((ga <= 0.0) == (gm <= 0.0)) {
        a = mid;
        ga = gm;
      } else {
        b = mid;
        gb = gm;
      }
    }
    double x_left = 0.0;
    const double x_right = 0.5 * (a + b);
    const double gap = std::abs(gfun(x_right, &x_left));
    if (x_right - x_left > sep_min && gap <= tol * range2) {
      result.injective = false;
      result.colliding_pair = {x_left, x_right};
      result.omega2_gap = gap;
      return result;
    }
  }
  return result;
}

namespace {

struct Pt {
  double x, y;
};

double orient(const Pt& a, const Pt& b, const Pt& c) {
  return (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
}

bool in_box(const Pt& q, const Pt& a, const Pt& b) {
  const double pad_x = 1e-12 * (std::abs(a.x) + std::abs(b.x) + 1.0);
  const double pad_y = 1e-12 * (std::abs(a.y) + std::abs(b.y) + 1.0);
  return q.x >= std::min(a.x, b.x) - pad_x && q.x <= std::max(a.x, b.x) + pad_x &&
         q.y >= std::min(a.y, b.y) - pad_y && q.y <= std::max(a.y, b.y) + pad_y;
}

// Proper or endpoint-touching intersection of segments ab and cd. Touch
// cases are accepted only when the computed point lies inside both boxes;
// fully collinear overlaps are rejected (the traced curve has no flat
// pieces).
bool segments_intersect(const Pt& a, const Pt& b, const Pt& c, const Pt& d,
                        double* t_ab, double* t_cd) {
  const double d1 = orient(c, d, a);
  const double d2 = orient(c, d, b);
  const double d3 = orient(a, b, c);
  const double d4 = orient(a, b, d);
  if (d1 == 0.0 && d2 == 0.0 && d3 == 0.0 && d4 == 0.0) return false;
  const bool straddle_ab = (d1 <= 0.0 && d2 >= 0.0) || (d1 >= 0.0 && d2 <= 0.0);
  const bool straddle_cd = (d3 <= 0.0 && d4 >= 0.0) || (d3 >= 0.0 && d4 <= 0.0);
  if (!straddle_ab || !straddle_cd) return false;
  if (d1 == d2 || d3 == d4) return false;
  const double t = d1 / (d1 - d2);
  const double u = d3 / (d3 - d4);
  const Pt q{a.x + t * (b.x - a.x), a.y + t * (b.y - a.y)};
  if (!in_box(q, a, b) || !in_box(q, c, d)) return false;
  *t_ab = t;
  *t_cd = u;
  return true;
}

}  // namespace

CurveTrace curve_trace(const LumpedParameters& p, int n_grid) {
  if (n_grid < 100) {
    throw std::invalid_argument("curve_trace: n_grid must be at least 100");
  }
  const double r = omega1_positive_root(p);
  CurveTrace trace;
  trace.points.reserve(n_grid + 1);
  for (int i = 0; i <= n_grid; ++i) {
    const double x = r * i / n_grid;
    trace.points.push_back({x, omega1(x, p), omega2(x, p)});
  }

  // Sweep over omega1 extents: only segments overlapping on the omega1 axis
  // can intersect. Non-adjacent segment pairs only; neighbors share an
  // endpoint by construction.
  const int n_seg = n_grid;
  std::vector<int> order(n_seg);
  std::vector<double> lo1(n_seg), hi1(n_seg);
  for (int i = 0; i < n_seg; ++i) {
    order[i] = i;
    lo1[i] = std::min(trace.points[i].omega1, trace.points[i + 1].omega1);
    hi1[i] = std::max(trace.points[i].omega1, trace.points[i + 1].omega1);
  }
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return lo1[a] < lo1[b]; });

  std::vector<int> active;
  for (const int i : order) {
    std::erase_if(active, [&](int j) { return hi1[j] < lo1[i]; });
    for (const int j : active) {
      if (std::abs(i - j) <= 1) continue;
      const Pt a{trace.points[i].omega1, trace.points[i].omega2};
      const Pt b{trace.points[i + 1].omega1, trace.points[i + 1].omega2};
      const Pt c{trace.points[j].omega1, trace.points[j].omega2};
      const Pt d{trace.points[j + 1].omega1, trace.points[j + 1].omega2};
      double t = 0.0, u = 0.0;
      if (segments_intersect(a, b, c, d, &t, &u)) {
        CurveIntersection hit;
        hit.omega1 = a.x + t * (b.x - a.x);
        hit.omega2 = a.y + t * (b.y - a.y);
        hit.x1_a = trace.points[i].x1 + t * (trace.points[i + 1].x1 - trace.points[i].x1);
        hit.x1_b = trace.points[j].x1 + u * (trace.points[j + 1].x1 - trace.points[j].x1);
        trace.intersections.push_back(hit);
      }
    }
    active.push_back(i);
  }
  trace.self_intersects = !trace.intersections.empty();
  return trace;
}

RankResult local_rank_check(const State& x, const ControlInput& u,
                            const Disturbance& d, const LumpedParameters& p,
                            double fd_step, double rank_rel_tol) {
  auto hfun = [&](const State& s) -> Eigen::Vector4d {
    const Vec3<double> f = dynamics(s, u, d, p);
    return {s.x2, s.x3, f[1], f[2]};
  };

  Eigen::Matrix<double, 4, 3> jac;
  const std::array<double, 3> base = {x.x1, x.x2, x.x3};
  for (int k = 0; k < 3; ++k) {
    const double h = fd_step * std::max(1.0, std::abs(base[k]));
    State sp = x, sm = x;
    auto bump = [&](State& s, double delta) {
      if (k == 0) s.x1 += delta;
      if (k == 1) s.x2 += delta;
      if (k == 2) s.x3 += delta;
    };
    bump(sp, h);
    bump(sm, -h);
    jac.col(k) = (hfun(sp) - hfun(sm)) / (2.0 * h);
  }

  Eigen::JacobiSVD<Eigen::Matrix<double, 4, 3>> svd(jac);
  const auto& sv = svd.singularValues();
  RankResult res;
  res.singular_values = {sv[0], sv[1], sv[2]};
  res.threshold = rank_rel_tol * sv[0];
  res.rank = 0;
  for (int i = 0; i < 3; ++i) {
    if (sv[i] > res.threshold && sv[i] > 0.0) ++res.rank;
  }
  return res;
}

std::vector<SweepRow> oracle_sweep(int n, std::uint64_t seed, int n_grid,
                                   double near_frac) {
  if (n < 0) throw std::invalid_argument("oracle_sweep: n must be nonnegative");
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  std::vector<SweepRow> rows;
  rows.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    LumpedParameters p;
    double* slots[13] = {&p.k1, &p.k2, &p.k3, &p.k4,  &p.k5,  &p.k6, &p.k7,
                         &p.k8, &p.k9, &p.k10, &p.k11, &p.k12, &p.k13};
    SweepRow row;
    for (int j = 0; j < 13; ++j) {
      *slots[j] = std::pow(10.0, -2.0 + 4.0 * u01(rng));
      row.k[j] = *slots[j];
    }
    row.margin = observability_margin(p);
    row.near_threshold = std::abs(row.margin) <= near_frac * p.k6;
    row.theorem_injective = row.margin >= 0.0;
    row.scan_injective = injectivity_scan(p, n_grid).injective;
    row.curve_injective = !curve_trace(p, n_grid).self_intersects;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace bsfgrow
