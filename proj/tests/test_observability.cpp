#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <vector>

#include "bsfgrow/observability.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace bsfgrow;

namespace {

LumpedParameters random_set(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  LumpedParameters p;
  for (double* k : {&p.k1, &p.k2, &p.k3, &p.k4, &p.k5, &p.k6, &p.k7, &p.k8,
                    &p.k9, &p.k10, &p.k11, &p.k12, &p.k13}) {
    *k = std::pow(10.0, -2.0 + 4.0 * u01(rng));
  }
  return p;
}

}  // namespace

TEST_CASE("omega1 parabola: roots, vertex, concavity") {
  const LumpedParameters p = testsup::reference_params();
  CHECK(omega1(0.0, p) == 0.0);
  CHECK(omega1_positive_root(p) == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(std::abs(omega1(2.0, p)) <= 1e-14);
  CHECK(omega1_vertex_abscissa(p) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(omega1_vertex_value(p) == doctest::Approx(1.0).epsilon(1e-15));

  // Concavity as a second-difference property, on random sets.
  std::mt19937_64 rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const LumpedParameters q = random_set(rng);
    const double r = omega1_positive_root(q);
    const double h = r / 128.0;
    for (double x = h; x < r - h; x += h) {
      const double second = omega1(x + h, q) - 2.0 * omega1(x, q) + omega1(x - h, q);
      CHECK(second < 0.0);
    }
    // Roots of the closed form are roots of the evaluation.
    CHECK(std::abs(omega1(r, q)) <= 1e-12 * omega1_vertex_value(q));
  }
}

TEST_CASE("vertex value agrees with a grid maximum to 1e-6 relative") {
  std::mt19937_64 rng(37);
  for (int trial = 0; trial < 100; ++trial) {
    const LumpedParameters q = random_set(rng);
    const double r = omega1_positive_root(q);
    double grid_max = 0.0;
    constexpr int kN = 10000;
    for (int i = 0; i <= kN; ++i) {
      grid_max = std::max(grid_max, omega1(r * i / kN, q));
    }
    const double vmax = omega1_vertex_value(q);
    CHECK(std::abs(vmax - grid_max) <= 1e-6 * vmax);

    // The nearby closed form (k6 + 3 k7)(k6 + k7) k2 / (4 k6) is NOT the
    // maximum for generic sets; it overshoots by 2 k7/(k6 + k7) relative.
    const double other = 0.25 * (q.k6 + 3.0 * q.k7) * (q.k6 + q.k7) * q.k2 / q.k6;
    CHECK(std::abs(other - grid_max) > 1e-6 * vmax);
  }
}

TEST_CASE("omega2 cubic vanishes exactly at its three structural roots") {
  const LumpedParameters p = testsup::reference_params();
  CHECK(omega2(0.0, p) == 0.0);
  CHECK(omega2(1.0, p) == 0.0);   // vertex abscissa: first factor cancels
  CHECK(omega2(0.75, p) == 0.0);  // growth equilibrium: second factor cancels
  CHECK(omega2(0.5, p) != 0.0);
}

TEST_CASE("condition margin on the reference and failing sets") {
  const LumpedParameters ok = testsup::reference_params();
  CHECK(observability_margin(ok) == doctest::Approx(0.5).epsilon(1e-15));

  const LumpedParameters bad = testsup::noninjective_params();
  CHECK(observability_margin(bad) == doctest::Approx(-0.1).epsilon(1e-12));

  // k3/k1 >= 1/2 makes the threshold negative; any positive k7 passes.
  LumpedParameters easy = ok;
  easy.k1 = 1.0;
  easy.k3 = 0.6;
  easy.k6 = 37.0;
  easy.k7 = 0.01;
  CHECK(observability_margin(easy) > 0.0);
  CHECK(check_observability(easy).condition_holds);
}

TEST_CASE("report carries the closed-form landmarks") {
  const ObservabilityReport rep = check_observability(testsup::reference_params());
  CHECK(rep.condition_holds);
  CHECK(rep.condition_margin == doctest::Approx(0.5).epsilon(1e-15));
  CHECK(rep.x1_star == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rep.omega1_max == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(rep.omega1_roots[0] == 0.0);
  CHECK(rep.omega1_roots[1] == doctest::Approx(2.0).epsilon(1e-15));
  CHECK(rep.map_dimension == 2);
  CHECK_FALSE(rep.certificate.has_value());
}

TEST_CASE("certificate for the worked failing set") {
  const LumpedParameters p = testsup::noninjective_params();
  const ObservabilityReport rep = check_observability(p);
  CHECK_FALSE(rep.condition_holds);
  REQUIRE(rep.certificate.has_value());
  const NoninjectivityCertificate& c = *rep.certificate;

  // Frozen from an independent evaluation:
  //   nu* = (k2 / 2 k6)(k7 + k6 k3/k1)(k6 + k7) = 0.455
  //   delta = 1.4^2 - 4 * 0.455 = 0.14
  //   pair = (0.7 -+ sqrt(0.14)/2... ) expanded below.
  CHECK(c.nu_star == doctest::Approx(0.455).epsilon(1e-12));
  CHECK(c.delta == doctest::Approx(0.14).epsilon(1e-12));
  CHECK(c.k67 == doctest::Approx(1.4).epsilon(1e-15));
  CHECK(c.x1_pair[0] == doctest::Approx(0.5129171306613028).epsilon(1e-9));
  CHECK(c.x1_pair[1] == doctest::Approx(0.8870828693386971).epsilon(1e-9));

  CHECK(omega1(c.x1_pair[0], p) == doctest::Approx(0.455).epsilon(1e-12));
  CHECK(omega1(c.x1_pair[1], p) == doctest::Approx(0.455).epsilon(1e-12));
  // Both cubic values equal 0.182 at the pair.
  CHECK(omega2(c.x1_pair[0], p) == doctest::Approx(0.182).epsilon(1e-9));
  CHECK(omega2(c.x1_pair[1], p) == doctest::Approx(0.182).epsilon(1e-9));
  CHECK(c.omega2_residual <= 1e-12);
}

TEST_CASE("certificate pair collapses toward the vertex as the margin closes") {
  LumpedParameters p = testsup::noninjective_params();
  double prev_gap = 2.0;
  for (const double k7 : {0.40, 0.45, 0.49, 0.499}) {
    p.k7 = k7;
    REQUIRE(observability_margin(p) < 0.0);
    const NoninjectivityCertificate c = noninjective_pair(p);
    const double gap = c.x1_pair[1] - c.x1_pair[0];
    CHECK(gap > 0.0);
    CHECK(gap < prev_gap);
    prev_gap = gap;
  }
}

TEST_CASE("no certificate exists when the condition holds") {
  CHECK_THROWS_AS(noninjective_pair(testsup::reference_params()), std::logic_error);
}

TEST_CASE("injectivity scan agrees with the closed-form verdicts") {
  SUBCASE("reference set is injective") {
    const ScanResult res = injectivity_scan(testsup::reference_params(), 10000);
    CHECK(res.injective);
    CHECK_FALSE(res.colliding_pair.has_value());
  }
  SUBCASE("failing set: collision near the certificate pair") {
    const ScanResult res = injectivity_scan(testsup::noninjective_params(), 10000);
    REQUIRE_FALSE(res.injective);
    REQUIRE(res.colliding_pair.has_value());
    const auto& pair = *res.colliding_pair;
    CHECK(std::abs(pair[0] - 0.5129171306613028) <= 1e-3);
    CHECK(std::abs(pair[1] - 0.8870828693386971) <= 1e-3);
  }
  SUBCASE("grid floor is enforced") {
    CHECK_THROWS_AS(injectivity_scan(testsup::reference_params(), 50),
                    std::invalid_argument);
  }
}

TEST_CASE("curve trace: points, locus, and verdict") {
  SUBCASE("reference set draws a simple curve") {
    const CurveTrace trace = curve_trace(testsup::reference_params(), 4000);
    CHECK(trace.points.size() == 4001);
    CHECK_FALSE(trace.self_intersects);
    CHECK(trace.intersections.empty());
    CHECK(trace.points.front().x1 == 0.0);
    CHECK(trace.points.back().omega1 == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("failing set crosses itself at the worked locus") {
    const CurveTrace trace = curve_trace(testsup::noninjective_params(), 10000);
    REQUIRE(trace.self_intersects);
    REQUIRE(trace.intersections.size() >= 1);
    const CurveIntersection& hit = trace.intersections.front();
    CHECK(std::abs(hit.omega1 - 0.455) <= 1e-3);
    CHECK(std::abs(hit.omega2 - 0.182) <= 1e-3);
    const double lo = std::min(hit.x1_a, hit.x1_b);
    const double hi = std::max(hit.x1_a, hit.x1_b);
    CHECK(std::abs(lo - 0.5129171306613028) <= 1e-3);
    CHECK(std::abs(hi - 0.8870828693386971) <= 1e-3);
  }
}

TEST_CASE("mini cross-validation: all three oracles agree off threshold") {
  const auto rows = oracle_sweep(200, 12345, 4000);
  REQUIRE(rows.size() == 200);
  int n_fail = 0, n_near = 0;
  for (const auto& row : rows) {
    if (row.near_threshold) {
      ++n_near;
      continue;
    }
    CAPTURE(row.k[0]);
    CAPTURE(row.margin);
    CHECK(row.agree());
    if (!row.theorem_injective) ++n_fail;
  }
  // The draw should exercise both verdicts.
  CHECK(n_fail > 10);
  CHECK(n_near < 20);
}

TEST_CASE("local rank is full away from the vertex and drops there") {
  const LumpedParameters p = testsup::reference_params();
  std::mt19937_64 rng(41);
  std::uniform_real_distribution<double> u01(0.0, 1.0);

  SUBCASE("generic states have rank 3") {
    for (int trial = 0; trial < 20; ++trial) {
      double x1 = 0.05 + 1.9 * u01(rng);
      if (std::abs(x1 - 1.0) < 0.05) x1 += 0.1;  // stay clear of the vertex
      const State x{x1, 5.0 + 40.0 * u01(rng), 5.0 + 40.0 * u01(rng)};
      const ControlInput u{u01(rng), 2.0 * u01(rng) - 1.0};
      const Disturbance d{10.0 + 20.0 * u01(rng)};
      const RankResult res = local_rank_check(x, u, d, p);
      CHECK(res.rank == 3);
    }
  }
  SUBCASE("the vertex collapses the biomass direction") {
    for (int trial = 0; trial < 10; ++trial) {
      const State x{1.0, 5.0 + 40.0 * u01(rng), 5.0 + 40.0 * u01(rng)};
      const ControlInput u{u01(rng), 0.0};
      const Disturbance d{20.0};
      const RankResult res = local_rank_check(x, u, d, p);
      CHECK(res.rank == 2);
      CHECK(res.singular_values[2] <= res.threshold);
    }
  }
}
