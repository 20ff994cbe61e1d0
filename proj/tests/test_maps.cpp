#include <cmath>

#include "doctest.h"

#include "vlab/errors.hpp"
#include "vlab/maps.hpp"

using namespace vlab;

namespace {

MapSpec odd_spec(int order) {
  MapSpec s;
  s.parity = Parity::Odd;
  s.criticalOrder = order;
  return s;
}

MapSpec even_spec(int order, double w, double a0) {
  MapSpec s;
  s.parity = Parity::Even;
  s.criticalOrder = order;
  s.innerHalfWidth = w;
  s.outerHalfWidth = 1.0;
  s.a0 = a0;
  return s;
}

void check_coeffs(const BridgePoly& b, const double (&want)[6], double tol) {
  for (int i = 0; i < 6; ++i)
    CHECK(std::fabs(b.c[i] - want[i]) <=
          tol * std::max(1.0, std::fabs(want[i])));
}

} // namespace

TEST_SUITE("maps") {

TEST_CASE("amplitude solves slopeTarget = order * A * w^(order-1)") {
  CHECK(solve_amplitude(3, 0.1, 1.75) ==
        doctest::Approx(175.0 / 3.0).epsilon(1e-14));
  CHECK(solve_amplitude(5, 0.1, 1.75) == doctest::Approx(3500.0).epsilon(1e-14));
  CHECK(solve_amplitude(4, 0.65, 1.75) ==
        doctest::Approx(3500.0 / 2197.0).epsilon(1e-14));
  CHECK(solve_amplitude(2, 0.875, 1.75) == 1.0);
  CHECK_THROWS_AS(solve_amplitude(1, 0.1, 1.75), ConfigError);
  CHECK_THROWS_AS(solve_amplitude(3, 0.0, 1.75), ConfigError);
  CHECK_THROWS_AS(solve_amplitude(3, 0.1, 0.0), ConfigError);
}

TEST_CASE("default odd order-3 construction") {
  const DegenerateMap m = build_map(odd_spec(3));
  CHECK(m.circleDomain);
  CHECK(m.criticalPoint == 0.5);
  CHECK(m.q0 == 0.2);
  CHECK(m.q1 == 0.4);
  CHECK(m.q2 == 0.6);
  CHECK(m.q3 == 0.8);
  CHECK(m.amplitude == doctest::Approx(175.0 / 3.0).epsilon(1e-14));

  // Quintic bridge coefficients, frozen from the exact rational solution.
  const double right[6] = {127.0 / 120.0, 7.0 / 4.0,    35.0 / 2.0,
                           -575.0 / 12.0, -2125.0 / 8.0, 1875.0 / 2.0};
  const double left[6] = {2.0 / 5.0,     2.0,           0.0,
                          1375.0 / 12.0, -5375.0 / 8.0, 1875.0 / 2.0};
  check_coeffs(m.bridgeRight, right, 1e-12);
  check_coeffs(m.bridgeLeft, left, 1e-12);

  CHECK(m.check.slopesOk);
  CHECK(std::fabs(m.check.slopeLeft - 1.75) <= 1e-9);
  CHECK(std::fabs(m.check.slopeRight - 1.75) <= 1e-9);
  CHECK(m.check.h1GlobalOk);
  CHECK(m.check.maxAbsH1 <= 4.0);
  // Grid max of |h'| on the right bridge: interior peak near t = 0.0827657.
  CHECK(m.check.right.maxAbsD1 ==
        doctest::Approx(3.2796551299888).epsilon(1e-6));
  CHECK(m.check.h2GlobalOk);
  CHECK(m.check.h2Cap == doctest::Approx(7.0 * 2.0 / (4.0 * 0.1)).epsilon(1e-14));
  CHECK(m.check.maxAbsH2 <= m.check.h2Cap * (1.0 + 1e-6));
  CHECK(m.check.maxAbsH2 > 34.9);  // attained near the flat-window edges
  CHECK(m.check.innerRangeOk);

  // The odd quintic bridges provably overshoot slope 2 in the interior, so
  // the |h'| <= 2 bridge window and the monotonicity flags must read false.
  CHECK_FALSE(m.check.bridgeRangeOk);
  CHECK_FALSE(m.check.monotoneOk);
  CHECK_FALSE(m.check.right.d1Monotone);
  CHECK_THROWS_AS(build_map(odd_spec(3), BoundPolicy::Enforce),
                  MonotonicityViolated);
}

TEST_CASE("odd order-5 construction") {
  const DegenerateMap m = build_map(odd_spec(5));
  CHECK(m.amplitude == doctest::Approx(3500.0).epsilon(1e-14));
  const double right[6] = {1.035, 1.75, 35.0, -281.25, 828.125, -812.5};
  check_coeffs(m.bridgeRight, right, 1e-12);
  CHECK(m.check.slopesOk);
  CHECK(m.check.h1GlobalOk);
  CHECK(m.check.h2GlobalOk);
}

TEST_CASE("mirror symmetry of the odd lift") {
  const DegenerateMap m = build_map(odd_spec(3));
  for (int i = 1; i < 24; ++i) {
    const double u = 0.02 * double(i);  // stays inside (0, 0.48)
    const Jet2 p = evaluate_jet(m, 0.5 + u);
    const Jet2 q = evaluate_jet(m, 0.5 - u);
    // H(1/2+u) + H(1/2-u) = 2 for the lift, so the circle values sum to 1.
    CHECK(std::fabs(p.value + q.value - 1.0) <= 1e-12);
    CHECK(std::fabs(p.d1 - q.d1) <= 1e-12 * std::max(1.0, std::fabs(p.d1)));
    CHECK(std::fabs(p.d2 + q.d2) <= 1e-9 * std::max(1.0, std::fabs(p.d2)));
  }
}

TEST_CASE("evaluate_jet agrees with evaluate and central differences") {
  const DegenerateMap m = build_map(odd_spec(3));
  const double h = 1e-6;
  for (int i = 0; i < 97; ++i) {
    const double x = 0.005 + double(i) / 97.0 * 0.985;
    const Jet2 j = evaluate_jet(m, x);
    CHECK(j.value == evaluate(m, x, 0));
    CHECK(j.d1 == evaluate(m, x, 1));
    CHECK(j.d2 == evaluate(m, x, 2));
    // Skip stencils that straddle a piece boundary or the mod-1 seam.
    bool nearBreak = false;
    for (double b : {m.q0, m.q1, m.q2, m.q3})
      nearBreak = nearBreak || std::fabs(x - b) < 4.0 * h;
    const double lo = evaluate(m, x - h, 0), hi = evaluate(m, x + h, 0);
    if (!nearBreak && std::fabs(hi - lo) < 0.5) {
      const double fd1 = (hi - lo) / (2.0 * h);
      CHECK(std::fabs(fd1 - j.d1) <= 1e-4 * std::max(1.0, std::fabs(j.d1)));
    }
  }
}

TEST_CASE("odd reference orbit is the exact fixed point at 0") {
  const DegenerateMap m = build_map(odd_spec(3));
  CHECK(m.referenceOrbit.target == 0.0);
  CHECK(m.referenceOrbit.multiplier == 2.0);
  CHECK(m.referenceOrbit.landingTime == 1);
  CHECK(m.referenceOrbit.residual == 0.0);
}

TEST_CASE("even order-2 with w = 7/8 is the pure quadratic family") {
  const double a0 = 1.5436890126920764;  // frozen preperiodic offset
  const MapSpec spec = even_spec(2, 0.875, a0);
  // Inner piece, bridge, and tail are all a0 - x^2, so every Enforce check
  // passes, including bridge monotonicity.
  const DegenerateMap m = build_map(spec, BoundPolicy::Enforce);
  CHECK_FALSE(m.circleDomain);
  CHECK(m.criticalPoint == 0.0);
  CHECK(m.check.monotoneOk);
  CHECK(m.check.bridgeRangeOk);
  for (int i = 0; i <= 32; ++i) {
    const double x = -1.2 + 2.4 * double(i) / 32.0;
    CHECK(std::fabs(evaluate(m, x, 0) - (a0 - x * x)) <= 1e-12);
    CHECK(std::fabs(evaluate(m, x, 1) - (-2.0 * x)) <= 1e-12);
  }
  CHECK(m.referenceOrbit.landingTime == 3);
  CHECK(m.referenceOrbit.target ==
        doctest::Approx(0.83928675521416118).epsilon(1e-9));
  CHECK(m.referenceOrbit.multiplier ==
        doctest::Approx(1.6785735104283224).epsilon(1e-9));
}

TEST_CASE("even order-4 calibration lands the critical orbit in 3 steps") {
  MapSpec spec = even_spec(4, 0.65, 0.0);
  const double a0 = calibrate_preperiodic(spec, 3);
  CHECK(a0 == doctest::Approx(1.5485030783966294).epsilon(1e-9));
  spec.a0 = a0;
  const DegenerateMap m = build_map(spec);
  CHECK(m.amplitude == doctest::Approx(3500.0 / 2197.0).epsilon(1e-12));
  CHECK(m.referenceOrbit.landingTime == 3);
  CHECK(m.referenceOrbit.target ==
        doctest::Approx(0.8493587054072087).epsilon(1e-9));
  CHECK(m.referenceOrbit.multiplier ==
        doctest::Approx(2.0877636477492767).epsilon(1e-9));

  // Bridge coefficients relative to a0, frozen from the exact rationals.
  const double rel[6] = {-91.0 / 320.0,     -7.0 / 4.0,
                         -105.0 / 26.0,     70760.0 / 4459.0,
                         -633900.0 / 31213.0, 664000.0 / 218491.0};
  check_coeffs(m.bridgeRight, rel, 1e-10);
  CHECK(m.check.slopesOk);
  CHECK(m.check.h1GlobalOk);
  CHECK(m.check.h2GlobalOk);
}

TEST_CASE("spec validation errors") {
  MapSpec s = odd_spec(3);
  s.innerHalfWidth = 0.3;
  s.outerHalfWidth = 0.3;
  CHECK_THROWS_AS(build_map(s), ConfigError);  // needs w < W
  s = odd_spec(4);
  CHECK_THROWS_AS(build_map(s), ConfigError);  // odd parity, even order
  s = even_spec(3, 0.65, 1.5);
  CHECK_THROWS_AS(build_map(s), ConfigError);  // even parity, odd order
  s = odd_spec(7);
  CHECK_THROWS_AS(build_map(s), ConfigError);  // order out of range
  s = even_spec(4, 0.65, 0.5);
  CHECK_THROWS_AS(build_map(s), ConfigError);  // a0 outside (1,2)
  s = odd_spec(3);
  s.outerHalfWidth = 0.6;
  CHECK_THROWS_AS(build_map(s), ConfigError);  // matching window too wide
}

TEST_CASE("calibration failure throws NoBracket") {
  // The landing residual stays positive across (1.5, 1.6) at this width, so
  // the narrowed bracket has no sign change.
  const MapSpec spec = even_spec(4, 0.05, 0.0);
  CHECK_THROWS_AS(calibrate_preperiodic(spec, 3, 1e-12, 1.5, 1.6), NoBracket);
}

} // TEST_SUITE
