#include <algorithm>
#include <cmath>

#include "doctest.h"

#include "vlab/curves.hpp"
#include "vlab/errors.hpp"
#include "vlab/maps.hpp"
#include "vlab/skew.hpp"

using namespace vlab;

namespace {

const double kTau = 6.283185307179586476925286766559;

SkewProduct odd_skew(double alpha) {
  return make_skew(build_map(MapSpec{}), 16, alpha);
}

AdmissibleCurve constant_curve(double alpha, double x0) {
  CurveParams p;
  p.x0 = x0;
  return make_curve(CurveKind::Constant, alpha, p);
}

double sample_max_abs(const std::vector<double>& v) {
  double m = 0.0;
  for (double u : v) m = std::max(m, std::abs(u));
  return m;
}

} // namespace

TEST_SUITE("curves") {

TEST_CASE("partition elements have exact dyadic endpoints") {
  const PartitionElement e = partition_element(16, 1, 5);
  CHECK(e.lo == 0.3125);
  CHECK(e.hi == 0.375);
  const PartitionElement f = partition_element(16, 2, 255);
  CHECK(f.lo == 255.0 / 256.0);
  CHECK(f.hi == 1.0);
  CHECK_THROWS_AS(partition_element(16, 1, 16), IndexOutOfRange);
  CHECK_THROWS_AS(partition_element(16, 0, 0), IndexOutOfRange);
  CHECK_THROWS_AS(partition_element(1, 1, 0), ConfigError);
  CHECK_THROWS_AS(partition_element(16, 14, 0), IndexOutOfRange);
}

TEST_CASE("preimage branches are (theta + j) / d") {
  const std::vector<double> b = preimage_branches(16, 0.3125);
  REQUIRE(b.size() == 16);
  for (int j = 0; j < 16; ++j)
    CHECK(b[std::size_t(j)] == (0.3125 + double(j)) / 16.0);
  // Input angle reduces mod 1 first.
  CHECK(preimage_branches(16, 2.25)[0] == 0.25 / 16.0);
  CHECK_THROWS_AS(preimage_branches(1, 0.5), ConfigError);
}

TEST_CASE("sine seed admissibility boundary") {
  const double alpha = 1e-3;
  CurveParams p;
  p.amplitude = alpha / (kTau * kTau);  // |X''| sup hits alpha exactly
  CHECK_NOTHROW(make_curve(CurveKind::Sine, alpha, p));
  p.amplitude *= 2.0;
  CHECK_THROWS_AS(make_curve(CurveKind::Sine, alpha, p), NotAdmissible);
}

TEST_CASE("curve construction rejects bad parameters") {
  CurveParams p;
  p.gridSize = 100;  // not a power of two
  CHECK_THROWS_AS(make_curve(CurveKind::Constant, 1e-3, p), ConfigError);
  p.gridSize = 1 << 21;
  CHECK_THROWS_AS(make_curve(CurveKind::Constant, 1e-3, p), ConfigError);
  p.gridSize = 1 << 14;
  p.modes = 0;
  CHECK_THROWS_AS(make_curve(CurveKind::Random, 1e-3, p), ConfigError);
  CHECK_THROWS_AS(make_curve(CurveKind::Constant, 0.0, CurveParams{}),
                  ConfigError);
}

TEST_CASE("random seed stays inside the budget and matches curve_value") {
  const double alpha = 1e-3;
  CurveParams p;
  p.seed = 42;
  const AdmissibleCurve c = make_curve(CurveKind::Random, alpha, p);
  CHECK(sample_max_abs(c.x1) <= alpha);
  CHECK(sample_max_abs(c.x2) <= alpha);
  const double invG = 1.0 / double(c.gridSize);
  for (int i : {0, 1, 7, 4095, 16383})
    CHECK(curve_value(c, double(i) * invG) == c.x[std::size_t(i)]);
}

TEST_CASE("sampled first derivative matches central differences") {
  CurveParams p;
  p.seed = 9;
  const AdmissibleCurve c = make_curve(CurveKind::Random, 1e-3, p);
  const int G = c.gridSize;
  for (int i = 1; i < G - 1; i += 997) {
    const double fd = (c.x[std::size_t(i + 1)] - c.x[std::size_t(i - 1)]) *
                      double(G) / 2.0;
    CHECK(std::abs(fd - c.x1[std::size_t(i)]) <= 1e-9);
  }
}

TEST_CASE("one-step image over the first level-1 element") {
  const double alpha = 1e-3;
  const SkewProduct sp = odd_skew(alpha);
  const AdmissibleCurve c = constant_curve(alpha, 0.1);
  const AdmissibleCurve out = iterate_once(c, sp, partition_element(16, 1, 0));

  // Y(0) = alpha sin(0) + h(0.1) = 0.2 and Y'(0) = alpha 2pi cos(0) / 16.
  CHECK(out.x[0] == 0.2);
  CHECK(out.x1[0] ==
        doctest::Approx(alpha * kTau / 16.0).epsilon(1e-14));
  CHECK(out.x2[0] == 0.0);
  CHECK(sample_max_abs(out.x1) <= 13.0 * alpha / 15.0);
  CHECK(sample_max_abs(out.x2) <= alpha);
  CHECK(oscillation(c) == 0.0);
  CHECK(oscillation(out) <= 4.0 * oscillation(c) + 2.0 * alpha);
  CHECK(out.path.size() == 1);
}

TEST_CASE("oscillation reads circular curves through the seam") {
  const double alpha = 1e-3;
  const SkewProduct sp = odd_skew(alpha);
  // h(1/2) = 0, so the image of a constant curve at 1/2 over an element with
  // negative forcing hugs the seam from below: plain sup - inf is near 1.
  const AdmissibleCurve c = constant_curve(alpha, 0.5);
  const AdmissibleCurve out = iterate_once(c, sp, partition_element(16, 1, 8));
  const auto [mn, mx] = std::minmax_element(out.x.begin(), out.x.end());
  CHECK(*mx - *mn > 0.99);
  CHECK(oscillation(out) <= 2.0 * alpha);
  CHECK(oscillation(out) > 0.0);
}

TEST_CASE("level-2 pullback equals two level-1 pullbacks") {
  const double alpha = 1e-3;
  const SkewProduct sp = odd_skew(alpha);
  const AdmissibleCurve c = constant_curve(alpha, 0.3);
  const int d0 = 5, d1 = 12;
  const AdmissibleCurve once =
      iterate_once(iterate_once(c, sp, partition_element(16, 1, d0)), sp,
                   partition_element(16, 1, d1));
  const AdmissibleCurve comp = iterate_over_element(
      c, sp, partition_element(16, 2, std::uint64_t(d0 * 16 + d1)));
  REQUIRE(once.x.size() == comp.x.size());
  for (std::size_t i = 0; i < once.x.size(); ++i) {
    CHECK(once.x[i] == comp.x[i]);
    CHECK(once.x1[i] == comp.x1[i]);
    CHECK(once.x2[i] == comp.x2[i]);
  }
}

TEST_CASE("strip measure is exact on full and empty strips, monotone, additive") {
  const double alpha = 1e-3;
  CurveParams p;
  p.amplitude = alpha / (kTau * kTau);
  const AdmissibleCurve c = make_curve(CurveKind::Sine, alpha, p);
  const double a = p.amplitude;
  CHECK(strip_measure(c, 0.0, 1.0) == 1.0);
  CHECK(strip_measure(c, 0.25 - 2.0 * a, 0.25 + 2.0 * a) == 1.0);
  CHECK(strip_measure(c, 0.5, 0.6) == 0.0);
  const double upper = strip_measure(c, 0.25, 0.25 + 2.0 * a);
  CHECK(upper == doctest::Approx(0.5).epsilon(2e-3));
  CHECK(strip_measure(c, 0.25, 0.25 + a / 2.0) <= upper);
  const double lower = strip_measure(c, 0.25 - 2.0 * a, 0.25);
  CHECK(upper + lower == doctest::Approx(1.0).epsilon(2e-3));
  CHECK_THROWS_AS(strip_measure(c, 0.3, 0.2), ConfigError);
}

TEST_CASE("branch separation at the default parameters") {
  const SkewProduct sp = odd_skew(1e-6);
  const AdmissibleCurve c = constant_curve(1e-6, 0.25);
  const BranchSeparation bs = branch_separation(c, sp);
  REQUIRE(bs.h1.size() == 1);  // ceil(16/16)
  REQUIRE(bs.h2.size() == 1);
  CHECK(bs.h1[0] != bs.h2[0]);
  CHECK(bs.minSep >= sp.alpha / 100.0);
  // All branch images live within alpha of h(1/4), so 2 alpha is a ceiling.
  CHECK(bs.minSep <= 2.0 * sp.alpha);
}

TEST_CASE("iteration preconditions") {
  const SkewProduct sp = odd_skew(1e-6);
  const AdmissibleCurve ok = constant_curve(1e-6, 0.25);
  CHECK_THROWS_AS(iterate_once(ok, sp, partition_element(8, 1, 0)),
                  PreconditionViolated);
  CHECK_THROWS_AS(iterate_once(ok, sp, partition_element(16, 2, 0)),
                  PreconditionViolated);
  const AdmissibleCurve wide = constant_curve(1e-3, 0.25);
  CHECK_THROWS_AS(iterate_once(wide, sp, partition_element(16, 1, 0)),
                  PreconditionViolated);
  CHECK_THROWS_AS(
      iterate_over_element(ok, sp, partition_element(16, 10, 0)),
      PreconditionViolated);  // 16^10 * 2^14 overflows the exact-dyadic cap
  const AdmissibleCurve moved =
      iterate_once(ok, sp, partition_element(16, 1, 0));
  CHECK_THROWS_AS(curve_value(moved, 0.25), PreconditionViolated);
}

} // TEST_SUITE
