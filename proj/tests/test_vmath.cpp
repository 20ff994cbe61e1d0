#include <cmath>
#include <cstring>
#include <limits>
#include <vector>

#include "doctest.h"

#include "vlab/lane.hpp"
#include "vlab/maps.hpp"
#include "vlab/rng.hpp"
#include "vlab/skew.hpp"
#include "vlab/vmath.hpp"

using namespace vlab;

namespace {

bool same_bits(double a, double b) {
  return std::memcmp(&a, &b, sizeof a) == 0;
}

constexpr double kTwoPi = 6.283185307179586476925286766559;

} // namespace

TEST_SUITE("vmath") {

TEST_CASE("trig special values are exact") {
  CHECK(sin2pi(0.0) == 0.0);
  CHECK(sin2pi(1.0) == 0.0);
  CHECK(sin2pi(-3.0) == 0.0);
  CHECK(sin2pi(0.5) == 0.0);
  CHECK(cos2pi(0.0) == 1.0);
  CHECK(cos2pi(1.0) == 1.0);
  CHECK(cos2pi(-2.0) == 1.0);
  CHECK(cos2pi(0.5) == -1.0);
  CHECK(std::fabs(sin2pi(0.25) - 1.0) <= 1e-15);
  CHECK(std::fabs(sin2pi(0.75) + 1.0) <= 1e-15);
  CHECK(std::fabs(cos2pi(0.25)) <= 1e-15);
}

TEST_CASE("trig matches the standard library") {
  CounterRng rng(7, 1);
  for (int i = 0; i < 2000; ++i) {
    const double x = rng.uniform(-8.0, 8.0);
    // std::sin(2*pi*x) carries the rounding of the product, so the
    // comparison tolerance is dominated by ulp(2*pi*x).
    CHECK(std::fabs(sin2pi(x) - std::sin(kTwoPi * x)) <= 1e-13);
    CHECK(std::fabs(cos2pi(x) - std::cos(kTwoPi * x)) <= 1e-13);
  }
}

TEST_CASE("trig periodicity is exact on dyadic points") {
  for (int i = 0; i < 1024; ++i) {
    const double x = double(i) / 1024.0;
    CHECK(same_bits(sin2pi(x), sin2pi(x + 1.0)));
    CHECK(same_bits(sin2pi(x), sin2pi(x - 1.0)));
    CHECK(same_bits(cos2pi(x), cos2pi(x + 1.0)));
  }
}

TEST_CASE("log_abs special values") {
  const double inf = std::numeric_limits<double>::infinity();
  CHECK(log_abs(1.0) == 0.0);
  CHECK(log_abs(-1.0) == 0.0);
  CHECK(log_abs(0.0) == -inf);
  CHECK(log_abs(-0.0) == -inf);
  CHECK(log_abs(inf) == inf);
  CHECK(log_abs(-inf) == inf);
  CHECK(std::isnan(log_abs(std::numeric_limits<double>::quiet_NaN())));
  // The doubling branch of the fiber map relies on this value being the
  // correctly rounded log 2.
  CHECK(log_abs(2.0) == std::log(2.0));
}

TEST_CASE("log_abs matches std::log") {
  CounterRng rng(11, 2);
  for (int i = 0; i < 2000; ++i) {
    const double mag = std::exp(rng.uniform(-60.0, 60.0));
    const double x = (rng.below(2) == 0) ? mag : -mag;
    const double ref = std::log(std::fabs(x));
    CHECK(std::fabs(log_abs(x) - ref) <=
          1e-14 * std::max(1.0, std::fabs(ref)));
  }
  // Denormal rescale path.
  const double tiny = 5e-310;
  CHECK(std::fabs(log_abs(tiny) - std::log(tiny)) <= 1e-12);
}

TEST_CASE("array kernels match the scalar reference bitwise") {
  const std::size_t n = 1003;  // odd count exercises the SIMD tail
  std::vector<double> in(n), scalar(n), other(n);
  CounterRng rng(13, 3);
  for (std::size_t i = 0; i < n; ++i) in[i] = rng.uniform(-8.0, 8.0);

  sin2pi_n(Lane::Scalar, in.data(), scalar.data(), n);
  for (std::size_t i = 0; i < n; ++i)
    CHECK(same_bits(scalar[i], sin2pi(in[i])));

  if (lane_available(Lane::Avx2)) {
    sin2pi_n(Lane::Avx2, in.data(), other.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(other[i], scalar[i]));
    cos2pi_n(Lane::Scalar, in.data(), scalar.data(), n);
    cos2pi_n(Lane::Avx2, in.data(), other.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(other[i], scalar[i]));
    log_abs_n(Lane::Scalar, in.data(), scalar.data(), n);
    log_abs_n(Lane::Avx2, in.data(), other.data(), n);
    for (std::size_t i = 0; i < n; ++i) CHECK(same_bits(other[i], scalar[i]));
  }
}

TEST_CASE("fiber and curve kernels agree across lanes") {
  if (!lane_available(Lane::Avx2)) return;
  const DegenerateMap map = build_map(MapSpec{});
  const SkewProduct sp = make_skew(map, 16, 1e-3);
  const FiberCtx ctx = make_fiber_ctx(sp);
  const std::size_t n = 257;
  CounterRng rng(17, 4);

  std::vector<double> theta(n), x0(n);
  for (std::size_t i = 0; i < n; ++i) {
    theta[i] = rng.uniform01();
    x0[i] = rng.uniform01();
  }
  std::vector<double> shift(n, 0.0);

  auto runFiber = [&](Lane lane, std::vector<double>& x,
                      std::vector<double>& ls, std::vector<double>& lc,
                      std::vector<double>& hf) {
    x = x0;
    ls.assign(n, 0.0);
    lc.assign(n, 0.0);
    hf.assign(n, 0.0);
    for (int step = 0; step < 8; ++step)
      fiber_step_n(lane, ctx, theta.data(), x.data(), shift.data(), ls.data(),
                   lc.data(), hf.data(), n);
  };
  std::vector<double> xs, lss, lcs, hfs, xa, lsa, lca, hfa;
  runFiber(Lane::Scalar, xs, lss, lcs, hfs);
  runFiber(Lane::Avx2, xa, lsa, lca, hfa);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(same_bits(xs[i], xa[i]));
    CHECK(same_bits(lss[i], lsa[i]));
    CHECK(same_bits(lcs[i], lca[i]));
    CHECK(same_bits(hfs[i], hfa[i]));
  }

  std::vector<double> c0(n), c1(n), c2(n);
  for (std::size_t i = 0; i < n; ++i) {
    c0[i] = rng.uniform01();
    c1[i] = rng.uniform(-1e-3, 1e-3);
    c2[i] = rng.uniform(-1e-3, 1e-3);
  }
  auto runCurve = [&](Lane lane, std::vector<double>& y,
                      std::vector<double>& y1, std::vector<double>& y2) {
    y.assign(n, 0.0);
    y1.assign(n, 0.0);
    y2.assign(n, 0.0);
    curve_step_n(lane, ctx, sp.d, theta.data(), c0.data(), c1.data(),
                 c2.data(), y.data(), y1.data(), y2.data(), n);
  };
  std::vector<double> ys, y1s, y2s, ya, y1a, y2a;
  runCurve(Lane::Scalar, ys, y1s, y2s);
  runCurve(Lane::Avx2, ya, y1a, y2a);
  for (std::size_t i = 0; i < n; ++i) {
    CHECK(same_bits(ys[i], ya[i]));
    CHECK(same_bits(y1s[i], y1a[i]));
    CHECK(same_bits(y2s[i], y2a[i]));
  }
}

TEST_CASE("lane plumbing") {
  CHECK(lane_available(Lane::Scalar));
  CHECK(lane_from_name("scalar") == Lane::Scalar);
  CHECK_THROWS_AS(lane_from_name("mmx"), ConfigError);
  const Lane detected = detect_lane();
  force_lane(Lane::Scalar);
  CHECK(detect_lane() == Lane::Scalar);
  clear_lane_force();
  CHECK(detect_lane() == detected);
}

} // TEST_SUITE
