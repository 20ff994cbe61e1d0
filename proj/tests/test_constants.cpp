#include <cmath>
#include <string>

#include "doctest.h"

#include "vlab/constants.hpp"
#include "vlab/errors.hpp"
#include "vlab/maps.hpp"

using namespace vlab;

namespace {

DegenerateMap default_map() { return build_map(MapSpec{}); }

// Hand-built record for the helper-function examples, independent of any map.
ExpansionConstants synthetic() {
  ExpansionConstants c;
  c.alpha = 1e-6;
  c.order = 3;
  c.ell = 1;
  c.rho2 = 2.001;
  c.delta0 = 0.01;
  c.delta1 = 0.1;
  c.Ccal = 1.0;
  return c;
}

std::string violated_name(const DegenerateMap& m,
                          const std::map<std::string, double>& ov) {
  try {
    derive_constants(m, 16, 1e-6, ov);
  } catch (const ConstraintViolated& e) {
    return e.name;
  }
  return "";
}

} // namespace

TEST_SUITE("constants") {

TEST_CASE("default odd order-3 record at alpha = 1e-6") {
  const DegenerateMap m = default_map();
  const ExpansionConstants c = derive_constants(m, 16, 1e-6);

  CHECK(c.d == 16);
  CHECK(c.alpha == 1e-6);
  CHECK(c.order == 3);
  CHECK(c.rho == 2.0);
  CHECK(c.ell == 1);
  CHECK(c.rho1 == doctest::Approx(1.999).epsilon(1e-15));
  CHECK(c.rho2 == doctest::Approx(2.001).epsilon(1e-15));
  CHECK(c.sigma0 == 1.75);
  CHECK(c.sigma1 == doctest::Approx(1.1893557380281812).epsilon(1e-14));
  CHECK(c.sigma2 == c.sigma1);
  CHECK(c.eta == doctest::Approx(0.012509014590545674).epsilon(1e-14));
  CHECK(std::fabs(c.eta - 0.012504) < 1e-4);
  CHECK(c.kappa == 0.5);
  CHECK(c.delta0 == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(c.delta1 == doctest::Approx(0.02).epsilon(1e-14));
  CHECK(c.bigM == 3);
  CHECK(c.bigN == 19);
  CHECK(c.bigK == doctest::Approx(1192383.1948166913).epsilon(1e-12));
  CHECK(c.gamma1 == doctest::Approx(0.006226911922171125).epsilon(1e-13));
  CHECK(c.gamma2 == doctest::Approx(0.0090957064813375205).epsilon(1e-13));
  CHECK(c.betaRegime == doctest::Approx(0.0012509014590545674).epsilon(1e-13));
  CHECK(c.betaFinal == doctest::Approx(1.2516511229598488e-05).epsilon(1e-12));
  CHECK(c.r0 == doctest::Approx(2.2161758814213393).epsilon(1e-13));
  CHECK(c.c == doctest::Approx(0.0022739266203343801).epsilon(1e-13));
  CHECK(c.Ccal == 1.0);
  CHECK(c.C1 == 1.0);
  CHECK(c.C2 == 1.0);
  CHECK(c.C3 == 1.0);
  CHECK(c.Cstar == 1.0);
}

TEST_CASE("compute_M counts exact powers of 32") {
  CHECK(compute_M(1e-3) == 1);
  CHECK(compute_M(1e-6) == 3);
  CHECK_THROWS_AS(compute_M(1.0 / 32.0), AlphaTooLarge);
  CHECK_THROWS_AS(compute_M(0.0), AlphaTooLarge);
  CHECK_THROWS_AS(compute_M(-1e-6), AlphaTooLarge);
}

TEST_CASE("compute_N examples") {
  const ExpansionConstants c = synthetic();
  CHECK(compute_N(c, 1e-6) == 15);
  CHECK(compute_N(c, 1e-3) == 5);
  CHECK(compute_N(c, 0.01) == 1);  // ratio 1: only the landing time remains
  CHECK_THROWS_AS(compute_N(c, 0.0), PreconditionViolated);
}

TEST_CASE("compute_p example and preconditions") {
  const ExpansionConstants c = synthetic();
  const double xt = 0.5;
  CHECK(compute_p(c, xt + 0.05, xt, 3) == 8);
  CHECK(compute_p(c, xt - 0.05, xt, 3) == 8);
  // Below alpha^(1/3) = 0.01 or at/above delta1 = 0.1 the regime is wrong.
  // The boundary case uses xtilde = 0 so |x - xtilde| == delta1 exactly
  // (0.5 + 0.1 - 0.5 rounds one ulp below 0.1 and would stay in range).
  CHECK_THROWS_AS(compute_p(c, xt + 0.005, xt, 3), PreconditionViolated);
  CHECK_THROWS_AS(compute_p(c, 0.1, 0.0, 3), PreconditionViolated);
  CHECK_THROWS_AS(compute_p(c, xt + 0.2, xt, 3), PreconditionViolated);
}

TEST_CASE("j_radius is alpha^(1/D) e^(-r)") {
  const ExpansionConstants c = synthetic();
  CHECK(j_radius(c, 1e-3, 3, 2.0) ==
        doctest::Approx(0.013533528323661273).epsilon(1e-15));
  CHECK(j_radius(c, 1e-6, 3, 0.0) == doctest::Approx(0.01).epsilon(1e-15));
}

TEST_CASE("calibrated recursion constant shortens N") {
  const DegenerateMap m = default_map();
  const ExpansionConstants base = derive_constants(m, 16, 1e-6);
  const double cc = calibrate_ccal(m, base);
  // 2^3 * 175/3 + 1 + 1/1.001, frozen.
  CHECK(cc == doctest::Approx(468.66566766566768).epsilon(1e-12));
  const ExpansionConstants tuned =
      derive_constants(m, 16, 1e-6, {{"ccal", cc}});
  CHECK(tuned.Ccal == cc);
  CHECK(tuned.bigN == 10);
  CHECK(tuned.bigN < base.bigN);
}

TEST_CASE("constraint violations name the failing inequality") {
  const DegenerateMap m = default_map();
  CHECK(violated_name(m, {{"eta", 0.4}}) == "0 < eta <= 1/3");
  CHECK(violated_name(m, {{"rho1", 2.1}}) == "rho1 < rho < rho2");
  CHECK(violated_name(m, {{"delta1", 0.1}}) == "delta1/delta0 <= ratio");
  CHECK(violated_name(m, {{"sigma0", 0.9}, {"eta", 0.01}}) == "sigma2 > 1");
  CHECK(violated_name(m, {{"kappa", 1.5}}) == "0 < kappa < 1");
  CHECK(violated_name(m, {}) == "");  // defaults satisfy every constraint
}

TEST_CASE("alpha outside (0, 1/32) is rejected up front") {
  const DegenerateMap m = default_map();
  CHECK_THROWS_AS(derive_constants(m, 16, 0.05), AlphaTooLarge);
  CHECK_THROWS_AS(derive_constants(m, 16, 1.0 / 32.0), AlphaTooLarge);
}

TEST_CASE("field list is stable and complete") {
  const DegenerateMap m = default_map();
  const ExpansionConstants c = derive_constants(m, 16, 1e-6);
  const auto fields = constants_fields(c);
  REQUIRE(fields.size() == 29);
  CHECK(fields.front().first == "d");
  CHECK(fields.front().second == 16.0);
  CHECK(fields.back().first == "cstar");
  CHECK(fields[1].first == "alpha");
  CHECK(fields[9].first == "rho2");
  CHECK(fields[9].second == c.rho2);
  CHECK(fields[16].first == "bigN");
  CHECK(fields[16].second == 19.0);
}

} // TEST_SUITE
