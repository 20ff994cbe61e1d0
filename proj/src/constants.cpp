#include "vlab/constants.hpp"

#include <algorithm>
#include <cmath>

#include "vlab/errors.hpp"

namespace vlab {

namespace {

double override_or(const std::map<std::string, double>& ov,
                   const std::string& key, double fallback) {
  auto it = ov.find(key);
  return it == ov.end() ? fallback : it->second;
}

// Distance from the target fixed point to the forbidden window: the
// matching window for circle maps (where |h'| is exactly 2 beyond it), the
// flat window for interval maps (whose target sits inside the matching
// window, so only the flat window can be avoided).
double forbidden_distance(const DegenerateMap& m, double q) {
  if (m.spec.parity == Parity::Odd) {
    double dLeft = std::fabs(q - m.q0);
    double dRight = std::fabs((1.0 - m.q3) + q);  // wraps through 0
    if (q > m.q3) dRight = q - m.q3;
    return std::min(dLeft, dRight);
  }
  return std::fabs(q) - m.spec.innerHalfWidth;
}

// Largest delta <= deltaMax with sup|h'| / inf|h'| <= bound over
// [q - delta, q + delta], by bisection on a sampled ratio.
double ratio_window(const DegenerateMap& m, double q, double deltaMax,
                    double bound) {
  auto ratio = [&](double delta) {
    constexpr int kN = 512;
    double lo = 1e300, hi = 0.0;
    for (int i = 0; i <= kN; ++i) {
      double x = q - delta + 2.0 * delta * (static_cast<double>(i) / kN);
      double a = std::fabs(evaluate(m, x, 1));
      lo = std::min(lo, a);
      hi = std::max(hi, a);
    }
    return lo > 0.0 ? hi / lo : 1e300;
  };
  if (ratio(deltaMax) <= bound) return deltaMax;
  double a = 0.0, b = deltaMax;
  for (int it = 0; it < 80; ++it) {
    double mid = 0.5 * (a + b);
    if (ratio(mid) <= bound)
      a = mid;
    else
      b = mid;
  }
  return a;
}

} // namespace

int compute_M(double alpha) {
  if (!(alpha > 0.0) || alpha >= 1.0 / 32.0)
    throw AlphaTooLarge("no integer M satisfies 32^M alpha < 1");
  int M = 0;
  double v = alpha;  // exact: scaling by 32 is a power-of-two shift
  while (v * 32.0 < 1.0) {
    v *= 32.0;
    ++M;
  }
  return M;
}

int compute_N(const ExpansionConstants& c, double alpha) {
  if (!(alpha > 0.0)) throw PreconditionViolated("alpha must be positive");
  double ratio = c.delta0 / (c.Ccal * alpha);
  int nTilde = 0;
  if (ratio > 1.0)
    nTilde = static_cast<int>(std::ceil(std::log(ratio) / std::log(c.rho2)));
  return c.ell + std::max(0, nTilde);
}

int compute_p(const ExpansionConstants& c, double x, double xtilde,
              int order) {
  double u = std::fabs(x - xtilde);
  double uFloor = std::pow(c.alpha, 1.0 / order);
  if (!(u >= uFloor && u < c.delta1))
    throw PreconditionViolated(
        "compute_p needs alpha^(1/D) <= |x - xtilde| < delta1");
  double uD = std::pow(u, order);
  double ratio = c.delta0 / (c.Ccal * uD);
  int pTilde = 0;
  if (ratio > 1.0)
    pTilde = static_cast<int>(std::ceil(std::log(ratio) / std::log(c.rho2)));
  int p = c.ell + std::max(0, pTilde);
  int n = compute_N(c, c.alpha);
  if (p > n) throw ConstraintViolated("p <= N", "computed p exceeds N");
  return p;
}

double j_radius(const ExpansionConstants&, double alpha, int order,
                double r) {
  return std::pow(alpha, 1.0 / order) * std::exp(-r);
}

double calibrate_ccal(const DegenerateMap& map,
                      const ExpansionConstants& consts) {
  return std::ldexp(map.amplitude, map.spec.criticalOrder) + 1.0 +
         1.0 / (consts.rho2 - 1.0);
}

ExpansionConstants derive_constants(
    const DegenerateMap& map, int d, double alpha,
    const std::map<std::string, double>& overrides) {
  compute_M(alpha);  // rejects alpha outside (0, 1/32) with the 32^M message
  if (map.referenceOrbit.landingTime < 1)
    throw PreconditionViolated("map has no reference orbit");

  ExpansionConstants c;
  c.d = d;
  c.alpha = alpha;
  c.order = map.spec.criticalOrder;
  c.rho = map.referenceOrbit.multiplier;
  c.ell = map.referenceOrbit.landingTime;
  int D = c.order;

  double window = override_or(overrides, "rho_window", 5e-4);
  c.rho1 = override_or(overrides, "rho1", c.rho * (1.0 - window));
  c.rho2 = override_or(overrides, "rho2", c.rho * (1.0 + window));

  c.sigma0 = override_or(overrides, "sigma0", map.spec.slopeTarget);
  c.sigma1 = std::pow(c.rho2, 1.0 / (D + 1));
  c.sigma2 = std::min(c.sigma0, c.sigma1);

  // Fixed-point iteration for eta (the window is eta-independent here, so
  // it settles immediately; the loop keeps the definition self-consistent
  // under overrides of sigma0).
  double eta = 1.0 / 3.0;
  for (int it = 0; it < 50; ++it) {
    double next = std::log(c.sigma2) / (4.0 * std::log(32.0));
    if (std::fabs(next - eta) < 1e-15) {
      eta = next;
      break;
    }
    eta = next;
  }
  c.eta = override_or(overrides, "eta", eta);

  c.kappa = override_or(overrides, "kappa", 0.5);
  c.Ccal = override_or(overrides, "ccal", 1.0);
  c.C1 = override_or(overrides, "c1", 1.0);
  c.C2 = override_or(overrides, "c2", 1.0);
  c.C3 = override_or(overrides, "c3", 1.0);
  c.Cstar = override_or(overrides, "cstar", 1.0);
  c.deltaRatio = override_or(overrides, "delta_ratio", 0.1);

  double q = map.referenceOrbit.target;
  double avoid = forbidden_distance(map, q);
  double delta0 = ratio_window(map, q, avoid, c.rho2 / c.rho1);
  c.delta0 = override_or(overrides, "delta0", delta0);
  c.delta1 = override_or(
      overrides, "delta1",
      std::min(map.spec.innerHalfWidth, c.deltaRatio * c.delta0));

  c.bigM = compute_M(alpha);
  c.bigN = compute_N(c, alpha);
  c.bigK = 400.0 * std::exp(2.0 * (D - 1) * (D - 1));
  c.gamma1 = 2.0 * (D - 1) * (D - 1) * c.eta / std::log(8.0 * c.bigK);
  c.betaRegime = c.eta / (5.0 * (D - 1));
  c.betaFinal = (c.gamma1 / 5.0) * std::log(100.0 / 99.0);
  double logInvAlpha = std::log(1.0 / alpha);
  c.r0 = (1.0 / (D - 1)) * (1.0 / D - 2.0 * c.eta / (D - 1)) * logInvAlpha;
  c.gamma2 = c.eta * logInvAlpha / c.bigN;
  c.c = std::min(c.gamma2, std::log(c.sigma2)) / (D + 1);

  // Constraint validation, each named by its inequality.
  if (!(c.eta > 0.0 && c.eta <= 1.0 / 3.0))
    throw ConstraintViolated("0 < eta <= 1/3");
  if (!(c.rho1 > std::pow(c.rho2, 1.0 - c.eta / D)))
    throw ConstraintViolated("rho1 > rho2^(1-eta/D)");
  if (!(c.rho1 < c.rho && c.rho < c.rho2))
    throw ConstraintViolated("rho1 < rho < rho2");
  if (!(c.sigma2 > 1.0)) throw ConstraintViolated("sigma2 > 1");
  if (!(c.bigM < c.bigN)) throw ConstraintViolated("M < N");
  if (!(c.delta1 / c.delta0 <= c.deltaRatio * (1.0 + 1e-12)))
    throw ConstraintViolated("delta1/delta0 <= ratio");
  if (!(c.delta0 > 0.0)) throw ConstraintViolated("delta0 > 0");
  if (!(c.kappa > 0.0 && c.kappa < 1.0)) throw ConstraintViolated("0 < kappa < 1");
  if (!(c.r0 > 0.0)) throw ConstraintViolated("r0 > 0");
  return c;
}

std::vector<std::pair<std::string, double>> constants_fields(
    const ExpansionConstants& c) {
  return {
      {"d", static_cast<double>(c.d)},
      {"alpha", c.alpha},
      {"order", static_cast<double>(c.order)},
      {"rho", c.rho},
      {"ell", static_cast<double>(c.ell)},
      {"delta0", c.delta0},
      {"delta1", c.delta1},
      {"delta_ratio", c.deltaRatio},
      {"rho1", c.rho1},
      {"rho2", c.rho2},
      {"eta", c.eta},
      {"kappa", c.kappa},
      {"sigma0", c.sigma0},
      {"sigma1", c.sigma1},
      {"sigma2", c.sigma2},
      {"bigM", static_cast<double>(c.bigM)},
      {"bigN", static_cast<double>(c.bigN)},
      {"bigK", c.bigK},
      {"gamma1", c.gamma1},
      {"gamma2", c.gamma2},
      {"beta_regime", c.betaRegime},
      {"beta_final", c.betaFinal},
      {"r0", c.r0},
      {"c", c.c},
      {"ccal", c.Ccal},
      {"c1", c.C1},
      {"c2", c.C2},
      {"c3", c.C3},
      {"cstar", c.Cstar},
  };
}

} // namespace vlab
