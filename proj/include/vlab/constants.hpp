#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "vlab/maps.hpp"

namespace vlab {

// Every constant the expansion estimates use, derived from a built map and
// validated against the inter-constant constraints.
struct ExpansionConstants {
  int d = 16;
  double alpha = 0.0;
  int order = 3;

  double rho = 0.0;  // measured reference-orbit multiplier
  int ell = 0;       // critical-orbit landing time

  double delta0 = 0.0;      // half-width of the window J around the target
  double delta1 = 0.0;      // close-regime boundary around the critical point
  double deltaRatio = 0.1;  // enforced cap on delta1/delta0

  double rho1 = 0.0, rho2 = 0.0;  // multiplier bracketing window
  double eta = 0.0;
  double kappa = 0.5;
  double sigma0 = 0.0, sigma1 = 0.0, sigma2 = 0.0;
  int bigM = 0, bigN = 0;
  double bigK = 0.0;
  double gamma1 = 0.0;
  double gamma2 = 0.0;  // reported empirical rate, eta log(1/alpha) / N
  double betaRegime = 0.0;  // eta / (5(D-1))
  double betaFinal = 0.0;   // (gamma1/5) log(100/99)
  double r0 = 0.0;          // deep-return threshold
  double c = 0.0;           // exponent rate, min(gamma2, log sigma2)/(D+1)

  // Calibrated stand-ins for generic constants; all default to 1.
  double Ccal = 1.0, C1 = 1.0, C2 = 1.0, C3 = 1.0, Cstar = 1.0;
};

// Derives the full record. Overrides are applied by field name (plus
// "rho_window" for the half-width of the multiplier window and
// "delta_ratio" for the delta1/delta0 cap) before validation; any violated
// constraint throws ConstraintViolated naming the failing inequality.
ExpansionConstants derive_constants(
    const DegenerateMap& map, int d, double alpha,
    const std::map<std::string, double>& overrides = {});

// Largest M with 32^M alpha < 1. Throws AlphaTooLarge when alpha >= 1/32.
int compute_M(double alpha);

// N = ell + max(0, ceil(log(delta0/(Ccal alpha)) / log rho2)).
int compute_N(const ExpansionConstants& consts, double alpha);

// p = ell + max(0, ceil(log(delta0/(Ccal |x-xt|^D)) / log rho2)). Requires
// alpha^(1/D) <= |x-xt| < delta1 (PreconditionViolated otherwise) and
// asserts p <= N.
int compute_p(const ExpansionConstants& consts, double x, double xtilde,
              int order);

// Radius of the critical strip at depth r: alpha^(1/D) e^(-r).
double j_radius(const ExpansionConstants& consts, double alpha, int order,
                double r);

// Worst-case recursion constant measured from the map: 2^D A + 1 +
// 1/(rho2 - 1). Feeding it back as Ccal shortens N while keeping the
// recursion bound valid.
double calibrate_ccal(const DegenerateMap& map,
                      const ExpansionConstants& consts);

// Field list in a stable order, for reports and serialization.
std::vector<std::pair<std::string, double>> constants_fields(
    const ExpansionConstants& consts);

} // namespace vlab
