#pragma once

#include <utility>
#include <vector>

#include "vlab/maps.hpp"

namespace vlab {

// The two-dimensional map phi(theta, x) = (d theta mod 1, alpha b(theta) +
// h(x)) with trigonometric forcing b. Immutable after construction; all
// evaluation is pure and thread-safe.
struct SkewProduct {
  int d = 16;
  double alpha = 1e-6;
  DegenerateMap base;
  // b(theta) = sum_k sinCoeff[k-1] sin(2 pi k theta)
  //          + sum_k cosCoeff[k-1] cos(2 pi k theta)
  std::vector<double> sinCoeff{1.0};
  std::vector<double> cosCoeff;
  double b1Sup = 0.0;  // grid sup of |b'|
  double b2Sup = 0.0;  // grid sup of |b''|
};

struct InvariantDomain {
  bool fullCircle = false;
  double lo = 0.0, hi = 0.0;        // interval case, after the margin
  double xMinRaw = 0.0, xMaxRaw = 0.0;  // image extremes before the margin
};

struct SkewJacobian {
  double gPrime = 0.0;   // d(theta') / d(theta) = d exactly
  double dThetaF = 0.0;  // alpha b'(theta)
  double dXF = 0.0;      // h'(x)
};

struct SkewSecond {
  double dThetaThetaF = 0.0;  // alpha b''(theta)
  double dThetaXF = 0.0;      // 0 for theta-only forcing
  double dXXF = 0.0;          // h''(x)
};

// Builds the skew product over a built map with the default forcing
// sin(2 pi theta). Requires d >= 16 and alpha < 1/32 (ConfigError), and the
// forcing bounds |b'| <= 8, |b''| <= 50 (BudgetExceeded).
SkewProduct make_skew(const DegenerateMap& base, int d, double alpha);

// Replaces the forcing by the given trigonometric polynomial. Throws
// BudgetExceeded when the closeness budget fails: the coefficient distance
// from the default forcing must stay at most 1 (so the map moves by at most
// alpha in sup norm), and the forcing derivative bounds above must hold.
SkewProduct make_perturbed_skew(const SkewProduct& sp,
                                const std::vector<double>& sinCoeff,
                                const std::vector<double>& cosCoeff);

// One application. theta is reduced mod 1 on input and output.
std::pair<double, double> skew_apply(const SkewProduct& sp, double theta,
                                     double x);

// Lower-triangular derivative of one application.
SkewJacobian skew_jacobian(const SkewProduct& sp, double theta, double x);

// Second derivatives used by the curvature propagation.
SkewSecond skew_second(const SkewProduct& sp, double theta, double x);

// Odd parity: the full circle. Even parity: a margin-padded interval
// [lo, hi], verified strictly invariant on a boundary grid; throws
// NotInvariant when the self-consistent interval fails to close or the grid
// check fails.
InvariantDomain invariant_domain(const SkewProduct& sp, double margin = 1e-6);

// Fiber context wired to this skew product's forcing. Borrows the
// coefficient storage: keep sp alive while the context is in use.
FiberCtx make_fiber_ctx(const SkewProduct& sp);

} // namespace vlab
