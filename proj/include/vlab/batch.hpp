#pragma once

#include <cstddef>

#include "vlab/lane.hpp"

namespace vlab {

// Flattened fiber-map description consumed by the batch kernels. Plain data
// only, so the scalar and SIMD translation units share one layout. The
// coefficient pointers borrow storage owned by the SkewProduct that built
// the context and stay valid only while it lives.
struct FiberCtx {
  int parity = 0;  // 0: circle fiber (odd symmetry), 1: interval fiber (even)
  int order = 3;   // flatness order D of the critical point
  double amplitude = 0.0;
  double alpha = 0.0;
  double xtilde = 0.0;  // critical point of the fiber map

  // Piece boundaries. Odd parity: q0..q3 are the four interior breakpoints
  // of the lift on [0,1). Even parity: q1 is the inner half-width and q3 the
  // start of the outer quadratic tail, both in |x|.
  double q0 = 0.0, q1 = 0.0, q2 = 0.0, q3 = 0.0;
  double a0 = 0.0;  // even parity: additive offset of the fiber map

  // Bridge polynomial jets in the local variable t (value, first and second
  // derivative coefficients, low degree first). Odd parity uses cL on
  // [q0, q1) with t = x - q0 and cR on (q2, q3) with t = x - q2. Even parity
  // uses cR on (q1, q3) with t = |x| - q1.
  double cL[6] = {}, cL1[5] = {}, cL2[4] = {};
  double cR[6] = {}, cR1[5] = {}, cR2[4] = {};

  // Forcing b(theta) = sum_k sinC[k-1] sin(2 pi k theta) + cosC[k-1] cos(..).
  const double* sinC = nullptr;
  const double* cosC = nullptr;
  int nTrig = 0;

  // Orbits passing closer than this to xtilde are flagged as critical hits.
  double guard = 0.0;
};

// One fiber step across a batch of points, fused with the vertical-exponent
// accumulation. For each i with hitFlag[i] == 0: adds
// log|dx h(x[i])| - shift[i] to the Kahan pair (logSum, logComp), then
// replaces x[i] by the image alpha * b(theta[i]) + h(x[i]) (reduced mod 1
// for circle fibers). The caller-chosen shift keeps the accumulated
// differences exactly zero on constant-derivative orbits; the running sum is
// logSum - logComp. Points within guard of the critical point get
// hitFlag[i] = 1 and stop accumulating. theta is not advanced here.
void fiber_step_n(Lane lane, const FiberCtx& ctx, const double* theta,
                  double* x, const double* shift, double* logSum,
                  double* logComp, double* hitFlag, std::size_t n);

// One curve step across a batch of graph samples. Maps the jet
// (x, x1, x2) of a curve theta -> X(theta) at base points theta[] to the jet
// of the image curve over theta' = d * theta:
//   y  = alpha b(theta) + h(x)            (mod 1 for circle fibers)
//   y1 = (alpha b'(theta) + h'(x) x1) / d
//   y2 = (alpha b''(theta) + h''(x) x1^2 + h'(x) x2) / d^2
// In-place calls (y == x etc.) are allowed.
void curve_step_n(Lane lane, const FiberCtx& ctx, int d, const double* theta,
                  const double* x, const double* x1, const double* x2,
                  double* y, double* y1, double* y2, std::size_t n);

} // namespace vlab
