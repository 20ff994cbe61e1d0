#pragma once

#include <cstddef>
#include <cstdint>

#include "vlab/batch.hpp"
#include "vlab/detail/packs.hpp"
#include "vlab/detail/vmath_impl.hpp"

namespace vlab::detail {

inline constexpr std::uint64_t kSignBit = 0x8000000000000000ULL;

// Piecewise fiber-map jets, pack templated. Every piece is evaluated and the
// result selected by blends, so the scalar and SIMD instantiations compute
// the identical expression per element.
template <class P>
struct MapEval {
  using pd = typename P::pd;

  static inline pd horner6(const double* c, pd t) {
    pd p = P::set1(c[5]);
    for (int i = 4; i >= 0; --i) p = P::fma(p, t, P::set1(c[i]));
    return p;
  }
  static inline pd horner5(const double* c, pd t) {
    pd p = P::set1(c[4]);
    for (int i = 3; i >= 0; --i) p = P::fma(p, t, P::set1(c[i]));
    return p;
  }
  static inline pd horner4(const double* c, pd t) {
    pd p = P::set1(c[3]);
    for (int i = 2; i >= 0; --i) p = P::fma(p, t, P::set1(c[i]));
    return p;
  }

  // u^k for k in 1..6, exponent uniform across the batch.
  static inline pd pow_int(pd u, int k) {
    pd u2 = P::mul(u, u);
    switch (k) {
      case 1: return u;
      case 2: return u2;
      case 3: return P::mul(u2, u);
      case 4: return P::mul(u2, u2);
      case 5: return P::mul(P::mul(u2, u2), u);
      default: return P::mul(P::mul(u2, u2), u2);
    }
  }

  // Jet of the fiber map h at x: value, h', h''. Odd parity returns the lift
  // value (callers reduce mod 1 after adding the forcing term).
  static inline void jet3(const FiberCtx& c, pd x, pd& h, pd& h1, pd& h2) {
    int D = c.order;
    if (c.parity == 0) {
      // Circle fiber. Pieces on [0,1): doubling outside (q0,q3), left bridge
      // on [q0,q1), inner 1 + A (x - 1/2)^D on [q1,q2], right bridge on
      // (q2,q3).
      pd hOut = P::add(x, x);
      pd tL = P::sub(x, P::set1(c.q0));
      pd hL = horner6(c.cL, tL);
      pd hL1 = horner5(c.cL1, tL);
      pd hL2 = horner4(c.cL2, tL);
      pd u = P::sub(x, P::set1(0.5));
      pd hI = P::fma(P::set1(c.amplitude), pow_int(u, D), P::set1(1.0));
      pd hI1 = P::mul(P::set1(static_cast<double>(D) * c.amplitude),
                      pow_int(u, D - 1));
      pd hI2 =
          P::mul(P::set1(static_cast<double>(D) * (D - 1) * c.amplitude),
                 D >= 3 ? pow_int(u, D - 2) : P::set1(1.0));
      pd tR = P::sub(x, P::set1(c.q2));
      pd hR = horner6(c.cR, tR);
      pd hR1 = horner5(c.cR1, tR);
      pd hR2 = horner4(c.cR2, tR);

      auto mL = P::mand(P::cmp_ge(x, P::set1(c.q0)), P::cmp_lt(x, P::set1(c.q1)));
      auto mI = P::mand(P::cmp_ge(x, P::set1(c.q1)), P::cmp_le(x, P::set1(c.q2)));
      auto mR = P::mand(P::cmp_gt(x, P::set1(c.q2)), P::cmp_lt(x, P::set1(c.q3)));

      h = hOut;
      h = P::blend(mL, hL, h);
      h = P::blend(mI, hI, h);
      h = P::blend(mR, hR, h);
      h1 = P::set1(2.0);
      h1 = P::blend(mL, hL1, h1);
      h1 = P::blend(mI, hI1, h1);
      h1 = P::blend(mR, hR1, h1);
      h2 = P::set1(0.0);
      h2 = P::blend(mL, hL2, h2);
      h2 = P::blend(mI, hI2, h2);
      h2 = P::blend(mR, hR2, h2);
    } else {
      // Interval fiber, h even in x. Pieces in ax = |x|: inner
      // a0 - A ax^D on [0,q1], bridge on (q1,q3), quadratic a0 - ax^2
      // beyond. s1 below is h' for x > 0; the sign bit of x flips it.
      pd sign = P::castd(P::and_u(P::castu(x), P::set1_u(kSignBit)));
      pd ax = P::abs_(x);
      pd hI = P::fma(P::set1(-c.amplitude), pow_int(ax, D), P::set1(c.a0));
      pd sI = P::mul(P::set1(-static_cast<double>(D) * c.amplitude),
                     pow_int(ax, D - 1));
      pd hI2 =
          P::mul(P::set1(-static_cast<double>(D) * (D - 1) * c.amplitude),
                 D >= 3 ? pow_int(ax, D - 2) : P::set1(1.0));
      pd tB = P::sub(ax, P::set1(c.q1));
      pd hB = P::add(P::set1(c.a0), horner6(c.cR, tB));
      pd sB = horner5(c.cR1, tB);
      pd hB2 = horner4(c.cR2, tB);
      pd hQ = P::fma(P::sub(P::set1(0.0), ax), ax, P::set1(c.a0));
      pd sQ = P::mul(P::set1(-2.0), ax);
      pd hQ2 = P::set1(-2.0);

      auto mB = P::mand(P::cmp_gt(ax, P::set1(c.q1)), P::cmp_lt(ax, P::set1(c.q3)));
      auto mQ = P::cmp_ge(ax, P::set1(c.q3));

      h = hI;
      h = P::blend(mB, hB, h);
      h = P::blend(mQ, hQ, h);
      pd s1 = sI;
      s1 = P::blend(mB, sB, s1);
      s1 = P::blend(mQ, sQ, s1);
      h1 = P::castd(P::xor_u(P::castu(s1), P::castu(sign)));
      h2 = hI2;
      h2 = P::blend(mB, hB2, h2);
      h2 = P::blend(mQ, hQ2, h2);
    }
  }

  static inline void jet2(const FiberCtx& c, pd x, pd& h, pd& h1) {
    pd h2;
    jet3(c, x, h, h1, h2);
  }

  // Forcing jets. Coefficient skips branch on host scalars, identically for
  // every lane.
  static inline pd forcing(const FiberCtx& c, pd th) {
    pd b = P::set1(0.0);
    for (int k = 0; k < c.nTrig; ++k) {
      pd ang = P::mul(th, P::set1(static_cast<double>(k + 1)));
      if (c.sinC[k] != 0.0)
        b = P::fma(P::set1(c.sinC[k]), sin2pi_core<P>(ang), b);
      if (c.cosC[k] != 0.0)
        b = P::fma(P::set1(c.cosC[k]), cos2pi_core<P>(ang), b);
    }
    return b;
  }

  static inline void forcing_jet3(const FiberCtx& c, pd th, pd& b, pd& b1,
                                  pd& b2) {
    b = P::set1(0.0);
    b1 = P::set1(0.0);
    b2 = P::set1(0.0);
    for (int k = 0; k < c.nTrig; ++k) {
      double wk = kTwoPi * (k + 1);
      pd ang = P::mul(th, P::set1(static_cast<double>(k + 1)));
      pd s, cs;
      s = sin2pi_core<P>(ang);
      cs = cos2pi_core<P>(ang);
      if (c.sinC[k] != 0.0) {
        b = P::fma(P::set1(c.sinC[k]), s, b);
        b1 = P::fma(P::set1(c.sinC[k] * wk), cs, b1);
        b2 = P::fma(P::set1(-c.sinC[k] * wk * wk), s, b2);
      }
      if (c.cosC[k] != 0.0) {
        b = P::fma(P::set1(c.cosC[k]), cs, b);
        b1 = P::fma(P::set1(-c.cosC[k] * wk), s, b1);
        b2 = P::fma(P::set1(-c.cosC[k] * wk * wk), cs, b2);
      }
    }
  }
};

// One fused orbit step over a span whose length is a multiple of P::width.
template <class P>
inline void fiber_step_span(const FiberCtx& c, const double* theta, double* x,
                            const double* shift, double* logSum,
                            double* logComp, double* hitFlag, std::size_t n) {
  using pd = typename P::pd;
  for (std::size_t i = 0; i < n; i += P::width) {
    pd th = P::load(theta + i);
    pd xv = P::load(x + i);
    pd b = MapEval<P>::forcing(c, th);
    pd h, h1;
    MapEval<P>::jet2(c, xv, h, h1);

    pd flag = P::load(hitFlag + i);
    pd dist = P::abs_(P::sub(xv, P::set1(c.xtilde)));
    auto hit = P::cmp_lt(dist, P::set1(c.guard));
    flag = P::max_(flag, P::blend(hit, P::set1(1.0), P::set1(0.0)));
    P::store(hitFlag + i, flag);

    pd la = P::sub(log_abs_core<P>(h1), P::load(shift + i));
    auto active = P::cmp_lt(flag, P::set1(0.5));
    la = P::blend(active, la, P::set1(0.0));
    pd s = P::load(logSum + i);
    pd comp = P::load(logComp + i);
    pd y = P::sub(la, comp);
    pd t = P::add(s, y);
    comp = P::sub(P::sub(t, s), y);
    P::store(logSum + i, t);
    P::store(logComp + i, comp);

    pd f = P::fma(P::set1(c.alpha), b, h);
    if (c.parity == 0) f = P::sub(f, P::floor_(f));
    P::store(x + i, f);
  }
}

// One curve step over a span whose length is a multiple of P::width.
template <class P>
inline void curve_step_span(const FiberCtx& c, int d, const double* theta,
                            const double* x, const double* x1,
                            const double* x2, double* y, double* y1,
                            double* y2, std::size_t n) {
  using pd = typename P::pd;
  pd dv = P::set1(static_cast<double>(d));
  pd d2v = P::set1(static_cast<double>(d) * static_cast<double>(d));
  for (std::size_t i = 0; i < n; i += P::width) {
    pd th = P::load(theta + i);
    pd xv = P::load(x + i);
    pd xp = P::load(x1 + i);
    pd xpp = P::load(x2 + i);
    pd b, b1, b2;
    MapEval<P>::forcing_jet3(c, th, b, b1, b2);
    pd h, h1, h2;
    MapEval<P>::jet3(c, xv, h, h1, h2);

    pd f = P::fma(P::set1(c.alpha), b, h);
    if (c.parity == 0) f = P::sub(f, P::floor_(f));
    pd num1 = P::fma(h1, xp, P::mul(P::set1(c.alpha), b1));
    pd num2 = P::fma(h2, P::mul(xp, xp),
                     P::fma(h1, xpp, P::mul(P::set1(c.alpha), b2)));
    P::store(y + i, f);
    P::store(y1 + i, P::div(num1, dv));
    P::store(y2 + i, P::div(num2, d2v));
  }
}

} // namespace vlab::detail
