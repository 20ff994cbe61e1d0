#include "vlab/maps.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <vector>

#include "vlab/detail/batch_impl.hpp"
#include "vlab/errors.hpp"

namespace vlab {

namespace {

constexpr int kGridN = 1 << 16;   // verification grid resolution per piece
constexpr double kSlack = 1e-6;   // multiplicative slack on analytic bounds
constexpr double kSlopeTol = 1e-9;

// Integer power with the same multiplication grouping as the batch kernels,
// so jets computed here agree bitwise with kernel evaluations.
double ipow(double u, int k) {
  if (k == 0) return 1.0;
  double u2 = u * u;
  switch (k) {
    case 1: return u;
    case 2: return u2;
    case 3: return u2 * u;
    case 4: return u2 * u2;
    case 5: return u2 * u2 * u;
    default: return u2 * u2 * u2;
  }
}

void validate_spec(const MapSpec& s) {
  if (s.criticalOrder < 2 || s.criticalOrder > 6)
    throw ConfigError("criticalOrder must lie in [2,6]");
  if (s.parity == Parity::Odd && s.criticalOrder % 2 == 0)
    throw ConfigError("odd parity needs an odd criticalOrder");
  if (s.parity == Parity::Even && s.criticalOrder % 2 != 0)
    throw ConfigError("even parity needs an even criticalOrder");
  if (!(s.innerHalfWidth > 0.0) || !(s.innerHalfWidth < s.outerHalfWidth))
    throw ConfigError("need 0 < innerHalfWidth < outerHalfWidth");
  if (!(s.slopeTarget > 0.0)) throw ConfigError("slopeTarget must be positive");
  if (s.parity == Parity::Odd) {
    if (!(s.outerHalfWidth < 0.5))
      throw ConfigError("odd parity needs outerHalfWidth < 1/2 so the "
                        "matching window stays clear of 0");
  } else {
    if (s.outerHalfWidth != 1.0)
      throw ConfigError("even parity fixes outerHalfWidth = 1");
    if (!(s.a0 > 1.0 && s.a0 < 2.0))
      throw ConfigError("even parity needs a0 in (1,2); calibrate it first");
  }
}

double horner(const double* c, int n, double t) {
  double p = c[n - 1];
  for (int i = n - 2; i >= 0; --i) p = p * t + c[i];
  return p;
}

// Grid-checks monotonicity and records derivative ranges of a built bridge.
void check_bridge(BridgePoly& b) {
  double s = b.hi - b.lo;
  double prev1 = 0.0, prev2 = 0.0;
  bool inc1 = false, dec1 = false, inc2 = false, dec2 = false;
  b.minD1 = std::numeric_limits<double>::infinity();
  b.maxD1 = -std::numeric_limits<double>::infinity();
  b.maxAbsD2 = 0.0;
  for (int i = 0; i <= kGridN; ++i) {
    double t = s * (static_cast<double>(i) / kGridN);
    double v1 = horner(b.d1, 5, t);
    double v2 = horner(b.d2, 4, t);
    b.minD1 = std::min(b.minD1, v1);
    b.maxD1 = std::max(b.maxD1, v1);
    b.maxAbsD2 = std::max(b.maxAbsD2, std::fabs(v2));
    if (i > 0) {
      inc1 = inc1 || v1 > prev1;
      dec1 = dec1 || v1 < prev1;
      inc2 = inc2 || v2 > prev2;
      dec2 = dec2 || v2 < prev2;
    }
    prev1 = v1;
    prev2 = v2;
  }
  b.d1Monotone = !(inc1 && dec1);
  b.d2Monotone = !(inc2 && dec2);
}

// Builds the lift pieces and bridges; no verification grid, no reference
// orbit. Bridges are built under Record so the calibration loop can probe
// candidate offsets without tripping monotonicity checks.
DegenerateMap build_pieces(const MapSpec& spec) {
  validate_spec(spec);
  DegenerateMap m;
  m.spec = spec;
  int D = spec.criticalOrder;
  double w = spec.innerHalfWidth;
  m.amplitude = solve_amplitude(D, w, spec.slopeTarget);
  double AwD = m.amplitude * ipow(w, D);
  double edge = D * m.amplitude * ipow(w, D - 1);
  double curv = D * (D - 1) * m.amplitude * ipow(w, D - 2);

  if (spec.parity == Parity::Odd) {
    double W = spec.outerHalfWidth;
    m.criticalPoint = 0.5;
    m.circleDomain = true;
    m.q0 = 0.5 - W;
    m.q1 = 0.5 - w;
    m.q2 = 0.5 + w;
    m.q3 = 0.5 + W;
    // Lift doubles outside (q0,q3); inner piece 1 + A(x-1/2)^D. Jets of the
    // adjacent pieces at each bridge end:
    m.bridgeLeft = build_bridge({2.0 * m.q0, 2.0, 0.0},
                                {1.0 - AwD, edge, -curv}, m.q0, m.q1,
                                BoundPolicy::Record);
    m.bridgeRight = build_bridge({1.0 + AwD, edge, curv},
                                 {2.0 * m.q3, 2.0, 0.0}, m.q2, m.q3,
                                 BoundPolicy::Record);
  } else {
    m.criticalPoint = 0.0;
    m.circleDomain = false;
    m.q0 = 0.0;
    m.q1 = w;
    m.q2 = 0.0;
    m.q3 = 1.0;
    // One bridge in |x|, stored relative to the offset a0: inner piece
    // contributes -A|x|^D, outer quadratic contributes -x^2.
    m.bridgeRight = build_bridge({-AwD, -edge, -curv}, {-1.0, -2.0, -2.0},
                                 m.q1, m.q3, BoundPolicy::Record);
  }
  return m;
}

struct FixedPoint {
  double x;
  double multiplier;
};

// Expanding fixed points of h on (lo, hi), by sign-change scan plus
// bisection.
std::vector<FixedPoint> find_fixed_points(const DegenerateMap& m, double lo,
                                          double hi) {
  auto g = [&](double x) { return evaluate(m, x, 0) - x; };
  std::vector<FixedPoint> out;
  constexpr int kScan = 8192;
  double prevX = lo, prevG = g(lo);
  for (int i = 1; i <= kScan; ++i) {
    double x = lo + (hi - lo) * (static_cast<double>(i) / kScan);
    double gx = g(x);
    if ((prevG < 0.0 && gx > 0.0) || (prevG > 0.0 && gx < 0.0) || gx == 0.0) {
      double a = prevX, b = x;
      double ga = prevG;
      for (int it = 0; it < 200 && b - a > 1e-16; ++it) {
        double mid = 0.5 * (a + b);
        double gm = g(mid);
        if (gm == 0.0) {
          a = b = mid;
          break;
        }
        if ((ga < 0.0) == (gm < 0.0)) {
          a = mid;
          ga = gm;
        } else {
          b = mid;
        }
      }
      double root = 0.5 * (a + b);
      double mult = std::fabs(evaluate(m, root, 1));
      if (mult > 1.0 + 1e-9 &&
          (out.empty() || std::fabs(out.back().x - root) > 1e-9))
        out.push_back({root, mult});
    }
    prevX = x;
    prevG = gx;
  }
  return out;
}

// Verification grid over the working domain plus per-bridge reports.
MapCheck run_check(const DegenerateMap& m) {
  MapCheck c;
  const MapSpec& s = m.spec;
  int D = s.criticalOrder;
  double w = s.innerHalfWidth;
  c.h2Cap = s.slopeTarget * (D - 1) / w;

  c.slopeLeft = std::fabs(evaluate_jet(m, m.q1).d1);
  c.slopeRight =
      std::fabs(evaluate_jet(m, s.parity == Parity::Odd ? m.q2 : m.q1).d1);
  c.slopesOk = std::fabs(c.slopeLeft - s.slopeTarget) <= kSlopeTol &&
               std::fabs(c.slopeRight - s.slopeTarget) <= kSlopeTol;

  std::vector<std::pair<double, double>> pieces;
  double innerLo, innerHi;
  if (s.parity == Parity::Odd) {
    pieces = {{0.0, m.q0}, {m.q0, m.q1}, {m.q1, m.q2}, {m.q2, m.q3}, {m.q3, 1.0}};
    innerLo = m.q1;
    innerHi = m.q2;
  } else {
    double xM = s.a0 + 0.03125;  // reaches the largest admissible forcing
    pieces = {{0.0, m.q1}, {m.q1, m.q3}, {m.q3, xM}};
    innerLo = 0.0;
    innerHi = m.q1;
  }
  c.maxAbsH1 = 0.0;
  c.maxAbsH2 = 0.0;
  c.minAbsH1Inner = std::numeric_limits<double>::infinity();
  c.maxAbsH1Inner = 0.0;
  for (auto [a, b] : pieces) {
    for (int i = 0; i <= kGridN; ++i) {
      double x = a + (b - a) * (static_cast<double>(i) / kGridN);
      Jet2 j = evaluate_jet(m, x);
      double a1 = std::fabs(j.d1), a2 = std::fabs(j.d2);
      c.maxAbsH1 = std::max(c.maxAbsH1, a1);
      c.maxAbsH2 = std::max(c.maxAbsH2, a2);
      if (x >= innerLo && x <= innerHi) {
        c.minAbsH1Inner = std::min(c.minAbsH1Inner, a1);
        c.maxAbsH1Inner = std::max(c.maxAbsH1Inner, a1);
      }
    }
  }
  c.h1GlobalOk = c.maxAbsH1 <= 4.0 * (1.0 + kSlack);
  c.h2GlobalOk = c.maxAbsH2 <= c.h2Cap * (1.0 + kSlack);
  c.innerRangeOk = c.maxAbsH1Inner <= s.slopeTarget * (1.0 + kSlack);

  auto report = [](const BridgePoly& b) {
    BridgeReport r;
    r.lo = b.lo;
    r.hi = b.hi;
    r.d1Monotone = b.d1Monotone;
    r.d2Monotone = b.d2Monotone;
    r.minAbsD1 = std::min(std::fabs(b.minD1), std::fabs(b.maxD1));
    r.maxAbsD1 = std::max(std::fabs(b.minD1), std::fabs(b.maxD1));
    // A sign-crossing bridge would make the min above wrong, but bridges
    // join pieces whose slopes share a sign; record zero in that case.
    if (b.minD1 < 0.0 && b.maxD1 > 0.0) r.minAbsD1 = 0.0;
    return r;
  };
  c.right = report(m.bridgeRight);
  bool rangeOk = c.right.minAbsD1 >= s.slopeTarget * (1.0 - kSlack) &&
                 c.right.maxAbsD1 <= 2.0 * (1.0 + kSlack);
  bool monoOk = c.right.d1Monotone && c.right.d2Monotone;
  if (s.parity == Parity::Odd) {
    c.left = report(m.bridgeLeft);
    rangeOk = rangeOk && c.left.minAbsD1 >= s.slopeTarget * (1.0 - kSlack) &&
              c.left.maxAbsD1 <= 2.0 * (1.0 + kSlack);
    monoOk = monoOk && c.left.d1Monotone && c.left.d2Monotone;
  }
  c.bridgeRangeOk = rangeOk;
  c.monotoneOk = monoOk;
  return c;
}

} // namespace

double solve_amplitude(int order, double halfWidth, double slopeTarget) {
  if (order < 2) throw ConfigError("order must be at least 2");
  if (!(halfWidth > 0.0 && halfWidth < 1.0))
    throw ConfigError("halfWidth must lie in (0,1)");
  if (!(slopeTarget > 0.0)) throw ConfigError("slopeTarget must be positive");
  double denom = order * ipow(halfWidth, order - 1);
  double a = slopeTarget / denom;
  if (!std::isfinite(a) || a <= 0.0)
    throw DegenerateWidth("amplitude not finite for this width");
  return a;
}

BridgePoly build_bridge(const Jet2& leftJet, const Jet2& rightJet, double lo,
                        double hi, BoundPolicy policy) {
  if (!(hi > lo)) throw ConfigError("bridge interval is degenerate");
  for (double v : {leftJet.value, leftJet.d1, leftJet.d2, rightJet.value,
                   rightJet.d1, rightJet.d2})
    if (!std::isfinite(v)) throw ConfigError("bridge jets must be finite");

  BridgePoly b;
  b.lo = lo;
  b.hi = hi;
  double s = hi - lo;
  b.c[0] = leftJet.value;
  b.c[1] = leftJet.d1;
  b.c[2] = 0.5 * leftJet.d2;
  // Remaining coefficients from the right-end jet residuals: with
  // P = c3 s^3, Q = c4 s^4, S = c5 s^5 the conditions read
  // [[1,1,1],[3,4,5],[6,12,20]] (P,Q,S) = (R, R1 s, R2 s^2).
  double R = rightJet.value - (b.c[0] + b.c[1] * s + b.c[2] * s * s);
  double R1 = rightJet.d1 - (b.c[1] + 2.0 * b.c[2] * s);
  double R2 = rightJet.d2 - 2.0 * b.c[2];
  double r1s = R1 * s;
  double r2s2 = R2 * s * s;
  double P = 0.5 * (20.0 * R - 8.0 * r1s + r2s2);
  double Q = 0.5 * (-30.0 * R + 14.0 * r1s - 2.0 * r2s2);
  double S = 0.5 * (12.0 * R - 6.0 * r1s + r2s2);
  b.c[3] = P / (s * s * s);
  b.c[4] = Q / (s * s * s * s);
  b.c[5] = S / (s * s * s * s * s);
  for (int k = 0; k < 5; ++k) b.d1[k] = (k + 1) * b.c[k + 1];
  for (int k = 0; k < 4; ++k) b.d2[k] = (k + 1) * (k + 2) * b.c[k + 2];

  check_bridge(b);
  if (policy == BoundPolicy::Enforce && !(b.d1Monotone && b.d2Monotone))
    throw MonotonicityViolated(
        "bridge derivative not monotone on the grid; widths need retuning");
  return b;
}

DegenerateMap build_map(const MapSpec& spec, BoundPolicy policy) {
  DegenerateMap m = build_pieces(spec);
  m.check = run_check(m);
  if (policy == BoundPolicy::Enforce) {
    if (!m.check.monotoneOk)
      throw MonotonicityViolated(
          "bridge derivative not monotone on the grid; widths need retuning");
    if (!(m.check.slopesOk && m.check.h1GlobalOk && m.check.h2GlobalOk &&
          m.check.innerRangeOk && m.check.bridgeRangeOk))
      throw BoundViolated("derivative bound failed on the verification grid");
  }
  try {
    m.referenceOrbit = locate_reference_orbit(m);
  } catch (const NoReferenceOrbit&) {
    if (policy == BoundPolicy::Enforce) throw;
    m.referenceOrbit = ReferenceOrbit{};
    m.referenceOrbit.landingTime = -1;  // marks an unlanded critical orbit
    m.referenceOrbit.residual = std::numeric_limits<double>::infinity();
  }
  return m;
}

FiberCtx fiber_ctx(const DegenerateMap& m) {
  FiberCtx c;
  c.parity = m.spec.parity == Parity::Odd ? 0 : 1;
  c.order = m.spec.criticalOrder;
  c.amplitude = m.amplitude;
  c.alpha = 0.0;
  c.xtilde = m.criticalPoint;
  c.q0 = m.q0;
  c.q1 = m.q1;
  c.q2 = m.q2;
  c.q3 = m.q3;
  c.a0 = m.spec.a0;
  for (int i = 0; i < 6; ++i) {
    c.cL[i] = m.bridgeLeft.c[i];
    c.cR[i] = m.bridgeRight.c[i];
  }
  for (int i = 0; i < 5; ++i) {
    c.cL1[i] = m.bridgeLeft.d1[i];
    c.cR1[i] = m.bridgeRight.d1[i];
  }
  for (int i = 0; i < 4; ++i) {
    c.cL2[i] = m.bridgeLeft.d2[i];
    c.cR2[i] = m.bridgeRight.d2[i];
  }
  return c;
}

Jet2 evaluate_jet(const DegenerateMap& m, double x) {
  if (m.circleDomain) {
    x -= std::floor(x);
    if (x >= 1.0) x = 0.0;  // floor rounding at the seam
  }
  FiberCtx c = fiber_ctx(m);
  using PS = detail::PackScalar;
  double h, h1, h2;
  detail::MapEval<PS>::jet3(c, x, h, h1, h2);
  if (m.circleDomain) {
    h -= std::floor(h);
    if (h >= 1.0) h = 0.0;
  }
  return {h, h1, h2};
}

double evaluate(const DegenerateMap& m, double x, int derivOrder) {
  Jet2 j = evaluate_jet(m, x);
  switch (derivOrder) {
    case 0: return j.value;
    case 1: return j.d1;
    case 2: return j.d2;
    default: throw ConfigError("derivOrder must be 0, 1, or 2");
  }
}

ReferenceOrbit locate_reference_orbit(const DegenerateMap& m) {
  if (m.spec.parity == Parity::Odd) {
    // h(0) = 0 with slope 2 exactly, and h(1/2) = 1 mod 1 = 0.
    return {0.0, 2.0, 1, 0.0};
  }
  double xM = m.spec.a0 + 0.04;
  std::vector<FixedPoint> fps = find_fixed_points(m, 1e-12, xM);
  if (fps.empty())
    throw NoReferenceOrbit("no expanding fixed point in the working domain");
  constexpr int kBudget = 64;
  double x = m.criticalPoint;
  for (int k = 1; k <= kBudget; ++k) {
    x = evaluate(m, x, 0);
    for (const FixedPoint& fp : fps) {
      if (std::fabs(x - fp.x) <= 1e-6) {
        ReferenceOrbit ro;
        ro.target = fp.x;
        ro.multiplier = fp.multiplier;
        ro.landingTime = k;
        ro.residual = std::fabs(x - fp.x);
        return ro;
      }
    }
  }
  throw NoReferenceOrbit(
      "critical orbit did not land on an expanding fixed point in 64 steps");
}

double calibrate_preperiodic(const MapSpec& spec, int ell, double tol,
                             double bracketLo, double bracketHi) {
  if (spec.parity != Parity::Even)
    throw PreconditionViolated("calibration applies to even-parity maps");
  if (ell < 1) throw PreconditionViolated("landing time must be positive");
  double lo = std::max(bracketLo, 1.0 + 1e-9);
  double hi = std::min(bracketHi, 2.0 - 1e-9);
  if (!(lo < hi)) throw NoBracket("empty offset bracket inside (1,2)");

  // Signed landing residual h^ell(0) - q(a), with q(a) the largest positive
  // expanding fixed point of the candidate map. NaN when no such point.
  auto residual = [&](double a) {
    MapSpec s = spec;
    s.a0 = a;
    DegenerateMap m = build_pieces(s);
    std::vector<FixedPoint> fps = find_fixed_points(m, 1e-12, a + 0.04);
    if (fps.empty()) return std::numeric_limits<double>::quiet_NaN();
    double q = fps.back().x;
    double x = 0.0;
    for (int k = 0; k < ell; ++k) x = evaluate(m, x, 0);
    return x - q;
  };

  constexpr int kScan = 64;
  double a = lo, ra = residual(lo);
  double b = 0.0, rb = 0.0;
  bool bracketed = false;
  for (int i = 1; i <= kScan; ++i) {
    double x = lo + (hi - lo) * (static_cast<double>(i) / kScan);
    double rx = residual(x);
    if (std::isfinite(ra) && std::isfinite(rx) &&
        ((ra <= 0.0) != (rx <= 0.0))) {
      b = x;
      rb = rx;
      bracketed = true;
      break;
    }
    a = x;
    ra = rx;
  }
  if (!bracketed)
    throw NoBracket("landing residual has no sign change over the bracket");
  (void)rb;

  for (int it = 0; it < 300; ++it) {
    double mid = 0.5 * (a + b);
    double rm = residual(mid);
    if (std::isfinite(rm) && std::fabs(rm) <= tol) return mid;
    if (std::isfinite(rm) && ((ra <= 0.0) == (rm <= 0.0))) {
      a = mid;
      ra = rm;
    } else {
      b = mid;
    }
    if (b - a < 1e-16) break;
  }
  double mid = 0.5 * (a + b);
  if (std::fabs(residual(mid)) <= tol) return mid;
  throw NoBracket("bisection failed to reach the landing tolerance");
}

} // namespace vlab
