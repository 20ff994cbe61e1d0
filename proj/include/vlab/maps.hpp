#pragma once

#include "vlab/batch.hpp"

namespace vlab {

enum class Parity { Odd, Even };

// Grid checks either throw on a violated bound (Enforce) or store the
// outcome in MapCheck / BridgePoly flags for the caller to inspect (Record).
enum class BoundPolicy { Record, Enforce };

struct MapSpec {
  Parity parity = Parity::Odd;
  int criticalOrder = 3;        // flatness order D at the critical point
  double innerHalfWidth = 0.1;  // w: half-width of the flat window
  double outerHalfWidth = 0.3;  // half-width of the matching window; 1 for even parity
  double a0 = 0.0;              // even parity: additive offset, in (1,2)
  double slopeTarget = 1.75;    // |h'| at the edges of the flat window
};

struct Jet2 {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
};

// Quintic bridge piece in the local variable t = x - lo (odd parity) or
// t = |x| - lo (even parity, stored relative to the offset a0).
struct BridgePoly {
  double lo = 0.0, hi = 0.0;
  double c[6] = {};   // value coefficients, low degree first
  double d1[5] = {};  // first-derivative coefficients
  double d2[4] = {};  // second-derivative coefficients
  bool d1Monotone = false;  // grid-checked: h' single-signed slope across t
  bool d2Monotone = false;
  double minD1 = 0.0, maxD1 = 0.0;  // grid range of h' on the bridge
  double maxAbsD2 = 0.0;
};

struct ReferenceOrbit {
  double target = 0.0;      // expanding fixed point the critical orbit lands on
  double multiplier = 0.0;  // |h'(target)|
  int landingTime = 0;      // steps from the critical point to the target
  double residual = 0.0;    // landing distance before refinement
};

struct BridgeReport {
  double lo = 0.0, hi = 0.0;
  bool d1Monotone = false;
  bool d2Monotone = false;
  double minAbsD1 = 0.0, maxAbsD1 = 0.0;
};

// Outcome of the construction-time grid verification (2^16 points per piece).
struct MapCheck {
  double slopeLeft = 0.0;   // |h'| at the two edges of the flat window
  double slopeRight = 0.0;
  double maxAbsH1 = 0.0;    // grid max of |h'| over the working domain
  double maxAbsH2 = 0.0;
  double h2Cap = 0.0;       // 7(D-1)/(4w), the analytic second-derivative cap
  double minAbsH1Inner = 0.0, maxAbsH1Inner = 0.0;  // |h'| range on the flat window
  bool slopesOk = false;      // edge slopes match slopeTarget within 1e-9
  bool h1GlobalOk = false;    // maxAbsH1 <= 4
  bool h2GlobalOk = false;    // maxAbsH2 <= h2Cap * (1 + 1e-6)
  bool innerRangeOk = false;  // |h'| <= slopeTarget on the flat window
  bool bridgeRangeOk = false; // slopeTarget <= |h'| <= 2 on the bridges
  bool monotoneOk = false;    // h' and h'' monotone on every bridge
  BridgeReport left, right;   // even parity populates only right (in |x|)
};

// Immutable after construction; evaluation is pure and thread-safe.
struct DegenerateMap {
  MapSpec spec;
  double amplitude = 0.0;
  double criticalPoint = 0.0;
  // Piece boundaries. Odd parity: breakpoints of the lift on [0,1).
  // Even parity: q1 = innerHalfWidth and q3 = 1, both in |x|.
  double q0 = 0.0, q1 = 0.0, q2 = 0.0, q3 = 0.0;
  BridgePoly bridgeLeft, bridgeRight;
  bool circleDomain = true;
  ReferenceOrbit referenceOrbit;
  MapCheck check;
};

// A = slopeTarget / (order * halfWidth^(order-1)). Throws ConfigError on
// invalid inputs, DegenerateWidth when the result is not a positive finite
// number.
double solve_amplitude(int order, double halfWidth, double slopeTarget);

// Unique quintic matching value/d1/d2 at both ends of [lo, hi]. Monotonicity
// of its first and second derivative is grid-checked; under Enforce a
// failure throws MonotonicityViolated, under Record it is kept in the flags.
BridgePoly build_bridge(const Jet2& leftJet, const Jet2& rightJet, double lo,
                        double hi, BoundPolicy policy = BoundPolicy::Enforce);

// Builds the full piecewise map, runs the verification grid, and populates
// the reference orbit. Under Enforce, bridge monotonicity failures throw
// MonotonicityViolated and derivative-bound failures throw BoundViolated;
// under Record both are stored in map.check.
DegenerateMap build_map(const MapSpec& spec,
                        BoundPolicy policy = BoundPolicy::Record);

// Piecewise-exact evaluation; derivOrder in {0,1,2}. Circle-domain values
// are reduced mod 1 (derivatives are unaffected by the reduction).
double evaluate(const DegenerateMap& map, double x, int derivOrder);
Jet2 evaluate_jet(const DegenerateMap& map, double x);

// Fiber context for the batch kernels (forcing left empty; the skew-product
// layer fills it in).
FiberCtx fiber_ctx(const DegenerateMap& map);

// Finds the expanding fixed point reached by the critical orbit within a
// 64-step budget: odd parity returns (0, 2, 1, 0) exactly. Throws
// NoReferenceOrbit when the orbit never lands.
ReferenceOrbit locate_reference_orbit(const DegenerateMap& map);

// Even parity: bisects the offset a0 until the critical orbit lands on the
// positive expanding fixed point after exactly ell steps, to residual <= tol.
// The bracket defaults to (1,2); throws NoBracket when the signed residual
// has no sign change over the bracket.
double calibrate_preperiodic(const MapSpec& spec, int ell, double tol = 1e-12,
                             double bracketLo = 1.0, double bracketHi = 2.0);

} // namespace vlab
