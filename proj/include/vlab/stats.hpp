#pragma once

#include <cstdint>
#include <vector>

#include "vlab/constants.hpp"
#include "vlab/curves.hpp"
#include "vlab/skew.hpp"

namespace vlab {

// Lower bound check on the N-step fiber derivative product started inside
// the critical neighborhood. The statement's exponent uses eta/(D-1); the
// alternate bound carries the proof's eta/D reading, reported side by side.
struct Lemma24aReport {
  double dist = 0.0;
  int steps = 0;
  double product = 0.0;
  double bound = 0.0;
  double boundAlt = 0.0;
  bool holds = false;
  bool holdsAlt = false;
};

// Escape-time check: p(x)-step product against (1/kappa) sigma1^p.
struct Lemma24bReport {
  double dist = 0.0;
  int p = 0;
  double product = 0.0;
  double bound = 0.0;
  bool holds = false;
};

// Outside-orbit check: k-step product against C2 alpha^{(D-1)/D} sigma2^k,
// plus the stronger bound when the endpoint re-enters the delta1 window.
struct Lemma25Report {
  int k = 0;
  double product = 0.0;
  double endDist = 0.0;
  double deepBound = 0.0;
  bool holdsDeep = false;
  bool shallowApplies = false;
  double shallowBound = 0.0;
  bool holdsShallow = false;
  double feasibleC2 = 0.0;  // largest C2 for which this report still holds
};

Lemma24aReport verify_lemma24a(const SkewProduct& sp,
                               const ExpansionConstants& c, double theta,
                               double x);
Lemma24bReport verify_lemma24b(const SkewProduct& sp,
                               const ExpansionConstants& c, double theta,
                               double x);
Lemma25Report verify_lemma25(const SkewProduct& sp,
                             const ExpansionConstants& c, double theta,
                             double x, int k);

// Largest C2 that makes every report in the batch hold.
double calibrate_c2(const std::vector<Lemma25Report>& batch);

struct DecayRow {
  double r = 0.0;
  double fraction = 0.0;
  bool belowThreshold = false;
};

struct DecayTable {
  std::vector<DecayRow> rows;
  double slope = 0.0;      // least-squares slope of log(fraction) vs r
  double intercept = 0.0;
  double fiveBeta = 0.0;   // eta / (D - 1)
  bool proofScaling = false;
};

// Fraction of the circle whose M-step curve image lies in the strip J(r-2),
// for each tested r. proofScaling switches the strip exponent to
// (r-2)(D-1)^2, the proof's variant.
DecayTable deep_return_decay(const SkewProduct& sp,
                             const ExpansionConstants& c,
                             const AdmissibleCurve& curve,
                             const std::vector<double>& rValues, int samples,
                             bool proofScaling = false);

// Seed point whose unforced M-step fiber orbit lands at xtilde + targetOffset,
// found by a scan plus bisection over [scanLo, scanHi). A constant curve at
// the returned point probes the decay profile near the strip boundary.
// Throws NoBracket when no landing exists in the scan range.
double deep_return_seed(const DegenerateMap& map, const ExpansionConstants& c,
                        double targetOffset, double scanLo, double scanHi);

enum class SituationKind { I, II };

struct SituationRecord {
  int nu = 0;
  SituationKind kind = SituationKind::I;
  int r = 0;      // kind I only
  bool inG = false;
};

struct ClassificationRun {
  std::vector<SituationRecord> records;
  int m = 0;
  int l = 0;
  double diameter = 0.0;   // x-diameter bound of the tracked segment
  bool iiContained = true; // every II segment inside J(m-1)
  int minGap = 0;          // smallest nu-gap between consecutive I records
};

// Walks nu = 1..n along the element chain containing omega (random
// refinement per seed) and classifies deep returns of the curve segment.
ClassificationRun classify_situations(const SkewProduct& sp,
                                      const ExpansionConstants& c,
                                      const AdmissibleCurve& curve, int n,
                                      const PartitionElement& omega,
                                      std::uint64_t seed = 0);

struct FractionEstimate {
  double fraction = 0.0;
  int hits = 0;
  int samples = 0;
  double wilsonLo = 0.0;
  double wilsonHi = 0.0;
};

// 95% Wilson score interval for a binomial fraction.
FractionEstimate wilson_interval(int hits, int samples);

// Fraction of base points whose orbit sees a II-situation within [1, n].
// Points sit on a uniform grid jittered per seed (variance reduction;
// recorded in output metadata).
FractionEstimate estimate_B2(const SkewProduct& sp,
                             const ExpansionConstants& c, int n,
                             int sampleCount, std::uint64_t seed,
                             int workers = 0);

// Fraction of base points with sum of selected deep-return depths >= c*n.
FractionEstimate estimate_B1(const SkewProduct& sp,
                             const ExpansionConstants& c, int n,
                             int sampleCount, std::uint64_t seed,
                             int workers = 0);

struct ExponentEstimate {
  double theta0 = 0.0;
  double x0 = 0.0;
  int steps = 0;
  double vertical = 0.0;
  double horizontal = 0.0;
  bool hitCritical = false;
};

// Birkhoff averages of log|dxf| and log|g'| over n steps from (theta, x).
// theta is iterated as an exact dyadic real, so a fixed point of the fiber
// map reproduces its exponent bit-for-bit.
ExponentEstimate vertical_exponent(const SkewProduct& sp, double theta,
                                   double x, int n);

struct CensusSummary {
  int count = 0;
  int steps = 0;
  int hitCount = 0;
  int positiveCount = 0;
  double fractionPositive = 0.0;
  double median = 0.0;
  double q10 = 0.0;
  double q90 = 0.0;
  double minVertical = 0.0;
  double maxVertical = 0.0;
  double horizontal = 0.0;
  std::vector<ExponentEstimate> rows;
};

// Finite-time exponent distribution over `count` random points. Each point
// owns a counter-based stream keyed by (seed, index), so the result is
// byte-identical for every worker count.
CensusSummary exponent_census(const SkewProduct& sp, int n, int count,
                              std::uint64_t seed, int workers = 0);

} // namespace vlab
