#pragma once

#include <cstdint>
#include <vector>

#include "vlab/lane.hpp"
#include "vlab/skew.hpp"

namespace vlab {

// Dyadic partition element of the base circle at level n: the interval
// [k/d^n, (k+1)/d^n).
struct PartitionElement {
  int d = 16;
  int level = 1;
  std::uint64_t index = 0;
  double lo = 0.0, hi = 0.0;
};

PartitionElement partition_element(int d, int level, std::uint64_t index);

// The d branch base points (thetaPrime + j)/d, j = 0..d-1.
std::vector<double> preimage_branches(int d, double thetaPrime);

enum class CurveKind { Constant, Sine, Random };

struct CurveParams {
  double x0 = 0.25;        // fiber level (constant) or oscillation center
  double amplitude = 0.0;  // sine amplitude
  std::uint64_t seed = 0;  // random kind: stream seed
  int modes = 4;           // random kind: trig modes
  int gridSize = 1 << 14;  // power of two
};

// Graph curve theta -> X(theta) with sampled jets. A curve is represented
// by its analytic seed plus the branch digits applied so far; samples are
// rebuilt exactly from the seed on every iteration, so derivative
// propagation never accumulates interpolation error.
struct AdmissibleCurve {
  int gridSize = 1 << 14;
  double alphaBound = 0.0;
  // Seed: X0(theta) = base + sum_k seedSin[k-1] sin(2 pi k theta)
  //                        + seedCos[k-1] cos(2 pi k theta)
  double base = 0.0;
  std::vector<double> seedSin, seedCos;
  int d = 16;             // base degree the path digits refer to
  std::vector<int> path;  // branch digits applied so far, earliest first
  // Samples at theta_i = i / gridSize.
  std::vector<double> x, x1, x2;
};

// Builds and admissibility-checks a seed curve: |X'| <= alpha and
// |X''| <= alpha, analytically and sample-wise. Throws NotAdmissible.
AdmissibleCurve make_curve(CurveKind kind, double alpha,
                           const CurveParams& params = {});

// One skew-product step of the curve along the inverse branch over the
// level-1 element. The result is a curve over the full circle again.
// Throws AdmissibilityLost when a propagated derivative bound fails.
AdmissibleCurve iterate_once(const AdmissibleCurve& curve,
                             const SkewProduct& sp,
                             const PartitionElement& omega);

// n-fold composition along the branch determined by a level-n element.
AdmissibleCurve iterate_over_element(const AdmissibleCurve& curve,
                                     const SkewProduct& sp,
                                     const PartitionElement& omega);

// Exact seed evaluation X(theta); only valid before any iteration (the
// branch path must be empty).
double curve_value(const AdmissibleCurve& curve, double theta);

// sup - inf of the sampled values. Circle-valued curves are measured as a
// circular range (valid while the oscillation is below 1/4, which the
// oscillation lemma regime guarantees).
double oscillation(const AdmissibleCurve& curve);

// Lebesgue measure of {theta : X(theta) in [lo, hi]} by cell counting,
// with 16-fold sub-sampling of the linear interpolant on crossing cells.
double strip_measure(const AdmissibleCurve& curve, double lo, double hi);

struct BranchSeparation {
  std::vector<int> h1, h2;
  double minSep = 0.0;
};

// Searches the d one-step branch images of the curve for two disjoint
// index sets of size >= ceil(d/16) whose images stay at least alpha/100
// apart for every theta on a 2^12 grid. Throws NoSeparatedSets when the
// search fails.
BranchSeparation branch_separation(const AdmissibleCurve& curve,
                                   const SkewProduct& sp);

} // namespace vlab
