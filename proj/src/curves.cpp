#include "vlab/curves.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <string>

#include "vlab/batch.hpp"
#include "vlab/detail/vmath_impl.hpp"
#include "vlab/errors.hpp"
#include "vlab/rng.hpp"
#include "vlab/vmath.hpp"

namespace vlab {
namespace {

constexpr double kTol = 1e-12;

bool power_of_two(int v) { return v > 0 && (v & (v - 1)) == 0; }

std::uint64_t checked_pow(int d, int level) {
  // Level caps keep k/d^n exactly representable; see rebuild_samples.
  std::uint64_t p = 1;
  for (int i = 0; i < level; ++i) {
    if (p > (std::uint64_t(1) << 52) / std::uint64_t(d))
      throw IndexOutOfRange("partition level too deep for exact endpoints");
    p *= std::uint64_t(d);
  }
  return p;
}

struct SeedJet {
  double v, d1, d2;
};

SeedJet seed_eval(const AdmissibleCurve& c, double t) {
  SeedJet out{c.base, 0.0, 0.0};
  const std::size_t n = std::max(c.seedSin.size(), c.seedCos.size());
  for (std::size_t k = 0; k < n; ++k) {
    const double as = k < c.seedSin.size() ? c.seedSin[k] : 0.0;
    const double ac = k < c.seedCos.size() ? c.seedCos[k] : 0.0;
    if (as == 0.0 && ac == 0.0) continue;
    const double wk = detail::kTwoPi * double(k + 1);
    const double s = sin2pi(double(k + 1) * t);
    const double co = cos2pi(double(k + 1) * t);
    out.v += as * s + ac * co;
    out.d1 += wk * (as * co - ac * s);
    out.d2 -= wk * wk * (as * s + ac * co);
  }
  return out;
}

void check_step_bounds(const std::vector<double>& x1,
                       const std::vector<double>& x2, double alpha, int step) {
  double m1 = 0.0, m2 = 0.0;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    m1 = std::max(m1, std::abs(x1[i]));
    m2 = std::max(m2, std::abs(x2[i]));
  }
  if (m1 > alpha || m2 > alpha)
    throw AdmissibilityLost("derivative bound failed after step " +
                            std::to_string(step) + ": max |X'| = " +
                            std::to_string(m1) + ", max |X''| = " +
                            std::to_string(m2) + ", budget " +
                            std::to_string(alpha));
}

// Rebuilds the sample arrays of the curve whose branch digits are `digits`
// (earliest applied first) by walking every sample forward from the seed.
// Base points (K + i/G)/d^m are exact dyadics while d^m * G <= 2^52, so the
// jets carry no interpolation error at any depth used by the lab.
void rebuild_samples(const AdmissibleCurve& c, const SkewProduct& sp,
                     const std::vector<int>& digits, int gridSize,
                     std::vector<double>& x, std::vector<double>& x1,
                     std::vector<double>& x2) {
  const int m = int(digits.size());
  const int G = gridSize;
  const std::uint64_t d = std::uint64_t(sp.d);
  std::uint64_t dm = 1;
  for (int i = 0; i < m; ++i) {
    if (dm > (std::uint64_t(1) << 52) / (d * std::uint64_t(G)))
      throw PreconditionViolated("branch path too deep for exact pullback");
    dm *= d;
  }
  std::uint64_t K = 0;
  for (int dig : digits) {
    if (dig < 0 || dig >= sp.d)
      throw IndexOutOfRange("branch digit outside [0, d)");
    K = K * d + std::uint64_t(dig);
  }

  x.assign(std::size_t(G), 0.0);
  x1.assign(std::size_t(G), 0.0);
  x2.assign(std::size_t(G), 0.0);
  const double invG = 1.0 / double(G);
  for (int i = 0; i < G; ++i) {
    const double t = (double(K) + double(i) * invG) / double(dm);
    const SeedJet s = seed_eval(c, t);
    x[std::size_t(i)] = s.v;
    x1[std::size_t(i)] = s.d1;
    x2[std::size_t(i)] = s.d2;
  }
  if (m == 0) return;

  const FiberCtx ctx = make_fiber_ctx(sp);
  const Lane lane = detect_lane();
  std::vector<double> th(static_cast<std::size_t>(G));
  std::uint64_t rem = dm;
  for (int j = 0; j < m; ++j) {
    const std::uint64_t Kj = K % rem;
    for (int i = 0; i < G; ++i)
      th[std::size_t(i)] = (double(Kj) + double(i) * invG) / double(rem);
    curve_step_n(lane, ctx, sp.d, th.data(), x.data(), x1.data(), x2.data(),
                 x.data(), x1.data(), x2.data(), std::size_t(G));
    check_step_bounds(x1, x2, c.alphaBound, j + 1);
    rem /= d;
  }
}

void append_digits(std::vector<int>& path, const PartitionElement& omega) {
  const std::uint64_t dn = checked_pow(omega.d, omega.level);
  if (omega.index >= dn)
    throw IndexOutOfRange("partition index outside [0, d^n)");
  std::uint64_t p = dn / std::uint64_t(omega.d);
  std::uint64_t k = omega.index;
  for (int i = 0; i < omega.level; ++i) {
    path.push_back(int(k / p));
    k %= p;
    p = p == 1 ? 1 : p / std::uint64_t(omega.d);
  }
}

double circle_dist(double a, double b) {
  double u = std::abs(a - b);
  return std::min(u, 1.0 - u);
}

} // namespace

PartitionElement partition_element(int d, int level, std::uint64_t index) {
  if (d < 2) throw ConfigError("partition base must be at least 2");
  if (level < 1) throw IndexOutOfRange("partition level must be positive");
  const std::uint64_t dn = checked_pow(d, level);
  if (index >= dn) throw IndexOutOfRange("partition index outside [0, d^n)");
  PartitionElement e;
  e.d = d;
  e.level = level;
  e.index = index;
  e.lo = double(index) / double(dn);
  e.hi = double(index + 1) / double(dn);
  return e;
}

std::vector<double> preimage_branches(int d, double thetaPrime) {
  if (d < 2) throw ConfigError("partition base must be at least 2");
  double t = thetaPrime - std::floor(thetaPrime);
  if (t >= 1.0) t = 0.0;
  std::vector<double> out(static_cast<std::size_t>(d));
  for (int j = 0; j < d; ++j)
    out[std::size_t(j)] = (t + double(j)) / double(d);
  return out;
}

AdmissibleCurve make_curve(CurveKind kind, double alpha,
                           const CurveParams& params) {
  if (!(alpha > 0.0) || !std::isfinite(alpha))
    throw ConfigError("curve admissibility budget must be positive");
  if (!power_of_two(params.gridSize) || params.gridSize < 64 ||
      params.gridSize > (1 << 20))
    throw ConfigError("curve grid size must be a power of two in [64, 2^20]");

  AdmissibleCurve c;
  c.gridSize = params.gridSize;
  c.alphaBound = alpha;
  c.base = params.x0;

  double sup1 = 0.0, sup2 = 0.0;
  switch (kind) {
    case CurveKind::Constant:
      break;
    case CurveKind::Sine: {
      const double a = params.amplitude;
      c.seedSin.assign(1, a);
      sup1 = detail::kTwoPi * std::abs(a);
      sup2 = detail::kTwoPi * detail::kTwoPi * std::abs(a);
      break;
    }
    case CurveKind::Random: {
      const int modes = params.modes;
      if (modes < 1 || modes > 64)
        throw ConfigError("random curve mode count must be in [1, 64]");
      CounterRng rng(params.seed, 0x43524356u);
      c.seedSin.resize(std::size_t(modes));
      c.seedCos.resize(std::size_t(modes));
      double s1 = 0.0, s2 = 0.0;
      for (int k = 0; k < modes; ++k) {
        c.seedSin[std::size_t(k)] = rng.uniform(-1.0, 1.0);
        c.seedCos[std::size_t(k)] = rng.uniform(-1.0, 1.0);
        const double wk = detail::kTwoPi * double(k + 1);
        const double amp = std::abs(c.seedSin[std::size_t(k)]) +
                           std::abs(c.seedCos[std::size_t(k)]);
        s1 += wk * amp;
        s2 += wk * wk * amp;
      }
      const double denom = std::max(s1, s2);
      const double scale = denom > 0.0 ? 0.9 * alpha / denom : 0.0;
      for (int k = 0; k < modes; ++k) {
        c.seedSin[std::size_t(k)] *= scale;
        c.seedCos[std::size_t(k)] *= scale;
      }
      sup1 = s1 * scale;
      sup2 = s2 * scale;
      break;
    }
  }

  if (sup1 > alpha * (1.0 + kTol) || sup2 > alpha * (1.0 + kTol))
    throw NotAdmissible("seed derivative sups " + std::to_string(sup1) +
                        ", " + std::to_string(sup2) +
                        " exceed the admissibility budget " +
                        std::to_string(alpha));

  const int G = c.gridSize;
  c.x.resize(std::size_t(G));
  c.x1.resize(std::size_t(G));
  c.x2.resize(std::size_t(G));
  const double invG = 1.0 / double(G);
  for (int i = 0; i < G; ++i) {
    const SeedJet s = seed_eval(c, double(i) * invG);
    c.x[std::size_t(i)] = s.v;
    c.x1[std::size_t(i)] = s.d1;
    c.x2[std::size_t(i)] = s.d2;
  }
  for (int i = 0; i < G; ++i) {
    if (std::abs(c.x1[std::size_t(i)]) > alpha * (1.0 + kTol) ||
        std::abs(c.x2[std::size_t(i)]) > alpha * (1.0 + kTol))
      throw NotAdmissible("sampled derivative exceeds the admissibility budget");
  }
  return c;
}

AdmissibleCurve iterate_over_element(const AdmissibleCurve& curve,
                                     const SkewProduct& sp,
                                     const PartitionElement& omega) {
  if (omega.d != sp.d)
    throw PreconditionViolated("partition base does not match the skew degree");
  if (!curve.path.empty() && curve.d != sp.d)
    throw PreconditionViolated("curve branch path uses a different base degree");
  if (curve.alphaBound > sp.alpha * (1.0 + kTol))
    throw PreconditionViolated("curve admissibility budget exceeds the skew alpha");

  AdmissibleCurve out = curve;
  out.d = sp.d;
  append_digits(out.path, omega);
  rebuild_samples(out, sp, out.path, out.gridSize, out.x, out.x1, out.x2);

  if (sp.base.spec.parity == Parity::Even) {
    const InvariantDomain dom = invariant_domain(sp);
    for (double v : out.x)
      if (v < dom.lo || v > dom.hi)
        throw AdmissibilityLost("curve left the invariant domain");
  }
  return out;
}

AdmissibleCurve iterate_once(const AdmissibleCurve& curve,
                             const SkewProduct& sp,
                             const PartitionElement& omega) {
  if (omega.level != 1)
    throw PreconditionViolated("iterate_once needs a level-1 element");
  return iterate_over_element(curve, sp, omega);
}

double curve_value(const AdmissibleCurve& curve, double theta) {
  if (!curve.path.empty())
    throw PreconditionViolated("curve_value needs a seed curve (empty path)");
  return seed_eval(curve, theta).v;
}

double oscillation(const AdmissibleCurve& curve) {
  double lo = curve.x[0], hi = curve.x[0];
  bool unit = true;
  for (double v : curve.x) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
    unit = unit && v >= 0.0 && v < 1.0;
  }
  const double plain = hi - lo;
  if (!unit) return plain;
  // Circular range: wrap the upper half to [-1/2, 0) and take the tighter
  // reading. Valid while the true oscillation is below 1/4.
  double lo2 = 1.0, hi2 = -1.0;
  for (double v : curve.x) {
    const double w = v >= 0.5 ? v - 1.0 : v;
    lo2 = std::min(lo2, w);
    hi2 = std::max(hi2, w);
  }
  return std::min(plain, hi2 - lo2);
}

double strip_measure(const AdmissibleCurve& curve, double lo, double hi) {
  if (!(lo <= hi) || !std::isfinite(lo) || !std::isfinite(hi))
    throw ConfigError("strip interval must satisfy lo <= hi");
  const int G = curve.gridSize;
  const double cell = 1.0 / double(G);
  bool unit = true;
  for (double v : curve.x) unit = unit && v >= 0.0 && v < 1.0;
  const auto inside = [&](double v) {
    if (!unit) return v >= lo && v <= hi;  // interval fiber: no wrapping
    double p = v - std::floor(v);
    if (p >= 1.0) p = 0.0;
    if (lo >= 0.0 && hi < 1.0) return p >= lo && p <= hi;
    // Strip wraps the seam: test the lift one period either side too.
    return (p >= lo && p <= hi) || (p - 1.0 >= lo && p - 1.0 <= hi) ||
           (p + 1.0 >= lo && p + 1.0 <= hi);
  };
  double measure = 0.0;
  for (int i = 0; i < G; ++i) {
    const double a = curve.x[std::size_t(i)];
    double b = curve.x[std::size_t((i + 1) % G)];
    // Adjacent samples of an admissible curve differ by at most alpha/G, so
    // a jump near 1 marks a seam crossing; unwrap before interpolating.
    if (b - a > 0.5) b -= 1.0;
    if (a - b > 0.5) b += 1.0;
    const bool ia = inside(a), ib = inside(b);
    if (ia && ib) {
      measure += cell;
    } else if (ia || ib) {
      int hits = 0;
      for (int s = 0; s < 16; ++s) {
        const double t = (double(s) + 0.5) / 16.0;
        if (inside(a + t * (b - a))) ++hits;
      }
      measure += cell * double(hits) / 16.0;
    }
  }
  return measure;
}

BranchSeparation branch_separation(const AdmissibleCurve& curve,
                                   const SkewProduct& sp) {
  const int d = sp.d;
  const int need = (d + 15) / 16;
  const int Gs = 1 << 12;
  const bool circle = sp.base.circleDomain;

  std::vector<std::vector<double>> z(static_cast<std::size_t>(d));
  {
    std::vector<double> x1, x2;
    for (int j = 0; j < d; ++j) {
      std::vector<int> digits = curve.path;
      digits.push_back(j);
      rebuild_samples(curve, sp, digits, Gs, z[std::size_t(j)], x1, x2);
    }
  }

  std::vector<std::vector<double>> sep(std::size_t(d),
                                       std::vector<double>(std::size_t(d), 0.0));
  for (int a = 0; a < d; ++a)
    for (int b = a + 1; b < d; ++b) {
      double m = 1.0;
      for (int i = 0; i < Gs; ++i) {
        const double za = z[std::size_t(a)][std::size_t(i)];
        const double zb = z[std::size_t(b)][std::size_t(i)];
        const double u = circle ? circle_dist(za, zb) : std::abs(za - zb);
        m = std::min(m, u);
      }
      sep[std::size_t(a)][std::size_t(b)] = m;
      sep[std::size_t(b)][std::size_t(a)] = m;
    }

  const double tau = sp.alpha / 100.0;
  BranchSeparation out;
  if (need == 1) {
    int ba = 0, bb = 1;
    double best = -1.0;
    for (int a = 0; a < d; ++a)
      for (int b = a + 1; b < d; ++b)
        if (sep[std::size_t(a)][std::size_t(b)] > best) {
          best = sep[std::size_t(a)][std::size_t(b)];
          ba = a;
          bb = b;
        }
    if (best < tau)
      throw NoSeparatedSets("no branch pair stays separated on the grid");
    out.h1 = {ba};
    out.h2 = {bb};
    out.minSep = best;
    return out;
  }

  // Larger bases: split branch images by mean height; exhaustive subset
  // search is not needed for any base the lab exercises.
  std::vector<std::pair<double, int>> order;
  for (int j = 0; j < d; ++j) {
    double mean = 0.0;
    for (double v : z[std::size_t(j)]) mean += v;
    order.emplace_back(mean / double(Gs), j);
  }
  std::sort(order.begin(), order.end());
  double worst = 1.0;
  for (int a = 0; a < need; ++a)
    for (int b = 0; b < need; ++b) {
      const int ja = order[std::size_t(a)].second;
      const int jb = order[std::size_t(d - 1 - b)].second;
      worst = std::min(worst, sep[std::size_t(ja)][std::size_t(jb)]);
    }
  if (worst < tau)
    throw NoSeparatedSets("mean-height split failed the separation bound");
  for (int a = 0; a < need; ++a) out.h1.push_back(order[std::size_t(a)].second);
  for (int b = 0; b < need; ++b)
    out.h2.push_back(order[std::size_t(d - 1 - b)].second);
  std::sort(out.h1.begin(), out.h1.end());
  std::sort(out.h2.begin(), out.h2.end());
  out.minSep = worst;
  return out;
}

} // namespace vlab
