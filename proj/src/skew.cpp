#include "vlab/skew.hpp"

#include <cmath>
#include <cstddef>

#include "vlab/detail/batch_impl.hpp"
#include "vlab/errors.hpp"

namespace vlab {

namespace {

using PS = detail::PackScalar;

// Sup of |b'| and |b''| on a dense grid. The grid includes the quarter
// points, where the default forcing attains its extremes exactly.
void forcing_sups(const SkewProduct& sp, double& b1Sup, double& b2Sup) {
  FiberCtx c = make_fiber_ctx(sp);
  constexpr int kN = 1 << 14;
  b1Sup = 0.0;
  b2Sup = 0.0;
  for (int i = 0; i < kN; ++i) {
    double th = static_cast<double>(i) / kN;
    double b, b1, b2;
    detail::MapEval<PS>::forcing_jet3(c, th, b, b1, b2);
    b1Sup = std::max(b1Sup, std::fabs(b1));
    b2Sup = std::max(b2Sup, std::fabs(b2));
  }
}

void validate_forcing(SkewProduct& sp) {
  for (double v : sp.sinCoeff)
    if (!std::isfinite(v)) throw ConfigError("forcing coefficient not finite");
  for (double v : sp.cosCoeff)
    if (!std::isfinite(v)) throw ConfigError("forcing coefficient not finite");
  // Coefficient distance from the default forcing sin(2 pi theta). Keeping
  // it at most 1 keeps the perturbed map within alpha of the model in sup
  // norm.
  double dist = 0.0;
  for (std::size_t k = 0; k < sp.sinCoeff.size(); ++k)
    dist += std::fabs(sp.sinCoeff[k] - (k == 0 ? 1.0 : 0.0));
  if (sp.sinCoeff.empty()) dist += 1.0;
  for (double v : sp.cosCoeff) dist += std::fabs(v);
  if (dist > 1.0)
    throw BudgetExceeded("forcing moves the map by more than alpha");
  // The kernels walk both coefficient arrays in lockstep; keep them equal
  // length.
  std::size_t n = sp.sinCoeff.size() > sp.cosCoeff.size() ? sp.sinCoeff.size()
                                                          : sp.cosCoeff.size();
  sp.sinCoeff.resize(n, 0.0);
  sp.cosCoeff.resize(n, 0.0);
  forcing_sups(sp, sp.b1Sup, sp.b2Sup);
  if (sp.b1Sup > 8.0)
    throw BudgetExceeded("forcing derivative sup exceeds 8");
  if (sp.b2Sup > 50.0)
    throw BudgetExceeded("forcing second-derivative sup exceeds 50");
}

} // namespace

SkewProduct make_skew(const DegenerateMap& base, int d, double alpha) {
  if (d < 16) throw ConfigError("base degree d must be at least 16");
  if (!(alpha > 0.0 && alpha < 1.0 / 32.0))
    throw ConfigError("alpha must lie in (0, 1/32)");
  SkewProduct sp;
  sp.d = d;
  sp.alpha = alpha;
  sp.base = base;
  validate_forcing(sp);
  return sp;
}

SkewProduct make_perturbed_skew(const SkewProduct& sp,
                                const std::vector<double>& sinCoeff,
                                const std::vector<double>& cosCoeff) {
  SkewProduct out = sp;
  out.sinCoeff = sinCoeff;
  out.cosCoeff = cosCoeff;
  validate_forcing(out);
  return out;
}

FiberCtx make_fiber_ctx(const SkewProduct& sp) {
  FiberCtx c = fiber_ctx(sp.base);
  c.alpha = sp.alpha;
  c.sinC = sp.sinCoeff.data();
  c.cosC = sp.cosCoeff.data();
  c.nTrig = static_cast<int>(
      sp.sinCoeff.size() > sp.cosCoeff.size() ? sp.sinCoeff.size()
                                              : sp.cosCoeff.size());
  c.guard = 1e-300;
  return c;
}

std::pair<double, double> skew_apply(const SkewProduct& sp, double theta,
                                     double x) {
  theta -= std::floor(theta);
  if (theta >= 1.0) theta = 0.0;
  double tp = sp.d * theta;
  tp -= std::floor(tp);
  if (tp >= 1.0) tp = 0.0;
  FiberCtx c = make_fiber_ctx(sp);
  double b = detail::MapEval<PS>::forcing(c, theta);
  double h, h1;
  detail::MapEval<PS>::jet2(c, x, h, h1);
  double xp = std::fma(sp.alpha, b, h);
  if (c.parity == 0) {
    xp -= std::floor(xp);
    if (xp >= 1.0) xp = 0.0;
  }
  return {tp, xp};
}

SkewJacobian skew_jacobian(const SkewProduct& sp, double theta, double x) {
  theta -= std::floor(theta);
  if (theta >= 1.0) theta = 0.0;
  FiberCtx c = make_fiber_ctx(sp);
  double b, b1, b2;
  detail::MapEval<PS>::forcing_jet3(c, theta, b, b1, b2);
  double h, h1, h2;
  detail::MapEval<PS>::jet3(c, x, h, h1, h2);
  return {static_cast<double>(sp.d), sp.alpha * b1, h1};
}

SkewSecond skew_second(const SkewProduct& sp, double theta, double x) {
  theta -= std::floor(theta);
  if (theta >= 1.0) theta = 0.0;
  FiberCtx c = make_fiber_ctx(sp);
  double b, b1, b2;
  detail::MapEval<PS>::forcing_jet3(c, theta, b, b1, b2);
  double h, h1, h2;
  detail::MapEval<PS>::jet3(c, x, h, h1, h2);
  return {sp.alpha * b2, 0.0, h2};
}

InvariantDomain invariant_domain(const SkewProduct& sp, double margin) {
  if (!(margin > 0.0)) throw ConfigError("margin must be positive");
  InvariantDomain dom;
  if (sp.base.circleDomain) {
    dom.fullCircle = true;
    return dom;
  }
  double a0 = sp.base.spec.a0;
  dom.xMaxRaw = a0 + sp.alpha;
  dom.xMinRaw = a0 - dom.xMaxRaw * dom.xMaxRaw - sp.alpha;
  double hi = dom.xMaxRaw + margin;
  // Self-consistent lower edge: the image minimum is h at the largest |x|
  // in the box. Diverges when no invariant interval exists at this alpha.
  double lo = a0 - hi * hi - sp.alpha - margin;
  for (int it = 0; it < 64; ++it) {
    double reach = std::max(std::fabs(lo), hi);
    double next = a0 - reach * reach - sp.alpha - margin;
    if (next >= lo - 1e-15) {
      lo = std::min(lo, next);
      break;
    }
    lo = next;
    if (std::fabs(lo) > 8.0)
      throw NotInvariant("no invariant interval closes at this alpha");
  }
  dom.lo = lo;
  dom.hi = hi;

  // Strict boundary check on a theta grid at the extreme fiber positions.
  FiberCtx c = make_fiber_ctx(sp);
  constexpr int kN = 1 << 12;
  for (double xb : {lo, hi, 0.0}) {
    for (int i = 0; i < kN; ++i) {
      double th = static_cast<double>(i) / kN;
      double b = detail::MapEval<PS>::forcing(c, th);
      double h, h1;
      detail::MapEval<PS>::jet2(c, xb, h, h1);
      double xp = std::fma(sp.alpha, b, h);
      if (!(xp > lo && xp < hi))
        throw NotInvariant("boundary image leaves the interval");
    }
  }
  return dom;
}

} // namespace vlab
