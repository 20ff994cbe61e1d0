#include "vlab/lane.hpp"

#include <atomic>
#include <cstring>

#include "vlab/detail/batch_impl.hpp"
#include "vlab/detail/kernel_table.hpp"
#include "vlab/detail/vmath_impl.hpp"
#include "vlab/errors.hpp"

namespace vlab {
namespace detail {

namespace {

using PS = PackScalar;

void sin_n_scalar(const double* in, double* out, std::size_t n) {
  map_array<PS, sin2pi_core<PS>, sin2pi_core<PS>>(in, out, n);
}
void cos_n_scalar(const double* in, double* out, std::size_t n) {
  map_array<PS, cos2pi_core<PS>, cos2pi_core<PS>>(in, out, n);
}
void log_n_scalar(const double* in, double* out, std::size_t n) {
  map_array<PS, log_abs_core<PS>, log_abs_core<PS>>(in, out, n);
}
void fiber_scalar(const FiberCtx& c, const double* theta, double* x,
                  const double* sh, double* ls, double* lc, double* hf,
                  std::size_t n) {
  fiber_step_span<PS>(c, theta, x, sh, ls, lc, hf, n);
}
void curve_scalar(const FiberCtx& c, int d, const double* theta,
                  const double* x, const double* x1, const double* x2,
                  double* y, double* y1, double* y2, std::size_t n) {
  curve_step_span<PS>(c, d, theta, x, x1, x2, y, y1, y2, n);
}

bool cpu_has_avx2() noexcept {
#if defined(VLAB_HAVE_AVX2) && defined(__GNUC__)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable& table_for(Lane lane) {
  if (!lane_available(lane))
    throw ConfigError("requested lane is not available on this machine");
#if defined(VLAB_HAVE_AVX2)
  if (lane == Lane::Avx2) return kAvx2Table;
#endif
  return kScalarTable;
}

} // namespace

const KernelTable kScalarTable = {sin_n_scalar, cos_n_scalar, log_n_scalar,
                                  fiber_scalar, curve_scalar};

} // namespace detail

bool lane_available(Lane lane) noexcept {
  switch (lane) {
    case Lane::Scalar: return true;
    case Lane::Avx2: return detail::cpu_has_avx2();
  }
  return false;
}

namespace {
// -1: no force; otherwise the int value of the forced Lane.
std::atomic<int> gForcedLane{-1};
} // namespace

Lane detect_lane() noexcept {
  const int forced = gForcedLane.load(std::memory_order_relaxed);
  if (forced >= 0) return Lane(forced);
  return lane_available(Lane::Avx2) ? Lane::Avx2 : Lane::Scalar;
}

void force_lane(Lane lane) {
  if (!lane_available(lane))
    throw ConfigError("requested lane is not available on this machine");
  gForcedLane.store(int(lane), std::memory_order_relaxed);
}

void clear_lane_force() noexcept {
  gForcedLane.store(-1, std::memory_order_relaxed);
}

Lane lane_from_name(const std::string& name) {
  if (name == "auto") return detect_lane();
  if (name == "scalar") return Lane::Scalar;
  if (name == "avx2") {
    if (!lane_available(Lane::Avx2))
      throw ConfigError("lane avx2 is not available on this machine");
    return Lane::Avx2;
  }
  throw ConfigError("unknown lane name: " + name);
}

const char* lane_name(Lane lane) noexcept {
  return lane == Lane::Avx2 ? "avx2" : "scalar";
}

void sin2pi_n(Lane lane, const double* in, double* out, std::size_t n) {
  detail::table_for(lane).sin_n(in, out, n);
}
void cos2pi_n(Lane lane, const double* in, double* out, std::size_t n) {
  detail::table_for(lane).cos_n(in, out, n);
}
void log_abs_n(Lane lane, const double* in, double* out, std::size_t n) {
  detail::table_for(lane).log_n(in, out, n);
}
void fiber_step_n(Lane lane, const FiberCtx& ctx, const double* theta,
                  double* x, const double* shift, double* logSum,
                  double* logComp, double* hitFlag, std::size_t n) {
  detail::table_for(lane).fiber(ctx, theta, x, shift, logSum, logComp,
                                hitFlag, n);
}
void curve_step_n(Lane lane, const FiberCtx& ctx, int d, const double* theta,
                  const double* x, const double* x1, const double* x2,
                  double* y, double* y1, double* y2, std::size_t n) {
  detail::table_for(lane).curve(ctx, d, theta, x, x1, x2, y, y1, y2, n);
}

} // namespace vlab
