// AVX2 lane. Compiled with -mavx2 -mfma in its own translation unit; every
// kernel runs the same pack-templated algorithm as the scalar lane, with a
// scalar tail for the last n % 4 elements.

#include "vlab/detail/batch_impl.hpp"
#include "vlab/detail/kernel_table.hpp"
#include "vlab/detail/vmath_impl.hpp"

#if !defined(__AVX2__) || !defined(__FMA__)
#error "kernels_avx2.cpp must be compiled with -mavx2 -mfma"
#endif

namespace vlab::detail {

namespace {

using PV = PackAvx2;
using PS = PackScalar;

void sin_n_avx2(const double* in, double* out, std::size_t n) {
  map_array<PV, sin2pi_core<PV>, sin2pi_core<PS>>(in, out, n);
}
void cos_n_avx2(const double* in, double* out, std::size_t n) {
  map_array<PV, cos2pi_core<PV>, cos2pi_core<PS>>(in, out, n);
}
void log_n_avx2(const double* in, double* out, std::size_t n) {
  map_array<PV, log_abs_core<PV>, log_abs_core<PS>>(in, out, n);
}
void fiber_avx2(const FiberCtx& c, const double* theta, double* x,
                const double* sh, double* ls, double* lc, double* hf,
                std::size_t n) {
  std::size_t main = n - n % PV::width;
  fiber_step_span<PV>(c, theta, x, sh, ls, lc, hf, main);
  fiber_step_span<PS>(c, theta + main, x + main, sh + main, ls + main,
                      lc + main, hf + main, n - main);
}
void curve_avx2(const FiberCtx& c, int d, const double* theta, const double* x,
                const double* x1, const double* x2, double* y, double* y1,
                double* y2, std::size_t n) {
  std::size_t main = n - n % PV::width;
  curve_step_span<PV>(c, d, theta, x, x1, x2, y, y1, y2, main);
  curve_step_span<PS>(c, d, theta + main, x + main, x1 + main, x2 + main,
                      y + main, y1 + main, y2 + main, n - main);
}

} // namespace

const KernelTable kAvx2Table = {sin_n_avx2, cos_n_avx2, log_n_avx2, fiber_avx2,
                                curve_avx2};

} // namespace vlab::detail
