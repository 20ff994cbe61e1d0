#pragma once

#include "vlab/detail/vmath_impl.hpp"

namespace vlab {

// Scalar reference kernels. These are the exact per-element algorithms the
// SIMD lanes run, so any value computed here matches the dispatched array
// kernels bit for bit.
inline double sin2pi(double x) { return detail::sin2pi_core<detail::PackScalar>(x); }
inline double cos2pi(double x) { return detail::cos2pi_core<detail::PackScalar>(x); }
inline double log_abs(double x) { return detail::log_abs_core<detail::PackScalar>(x); }

} // namespace vlab
