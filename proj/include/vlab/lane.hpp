#pragma once

#include <cstddef>
#include <string>

namespace vlab {

enum class Lane {
  Scalar,
  Avx2,
};

// True when this binary contains the lane and the CPU can run it.
bool lane_available(Lane lane) noexcept;

// Best available lane on this machine, unless a force is active.
Lane detect_lane() noexcept;

// Pins detect_lane() to one lane process-wide (the CLI's --lane). Throws
// ConfigError when the lane is unavailable.
void force_lane(Lane lane);
void clear_lane_force() noexcept;

// Parses "scalar", "avx2", or "auto" (case sensitive). Throws ConfigError on
// anything else, or when the named lane is unavailable.
Lane lane_from_name(const std::string& name);

const char* lane_name(Lane lane) noexcept;

// Elementwise array kernels. out[i] = f(in[i]) with identical results on
// every lane. Aliasing in == out is allowed.
void sin2pi_n(Lane lane, const double* in, double* out, std::size_t n);
void cos2pi_n(Lane lane, const double* in, double* out, std::size_t n);
void log_abs_n(Lane lane, const double* in, double* out, std::size_t n);

} // namespace vlab
