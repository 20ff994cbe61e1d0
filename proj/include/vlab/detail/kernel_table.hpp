#pragma once

#include <cstddef>

#include "vlab/batch.hpp"

namespace vlab::detail {

struct KernelTable {
  void (*sin_n)(const double*, double*, std::size_t);
  void (*cos_n)(const double*, double*, std::size_t);
  void (*log_n)(const double*, double*, std::size_t);
  void (*fiber)(const FiberCtx&, const double*, double*, const double*,
                double*, double*, double*, std::size_t);
  void (*curve)(const FiberCtx&, int, const double*, const double*,
                const double*, const double*, double*, double*, double*,
                std::size_t);
};

extern const KernelTable kScalarTable;
#if defined(VLAB_HAVE_AVX2)
extern const KernelTable kAvx2Table;
#endif

} // namespace vlab::detail
