#ifndef FCFV_PARALLEL_HPP
#define FCFV_PARALLEL_HPP

#ifdef _OPENMP
#include <omp.h>
#endif

namespace fcfv {

// Serial is the reference path; Parallel runs the same per-cell kernels
// under OpenMP. Both must produce bit-identical results because every
// kernel writes to a disjoint, pre-sized slot.
enum class Exec { Serial, Parallel };

template <typename Fn>
void for_each_index(int n, Exec exec, Fn&& fn) {
#ifdef _OPENMP
  if (exec == Exec::Parallel) {
#pragma omp parallel for schedule(static)
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
#else
  (void)exec;
#endif
  for (int i = 0; i < n; ++i) fn(i);
}

}  // namespace fcfv

#endif
