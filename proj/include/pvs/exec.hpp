#pragma once

#include <cstddef>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace pvs {

/// Execution policy for the hot loops. Every parallel kernel has a serial
/// twin selected by this flag so results can be cross-checked in tests.
enum class Exec { serial, parallel };

template <class Body>
void parallel_for(std::size_t count, Exec exec, Body&& body) {
  if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
    for (long long i = 0; i < static_cast<long long>(count); ++i)
      body(static_cast<std::size_t>(i));
  } else {
    for (std::size_t i = 0; i < count; ++i) body(i);
  }
}

/// Max-reduction over [0, count). Order-independent, so the parallel and
/// serial paths agree bitwise.
template <class Body>
double parallel_max(std::size_t count, Exec exec, Body&& body) {
  double best = 0.0;
  if (exec == Exec::parallel) {
#ifdef _OPENMP
#pragma omp parallel
    {
      double local = 0.0;
#pragma omp for schedule(static) nowait
      for (long long i = 0; i < static_cast<long long>(count); ++i) {
        double v = body(static_cast<std::size_t>(i));
        if (v > local) local = v;
      }
#pragma omp critical
      if (local > best) best = local;
    }
#else
    for (std::size_t i = 0; i < count; ++i) {
      double v = body(i);
      if (v > best) best = v;
    }
#endif
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      double v = body(i);
      if (v > best) best = v;
    }
  }
  return best;
}

}  // namespace pvs
