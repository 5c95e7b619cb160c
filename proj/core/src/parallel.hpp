#pragma once

#include <exception>

#include "odefit/types.hpp"

namespace odefit::detail {

/// Runs fn(k) for k in [begin, end). Iterations must write disjoint state.
/// The first exception raised by any iteration is rethrown after the loop.
template <class Fn>
void parallel_for(Index begin, Index end, int threads, Fn&& fn) {
  std::exception_ptr error;
#if defined(_OPENMP)
#pragma omp parallel for schedule(static) num_threads(threads) if (threads > 1)
#endif
  for (Index k = begin; k < end; ++k) {
    try {
      fn(k);
    } catch (...) {
#if defined(_OPENMP)
#pragma omp critical(odefit_parallel_error)
#endif
      {
        if (!error) error = std::current_exception();
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace odefit::detail
