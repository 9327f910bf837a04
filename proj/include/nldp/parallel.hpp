#pragma once

#include <cstddef>
#include <cstdlib>
#include <exception>
#include <limits>
#include <span>

#include <omp.h>

namespace nldp {

/// How path loops are executed. Results never depend on these settings.
struct Execution {
  int workers = 1;
  /// Run the plain serial loop instead of the OpenMP kernel (reference path
  /// used by the equivalence tests and the benchmark).
  bool serial_reference = false;
};

/// Worker count from NLDP_WORKERS, falling back to `fallback`.
int default_workers(int fallback = 1);

namespace serial {

template <class Fn>
void for_each_index(std::size_t n, Fn&& fn) {
  for (std::size_t i = 0; i < n; ++i) fn(i);
}

}  // namespace serial

namespace omp {

/// Calls fn(i) for i in [0, n) on `workers` threads. Each index must write
/// only its own output slot. If any call throws, the exception from the
/// lowest failing index is rethrown after the loop.
template <class Fn>
void for_each_index(std::size_t n, int workers, Fn&& fn) {
  std::size_t first_bad = std::numeric_limits<std::size_t>::max();
  std::exception_ptr error;
  const long long count = static_cast<long long>(n);
#pragma omp parallel for num_threads(workers < 1 ? 1 : workers) schedule(dynamic, 16)
  for (long long i = 0; i < count; ++i) {
    try {
      fn(static_cast<std::size_t>(i));
    } catch (...) {
#pragma omp critical(nldp_for_each_error)
      {
        if (static_cast<std::size_t>(i) < first_bad) {
          first_bad = static_cast<std::size_t>(i);
          error = std::current_exception();
        }
      }
    }
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace omp

template <class Fn>
void for_each_index(std::size_t n, const Execution& exec, Fn&& fn) {
  if (exec.serial_reference) {
    serial::for_each_index(n, fn);
  } else {
    omp::for_each_index(n, exec.workers, fn);
  }
}

/// Fixed-order pairwise (tree) summation. The split points depend only on
/// the length, so the result is independent of how values were produced.
double pairwise_sum(std::span<const double> values);

}  // namespace nldp
