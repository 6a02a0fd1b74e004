#pragma once

#include <exception>
#include <mutex>

namespace regcalc::detail {

// Runs body(i) for i in [0, n), in parallel under OpenMP. The first exception
// thrown by any iteration is rethrown on the calling thread.
template <class Body>
void parallel_for(int n, Body&& body) {
  std::exception_ptr failure;
  std::mutex mu;
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n; ++i) {
    try {
      body(i);
    } catch (...) {
      std::lock_guard<std::mutex> lock(mu);
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
}

}  // namespace regcalc::detail
