#include "regcalc/simd.hpp"

#include <cmath>

namespace regcalc::simd {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += a[i] * b[i];
  return s;
}

double weighted_diff_sum(const double* w, const double* a, const double* b,
                         std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) s += w[i] * (a[i] - b[i]);
  return s;
}

double weighted_sq_diff_sum(const double* w, const double* a, const double* b,
                            std::size_t n) {
  double s = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    s += w[i] * d * d;
  }
  return s;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  double m = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > m) m = d;
  }
  return m;
}

void lagged_product(const double* x, const double* y, std::size_t lag,
                    std::size_t n, double* out) {
  for (std::size_t j = 0; j < n; ++j)
    out[j] = (x[j + lag] - x[j]) * (y[j + lag] - y[j]);
}

void weighted_increment(const double* w, const double* x, std::size_t lag,
                        std::size_t n, double* out) {
  for (std::size_t j = 0; j < n; ++j) out[j] = w[j] * (x[j + lag] - x[j]);
}

}  // namespace

const KernelTable& scalar_kernels() {
  static const KernelTable table{Isa::scalar,        dot,
                                 weighted_diff_sum,  weighted_sq_diff_sum,
                                 max_abs_diff,       lagged_product,
                                 weighted_increment};
  return table;
}

}  // namespace regcalc::simd
