// Compiled on aarch64 only. Advanced SIMD is mandatory there, so no runtime
// probe is needed.

#include "regcalc/simd.hpp"

#include <arm_neon.h>

#include <cmath>

namespace regcalc::simd {
namespace {

double dot(const double* a, const double* b, std::size_t n) {
  float64x2_t acc0 = vdupq_n_f64(0.0);
  float64x2_t acc1 = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc0 = vfmaq_f64(acc0, vld1q_f64(a + i), vld1q_f64(b + i));
    acc1 = vfmaq_f64(acc1, vld1q_f64(a + i + 2), vld1q_f64(b + i + 2));
  }
  double s = vaddvq_f64(vaddq_f64(acc0, acc1));
  for (; i < n; ++i) s += a[i] * b[i];
  return s;
}

double weighted_diff_sum(const double* w, const double* a, const double* b,
                         std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, vld1q_f64(w + i), d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) s += w[i] * (a[i] - b[i]);
  return s;
}

double weighted_sq_diff_sum(const double* w, const double* a, const double* b,
                            std::size_t n) {
  float64x2_t acc = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t d = vsubq_f64(vld1q_f64(a + i), vld1q_f64(b + i));
    acc = vfmaq_f64(acc, vmulq_f64(vld1q_f64(w + i), d), d);
  }
  double s = vaddvq_f64(acc);
  for (; i < n; ++i) {
    const double d = a[i] - b[i];
    s += w[i] * d * d;
  }
  return s;
}

double max_abs_diff(const double* a, const double* b, std::size_t n) {
  float64x2_t m = vdupq_n_f64(0.0);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2)
    m = vmaxq_f64(m, vabdq_f64(vld1q_f64(a + i), vld1q_f64(b + i)));
  double r = vmaxvq_f64(m);
  for (; i < n; ++i) {
    const double d = std::fabs(a[i] - b[i]);
    if (d > r) r = d;
  }
  return r;
}

void lagged_product(const double* x, const double* y, std::size_t lag,
                    std::size_t n, double* out) {
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(x + j + lag), vld1q_f64(x + j));
    const float64x2_t dy = vsubq_f64(vld1q_f64(y + j + lag), vld1q_f64(y + j));
    vst1q_f64(out + j, vmulq_f64(dx, dy));
  }
  for (; j < n; ++j) out[j] = (x[j + lag] - x[j]) * (y[j + lag] - y[j]);
}

void weighted_increment(const double* w, const double* x, std::size_t lag,
                        std::size_t n, double* out) {
  std::size_t j = 0;
  for (; j + 2 <= n; j += 2) {
    const float64x2_t dx = vsubq_f64(vld1q_f64(x + j + lag), vld1q_f64(x + j));
    vst1q_f64(out + j, vmulq_f64(vld1q_f64(w + j), dx));
  }
  for (; j < n; ++j) out[j] = w[j] * (x[j + lag] - x[j]);
}

}  // namespace

const KernelTable* neon_kernels() {
  static const KernelTable table{Isa::neon,          dot,
                                 weighted_diff_sum,  weighted_sq_diff_sum,
                                 max_abs_diff,       lagged_product,
                                 weighted_increment};
  return &table;
}

}  // namespace regcalc::simd
