#pragma once

// Data-parallel inner loops shared by every estimator.
//
// Each kernel exists as a scalar reference and, where the target supports
// it, an AVX2/FMA (x86-64) or NEON (aarch64) variant. The variant is picked
// once at startup from CPUID; REGCALC_ISA=scalar forces the reference path.
//
// Elementwise kernels are bit-identical across variants. Reductions differ
// only by summation order.

#include <cstddef>
#include <optional>
#include <string_view>

namespace regcalc::simd {

enum class Isa { scalar, avx2, neon };

struct KernelTable {
  Isa isa;

  // sum_i a[i] * b[i]
  double (*dot)(const double* a, const double* b, std::size_t n);

  // sum_i w[i] * (a[i] - b[i])
  double (*weighted_diff_sum)(const double* w, const double* a,
                              const double* b, std::size_t n);

  // sum_i w[i] * (a[i] - b[i])^2
  double (*weighted_sq_diff_sum)(const double* w, const double* a,
                                 const double* b, std::size_t n);

  // max_i |a[i] - b[i]|, 0 for n == 0
  double (*max_abs_diff)(const double* a, const double* b, std::size_t n);

  // out[j] = (x[j + lag] - x[j]) * (y[j + lag] - y[j]), j < n
  void (*lagged_product)(const double* x, const double* y, std::size_t lag,
                         std::size_t n, double* out);

  // out[j] = w[j] * (x[j + lag] - x[j]), j < n
  void (*weighted_increment)(const double* w, const double* x,
                             std::size_t lag, std::size_t n, double* out);
};

const KernelTable& scalar_kernels();

// nullptr when the variant was not compiled in or the CPU lacks it.
const KernelTable* avx2_kernels();
const KernelTable* neon_kernels();

// Kernels used by the library.
const KernelTable& active();

// Overrides the runtime choice. Not thread-safe; intended for tests and the
// CLI's --isa flag. Returns false if the requested variant is unavailable.
bool select(Isa isa);

std::string_view isa_name(Isa isa);
std::optional<Isa> parse_isa(std::string_view name);

}  // namespace regcalc::simd
