#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "regcalc/simd.hpp"
#include "support.hpp"

using regcalc::simd::KernelTable;

namespace {

std::vector<const KernelTable*> variants() {
  std::vector<const KernelTable*> out;
  if (auto* t = regcalc::simd::avx2_kernels()) out.push_back(t);
  if (auto* t = regcalc::simd::neon_kernels()) out.push_back(t);
  return out;
}

// Reductions may reassociate; bound the error by the sum of magnitudes.
void expect_close(double got, double want, double magnitude) {
  EXPECT_LE(std::fabs(got - want), 1e-13 * magnitude + 1e-300) << got << " vs " << want;
}

const std::vector<std::size_t> kLengths{0, 1, 2, 3, 4, 5, 7, 8, 9, 15, 16, 17, 31, 33, 64, 1000, 1027};

}  // namespace

TEST(Simd, ScalarReferenceMatchesDefinitions) {
  const auto& k = regcalc::simd::scalar_kernels();
  const std::vector<double> a{1, 2, 3}, b{4, -5, 6}, w{0.5, 1, 2};
  EXPECT_EQ(k.dot(a.data(), b.data(), 3), 4 - 10 + 18);
  EXPECT_EQ(k.weighted_diff_sum(w.data(), a.data(), b.data(), 3), 0.5 * -3 + 7 + 2 * -3);
  EXPECT_EQ(k.weighted_sq_diff_sum(w.data(), a.data(), b.data(), 3), 0.5 * 9 + 49 + 2 * 9);
  EXPECT_EQ(k.max_abs_diff(a.data(), b.data(), 3), 7);
  EXPECT_EQ(k.max_abs_diff(a.data(), b.data(), 0), 0);
  const std::vector<double> x{0, 1, 3, 6, 10}, y{0, 2, 2, 2, 5};
  std::vector<double> out(3);
  k.lagged_product(x.data(), y.data(), 2, 3, out.data());
  EXPECT_EQ(out, (std::vector<double>{3 * 2, 5 * 0, 7 * 3}));
  k.weighted_increment(w.data(), x.data(), 1, 3, out.data());
  EXPECT_EQ(out, (std::vector<double>{0.5, 2, 6}));
}

TEST(Simd, VariantsAgreeWithScalar) {
  const auto& ref = regcalc::simd::scalar_kernels();
  testing_support::Gen gen(11);
  for (const KernelTable* v : variants()) {
    SCOPED_TRACE(std::string(regcalc::simd::isa_name(v->isa)));
    for (std::size_t n : kLengths) {
      SCOPED_TRACE(n);
      const std::size_t lag = 1 + n % 5;
      const auto a = gen.normals(n + lag), b = gen.normals(n + lag), w = gen.normals(n + lag);
      double mag_dot = 0, mag_wd = 0, mag_wsd = 0;
      for (std::size_t i = 0; i < n; ++i) {
        mag_dot += std::fabs(a[i] * b[i]);
        mag_wd += std::fabs(w[i] * (a[i] - b[i]));
        mag_wsd += std::fabs(w[i]) * (a[i] - b[i]) * (a[i] - b[i]);
      }
      expect_close(v->dot(a.data(), b.data(), n), ref.dot(a.data(), b.data(), n), mag_dot);
      expect_close(v->weighted_diff_sum(w.data(), a.data(), b.data(), n),
                   ref.weighted_diff_sum(w.data(), a.data(), b.data(), n), mag_wd);
      expect_close(v->weighted_sq_diff_sum(w.data(), a.data(), b.data(), n),
                   ref.weighted_sq_diff_sum(w.data(), a.data(), b.data(), n), mag_wsd);
      // Elementwise kernels and max are exact.
      EXPECT_EQ(v->max_abs_diff(a.data(), b.data(), n), ref.max_abs_diff(a.data(), b.data(), n));
      std::vector<double> got(n), want(n);
      v->lagged_product(a.data(), b.data(), lag, n, got.data());
      ref.lagged_product(a.data(), b.data(), lag, n, want.data());
      EXPECT_EQ(got, want);
      v->weighted_increment(w.data(), a.data(), lag, n, got.data());
      ref.weighted_increment(w.data(), a.data(), lag, n, want.data());
      EXPECT_EQ(got, want);
    }
  }
}

TEST(Simd, MaxHandlesSignedZeroAndInfinity) {
  const auto& ref = regcalc::simd::scalar_kernels();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> a(13, 0.0), b(13, -0.0);
  a[11] = inf;
  for (const KernelTable* v : variants()) {
    EXPECT_EQ(v->max_abs_diff(a.data(), b.data(), 11), 0.0);
    EXPECT_EQ(v->max_abs_diff(a.data(), b.data(), 13), inf);
  }
  EXPECT_EQ(ref.max_abs_diff(a.data(), b.data(), 13), inf);
}

TEST(Simd, SelectAndParse) {
  using regcalc::simd::Isa;
  const Isa before = regcalc::simd::active().isa;
  EXPECT_TRUE(regcalc::simd::select(Isa::scalar));
  EXPECT_EQ(regcalc::simd::active().isa, Isa::scalar);
  EXPECT_EQ(regcalc::simd::parse_isa("avx2"), Isa::avx2);
  EXPECT_FALSE(regcalc::simd::parse_isa("sse9").has_value());
  if (!regcalc::simd::neon_kernels()) EXPECT_FALSE(regcalc::simd::select(Isa::neon));
  EXPECT_TRUE(regcalc::simd::select(before));
}
