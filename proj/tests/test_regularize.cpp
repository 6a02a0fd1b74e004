#include <gtest/gtest.h>

#include <cmath>

#include "regcalc/error.hpp"
#include "regcalc/regularize.hpp"
#include "regcalc/simd.hpp"
#include "support.hpp"

using namespace regcalc;

namespace {

// Straight double loops, no padding tricks.
std::vector<double> forward_oracle(const Path& y, const Path& x, int m) {
  const long n = x.grid().steps();
  std::vector<double> out(n + 1, 0.0);
  for (long i = 1; i <= n; ++i) {
    double s = 0.0;
    for (long j = 0; j < i; ++j) s += y[j] * (x.extended(j + m) - x.extended(j));
    out[i] = s / m;
  }
  return out;
}

std::vector<double> covariation_oracle(const Path& x, const Path& y, int m) {
  const long n = x.grid().steps();
  std::vector<double> out(n + 1, 0.0);
  for (long i = 1; i <= n; ++i) {
    double s = 0.0;
    for (long j = 0; j < i; ++j)
      s += (x.extended(j + m) - x.extended(j)) * (y.extended(j + m) - y.extended(j));
    out[i] = s / m;
  }
  return out;
}

}  // namespace

TEST(Regularize, EstimatorsMatchDirectLoops) {
  testing_support::Gen gen(21);
  for (int trial = 0; trial < 20; ++trial) {
    const TimeGrid g(gen.uniform(0.5, 3.0), gen.integer(8, 300));
    const Path x = gen.walk(g), y = gen.walk(g);
    const int m = gen.integer(1, g.steps() - 1);
    const Path f = forward_integral_eps(y, x, m * g.mesh());
    const Path c = covariation_eps(x, y, m * g.mesh());
    const auto fo = forward_oracle(y, x, m), co = covariation_oracle(x, y, m);
    for (std::size_t i = 0; i < f.size(); ++i) {
      ASSERT_NEAR(f[i], fo[i], 1e-11 * (1 + std::fabs(fo[i])));
      ASSERT_NEAR(c[i], co[i], 1e-11 * (1 + std::fabs(co[i])));
    }
  }
}

TEST(Regularize, MeshEpsGivesRealizedSums) {
  testing_support::Gen gen(22);
  const TimeGrid g(1.0, 200);
  const Path x = gen.walk(g);
  const Path c = covariation_eps(x, x, g.mesh());
  double rv = 0.0;
  for (std::size_t i = 1; i < x.size(); ++i) {
    rv += (x[i] - x[i - 1]) * (x[i] - x[i - 1]);
    EXPECT_NEAR(c[i], rv, 1e-12);
  }
  // sum X_j dX_j = (X_T^2 - [X]) / 2 exactly
  const Path f = forward_integral_eps(x, x, g.mesh());
  EXPECT_NEAR(f[200], 0.5 * (x[200] * x[200] - rv), 1e-12);
}

TEST(Regularize, CovariationIsSymmetricAndBilinear) {
  testing_support::Gen gen(23);
  const TimeGrid g(1.0, 128);
  const Path x = gen.walk(g), y = gen.walk(g);
  const double eps = 4 * g.mesh();
  const Path a = covariation_eps(x, y, eps), b = covariation_eps(y, x, eps);
  const Path s = covariation_eps(combine(1, x, 1, y), combine(1, x, 1, y), eps);
  const Path xx = covariation_eps(x, x, eps), yy = covariation_eps(y, y, eps);
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i], b[i]);
    EXPECT_NEAR(s[i], xx[i] + yy[i] + 2 * a[i], 1e-12);
  }
  const Path pts[] = {x, y};
  const auto mc = mutual_covariations(pts, eps);
  EXPECT_EQ(mc[0][1][100], mc[1][0][100]);
  EXPECT_EQ(mc[0][0][100], xx[100]);
}

TEST(Regularize, RejectsBadArguments) {
  const TimeGrid g(1.0, 16), h(1.0, 32);
  const Path x(g, std::vector<double>(17, 0.0)), z(h, std::vector<double>(33, 0.0));
  EXPECT_THROW(forward_integral_eps(x, z, 1.0 / 16), GridMismatch);
  EXPECT_THROW(covariation_eps(x, x, 0.03), InvalidArgument);
  EXPECT_THROW(covariation_eps(x, x, 1.0), InvalidArgument);
  EXPECT_THROW(EpsilonLadder(g, {4, 4}, 10), InvalidArgument);
  EXPECT_THROW(EpsilonLadder(g, {4, 8}, 10), InvalidArgument);
  EXPECT_THROW(EpsilonLadder(g, {8, 4}, 0), InvalidArgument);
  EXPECT_THROW(EpsilonLadder(g, {16}, 10), InvalidArgument);
  EXPECT_THROW(EpsilonLadder(g, {8, 4}, 10, 0.25), InvalidArgument);
  EXPECT_NO_THROW(EpsilonLadder(g, {3, 2}, 10, 0.25));
}

TEST(Regularize, Quantiles) {
  EXPECT_DOUBLE_EQ(quantile({1, 2, 3, 4}, 0.9), 3.7);
  EXPECT_DOUBLE_EQ(quantile({4, 1, 3, 2}, 0.5), 2.5);
  EXPECT_EQ(quantile({5}, 0.9), 5);
  EXPECT_EQ(quantile({1, 2, 3}, 0.0), 1);
  EXPECT_EQ(quantile({1, 2, 3}, 1.0), 3);
  EXPECT_THROW(quantile({}, 0.5), InvalidArgument);
}

TEST(Regularize, AssessAllowsTwentyPercentSlack) {
  const TimeGrid g(1.0, 64);
  const EpsilonLadder ladder(g, {8, 4, 2}, 1);
  auto r = assess(ladder, {{0.10}, {0.119}, {0.04}}, 0.05);
  EXPECT_TRUE(r.monotone);
  EXPECT_TRUE(r.small_enough);
  EXPECT_TRUE(r.pass);
  r = assess(ladder, {{0.10}, {0.121}, {0.04}}, 0.05);
  EXPECT_FALSE(r.monotone);
  EXPECT_FALSE(r.pass);
  r = assess(ladder, {{0.10}, {0.08}, {0.05}}, 0.05);
  EXPECT_FALSE(r.small_enough);
  EXPECT_EQ(r.verdict(), "fail");
  EXPECT_EQ(r.rows[1].eps, 4.0 / 64);
}

TEST(Regularize, ConvergeIsDeterministicAndIsaIndependent) {
  const TimeGrid g(1.0, 512);
  const EpsilonLadder ladder(g, {16, 8, 4}, 12);
  const auto spec = GaussianSpec::brownian();
  auto est = [&](std::uint64_t seed, double eps) {
    const Path x = sample(spec, g, seed);
    return covariation_eps(x, x, eps);
  };
  auto target = [&](std::uint64_t) { return path_from_function(g, [](double t) { return t; }); };
  const auto a = converge(est, target, ladder, 0.1, 5);
  const auto b = converge(est, target, ladder, 0.1, 5);
  for (std::size_t k = 0; k < a.rows.size(); ++k) {
    EXPECT_EQ(a.rows[k].median, b.rows[k].median);
    EXPECT_EQ(a.rows[k].q90, b.rows[k].q90);
  }
  const auto before = simd::active().isa;
  ASSERT_TRUE(simd::select(simd::Isa::scalar));
  const auto c = converge(est, target, ladder, 0.1, 5);
  simd::select(before);
  for (std::size_t k = 0; k < a.rows.size(); ++k)
    EXPECT_NEAR(a.rows[k].median, c.rows[k].median, 1e-12);
}

TEST(Regularize, ConvergeUsesConsecutiveSeeds) {
  const TimeGrid g(1.0, 64);
  const EpsilonLadder ladder(g, {2}, 3);
  std::vector<std::uint64_t> seen;
  auto est = [&](std::uint64_t seed, double) {
#pragma omp critical
    seen.push_back(seed);
    return path_from_function(g, [&](double) { return static_cast<double>(seed); });
  };
  auto target = [&](std::uint64_t) { return path_from_function(g, [](double) { return 0.0; }); };
  const auto r = converge(est, target, ladder, 100.0, 40);
  std::sort(seen.begin(), seen.end());
  EXPECT_EQ(seen, (std::vector<std::uint64_t>{40, 41, 42}));
  EXPECT_EQ(r.rows[0].median, 41);
}

TEST(Regularize, ErrorStatistics) {
  const TimeGrid g(1.0, 4);
  const Path a(g, {0, 1, 5, 2, 3}), b(g, {0, 0, 0, 0, 0});
  EXPECT_EQ(error_statistic(a, b, ErrorStatistic::sup_over_grid), 5);
  EXPECT_EQ(error_statistic(a, b, ErrorStatistic::terminal), 3);
}

TEST(Regularize, ImproperValueExtrapolatesLinearly) {
  const TimeGrid g(1.0, 10);
  const Path f = path_from_function(g, [](double t) { return t < 0.75 ? 2 * t : 99.0; });
  EXPECT_NEAR(improper_forward_value(f, 0.3), 2.0, 1e-12);
}

TEST(Regularize, PaddingAndRunningSum) {
  const TimeGrid g(1.0, 3);
  const Path x(g, {1, 2, 3, 4});
  EXPECT_EQ(detail::padded_values(x, 2, 1), (std::vector<double>{1, 1, 1, 2, 3, 4, 4}));
  const std::vector<double> t{1, 2, 3};
  EXPECT_EQ(detail::running_sum(t, 0.5), (std::vector<double>{0, 0.5, 1.5, 3}));
}
