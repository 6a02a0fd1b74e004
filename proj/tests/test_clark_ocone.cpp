#include <gtest/gtest.h>

#include <cmath>

#include "regcalc/clark_ocone.hpp"
#include "regcalc/error.hpp"
#include "support.hpp"

using namespace regcalc;

namespace {

double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }
double normal_pdf(double x) { return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI); }

// E g(x + sd G) by the trapezoid rule on [-12, 12] with 24000 cells.
double convolve(const std::function<double(double)>& g, double x, double sd) {
  const int n = 24000;
  const double h = 24.0 / n;
  double s = 0.0;
  for (int k = 0; k <= n; ++k) {
    const double z = -12.0 + k * h;
    s += (k == 0 || k == n ? 0.5 : 1.0) * g(x + sd * z) * normal_pdf(z);
  }
  return s * h;
}

double double_factorial(int n) { return n <= 1 ? 1.0 : n * double_factorial(n - 2); }

}  // namespace

TEST(GaussHermite, IntegratesPolynomialsExactly) {
  for (int q : {2, 5, 16, 64}) {
    const auto& r = gauss_hermite(q);
    ASSERT_EQ(r.nodes.size(), static_cast<std::size_t>(q));
    for (int p = 0; p < 2 * q && p <= 20; ++p) {
      double s = 0.0;
      for (int k = 0; k < q; ++k) s += r.weights[k] * std::pow(r.nodes[k], p);
      const double want = p % 2 ? 0.0 : double_factorial(p - 1);
      EXPECT_NEAR(s, want, 1e-12 * double_factorial(p)) << "q " << q << " moment " << p;
    }
  }
  EXPECT_EQ(&gauss_hermite(64), &gauss_hermite(64));
  EXPECT_THROW(gauss_hermite(1), InvalidArgument);
}

TEST(ValueFunction, SmoothClosedForms) {
  const double T = 1.5;
  const auto sq = solve_vanilla(Payoff::square(), T);
  const auto cs = solve_vanilla(Payoff::cosine(), T);
  const auto ln = solve_vanilla(Payoff::linear(), T);
  for (double t : {0.0, 0.4, 1.1, 1.5})
    for (double x : {-2.0, -0.3, 0.0, 1.7}) {
      EXPECT_NEAR(sq(t, x), x * x + (T - t), 1e-12);
      EXPECT_NEAR(sq.dx(t, x), 2 * x, 1e-12);
      EXPECT_NEAR(sq.dxx(t, x), 2.0, 1e-12);
      EXPECT_NEAR(cs(t, x), std::cos(x) * std::exp(-(T - t) / 2), 1e-13);
      EXPECT_NEAR(cs.dx(t, x), -std::sin(x) * std::exp(-(T - t) / 2), 1e-13);
      EXPECT_NEAR(ln(t, x), x, 1e-13);
    }
}

TEST(ValueFunction, CosineMatchesIndependentConvolution) {
  const double T = 1.0;
  for (int q : {32, 64, 128}) {
    const auto v = solve_vanilla(Payoff::cosine(), T, q);
    for (double t : {0.0, 0.5})
      for (double x : {-1.0, 0.0, 0.8})
        EXPECT_NEAR(v(t, x), convolve([](double y) { return std::cos(y); }, x, std::sqrt(T - t)), 1e-10);
  }
}

TEST(ValueFunction, CallAgainstBachelier) {
  const double T = 1.0, K = 0.5;
  const auto v = solve_vanilla(Payoff::call(K), T);
  for (double t : {0.0, 0.5, 0.9})
    for (double x : {-1.0, 0.0, 0.5, 1.2}) {
      const double sd = std::sqrt(T - t), d = (x - K) / sd;
      // The kink converges slowly under Gauss-Hermite; worst at the money.
      EXPECT_NEAR(v(t, x), (x - K) * normal_cdf(d) + sd * normal_pdf(d), 5e-3);
      EXPECT_NEAR(v.dx(t, x), normal_cdf(d), 2e-2);
    }
  EXPECT_EQ(v(T, 1.0), 0.5);
  EXPECT_EQ(Payoff::named("call(0.5)").f(2.0), 1.5);
  EXPECT_EQ(Payoff::named("call:-1").f(0.0), 1.0);
  EXPECT_THROW(Payoff::named("call:abc"), InvalidArgument);
  EXPECT_THROW(Payoff::named("put:1"), InvalidArgument);
}

TEST(ValueFunction, SolvesTheBackwardHeatEquation) {
  const auto times = probe_times(1.0, 8);
  const auto xs = probe_space(-2.0, 2.0, 9);
  EXPECT_EQ(times.back(), 0.875);
  EXPECT_EQ(xs[4], 0.0);
  for (const auto& p : {Payoff::square(), Payoff::cosine(), Payoff::linear()})
    EXPECT_LT(pde_residual(solve_vanilla(p, 1.0), times, xs), 1e-6) << p.name;
}

TEST(ValueFunction, QuadratureStability) {
  EXPECT_LT(quadrature_stability(Payoff::cosine(), 1.0, 64), 1e-12);
  EXPECT_LT(quadrature_stability(Payoff::call(0.5), 1.0, 64), 1e-2);
  EXPECT_GT(quadrature_stability(Payoff::call(0.5), 1.0, 64), 1e-8);
  EXPECT_THROW(solve_vanilla(Payoff::call(0.5), 1.0, 64, 1e-8), QuadratureNotConverged);
}

TEST(HedgeVanilla, LinearAndSquareIdentities) {
  testing_support::Gen gen(61);
  const TimeGrid g(1.0, 1024);
  const Path x = gen.walk(g);
  const double rv = realized_qv(x);
  const auto lin = hedge_vanilla(solve_vanilla(Payoff::linear(), 1.0), x, true);
  EXPECT_NEAR(lin.error, 0.0, 1e-12);
  EXPECT_NEAR(lin.h0, 0.0, 1e-15);
  // sum 2 X_i dX_i = X_T^2 - RV, so the error is |RV - T| exactly.
  const auto sq = hedge_vanilla(solve_vanilla(Payoff::square(), 1.0), x, true);
  EXPECT_NEAR(sq.error, std::fabs(rv - 1.0), 1e-12);
  EXPECT_EQ(sq.strategy.size(), 1024u);
  EXPECT_EQ(sq.steps, 1024);
}

TEST(HedgeVanilla, ErrorShrinksWithTheMesh) {
  const auto v = solve_vanilla(Payoff::cosine(), 1.0);
  std::vector<double> med;
  for (int n : {256, 4096}) {
    std::vector<double> errs;
    for (std::uint64_t s = 0; s < 40; ++s)
      errs.push_back(hedge_vanilla(v, sample(GaussianSpec::brownian(), TimeGrid(1.0, n), s), true).error);
    std::sort(errs.begin(), errs.end());
    med.push_back(errs[20]);
  }
  EXPECT_LT(med[1], 0.5 * med[0]);
}

TEST(HedgeVanilla, GateAndOrigin) {
  const TimeGrid g(1.0, 512);
  const auto v = solve_vanilla(Payoff::square(), 1.0);
  const Path loud = sample(GaussianSpec::scaled(GaussianSpec::brownian(), 2.0), g, 3);
  EXPECT_THROW(hedge_vanilla(v, loud), CertificationFailed);
  EXPECT_NO_THROW(hedge_vanilla(v, loud, true));
  const Path shifted = path_from_function(g, [](double t) { return 1.0 + t; });
  EXPECT_THROW(hedge_vanilla(v, shifted, true), InvalidArgument);
  EXPECT_THROW(hedge_vanilla(solve_vanilla(Payoff::square(), 2.0), loud, true), InvalidArgument);
}

TEST(HedgeWiener, ZeroQvIdentity) {
  // X_t = t, phi(s) = T - s, h = Y_N^2: the error is sum (phi_k dX_k)^2.
  const double T = 1.0;
  const TimeGrid g(T, 256);
  const Path x = path_from_function(g, [](double t) { return t; });
  const auto phi = [T](double s) { return T - s; };
  const auto r = hedge_wiener_functional(MultiPayoff::sum_of_squares(1), {phi}, x);
  double y = 0.0, want = 0.0;
  for (int k = 0; k < 256; ++k) {
    const double dy = phi(g.node(k)) * g.mesh();
    y += dy;
    want += dy * dy;
  }
  EXPECT_EQ(r.h0, 0.0);
  EXPECT_NEAR(r.payoff, y * y, 1e-13);
  EXPECT_NEAR(r.error, want, 1e-13);
  EXPECT_NEAR(y, T * T / 2 + T * g.mesh() / 2, 1e-13);
}

TEST(HedgeWiener, LinearInSeveralIntegralsIsExact) {
  const TimeGrid g(1.0, 128);
  const Path x = path_from_function(g, [](double t) { return std::sin(3 * t) / 10; });
  const std::vector<std::function<double(double)>> phis{[](double) { return 1.0; },
                                                        [](double s) { return s * s; }};
  const auto r = hedge_wiener_functional(MultiPayoff::linear({2.0, -1.0}), phis, x);
  EXPECT_NEAR(r.error, 0.0, 1e-14);
  EXPECT_THROW(hedge_wiener_functional(MultiPayoff::linear({2.0, -1.0}), phis, x,
                                       {WienerMode::brownian_qv, 64, true}),
               UnsupportedCombination);
  EXPECT_THROW(hedge_wiener_functional(MultiPayoff::linear({2.0}), phis, x), InvalidArgument);
}

TEST(HedgeWiener, ZeroQvGate) {
  const TimeGrid g(1.0, 256);
  const Path w = sample(GaussianSpec::brownian(), g, 5);
  const std::vector<std::function<double(double)>> one{[](double) { return 1.0; }};
  EXPECT_THROW(hedge_wiener_functional(MultiPayoff::sum_of_squares(1), one, w), CertificationFailed);
  EXPECT_NO_THROW(hedge_wiener_functional(MultiPayoff::sum_of_squares(1), one, w,
                                          {WienerMode::zero_qv, 64, true}));
}

TEST(HedgeWiener, BrownianModeWithUnitKernelIsVanilla) {
  const TimeGrid g(1.0, 512);
  const Path w = sample(GaussianSpec::brownian(), g, 8);
  const std::vector<std::function<double(double)>> one{[](double) { return 1.0; }};
  const auto a = hedge_wiener_functional(MultiPayoff::from_scalar(Payoff::cosine()), one, w,
                                         {WienerMode::brownian_qv, 64, true});
  const auto b = hedge_vanilla(solve_vanilla(Payoff::cosine(), 1.0), w, true);
  EXPECT_NEAR(a.h0, b.h0, 1e-12);
  EXPECT_NEAR(a.integral, b.integral, 1e-10);
  EXPECT_NEAR(a.payoff, b.payoff, 1e-12);
}

TEST(IntegratedSquare, ClosedForms) {
  EXPECT_NEAR(integrated_square([](double) { return 1.0; }, 0.25, 1.0), 0.75, 1e-14);
  EXPECT_NEAR(integrated_square([](double s) { return 1.0 - s; }, 0.0, 1.0), 1.0 / 3.0, 1e-14);
  EXPECT_EQ(integrated_square([](double s) { return s; }, 1.0, 1.0), 0.0);
  EXPECT_THROW(MultiPayoff::from_scalar(Payoff::call(0.0)), InvalidArgument);
}
