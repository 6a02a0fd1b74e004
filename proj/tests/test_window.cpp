#include <gtest/gtest.h>

#include <cmath>

#include "regcalc/error.hpp"
#include "regcalc/regularize.hpp"
#include "regcalc/window.hpp"
#include "support.hpp"

using namespace regcalc;

TEST(Window, OnNodeWindowsReadNodeValues) {
  const TimeGrid g(1.0, 8);
  const Path x(g, {0, 1, 2, 3, 4, 5, 6, 7, 8});
  const WindowSegment w = window_at(x, 0.25, 0.5);
  EXPECT_EQ(w.lag_nodes(), 4);
  EXPECT_EQ(std::vector<double>(w.samples().begin(), w.samples().end()),
            (std::vector<double>{0, 0, 0, 1, 2}));
  EXPECT_EQ(w.head(), x[2]);
  EXPECT_DOUBLE_EQ(w.location(0), -0.5);
  EXPECT_EQ(w.location(4), 0.0);
  const WindowSegment off = window_at(x, 0.3125, 0.25);
  EXPECT_DOUBLE_EQ(off.head(), 2.5);
  // past T the path is frozen at X_T = 8
  const WindowSegment inc = window_increment(x, 1.0, 0.25, 0.25);
  EXPECT_EQ(std::vector<double>(inc.samples().begin(), inc.samples().end()),
            (std::vector<double>{2, 1, 0}));
  EXPECT_EQ(sup_norm(window_increment(x, 1.25, 0.25, 0.25)), 0.0);
  EXPECT_THROW(window_at(x, 0.5, 0.3), InvalidArgument);
  EXPECT_THROW(window_at(x, 0.5, 2.0), InvalidArgument);
}

TEST(Window, TrapezoidIntegral) {
  const TimeGrid g(1.0, 100);
  const Path x = path_from_function(g, [](double t) { return t * t; });
  // int_{-1/2}^0 (1 + u)^2 du = 7/24, trapezoid error h^2/6 * 1/2
  const double got = integral(window_at(x, 1.0, 0.5));
  EXPECT_NEAR(got, 7.0 / 24.0 + 1e-4 / 12.0, 1e-13);
  const auto w = trapezoid_weights(3, 0.5);
  EXPECT_EQ(w, (std::vector<double>{0.25, 0.5, 0.5, 0.25}));
}

TEST(Window, SegmentArithmetic) {
  const WindowSegment a(0.5, 0.25, 0, {1, 2, 3}), b(0.5, 0.25, 0, {0, 1, 5});
  EXPECT_EQ((a - b)[2], -2);
  EXPECT_EQ((a + b)[1], 3);
  EXPECT_EQ(a.scaled(-2)[0], -2);
  EXPECT_THROW(WindowSegment(0.5, 0.25, 0, {1, 2}), LagMismatch);
}

TEST(SignedMeasure, AtomsMustSitOnLagNodes) {
  EXPECT_THROW(SignedMeasure::dirac(1.0, 0.25, -0.3), InvalidArgument);
  EXPECT_THROW(SignedMeasure::dirac(1.0, 0.25, 0.25), InvalidArgument);
  EXPECT_THROW(SignedMeasure::dirac(1.0, 0.25, -1.25), InvalidArgument);
  EXPECT_THROW(SignedMeasure::dirac(1.0, 0.25, 0.0, INFINITY), InvalidArgument);
  EXPECT_THROW(SignedMeasure::with_density(1.0, 0.25, {1, 2}), LagMismatch);
  const auto mu = SignedMeasure::dirac(1.0, 0.25, -0.75, 2.0) + SignedMeasure::dirac(1.0, 0.25, 0.0, 3.0);
  EXPECT_EQ(mu.atom_node(0), 1);
  EXPECT_EQ(mu.mass_at_zero(), 3.0);
  EXPECT_EQ(mu.total_variation(), 5.0);
}

TEST(SignedMeasure, PairingMatchesDirectSum) {
  testing_support::Gen gen(31);
  for (int trial = 0; trial < 50; ++trial) {
    const double mesh = 0.125, lag = mesh * gen.integer(1, 20);
    const auto eta = gen.segment(lag, mesh);
    const int l = eta.lag_nodes();
    std::vector<SignedMeasure::Atom> atoms;
    const int na = gen.integer(0, 3);
    double want = 0.0;
    for (int i = 0; i < na; ++i) {
      const int k = gen.integer(0, l);
      const double w = gen.normal();
      atoms.push_back({-lag + k * mesh, w});
      want += w * eta[k];
    }
    auto density = gen.normals(l + 1);
    for (int k = 0; k <= l; ++k)
      want += (k == 0 || k == l ? 0.5 : 1.0) * mesh * density[k] * eta[k];
    const SignedMeasure mu(lag, mesh, atoms, density);
    EXPECT_NEAR(pair_measure(mu, eta), want, 1e-12 * (1 + std::fabs(want)));
    // linear in the measure
    EXPECT_NEAR(pair_measure(mu.scaled(3.0) + mu, eta), 4.0 * pair_measure(mu, eta),
                1e-11 * (1 + std::fabs(want)));
    // |<mu, eta>| <= |mu|_TV sup|eta|
    EXPECT_LE(std::fabs(pair_measure(mu, eta)), mu.total_variation() * sup_norm(eta) + 1e-12);
  }
  EXPECT_THROW(pair_measure(SignedMeasure::zero(1.0, 0.25), WindowSegment(0.5, 0.25, 0, {1, 2, 3})),
               LagMismatch);
}

TEST(BanachForward, DiracAtZeroReducesToScalarForward) {
  testing_support::Gen gen(32);
  const TimeGrid g(1.0, 256);
  const Path x = gen.walk(g);
  for (int m : {1, 4, 16}) {
    const double eps = m * g.mesh();
    const Path b = banach_forward_integral_eps(
        [&](std::size_t j) { return SignedMeasure::dirac(0.25, g.mesh(), 0.0, x[j]); }, x, 0.25, eps);
    const Path f = forward_integral_eps(x, x, eps);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_EQ(b[i], f[i]);
  }
}

TEST(BanachForward, MatchesWindowIncrementOracle) {
  testing_support::Gen gen(33);
  const TimeGrid g(1.0, 64);
  const Path x = gen.walk(g);
  const double lag = 0.25, eps = 3 * g.mesh();
  const int l = 16;
  const auto density = gen.normals(l + 1);
  const auto mu = SignedMeasure(lag, g.mesh(), {{-0.125, 0.7}}, density);
  const Path b = banach_forward_integral_eps([&](std::size_t) { return mu; }, x, lag, eps);
  double s = 0.0;
  for (int j = 0; j < 64; ++j) {
    s += pair_measure(mu, window_increment(x, g.node(j), lag, eps)) / 3.0;
    ASSERT_NEAR(b[j + 1], s, 1e-12);
  }
  EXPECT_THROW(banach_forward_integral_eps([&](std::size_t) { return SignedMeasure::zero(0.5, g.mesh()); },
                                           x, lag, eps),
               LagMismatch);
}
