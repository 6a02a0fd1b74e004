#include <gtest/gtest.h>

#include <cmath>

#include "regcalc/chi_qv.hpp"
#include "regcalc/error.hpp"
#include "support.hpp"

using namespace regcalc;

namespace {

double trap(int k, int l, double mesh) { return (k == 0 || k == l ? 0.5 : 1.0) * mesh; }

// Double-loop pairing straight from the kernel values.
double pair_oracle(const ChiElement& phi, const WindowSegment& eta) {
  const int l = eta.lag_nodes();
  const double h = eta.mesh(), e0 = eta.head();
  auto bulk = [&](const L2Kernel& k) {
    double s = 0.0;
    for (int i = 0; i <= l; ++i)
      for (int j = 0; j <= l; ++j) s += trap(i, l, h) * trap(j, l, h) * k.at(i, j) * eta[i] * eta[j];
    return s;
  };
  if (auto* a = std::get_if<Atomic00>(&phi)) return a->lambda * e0 * e0;
  if (auto* k = std::get_if<L2Kernel>(&phi)) return bulk(*k);
  if (auto* d = std::get_if<DiagKernel>(&phi)) {
    double s = 0.0;
    for (int i = 0; i <= l; ++i) s += trap(i, l, h) * d->g[i] * eta[i] * eta[i];
    return s;
  }
  const auto& c = std::get<Chi0>(phi);
  double s = c.lambda * e0 * e0 + bulk(c.bulk);
  for (int i = 0; i <= l; ++i) s += trap(i, l, h) * (c.left[i] + c.right[i]) * e0 * eta[i];
  return s;
}

L2Kernel random_separable(testing_support::Gen& gen, int l) {
  std::vector<L2Kernel::Term> terms;
  for (int r = gen.integer(1, 3); r > 0; --r)
    terms.push_back({gen.normal(), gen.normals(l + 1), gen.normals(l + 1)});
  return L2Kernel::separable(l, terms);
}

L2Kernel densify(const L2Kernel& k) {
  const int n = k.lag_nodes() + 1;
  std::vector<double> m(n * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) m[i * n + j] = k.at(i, j);
  return L2Kernel::dense(k.lag_nodes(), m);
}

ChiElement random_chi(testing_support::Gen& gen, int l) {
  switch (gen.integer(0, 3)) {
    case 0: return Atomic00{gen.normal()};
    case 1: return gen.integer(0, 1) ? random_separable(gen, l) : densify(random_separable(gen, l));
    case 2: return DiagKernel{gen.normals(l + 1)};
    default: return Chi0{gen.normal(), gen.normals(l + 1), gen.normals(l + 1), random_separable(gen, l)};
  }
}

}  // namespace

TEST(ChiPairing, MatchesDoubleLoop) {
  testing_support::Gen gen(41);
  for (int trial = 0; trial < 200; ++trial) {
    const double mesh = 0.05;
    const int l = gen.integer(1, 24);
    const auto eta = gen.segment(l * mesh, mesh);
    const ChiElement phi = random_chi(gen, l);
    const double want = pair_oracle(phi, eta);
    EXPECT_NEAR(pair_chi(phi, eta), want, 1e-11 * (1 + std::fabs(want))) << tag_name(tag_of(phi));
  }
}

TEST(ChiPairing, SeparableAndDenseAgree) {
  testing_support::Gen gen(42);
  for (int trial = 0; trial < 30; ++trial) {
    const int l = gen.integer(1, 40);
    const auto k = random_separable(gen, l);
    const auto eta = gen.segment(l * 0.01, 0.01);
    EXPECT_NEAR(pair_chi(k, eta), pair_chi(densify(k), eta), 1e-11);
    EXPECT_NEAR(k.norm(0.01), densify(k).norm(0.01), 1e-11);
  }
}

// |<phi, eta (x) eta>| <= c ||phi|| sup|eta|^2
TEST(ChiPairing, BoundedByNormTimesSupSquared) {
  testing_support::Gen gen(43);
  for (int trial = 0; trial < 300; ++trial) {
    const int l = gen.integer(1, 30);
    const double mesh = gen.uniform(0.005, 0.2);
    const double lag = l * mesh;
    const auto eta = gen.segment(lag, mesh);
    const ChiElement phi = random_chi(gen, l);
    const double s = sup_norm(eta);
    EXPECT_LE(std::fabs(pair_chi(phi, eta)),
              pairing_constant(phi, lag) * chi_norm(phi, mesh) * s * s * (1 + 1e-12))
        << tag_name(tag_of(phi));
  }
}

TEST(ChiPairing, ScalingIsLinear) {
  testing_support::Gen gen(44);
  for (int trial = 0; trial < 50; ++trial) {
    const int l = gen.integer(1, 10);
    const auto eta = gen.segment(l * 0.1, 0.1);
    const ChiElement phi = random_chi(gen, l);
    const double c = gen.uniform(-3, 3);
    EXPECT_NEAR(pair_chi(scaled(phi, c), eta), c * pair_chi(phi, eta), 1e-11);
    EXPECT_NEAR(chi_norm(scaled(phi, c), 0.1), std::fabs(c) * chi_norm(phi, 0.1), 1e-11);
  }
}

TEST(ChiPairing, LagMismatchIsRejected) {
  const WindowSegment eta(0.5, 0.1, 0.0, std::vector<double>(6, 1.0));
  EXPECT_THROW(pair_chi(DiagKernel{std::vector<double>(4, 1.0)}, eta), LagMismatch);
  EXPECT_THROW(pair_chi(L2Kernel::constant(3, 1.0), eta), LagMismatch);
  EXPECT_THROW(pair_chi(Chi0{1.0, std::vector<double>(3, 1.0), {}, L2Kernel::zero(5)}, eta), LagMismatch);
  EXPECT_NO_THROW(pair_chi(Atomic00{1.0}, eta));
}

TEST(ChiQV, AtomicIsScaledCovariation) {
  testing_support::Gen gen(45);
  const TimeGrid g(1.0, 200);
  const Path x = gen.walk(g);
  for (int m : {1, 3, 7}) {
    const double eps = m * g.mesh();
    const Path a = chi_qv_eps(x, 0.25, Atomic00{2.5}, eps);
    const Path c = covariation_eps(x, x, eps);
    for (std::size_t i = 0; i < x.size(); ++i) ASSERT_NEAR(a[i], 2.5 * c[i], 1e-12);
  }
  EXPECT_THROW(chi_qv_eps(x, 0.25, Atomic00{1.0}, 0.25), InvalidArgument);
  EXPECT_THROW(chi_qv_eps(x, 0.25, DiagKernel{std::vector<double>(10, 1.0)}, 0.01), LagMismatch);
}

TEST(ChiQV, MatchesWindowIncrementOracle) {
  testing_support::Gen gen(46);
  const TimeGrid g(1.0, 40);
  const Path x = gen.walk(g);
  const double lag = 0.25, eps = 2 * g.mesh();
  for (int trial = 0; trial < 8; ++trial) {
    const ChiElement phi = random_chi(gen, 10);
    const Path q = chi_qv_eps(x, lag, phi, eps);
    double s = 0.0;
    for (int j = 0; j < 40; ++j) {
      s += pair_oracle(phi, window_increment(x, g.node(j), lag, eps)) / 2.0;
      ASSERT_NEAR(q[j + 1], s, 1e-11 * (1 + std::fabs(s)));
    }
  }
}

TEST(ChiQV, DiagReferenceClosedForms) {
  const TimeGrid g(1.0, 64);
  const double lag = 0.25;
  const Path qv = path_from_function(g, [](double t) { return t; });
  const std::vector<double> ones(17, 1.0);
  const Path r = diag_reference_path(ones, qv, lag);
  for (int i = 0; i <= 64; ++i) {
    const double t = g.node(i);
    const double want = t <= lag ? 0.5 * t * t : lag * t - 0.5 * lag * lag;
    EXPECT_NEAR(r[i], want, 1e-14);
  }
  EXPECT_EQ(diag_reference(ones, qv, 0.0, lag), 0.0);
}

TEST(ChiQV, ChiZeroReferenceOnlySeesTheAtom) {
  const TimeGrid g(1.0, 4);
  const Path qv(g, {0, 1, 2, 3, 4});
  const Path r = chi0_reference(Chi0{3.0, {}, {}, L2Kernel::zero(2)}, qv);
  EXPECT_EQ(r[4], 12.0);
}

TEST(GlobalNorm, MatchesDirectLoop) {
  testing_support::Gen gen(47);
  const TimeGrid g(2.0, 100);
  const Path x = gen.walk(g);
  const double lag = 0.2, eps = 3 * g.mesh();
  double want = 0.0;
  for (int j = 0; j < 100; ++j) {
    const double s = sup_norm(window_increment(x, g.node(j), lag, eps));
    want += s * s;
  }
  EXPECT_NEAR(global_norm_integral(x, lag, eps), want / 3.0, 1e-12);
  EXPECT_DOUBLE_EQ(global_norm_scale(0.1, 2.0), 0.1);
}

TEST(ChiQVSuite, SmallBrownianCase) {
  const TimeGrid g(1.0, 512);
  const EpsilonLadder ladder(g, {8, 4, 2}, 16, 0.25);
  const ProcessSource src{[&](std::uint64_t s) { return sample(GaussianSpec::brownian(), g, s); },
                          [](double t) { return t; }, "brownian"};
  const auto res = chi_qv_suite(src, 0.25, Atomic00{1.0}, ladder, 0.5, 3);
  EXPECT_EQ(res.reference_kind, "closed-form");
  EXPECT_EQ(res.estimates.size(), 3u);
  EXPECT_EQ(res.verdict, "pass");
  EXPECT_EQ(res.h1_per_replica.size(), 16u);
  // H1 surrogate for d00 is sup_eps of the eps-qv at T
  const Path x0 = src.draw(3);
  double sup = 0.0;
  for (double e : res.eps) sup = std::max(sup, covariation_eps(x0, x0, e)[512]);
  EXPECT_NEAR(res.h1_per_replica[0], sup, 1e-12);

  const ProcessSource unknown{src.draw, std::nullopt, "unknown"};
  EXPECT_EQ(chi_qv_suite(unknown, 0.25, Atomic00{1.0}, ladder, 0.5).verdict, "informational");
  const auto l2 = chi_qv_suite(unknown, 0.25, L2Kernel::constant(128, 1.0), ladder, 0.5);
  EXPECT_EQ(l2.reference_kind, "closed-form");
  const auto diag = chi_qv_suite(unknown, 0.25, DiagKernel{std::vector<double>(129, 1.0)}, ladder, 0.5);
  EXPECT_EQ(diag.reference_kind, "estimated-qv");
}
