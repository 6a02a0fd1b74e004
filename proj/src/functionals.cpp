#include "regcalc/functionals.hpp"

#include <cmath>
#include <random>

#include "regcalc/error.hpp"

namespace regcalc {

ScalarFunction ScalarFunction::linear() {
  return {"linear", [](double x) { return x; }, [](double) { return 1.0; },
          [](double) { return 0.0; }};
}

ScalarFunction ScalarFunction::square() {
  return {"square", [](double x) { return x * x; }, [](double x) { return 2.0 * x; },
          [](double) { return 2.0; }};
}

ScalarFunction ScalarFunction::cosine() {
  return {"cos", [](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); },
          [](double x) { return -std::cos(x); }};
}

ScalarFunction ScalarFunction::constant(double c) {
  return {"constant", [c](double) { return c; }, [](double) { return 0.0; },
          [](double) { return 0.0; }};
}

ScalarFunction ScalarFunction::named(const std::string& name) {
  if (name == "linear") return linear();
  if (name == "square") return square();
  if (name == "cos") return cosine();
  throw InvalidArgument("unknown scalar function '" + name + "'");
}

Functional example_a(ScalarFunction f) {
  Functional out;
  out.name = "a:" + f.name;
  out.chi_tag = ChiTag::d00;
  out.eval = [f](const WindowSegment& eta) { return f.f(eta.head()); };
  out.d1 = [f](const WindowSegment& eta) {
    return SignedMeasure::dirac(eta.lag(), eta.mesh(), 0.0, f.df(eta.head()));
  };
  out.d2 = [f](const WindowSegment& eta) -> ChiElement { return Atomic00{f.d2f(eta.head())}; };
  return out;
}

Functional example_b() {
  Functional out;
  out.name = "b";
  out.chi_tag = ChiTag::l2;
  out.eval = [](const WindowSegment& eta) {
    const double i = integral(eta);
    return i * i;
  };
  out.d1 = [](const WindowSegment& eta) {
    const double c = 2.0 * integral(eta);
    return SignedMeasure::with_density(eta.lag(), eta.mesh(),
                                       std::vector<double>(eta.samples().size(), c));
  };
  out.d2 = [](const WindowSegment& eta) -> ChiElement {
    return L2Kernel::constant(eta.lag_nodes(), 2.0);
  };
  return out;
}

Functional example_c() {
  Functional out;
  out.name = "c";
  out.chi_tag = ChiTag::diag;
  out.eval = [](const WindowSegment& eta) {
    const std::vector<double> w = trapezoid_weights(eta.lag_nodes(), eta.mesh());
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * eta[k] * eta[k];
    return s;
  };
  out.d1 = [](const WindowSegment& eta) {
    std::vector<double> d(eta.samples().begin(), eta.samples().end());
    for (double& v : d) v *= 2.0;
    return SignedMeasure::with_density(eta.lag(), eta.mesh(), std::move(d));
  };
  out.d2 = [](const WindowSegment& eta) -> ChiElement {
    return DiagKernel{std::vector<double>(eta.samples().size(), 2.0)};
  };
  return out;
}

namespace {

double relative(double fd, double an) { return std::fabs(fd - an) / (std::fabs(an) + 1e-8); }

}  // namespace

FdReport fd_check(const Functional& f, const WindowSegment& eta,
                  const std::vector<WindowSegment>& directions, double h) {
  if (!(h > 0.0)) throw InvalidArgument("fd_check: h must be positive");
  FdReport rep;
  rep.h = h;
  const double f0 = f.eval(eta);
  const SignedMeasure d1 = f.d1(eta);
  const ChiElement d2 = f.d2(eta);
  for (const WindowSegment& psi : directions) {
    const double fp = f.eval(eta + psi.scaled(h));
    const double fm = f.eval(eta - psi.scaled(h));
    FdRow row;
    row.first_fd = (fp - fm) / (2.0 * h);
    row.first_analytic = pair_measure(d1, psi);
    row.first_rel = relative(row.first_fd, row.first_analytic);
    row.second_fd = (fp + fm - 2.0 * f0) / (h * h);
    row.second_analytic = pair_chi(d2, psi);
    row.second_rel = relative(row.second_fd, row.second_analytic);
    rep.max_first_rel = std::max(rep.max_first_rel, row.first_rel);
    rep.max_second_rel = std::max(rep.max_second_rel, row.second_rel);
    rep.rows.push_back(row);
  }
  return rep;
}

WindowSegment random_segment(double lag, double mesh, std::uint64_t seed) {
  const long l = std::lround(lag / mesh);
  if (l < 1) throw InvalidArgument("random_segment: lag below the mesh");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::vector<double> w(static_cast<std::size_t>(l) + 1, 0.0);
  const double sd = std::sqrt(mesh);
  for (std::size_t k = 1; k < w.size(); ++k) w[k] = w[k - 1] + sd * normal(rng);
  const double level = normal(rng);
  const double end = w.back();
  for (std::size_t k = 0; k < w.size(); ++k)
    w[k] = level + w[k] - end * static_cast<double>(k) / static_cast<double>(l);
  return WindowSegment(lag, mesh, 0.0, std::move(w));
}

}  // namespace regcalc
