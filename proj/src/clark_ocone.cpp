#include "regcalc/clark_ocone.hpp"

#include <Eigen/Eigenvalues>
#include <boost/math/quadrature/gauss_kronrod.hpp>
#include <cmath>
#include <map>
#include <mutex>

#include "regcalc/error.hpp"

namespace regcalc {

Payoff Payoff::linear() {
  return {"linear", [](double x) { return x; }, [](double) { return 1.0; },
          [](double) { return 0.0; }};
}

Payoff Payoff::square() {
  return {"square", [](double x) { return x * x; }, [](double x) { return 2.0 * x; },
          [](double) { return 2.0; }};
}

Payoff Payoff::cosine() {
  return {"cos", [](double x) { return std::cos(x); }, [](double x) { return -std::sin(x); },
          [](double x) { return -std::cos(x); }};
}

Payoff Payoff::call(double strike) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "call:%.17g", strike);
  return {buf, [strike](double x) { return std::max(x - strike, 0.0); }, {}, {}};
}

Payoff Payoff::named(const std::string& name) {
  if (name == "linear") return linear();
  if (name == "square") return square();
  if (name == "cos") return cosine();
  std::string arg;
  if (name.rfind("call:", 0) == 0) arg = name.substr(5);
  else if (name.rfind("call(", 0) == 0 && name.back() == ')') arg = name.substr(5, name.size() - 6);
  else throw InvalidArgument("unknown payoff '" + name + "' (linear, square, cos, call:K)");
  std::size_t used = 0;
  double k = 0.0;
  try {
    k = std::stod(arg, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != arg.size() || !std::isfinite(k))
    throw InvalidArgument("call payoff: bad strike '" + arg + "'");
  return call(k);
}

// ---------------------------------------------------------------------------

const GaussHermite& gauss_hermite(int q) {
  if (q < 2 || q > 1024) throw InvalidArgument("gauss_hermite: node count must be in [2, 1024]");
  static std::mutex mu;
  static std::map<int, std::unique_ptr<GaussHermite>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[q];
  if (!slot) {
    Eigen::VectorXd diag = Eigen::VectorXd::Zero(q);
    Eigen::VectorXd sub(q - 1);
    for (int k = 1; k < q; ++k) sub[k - 1] = std::sqrt(static_cast<double>(k));
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es;
    es.computeFromTridiagonal(diag, sub, Eigen::ComputeEigenvectors);
    auto rule = std::make_unique<GaussHermite>();
    rule->nodes.resize(static_cast<std::size_t>(q));
    rule->weights.resize(static_cast<std::size_t>(q));
    for (int k = 0; k < q; ++k) {
      const double v0 = es.eigenvectors()(0, k);
      rule->nodes[static_cast<std::size_t>(k)] = es.eigenvalues()[k];
      rule->weights[static_cast<std::size_t>(k)] = v0 * v0;
    }
    // The rule is symmetric; average mirrored pairs so odd moments vanish.
    auto& z = rule->nodes;
    auto& w = rule->weights;
    for (int k = 0; k < q / 2; ++k) {
      const std::size_t a = static_cast<std::size_t>(k), b = static_cast<std::size_t>(q - 1 - k);
      const double zk = 0.5 * (z[b] - z[a]);
      const double wk = 0.5 * (w[a] + w[b]);
      z[a] = -zk;
      z[b] = zk;
      w[a] = wk;
      w[b] = wk;
    }
    if (q % 2) z[static_cast<std::size_t>(q / 2)] = 0.0;
    slot = std::move(rule);
  }
  return *slot;
}

ValueFunction::ValueFunction(Payoff payoff, double horizon, int q, Variance remaining)
    : payoff_(std::move(payoff)),
      horizon_(horizon),
      q_(q),
      remaining_(std::move(remaining)),
      rule_(&gauss_hermite(q)) {
  if (!(horizon > 0.0)) throw InvalidArgument("value function: horizon must be positive");
  if (!payoff_.f) throw InvalidArgument("value function: payoff has no f");
}

namespace {

double sigma_at(const ValueFunction::Variance& s, double t) {
  return std::sqrt(std::max(s(t), 0.0));
}

}  // namespace

double ValueFunction::operator()(double t, double x) const {
  const double sd = sigma_at(remaining_, t);
  if (sd == 0.0) return payoff_.f(x);
  double s = 0.0;
  for (std::size_t k = 0; k < rule_->nodes.size(); ++k)
    s += rule_->weights[k] * payoff_.f(x + sd * rule_->nodes[k]);
  return s;
}

double ValueFunction::dx(double t, double x) const {
  const double sd = sigma_at(remaining_, t);
  const auto& z = rule_->nodes;
  const auto& w = rule_->weights;
  double s = 0.0;
  if (payoff_.smooth()) {
    if (sd == 0.0) return payoff_.df(x);
    for (std::size_t k = 0; k < z.size(); ++k) s += w[k] * payoff_.df(x + sd * z[k]);
    return s;
  }
  if (sd == 0.0) {
    const double h = 1e-7 * std::max(1.0, std::fabs(x));
    return (payoff_.f(x + h) - payoff_.f(x - h)) / (2.0 * h);
  }
  for (std::size_t k = 0; k < z.size(); ++k) s += w[k] * payoff_.f(x + sd * z[k]) * z[k];
  return s / sd;
}

double ValueFunction::dxx(double t, double x) const {
  const double sd = sigma_at(remaining_, t);
  const auto& z = rule_->nodes;
  const auto& w = rule_->weights;
  double s = 0.0;
  if (payoff_.smooth()) {
    if (sd == 0.0) return payoff_.d2f(x);
    for (std::size_t k = 0; k < z.size(); ++k) s += w[k] * payoff_.d2f(x + sd * z[k]);
    return s;
  }
  if (sd == 0.0) return 0.0;
  for (std::size_t k = 0; k < z.size(); ++k)
    s += w[k] * payoff_.f(x + sd * z[k]) * (z[k] * z[k] - 1.0);
  return s / (sd * sd);
}

double ValueFunction::dt(double t, double x) const {
  const double h = 1e-4 * horizon_;
  if (t + h > horizon_) return ((*this)(t, x) - (*this)(t - h, x)) / h;
  return ((*this)(t + h, x) - (*this)(t - h, x)) / (2.0 * h);
}

// ---------------------------------------------------------------------------

double quadrature_stability(const Payoff& f, double horizon, int q) {
  const auto remaining = [horizon](double t) { return horizon - t; };
  const ValueFunction a(f, horizon, q, remaining);
  const ValueFunction b(f, horizon, 2 * q, remaining);
  double worst = 0.0;
  const auto note = [&](double x, double y) {
    worst = std::max(worst, std::fabs(x - y) / std::max(std::fabs(y), 1.0));
  };
  for (int i = 0; i < 4; ++i) {
    const double t = horizon * i / 4.0;
    for (int j = 0; j <= 12; ++j) {
      const double x = -3.0 + 0.5 * j;
      note(a(t, x), b(t, x));
      note(a.dx(t, x), b.dx(t, x));
      note(a.dxx(t, x), b.dxx(t, x));
    }
  }
  return worst;
}

ValueFunction solve_vanilla(const Payoff& f, double horizon, int q,
                            std::optional<double> stability) {
  const double tol = stability.value_or(f.smooth() ? 1e-8 : 1e-2);
  const double change = quadrature_stability(f, horizon, q);
  if (!(change <= tol)) {
    char buf[160];
    std::snprintf(buf, sizeof buf,
                  "payoff '%s': doubling %d Gauss-Hermite nodes changes the value by %.3g (> %.3g)",
                  f.name.c_str(), q, change, tol);
    throw QuadratureNotConverged(buf);
  }
  return ValueFunction(f, horizon, q, [horizon](double t) { return horizon - t; });
}

double pde_residual(const ValueFunction& v, std::span<const double> times,
                    std::span<const double> xs) {
  const double h = 1e-4 * v.horizon();
  double worst = 0.0;
  for (double t : times) {
    const double ds = (t + h > v.horizon())
                          ? (v.remaining_variance(t) - v.remaining_variance(t - h)) / h
                          : (v.remaining_variance(t + h) - v.remaining_variance(t - h)) / (2.0 * h);
    for (double x : xs) worst = std::max(worst, std::fabs(v.dt(t, x) - 0.5 * ds * v.dxx(t, x)));
  }
  return worst;
}

std::vector<double> probe_times(double horizon, int n) {
  std::vector<double> t(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) t[static_cast<std::size_t>(k)] = horizon * k / n;
  return t;
}

std::vector<double> probe_space(double lo, double hi, int n) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k)
    x[static_cast<std::size_t>(k)] = n == 1 ? lo : lo + (hi - lo) * k / (n - 1);
  return x;
}

// ---------------------------------------------------------------------------

double realized_qv(const Path& x) {
  double s = 0.0;
  for (std::size_t i = 0; i + 1 < x.size(); ++i) {
    const double d = x[i + 1] - x[i];
    s += d * d;
  }
  return s;
}

namespace {

void require_origin(const Path& x) {
  if (x.front() != 0.0) throw InvalidArgument("hedging requires X_0 = 0");
}

void gate(bool failed, bool override_gate, const std::string& what) {
  if (failed && !override_gate) throw CertificationFailed(what);
}

std::string describe_qv(double rv, double horizon) {
  char buf[128];
  std::snprintf(buf, sizeof buf, "realized QV %.4g over horizon %.4g", rv, horizon);
  return buf;
}

}  // namespace

HedgeResult hedge_vanilla(const ValueFunction& v, const Path& x, bool override_gate) {
  require_origin(x);
  const TimeGrid& g = x.grid();
  if (std::fabs(g.horizon() - v.horizon()) > 1e-12 * v.horizon())
    throw InvalidArgument("hedge: path and value function horizons differ");
  HedgeResult res;
  res.steps = g.steps();
  res.horizon = g.horizon();
  res.realized_qv = realized_qv(x);
  gate(std::fabs(res.realized_qv - g.horizon()) > 0.1 * g.horizon(), override_gate,
       describe_qv(res.realized_qv, g.horizon()) + " is not within 10% of the horizon");

  res.h0 = v(0.0, 0.0);
  res.strategy.resize(static_cast<std::size_t>(g.steps()));
  for (std::size_t i = 0; i < res.strategy.size(); ++i) {
    res.strategy[i] = v.dx(g.node(static_cast<long>(i)), x[i]);
    res.integral += res.strategy[i] * (x[i + 1] - x[i]);
  }
  res.payoff = v.payoff().f(x.back());
  res.error = std::fabs(res.payoff - res.h0 - res.integral);
  return res;
}

// ---------------------------------------------------------------------------

MultiPayoff MultiPayoff::from_scalar(const Payoff& p) {
  if (!p.smooth()) throw InvalidArgument("wiener functional: payoff needs a derivative");
  MultiPayoff m;
  m.arity = 1;
  m.f = [p](std::span<const double> y) { return p.f(y[0]); };
  m.grad = [p](std::span<const double> y, std::span<double> g) { g[0] = p.df(y[0]); };
  m.scalar = p;
  return m;
}

MultiPayoff MultiPayoff::linear(std::vector<double> coeffs) {
  MultiPayoff m;
  m.arity = coeffs.size();
  m.f = [coeffs](std::span<const double> y) {
    double s = 0.0;
    for (std::size_t i = 0; i < coeffs.size(); ++i) s += coeffs[i] * y[i];
    return s;
  };
  m.grad = [coeffs](std::span<const double>, std::span<double> g) {
    for (std::size_t i = 0; i < coeffs.size(); ++i) g[i] = coeffs[i];
  };
  if (coeffs.size() == 1) {
    const double c = coeffs[0];
    m.scalar = Payoff{"linear", [c](double x) { return c * x; }, [c](double) { return c; },
                      [](double) { return 0.0; }};
  }
  return m;
}

MultiPayoff MultiPayoff::sum_of_squares(std::size_t n) {
  MultiPayoff m;
  m.arity = n;
  m.f = [](std::span<const double> y) {
    double s = 0.0;
    for (double v : y) s += v * v;
    return s;
  };
  m.grad = [](std::span<const double> y, std::span<double> g) {
    for (std::size_t i = 0; i < y.size(); ++i) g[i] = 2.0 * y[i];
  };
  if (n == 1) m.scalar = Payoff::square();
  return m;
}

double integrated_square(const std::function<double(double)>& phi, double t, double horizon) {
  if (t >= horizon) return 0.0;
  using boost::math::quadrature::gauss_kronrod;
  return gauss_kronrod<double, 31>::integrate([&](double s) { return phi(s) * phi(s); }, t,
                                              horizon, 15, 1e-13);
}

HedgeResult hedge_wiener_functional(const MultiPayoff& f,
                                    const std::vector<std::function<double(double)>>& phi,
                                    const Path& x, const WienerOptions& options) {
  require_origin(x);
  if (phi.size() != f.arity || phi.empty())
    throw InvalidArgument("wiener functional: one kernel per payoff argument expected");
  if (options.mode == WienerMode::brownian_qv && (f.arity != 1 || !f.scalar))
    throw UnsupportedCombination(
        "wiener functional: the Brownian mode supports one integral with a scalar payoff");

  const TimeGrid& g = x.grid();
  const double horizon = g.horizon();
  const std::size_t n = static_cast<std::size_t>(g.steps());
  const std::size_t d = f.arity;

  HedgeResult res;
  res.steps = g.steps();
  res.horizon = horizon;
  res.realized_qv = realized_qv(x);
  if (options.mode == WienerMode::zero_qv)
    gate(res.realized_qv > 0.1 * horizon, options.override_gate,
         describe_qv(res.realized_qv, horizon) + " exceeds 10% of the horizon");
  else
    gate(std::fabs(res.realized_qv - horizon) > 0.1 * horizon, options.override_gate,
         describe_qv(res.realized_qv, horizon) + " is not within 10% of the horizon");

  std::optional<ValueFunction> v;
  if (options.mode == WienerMode::brownian_qv) {
    const auto kernel = phi[0];
    v.emplace(*f.scalar, horizon, options.q,
              [kernel, horizon](double t) { return integrated_square(kernel, t, horizon); });
  }

  std::vector<double> y(d, 0.0), grad(d), phik(d);
  const std::vector<double> zeros(d, 0.0);
  res.h0 = v ? (*v)(0.0, 0.0) : f.f(zeros);
  res.strategy.resize(n);
  for (std::size_t k = 0; k < n; ++k) {
    const double t = g.node(static_cast<long>(k));
    for (std::size_t i = 0; i < d; ++i) phik[i] = phi[i](t);
    double xi = 0.0;
    if (v) {
      xi = v->dx(t, y[0]) * phik[0];
    } else {
      f.grad(y, grad);
      for (std::size_t i = 0; i < d; ++i) xi += grad[i] * phik[i];
    }
    const double dx = x[k + 1] - x[k];
    res.strategy[k] = xi;
    res.integral += xi * dx;
    for (std::size_t i = 0; i < d; ++i) y[i] += phik[i] * dx;
  }
  res.payoff = f.f(y);
  res.error = std::fabs(res.payoff - res.h0 - res.integral);
  return res;
}

}  // namespace regcalc
