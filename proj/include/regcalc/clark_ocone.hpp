#pragma once

// Replication of path functionals by a forward integral on processes with
// [X]_t = t (vanilla payoffs f(X_T)) or [X] = 0 (functions of finitely many
// Wiener-type integrals).
//
// For H = f(X_T) the value function is v(t, x) = E f(x + G sqrt(T - t)), which
// solves d_t v + 1/2 d_xx v = 0, and the strategy is xi_t = d_x v(t, X_t).
// Expectations are Gauss-Hermite sums against the standard normal.

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regcalc/grid_paths.hpp"

namespace regcalc {

struct Payoff {
  std::string name;
  std::function<double(double)> f;
  // Present for smooth payoffs; when absent the value function differentiates
  // the Gaussian kernel instead.
  std::function<double(double)> df;
  std::function<double(double)> d2f;

  bool smooth() const noexcept { return static_cast<bool>(df) && static_cast<bool>(d2f); }

  static Payoff linear();
  static Payoff square();
  static Payoff cosine();
  static Payoff call(double strike);
  // linear, square, cos, call(K) / call:K
  static Payoff named(const std::string& name);
};

// Probabilists' Gauss-Hermite rule: sum_q w_q g(z_q) ~ E g(G), G ~ N(0, 1).
struct GaussHermite {
  std::vector<double> nodes;
  std::vector<double> weights;
};

// Golub-Welsch on the Jacobi matrix of the Hermite recurrence. Cached per q.
const GaussHermite& gauss_hermite(int q);

class ValueFunction {
 public:
  // Remaining variance s(t) = Var of the Gaussian still to come after t;
  // s(T) = 0. The vanilla case is s(t) = T - t.
  using Variance = std::function<double(double)>;

  ValueFunction(Payoff payoff, double horizon, int q, Variance remaining);

  double operator()(double t, double x) const;
  double dx(double t, double x) const;
  double dxx(double t, double x) const;
  // Central difference in t (one-sided within a step of T).
  double dt(double t, double x) const;

  const Payoff& payoff() const noexcept { return payoff_; }
  double horizon() const noexcept { return horizon_; }
  int nodes() const noexcept { return q_; }
  double remaining_variance(double t) const { return remaining_(t); }

 private:
  Payoff payoff_;
  double horizon_;
  int q_;
  Variance remaining_;
  const GaussHermite* rule_;
};

// v(t, x) = E f(x + G sqrt(T - t)). Throws QuadratureNotConverged when q and
// 2q disagree on a probe lattice beyond `stability` (see
// quadrature_stability). Defaults: 1e-8 for smooth payoffs, 1e-2 otherwise.
ValueFunction solve_vanilla(const Payoff& f, double horizon, int q = 64,
                            std::optional<double> stability = std::nullopt);

// Max change of v, d_x v, d_xx v between q and 2q on the lattice
// t in {0, T/4, T/2, 3T/4}, x in {-3, -2.5, ..., 3}, relative to
// max(|value|, 1).
double quadrature_stability(const Payoff& f, double horizon, int q);

// max over probes of |d_t v - 1/2 s'(t) d_xx v| with s the remaining
// variance; the vanilla case s' = -1 gives |d_t v + 1/2 d_xx v|.
double pde_residual(const ValueFunction& v, std::span<const double> times,
                    std::span<const double> xs);

// t_k = k T / n for k < n, x evenly spaced on [lo, hi].
std::vector<double> probe_times(double horizon, int n);
std::vector<double> probe_space(double lo, double hi, int n);

struct HedgeResult {
  double h0 = 0.0;
  std::vector<double> strategy;  // xi at nodes 0..N-1
  double integral = 0.0;         // sum xi_i (X_{i+1} - X_i)
  double payoff = 0.0;
  double error = 0.0;            // |payoff - h0 - integral|
  int steps = 0;
  double horizon = 0.0;
  double realized_qv = 0.0;      // sum (X_{i+1} - X_i)^2
};

// Sum of squared increments, i.e. covariation at eps = dt.
double realized_qv(const Path& x);

// Requires X_0 = 0. Unless `override_gate`, throws CertificationFailed when
// the realized QV differs from T by more than 10% of T.
HedgeResult hedge_vanilla(const ValueFunction& v, const Path& x, bool override_gate = false);

// f(y_1, ..., y_n) with gradient.
struct MultiPayoff {
  std::size_t arity = 1;
  std::function<double(std::span<const double>)> f;
  std::function<void(std::span<const double>, std::span<double>)> grad;
  // Required for the Brownian mode (arity 1).
  std::optional<Payoff> scalar;

  static MultiPayoff from_scalar(const Payoff& p);
  // sum_i c_i y_i
  static MultiPayoff linear(std::vector<double> coeffs);
  // sum_i y_i^2
  static MultiPayoff sum_of_squares(std::size_t n);
};

enum class WienerMode { zero_qv, brownian_qv };

struct WienerOptions {
  WienerMode mode = WienerMode::zero_qv;
  int q = 64;
  bool override_gate = false;
};

// Y^i_k = sum_{j<k} phi^i(t_j)(X_{j+1} - X_j), h = f(Y_N).
//   zero_qv:      H0 = f(0), xi_k = sum_i d_i f(Y_k) phi^i(t_k); the path must
//                 have realized QV <= 10% of T unless overridden.
//   brownian_qv:  arity 1 only; H0 = v(0, 0), xi_k = d_x v(t_k, Y_k) phi(t_k)
//                 with remaining variance int_t^T phi^2.
HedgeResult hedge_wiener_functional(const MultiPayoff& f,
                                    const std::vector<std::function<double(double)>>& phi,
                                    const Path& x, const WienerOptions& options = {});

// int_t^T phi(s)^2 ds by adaptive Gauss-Kronrod.
double integrated_square(const std::function<double(double)>& phi, double t, double horizon);

}  // namespace regcalc
