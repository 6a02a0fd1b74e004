#pragma once

// Regularized forward integrals and covariations of real paths, and the Monte
// Carlo harness that stands in for convergence in probability / ucp as the
// regularization parameter shrinks.
//
// Every eps is a node multiple m * dt, so each estimator is an exact
// left-endpoint Riemann sum:
//
//   forward:    I_eps(t_i)     = (1/m) sum_{j<i} Y_j (X_{j+m} - X_j)
//   covariation C_eps(t_i)     = (1/m) sum_{j<i} (X_{j+m} - X_j)(Y_{j+m} - Y_j)
//
// with X read through the constant extension past T.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "regcalc/grid_paths.hpp"

namespace regcalc {

class EpsilonLadder {
 public:
  // multiples: strictly decreasing node multiples, smallest >= 1, largest < N.
  // When `lag` is given every eps must also be strictly below it.
  EpsilonLadder(const TimeGrid& grid, std::vector<int> multiples, int replicas,
                std::optional<double> lag = std::nullopt);

  // eps/dt in {64, 32, 16, 8}.
  static EpsilonLadder desk(const TimeGrid& grid, int replicas = 100,
                            std::optional<double> lag = std::nullopt);

  std::size_t size() const noexcept { return multiples_.size(); }
  int multiple(std::size_t k) const { return multiples_.at(k); }
  double eps(std::size_t k) const { return multiples_.at(k) * mesh_; }
  const std::vector<int>& multiples() const noexcept { return multiples_; }
  int replicas() const noexcept { return replicas_; }
  double mesh() const noexcept { return mesh_; }

 private:
  std::vector<int> multiples_;
  int replicas_;
  double mesh_;
};

// Throws GridMismatch / InvalidArgument (eps not a node multiple, or m >= N).
Path forward_integral_eps(const Path& integrand, const Path& integrator, double eps);
Path covariation_eps(const Path& x, const Path& y, double eps);

// Entry (i, j) is covariation_eps(X^i, X^j); entry (j, i) is a copy of (i, j).
std::vector<std::vector<Path>> mutual_covariations(std::span<const Path> components,
                                                   double eps);

// Value of an improper forward integral at T: the eps-estimate is only
// reported on [0, T - eps]; this extrapolates linearly from the last two
// nodes of that range.
double improper_forward_value(const Path& forward, double eps);

enum class ErrorStatistic {
  sup_over_grid,  // ucp surrogate: max_i |est(t_i) - target(t_i)|
  terminal,       // |est(T) - target(T)|
};

double error_statistic(const Path& estimate, const Path& target, ErrorStatistic stat);

struct ConvergenceRow {
  double eps = 0.0;
  int multiple = 0;
  double median = 0.0;
  double q90 = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergenceRow> rows;  // decreasing eps
  double tolerance = 0.0;
  double slack = 1.2;
  ErrorStatistic statistic = ErrorStatistic::sup_over_grid;
  bool small_enough = false;  // median at the smallest eps < tolerance
  bool monotone = false;      // median[k+1] <= slack * median[k]
  bool pass = false;

  std::string verdict() const { return pass ? "pass" : "fail"; }
};

// Linear-interpolation (type 7) sample quantile, p in [0, 1].
double quantile(std::vector<double> values, double p);

// Verdict from precomputed error statistics, errors[k][r] for ladder row k and
// replica r.
ConvergenceReport assess(const EpsilonLadder& ladder,
                         const std::vector<std::vector<double>>& errors,
                         double tolerance,
                         ErrorStatistic stat = ErrorStatistic::sup_over_grid);

using EstimateFn = std::function<Path(std::uint64_t seed, double eps)>;
using TargetFn = std::function<Path(std::uint64_t seed)>;

// Replica r uses seed master_seed + r. Replicas run in parallel when OpenMP is
// available; results are gathered by index so the report does not depend on
// scheduling.
ConvergenceReport converge(const EstimateFn& estimate, const TargetFn& target,
                           const EpsilonLadder& ladder, double tolerance,
                           std::uint64_t master_seed = 0,
                           ErrorStatistic stat = ErrorStatistic::sup_over_grid);

namespace detail {

// Path values at node indices [-left, N + right] under the constant extension.
std::vector<double> padded_values(const Path& x, std::size_t left, std::size_t right);

// Exclusive running sum scaled by `scale`: out[0] = 0,
// out[i] = scale * sum_{j<i} terms[j].
std::vector<double> running_sum(std::span<const double> terms, double scale);

}  // namespace detail

}  // namespace regcalc
