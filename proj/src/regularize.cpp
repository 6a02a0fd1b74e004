#include "regcalc/regularize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "parallel.hpp"
#include "regcalc/error.hpp"
#include "regcalc/simd.hpp"

namespace regcalc {

EpsilonLadder::EpsilonLadder(const TimeGrid& grid, std::vector<int> multiples,
                             int replicas, std::optional<double> lag)
    : multiples_(std::move(multiples)), replicas_(replicas), mesh_(grid.mesh()) {
  if (multiples_.empty()) throw InvalidArgument("ladder: no eps values");
  if (replicas_ < 1) throw InvalidArgument("ladder: replicas must be positive");
  for (std::size_t k = 0; k < multiples_.size(); ++k) {
    if (multiples_[k] < 1) throw InvalidArgument("ladder: eps below the mesh");
    if (multiples_[k] >= grid.steps()) throw InvalidArgument("ladder: eps must be below T");
    if (k > 0 && multiples_[k] >= multiples_[k - 1])
      throw InvalidArgument("ladder: eps values must be strictly decreasing");
    if (lag && !(multiples_[k] * mesh_ < *lag))
      throw InvalidArgument("ladder: eps must be below the window lag");
  }
}

EpsilonLadder EpsilonLadder::desk(const TimeGrid& grid, int replicas,
                                  std::optional<double> lag) {
  return EpsilonLadder(grid, {64, 32, 16, 8}, replicas, lag);
}

namespace detail {

std::vector<double> padded_values(const Path& x, std::size_t left, std::size_t right) {
  return x.extended_range(-static_cast<long>(left), x.size() + left + right);
}

std::vector<double> running_sum(std::span<const double> terms, double scale) {
  std::vector<double> out(terms.size() + 1);
  double acc = 0.0;
  out[0] = 0.0;
  for (std::size_t j = 0; j < terms.size(); ++j) {
    acc += terms[j];
    out[j + 1] = scale * acc;
  }
  return out;
}

}  // namespace detail

namespace {

int checked_multiple(const Path& x, double eps) {
  const int m = x.grid().node_multiple(eps);
  if (m >= x.grid().steps()) throw InvalidArgument("eps must be below the horizon");
  return m;
}

}  // namespace

Path forward_integral_eps(const Path& integrand, const Path& integrator, double eps) {
  require_same_grid(integrand, integrator);
  const int m = checked_multiple(integrator, eps);
  const std::size_t n = static_cast<std::size_t>(integrator.grid().steps());
  const std::vector<double> x = detail::padded_values(integrator, 0, static_cast<std::size_t>(m));
  std::vector<double> terms(n);
  simd::active().weighted_increment(integrand.values().data(), x.data(),
                                    static_cast<std::size_t>(m), n, terms.data());
  return Path(integrator.grid(), detail::running_sum(terms, 1.0 / m), "forward");
}

Path covariation_eps(const Path& x, const Path& y, double eps) {
  require_same_grid(x, y);
  const int m = checked_multiple(x, eps);
  const std::size_t n = static_cast<std::size_t>(x.grid().steps());
  const std::vector<double> xp = detail::padded_values(x, 0, static_cast<std::size_t>(m));
  const std::vector<double> yp = detail::padded_values(y, 0, static_cast<std::size_t>(m));
  std::vector<double> terms(n);
  simd::active().lagged_product(xp.data(), yp.data(), static_cast<std::size_t>(m), n,
                                terms.data());
  return Path(x.grid(), detail::running_sum(terms, 1.0 / m), "covariation");
}

std::vector<std::vector<Path>> mutual_covariations(std::span<const Path> components,
                                                   double eps) {
  if (components.empty()) throw InvalidArgument("mutual covariations: no components");
  const std::size_t n = components.size();
  std::vector<std::vector<std::optional<Path>>> tmp(n, std::vector<std::optional<Path>>(n));
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = i; j < n; ++j) {
      tmp[i][j] = covariation_eps(components[i], components[j], eps);
      if (j != i) tmp[j][i] = tmp[i][j];
    }
  std::vector<std::vector<Path>> out(n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) out[i].push_back(std::move(*tmp[i][j]));
  return out;
}

double improper_forward_value(const Path& forward, double eps) {
  const int m = checked_multiple(forward, eps);
  const std::size_t b = static_cast<std::size_t>(forward.grid().steps() - m);
  if (b < 1) throw InvalidArgument("improper forward value: eps too large");
  const double slope = forward[b] - forward[b - 1];
  return forward[b] + slope * m;
}

double error_statistic(const Path& estimate, const Path& target, ErrorStatistic stat) {
  require_same_grid(estimate, target);
  if (stat == ErrorStatistic::terminal) return std::fabs(estimate.back() - target.back());
  double e = 0.0;
  for (std::size_t i = 0; i < estimate.size(); ++i)
    e = std::max(e, std::fabs(estimate[i] - target[i]));
  return e;
}

double quantile(std::vector<double> values, double p) {
  if (values.empty()) throw InvalidArgument("quantile of an empty sample");
  std::sort(values.begin(), values.end());
  const double h = p * static_cast<double>(values.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  return values[lo] + (h - static_cast<double>(lo)) * (values[hi] - values[lo]);
}

ConvergenceReport assess(const EpsilonLadder& ladder,
                         const std::vector<std::vector<double>>& errors, double tolerance,
                         ErrorStatistic stat) {
  if (!(tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (errors.size() != ladder.size()) throw InvalidArgument("assess: one row per eps expected");
  ConvergenceReport rep;
  rep.tolerance = tolerance;
  rep.statistic = stat;
  for (std::size_t k = 0; k < ladder.size(); ++k) {
    ConvergenceRow row;
    row.eps = ladder.eps(k);
    row.multiple = ladder.multiple(k);
    row.median = quantile(errors[k], 0.5);
    row.q90 = quantile(errors[k], 0.9);
    rep.rows.push_back(row);
  }
  rep.small_enough = rep.rows.back().median < tolerance;
  rep.monotone = true;
  for (std::size_t k = 1; k < rep.rows.size(); ++k)
    if (rep.rows[k].median > rep.slack * rep.rows[k - 1].median) rep.monotone = false;
  rep.pass = rep.small_enough && rep.monotone;
  return rep;
}

ConvergenceReport converge(const EstimateFn& estimate, const TargetFn& target,
                           const EpsilonLadder& ladder, double tolerance,
                           std::uint64_t master_seed, ErrorStatistic stat) {
  const int replicas = ladder.replicas();
  std::vector<std::vector<double>> errors(ladder.size(), std::vector<double>(replicas));
  detail::parallel_for(replicas, [&](int r) {
    const std::uint64_t seed = master_seed + static_cast<std::uint64_t>(r);
    const Path ref = target(seed);
    for (std::size_t k = 0; k < ladder.size(); ++k)
      errors[k][static_cast<std::size_t>(r)] =
          error_statistic(estimate(seed, ladder.eps(k)), ref, stat);
  });
  return assess(ladder, errors, tolerance, stat);
}

}  // namespace regcalc
