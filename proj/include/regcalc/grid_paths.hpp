#pragma once

// Uniform time grids, sampled real paths with constant extension outside
// [0, T], and exact Gaussian path generators.

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace regcalc {

class TimeGrid {
 public:
  // Throws InvalidArgument unless horizon > 0 and steps >= 2.
  TimeGrid(double horizon, int steps);

  double horizon() const noexcept { return horizon_; }
  int steps() const noexcept { return steps_; }
  double mesh() const noexcept { return mesh_; }

  // t_i = i * T / N, with t_N == T exactly.
  double node(long i) const noexcept;
  std::vector<double> nodes() const;

  // Returns m with eps == m * mesh (to 1e-9 relative). Throws InvalidArgument
  // if eps is not a positive node multiple.
  int node_multiple(double eps, std::string_view what = "eps") const;

  friend bool operator==(const TimeGrid&, const TimeGrid&) = default;

 private:
  double horizon_;
  int steps_;
  double mesh_;
};

TimeGrid make_grid(double horizon, int steps);

// A real process sampled at the N + 1 nodes of a grid. Immutable.
class Path {
 public:
  // Throws InvalidArgument on a size mismatch or a non-finite value.
  Path(TimeGrid grid, std::vector<double> values, std::string label = {});

  const TimeGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  const std::string& label() const noexcept { return label_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double front() const noexcept { return values_.front(); }
  double back() const noexcept { return values_.back(); }

  // Node value under the constant extension: X_0 for i < 0, X_T for i > N.
  double extended(long i) const noexcept;

  // Values at node indices [first, first + count) under the extension.
  std::vector<double> extended_range(long first, std::size_t count) const;

 private:
  TimeGrid grid_;
  std::vector<double> values_;
  std::string label_;
};

// X_0 for t <= 0, X_T for t >= T, linear interpolation between nodes.
double eval_extended(const Path& path, double t);

// Throws GridMismatch unless both paths live on the same grid.
void require_same_grid(const Path& a, const Path& b);

// a * x + b * y, node by node.
Path combine(double a, const Path& x, double b, const Path& y);

// t -> X_{t - lag_nodes * mesh} under the extension.
Path shifted(const Path& x, long lag_nodes);

// Samples a deterministic function of time on the grid.
template <class F>
Path path_from_function(const TimeGrid& grid, F&& f, std::string label = {}) {
  std::vector<double> v(static_cast<std::size_t>(grid.steps()) + 1);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = f(grid.node(static_cast<long>(i)));
  return Path(grid, std::move(v), std::move(label));
}

// Centered Gaussian process families.
struct GaussianSpec {
  enum class Family { brownian, fbm, bifractional, scaled, mixed };

  Family family = Family::brownian;
  double hurst = 0.5;
  double k = 1.0;
  double scale = 1.0;
  // scaled: exactly one base spec; mixed: independent summands.
  std::vector<GaussianSpec> components;

  static GaussianSpec brownian();
  static GaussianSpec fbm(double hurst);
  static GaussianSpec bifractional(double hurst, double k);
  static GaussianSpec scaled(GaussianSpec base, double c);
  static GaussianSpec mixed(std::vector<GaussianSpec> parts);

  // Throws InvalidArgument on out-of-range parameters.
  void validate() const;

  // Canonical text form, e.g. "mixed[brownian,fbm:0.75]",
  // "bifractional:0.625:0.8", "scaled:2[brownian]". parse() inverts it.
  std::string describe() const;
  static GaussianSpec parse(std::string_view text);

  friend bool operator==(const GaussianSpec&, const GaussianSpec&) = default;
};

// R(s, t) of the family. bifractional uses
// 2^-K [ (s^2H + t^2H)^K - |t - s|^2HK ].
double covariance(const GaussianSpec& spec, double s, double t);

// Row-major N x N covariance of (X_{t_1}, ..., X_{t_N}).
std::vector<double> covariance_matrix(const GaussianSpec& spec, const TimeGrid& grid);

// splitmix64 of (master, index); used for every derived seed in the project.
std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept;

// Exact sampler for one (spec, grid). The covariance factor is computed once
// at construction; sample() is const and thread-safe.
//
// brownian uses the closed-form Cholesky factor of min(s, t) on a uniform
// grid (sqrt(dt) on and below the diagonal). fbm and bifractional use a dense
// LAPACK Cholesky with at most three diagonal jitters of 1e-12 * max diag.
// scaled multiplies the base draw; mixed sums independent component draws
// seeded with derive_seed(seed, component index).
class GaussianSampler {
 public:
  GaussianSampler(GaussianSpec spec, TimeGrid grid);

  Path sample(std::uint64_t seed) const;

  const GaussianSpec& spec() const noexcept { return spec_; }
  const TimeGrid& grid() const noexcept { return grid_; }
  int jitter_events() const noexcept { return jitter_events_; }

 private:
  void sample_into(std::uint64_t seed, std::span<double> out) const;

  GaussianSpec spec_;
  TimeGrid grid_;
  // Packed lower-triangular Cholesky factor by rows (fbm / bifractional).
  std::shared_ptr<const std::vector<double>> factor_;
  std::vector<GaussianSampler> children_;
  int jitter_events_ = 0;
};

// One exact draw with X_{t_0} = 0. Samplers are cached per (spec, grid).
Path sample(const GaussianSpec& spec, const TimeGrid& grid, std::uint64_t seed);

}  // namespace regcalc
