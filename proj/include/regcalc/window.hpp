#pragma once

// Window processes t -> (u -> X_{t+u}), u in [-lag, 0], finite signed
// measures on [-lag, 0] acting on them, and the forward integral of a
// measure-valued integrand against a window process.
//
// Lag nodes are u_k = -lag + k * dt, k = 0..L with L = lag / dt; windows
// always inherit the mesh of the underlying path.

#include <functional>
#include <span>
#include <vector>

#include "regcalc/grid_paths.hpp"

namespace regcalc {

class WindowSegment {
 public:
  // samples.size() must equal lag / mesh + 1.
  WindowSegment(double lag, double mesh, double ref_time, std::vector<double> samples);

  double lag() const noexcept { return lag_; }
  double mesh() const noexcept { return mesh_; }
  double ref_time() const noexcept { return ref_time_; }
  int lag_nodes() const noexcept { return static_cast<int>(samples_.size()) - 1; }
  std::span<const double> samples() const noexcept { return samples_; }

  double operator[](std::size_t k) const noexcept { return samples_[k]; }
  // eta(0)
  double head() const noexcept { return samples_.back(); }
  // u_k
  double location(std::size_t k) const noexcept;

  WindowSegment scaled(double c) const;
  friend WindowSegment operator+(const WindowSegment& a, const WindowSegment& b);
  friend WindowSegment operator-(const WindowSegment& a, const WindowSegment& b);

 private:
  double lag_;
  double mesh_;
  double ref_time_;
  std::vector<double> samples_;
};

// Lag must be a node multiple with 0 < lag <= T. Reads the path through
// eval_extended(t + u_k).
WindowSegment window_at(const Path& path, double t, double lag);

// u -> X_{s+eps+u} - X_{s+u}
WindowSegment window_increment(const Path& path, double s, double lag, double eps);

double sup_norm(const WindowSegment& eta);

// Trapezoid weights on L + 1 equally spaced lag nodes.
std::vector<double> trapezoid_weights(int lag_nodes, double mesh);

// Trapezoid integral of a segment over [-lag, 0].
double integral(const WindowSegment& eta);

class SignedMeasure {
 public:
  struct Atom {
    double loc;
    double weight;
  };

  // Atoms must sit on lag nodes (off-node atoms are rejected). `density` is
  // either empty (no absolutely continuous part) or sampled on all lag nodes.
  SignedMeasure(double lag, double mesh, std::vector<Atom> atoms,
                std::vector<double> density = {});

  static SignedMeasure zero(double lag, double mesh);
  static SignedMeasure dirac(double lag, double mesh, double loc, double weight = 1.0);
  static SignedMeasure with_density(double lag, double mesh, std::vector<double> density);

  double lag() const noexcept { return lag_; }
  double mesh() const noexcept { return mesh_; }
  int lag_nodes() const noexcept { return lag_nodes_; }
  const std::vector<Atom>& atoms() const noexcept { return atoms_; }
  const std::vector<double>& density() const noexcept { return density_; }
  // Lag-node index of atom i.
  int atom_node(std::size_t i) const noexcept { return atom_nodes_[i]; }

  // Mass of the atom at u = 0 (the "Dirac-at-0" part).
  double mass_at_zero() const noexcept;

  // sum |w_j| + trapezoid integral of |density|
  double total_variation() const;

  SignedMeasure scaled(double c) const;
  friend SignedMeasure operator+(const SignedMeasure& a, const SignedMeasure& b);

 private:
  double lag_;
  double mesh_;
  int lag_nodes_;
  std::vector<Atom> atoms_;
  std::vector<int> atom_nodes_;
  std::vector<double> density_;
};

// sum_j w_j eta(a_j) + trapezoid integral of density * eta. Throws
// LagMismatch if the measure and the segment disagree on lag or mesh.
double pair_measure(const SignedMeasure& mu, const WindowSegment& eta);

// Forward integral of a measure-valued integrand against the window process
// of X: left Riemann sum over nodes t_j of
//   <Y(t_j), X_{t_j+eps}(.) - X_{t_j}(.)> / eps.
// `integrand(j)` returns the measure at node j. Throws InvalidArgument if a
// measure has non-finite total variation.
Path banach_forward_integral_eps(const std::function<SignedMeasure(std::size_t node)>& integrand,
                                 const Path& x, double lag, double eps);

namespace detail {

// A path padded with `left` copies of X_0 and `right` copies of X_T, so that
// the window at node j starts at data() + j (when left == L).
struct PaddedPath {
  std::vector<double> values;
  std::size_t left = 0;

  const double* at_node(long j) const noexcept {
    return values.data() + static_cast<long>(left) + j;
  }
};

PaddedPath pad(const Path& x, std::size_t left, std::size_t right);

// Measure with its trapezoid-weighted density precomputed. apply(hi, lo)
// evaluates the pairing against the segment hi - lo (both L + 1 long).
class PreparedMeasure {
 public:
  explicit PreparedMeasure(const SignedMeasure& mu);
  double apply(const double* hi, const double* lo) const;

 private:
  std::vector<int> atom_nodes_;
  std::vector<double> atom_weights_;
  std::vector<double> weighted_density_;
};

}  // namespace detail

}  // namespace regcalc
