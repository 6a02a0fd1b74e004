#pragma once

// Elements of concrete Chi-subspaces of bilinear forms on C([-lag, 0]), their
// action on squared window increments, and the chi-quadratic variation of
// window processes.
//
// Closed forms used as references (X a real process with bracket [X]):
//   Atomic00(l)         -> l [X]_t
//   L2Kernel            -> 0
//   DiagKernel(g)       -> int_0^{t ^ lag} g(-x) [X]_{t-x} dx
//   Chi0(l, ., ., .)    -> l [X]_t

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "regcalc/grid_paths.hpp"
#include "regcalc/regularize.hpp"
#include "regcalc/window.hpp"

namespace regcalc {

// l * delta_0 (x) delta_0
struct Atomic00 {
  double lambda = 0.0;
};

// Square-integrable kernel k(x, y) on the lag-node lattice, stored either as a
// dense (L+1)^2 row-major matrix or as a finite sum of separable terms
// c_r a_r(x) b_r(y). The separable form pairs in O(L) instead of O(L^2).
class L2Kernel {
 public:
  struct Term {
    double coeff = 1.0;
    std::vector<double> left;
    std::vector<double> right;
  };

  static L2Kernel dense(int lag_nodes, std::vector<double> matrix);
  static L2Kernel separable(int lag_nodes, std::vector<Term> terms);
  static L2Kernel constant(int lag_nodes, double c);
  static L2Kernel zero(int lag_nodes) { return separable(lag_nodes, {}); }

  int lag_nodes() const noexcept { return lag_nodes_; }
  bool is_dense() const noexcept { return !matrix_.empty(); }
  const std::vector<double>& matrix() const noexcept { return matrix_; }
  const std::vector<Term>& terms() const noexcept { return terms_; }

  // k(u_i, u_j)
  double at(std::size_t i, std::size_t j) const;

  // Trapezoid L2 norm on the lattice.
  double norm(double mesh) const;

  L2Kernel scaled(double c) const;

 private:
  int lag_nodes_ = 0;
  std::vector<double> matrix_;
  std::vector<Term> terms_;
};

// g(x) delta_y(dx) dy with bounded g sampled on lag nodes.
struct DiagKernel {
  std::vector<double> g;
};

// l delta_0 (x) delta_0 + delta_0 (x) left(y) dy + right(x) dx (x) delta_0 + bulk
struct Chi0 {
  double lambda = 0.0;
  std::vector<double> left;
  std::vector<double> right;
  L2Kernel bulk;
};

using ChiElement = std::variant<Atomic00, L2Kernel, DiagKernel, Chi0>;

enum class ChiTag { d00, l2, diag, chi0 };

ChiTag tag_of(const ChiElement& phi) noexcept;
std::string tag_name(ChiTag tag);

// Subspace norm: |l| (d00), lattice L2 norm (l2), sup |g| (diag), Hilbert
// direct-sum norm (chi0).
double chi_norm(const ChiElement& phi, double mesh);

// c such that |<phi, eta (x) eta>| <= c ||phi|| sup|eta|^2:
// 1 for d00, lag for l2 and diag, 2 max(1, lag) for chi0.
double pairing_constant(const ChiElement& phi, double lag);

ChiElement scaled(const ChiElement& phi, double c);

// <phi, eta (x) eta>. Throws LagMismatch if the sampled arrays do not match
// the segment.
double pair_chi(const ChiElement& phi, const WindowSegment& eta);

// [X]^eps(phi): left Riemann sum over nodes of
//   <phi, (X_{s+eps}(.) - X_s(.))^(x)2> / eps.
// eps must be a node multiple below the lag.
Path chi_qv_eps(const Path& x, double lag, const ChiElement& phi, double eps);

// int_0^{t ^ lag} g(-x) qv_{t-x} dx by the trapezoid rule on nodes; t must be
// a node. g is sampled on the lag nodes.
double diag_reference(const std::vector<double>& g, const Path& qv, double t, double lag);
Path diag_reference_path(const std::vector<double>& g, const Path& qv, double lag);

// t -> lambda * qv_t; the cross and bulk blocks contribute nothing.
Path chi0_reference(const Chi0& phi, const Path& qv);

// Left Riemann sum over [0, T] of sup_u |X_{s+eps+u} - X_{s+u}|^2 / eps.
double global_norm_integral(const Path& x, double lag, double eps);

// eps~ = 2 eps / T
double global_norm_scale(double eps, double horizon);

struct ChiQVResult {
  ChiElement phi;
  std::vector<double> eps;
  std::vector<Path> estimates;      // replica 0, one per eps
  std::optional<Path> reference;    // replica 0
  bool reference_present = false;
  std::string reference_kind;       // "closed-form", "estimated-qv", "absent"
  ConvergenceReport report;
  std::string verdict;              // "pass", "fail" or "informational"

  // H1 surrogate: per replica, sup over the ladder of
  // int_0^T |<phi, Delta^(x)2>| / eps ds.
  std::vector<double> h1_per_replica;
  double h1_median = 0.0;
  double h1_max = 0.0;
  bool h1_bounded = false;  // h1_max < 10 * h1_median
};

struct ProcessSource {
  std::function<Path(std::uint64_t seed)> draw;
  // Closed form of the real bracket, t -> [X]_t, when known.
  std::optional<std::function<double(double)>> bracket;
  std::string label;
};

ChiQVResult chi_qv_suite(const ProcessSource& process, double lag, const ChiElement& phi,
                         const EpsilonLadder& ladder, double tolerance,
                         std::uint64_t master_seed = 0);

namespace detail {

// phi with trapezoid weights folded in; apply(hi, lo) returns
// <phi, (hi - lo)^(x)2> for arrays of L + 1 lag samples.
class PreparedChi {
 public:
  PreparedChi(const ChiElement& phi, double mesh);
  int lag_nodes() const noexcept { return lag_nodes_; }
  double apply(const double* hi, const double* lo) const;

 private:
  void prepare_kernel(const L2Kernel& k, const std::vector<double>& w);
  double kernel(const double* hi, const double* lo) const;

  ChiTag tag_;
  int lag_nodes_ = 0;
  double lambda_ = 0.0;
  std::vector<double> weighted_g_;
  std::vector<double> weighted_left_;
  std::vector<double> weighted_right_;
  // L2 part: separable terms with weights folded in, or a dense weighted matrix.
  std::vector<double> term_coeff_;
  std::vector<std::vector<double>> term_left_;
  std::vector<std::vector<double>> term_right_;
  std::vector<double> weighted_matrix_;
  mutable std::vector<double> scratch_;
};

}  // namespace detail

}  // namespace regcalc
