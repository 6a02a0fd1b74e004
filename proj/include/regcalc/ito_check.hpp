#pragma once

// Term-by-term assembly of the window Ito formula
//
//   F(t, X_t) = F(0, X_0) + int_0^t dF/dt ds + int_0^t <DF, d^- X_s>
//               + 1/2 int_0^t <D^2 F, d[X~]_s>
//
// on a sampled path, and a Monte Carlo check that the residual vanishes as
// eps shrinks.

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "regcalc/chi_qv.hpp"
#include "regcalc/functionals.hpp"
#include "regcalc/regularize.hpp"

namespace regcalc {

enum class QuadraticTerm {
  // Closed-form chi-QV increments driven by the real bracket:
  //   d00 -> 1/2 sum lambda_j d[X]_j, l2 -> 0, diag -> diag reference
  //   increments, chi0 -> atomic part only.
  closed_form,
  // 1/2 sum_j <D^2 F(s_j), Delta_eps eta(s_j)^(x)2> dt / eps.
  estimated,
};

struct ItoTerms {
  double eps = 0.0;
  Path lhs;
  Path dt_term;
  Path fwd_term;
  Path quad_term;
  Path residual;  // lhs - (F(0, X_0) + dt_term + fwd_term + quad_term)
};

// One path. `bracket` is t -> [X]_t; when absent, covariation_eps(X, X, eps)
// is used in its place. Throws UnsupportedCombination when the functional's
// chi tag and the chosen mode have no quadratic term.
ItoTerms ito_residual_paths(const Functional& f, const Path& x, double lag, double eps,
                            const std::optional<std::function<double(double)>>& bracket,
                            QuadraticTerm mode = QuadraticTerm::closed_form);

struct ItoResidualReport {
  std::string functional;
  std::vector<ItoTerms> terms;  // replica 0, one per eps
  ConvergenceReport report;     // sup |residual| against 0
};

ItoResidualReport ito_residual(const Functional& f, const ProcessSource& process, double lag,
                               const EpsilonLadder& ladder, double tolerance,
                               std::uint64_t master_seed = 0,
                               QuadraticTerm mode = QuadraticTerm::closed_form);

}  // namespace regcalc
