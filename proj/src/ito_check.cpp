#include "regcalc/ito_check.hpp"

#include <cmath>

#include "parallel.hpp"
#include "regcalc/error.hpp"

namespace regcalc {

namespace {

ChiElement checked_d2(const Functional& f, const WindowSegment& eta) {
  ChiElement phi = f.d2(eta);
  if (tag_of(phi) != f.chi_tag)
    throw UnsupportedCombination("functional '" + f.name + "': second derivative is " +
                                 tag_name(tag_of(phi)) + ", declared " + tag_name(f.chi_tag));
  return phi;
}

double atomic_part(const ChiElement& phi) {
  if (const auto* a = std::get_if<Atomic00>(&phi)) return a->lambda;
  if (const auto* c = std::get_if<Chi0>(&phi)) return c->lambda;
  return 0.0;
}

std::vector<double> closed_form_quad(const Functional& f, const std::vector<WindowSegment>& w,
                                     const Path& qv, double lag) {
  const std::size_t n = w.size() - 1;
  std::vector<double> terms(n, 0.0);
  for (std::size_t j = 0; j < n; ++j) {
    const ChiElement phi = checked_d2(f, w[j]);
    switch (f.chi_tag) {
      case ChiTag::d00:
      case ChiTag::chi0: terms[j] = atomic_part(phi) * (qv[j + 1] - qv[j]); break;
      case ChiTag::l2: break;
      case ChiTag::diag: {
        const auto& g = std::get<DiagKernel>(phi).g;
        const TimeGrid& grid = qv.grid();
        terms[j] = diag_reference(g, qv, grid.node(static_cast<long>(j + 1)), lag) -
                   diag_reference(g, qv, grid.node(static_cast<long>(j)), lag);
        break;
      }
    }
  }
  return detail::running_sum(terms, 0.5);
}

std::vector<double> estimated_quad(const Functional& f, const std::vector<WindowSegment>& w,
                                   const Path& x, double lag, int m) {
  const TimeGrid& grid = x.grid();
  const int l = grid.node_multiple(lag, "lag");
  const detail::PaddedPath xp =
      detail::pad(x, static_cast<std::size_t>(l), static_cast<std::size_t>(m));
  const std::size_t n = w.size() - 1;
  std::vector<double> terms(n);
  for (std::size_t j = 0; j < n; ++j) {
    const ChiElement phi = checked_d2(f, w[j]);
    const double* lo = xp.values.data() + j;
    if (const auto* a = std::get_if<Atomic00>(&phi)) {
      const double d = lo[m + l] - lo[l];
      terms[j] = a->lambda * d * d;
    } else {
      terms[j] = detail::PreparedChi(phi, grid.mesh()).apply(lo + m, lo);
    }
  }
  return detail::running_sum(terms, 0.5 / m);
}

std::vector<ItoTerms> assemble(const Functional& f, const Path& x, double lag,
                               const std::vector<double>& eps_list,
                               const std::optional<std::function<double(double)>>& bracket,
                               QuadraticTerm mode) {
  if (!f.eval || !f.d1 || !f.d2)
    throw UnsupportedCombination("functional '" + f.name + "' lacks a derivative");
  const TimeGrid& grid = x.grid();
  const std::size_t n = static_cast<std::size_t>(grid.steps());
  const double dt = grid.mesh();

  std::vector<WindowSegment> w;
  w.reserve(n + 1);
  for (std::size_t i = 0; i <= n; ++i) w.push_back(window_at(x, grid.node(static_cast<long>(i)), lag));

  std::vector<double> lhs(n + 1), dt_terms(n);
  for (std::size_t i = 0; i <= n; ++i) lhs[i] = f.eval(w[i]);
  for (std::size_t j = 0; j < n; ++j) dt_terms[j] = f.time_derivative(w[j]);
  const std::vector<double> dt_term = detail::running_sum(dt_terms, dt);

  std::optional<std::vector<double>> fixed_quad;
  if (mode == QuadraticTerm::closed_form && bracket) {
    const Path qv = path_from_function(grid, *bracket, "bracket");
    fixed_quad = closed_form_quad(f, w, qv, lag);
  }

  std::vector<ItoTerms> out;
  for (double eps : eps_list) {
    const int m = grid.node_multiple(eps);
    const Path fwd = banach_forward_integral_eps(
        [&](std::size_t j) { return f.d1(w[j]); }, x, lag, eps);
    std::vector<double> quad;
    if (fixed_quad) {
      quad = *fixed_quad;
    } else if (mode == QuadraticTerm::closed_form) {
      quad = closed_form_quad(f, w, covariation_eps(x, x, eps), lag);
    } else {
      quad = estimated_quad(f, w, x, lag, m);
    }
    std::vector<double> res(n + 1);
    for (std::size_t i = 0; i <= n; ++i)
      res[i] = lhs[i] - (lhs[0] + dt_term[i] + fwd[i] + quad[i]);
    out.push_back(ItoTerms{eps, Path(grid, lhs, "lhs"), Path(grid, dt_term, "dt"), fwd,
                           Path(grid, std::move(quad), "quad"), Path(grid, std::move(res), "residual")});
  }
  return out;
}

}  // namespace

ItoTerms ito_residual_paths(const Functional& f, const Path& x, double lag, double eps,
                            const std::optional<std::function<double(double)>>& bracket,
                            QuadraticTerm mode) {
  return std::move(assemble(f, x, lag, {eps}, bracket, mode).front());
}

ItoResidualReport ito_residual(const Functional& f, const ProcessSource& process, double lag,
                               const EpsilonLadder& ladder, double tolerance,
                               std::uint64_t master_seed, QuadraticTerm mode) {
  std::vector<double> eps_list;
  for (std::size_t k = 0; k < ladder.size(); ++k) eps_list.push_back(ladder.eps(k));
  const int replicas = ladder.replicas();
  std::vector<std::vector<double>> errors(ladder.size(),
                                          std::vector<double>(static_cast<std::size_t>(replicas)));
  ItoResidualReport rep;
  rep.functional = f.name;
  detail::parallel_for(replicas, [&](int r) {
    const Path x = process.draw(master_seed + static_cast<std::uint64_t>(r));
    std::vector<ItoTerms> terms = assemble(f, x, lag, eps_list, process.bracket, mode);
    for (std::size_t k = 0; k < terms.size(); ++k) {
      double e = 0.0;
      for (double v : terms[k].residual.values()) e = std::max(e, std::fabs(v));
      errors[k][static_cast<std::size_t>(r)] = e;
    }
    if (r == 0) rep.terms = std::move(terms);
  });
  rep.report = assess(ladder, errors, tolerance);
  return rep;
}

}  // namespace regcalc
