#include "regcalc/chi_qv.hpp"

#include <algorithm>
#include <cmath>

#include "parallel.hpp"
#include "regcalc/error.hpp"
#include "regcalc/simd.hpp"

namespace regcalc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_samples(const std::vector<double>& v, int lag_nodes, const char* what) {
  if (v.size() != static_cast<std::size_t>(lag_nodes) + 1)
    throw LagMismatch(std::string(what) + ": not sampled on the window's lag nodes");
}

double l2_norm_1d(const std::vector<double>& f, double mesh) {
  if (f.empty()) return 0.0;
  const std::vector<double> w = trapezoid_weights(static_cast<int>(f.size()) - 1, mesh);
  double s = 0.0;
  for (std::size_t k = 0; k < f.size(); ++k) s += w[k] * f[k] * f[k];
  return std::sqrt(s);
}

int lag_nodes_of(const ChiElement& phi) {
  return std::visit(overloaded{
                        [](const Atomic00&) { return -1; },
                        [](const L2Kernel& k) { return k.lag_nodes(); },
                        [](const DiagKernel& d) { return static_cast<int>(d.g.size()) - 1; },
                        [](const Chi0& c) { return c.bulk.lag_nodes(); },
                    },
                    phi);
}

}  // namespace

// ---------------------------------------------------------------------------
// L2Kernel

L2Kernel L2Kernel::dense(int lag_nodes, std::vector<double> matrix) {
  const std::size_t n = static_cast<std::size_t>(lag_nodes) + 1;
  if (lag_nodes < 1 || matrix.size() != n * n)
    throw InvalidArgument("dense L2 kernel: matrix must be (L+1)^2");
  L2Kernel k;
  k.lag_nodes_ = lag_nodes;
  k.matrix_ = std::move(matrix);
  return k;
}

L2Kernel L2Kernel::separable(int lag_nodes, std::vector<Term> terms) {
  if (lag_nodes < 1) throw InvalidArgument("L2 kernel: lag nodes must be positive");
  for (const Term& t : terms) {
    require_samples(t.left, lag_nodes, "L2 kernel term");
    require_samples(t.right, lag_nodes, "L2 kernel term");
  }
  L2Kernel k;
  k.lag_nodes_ = lag_nodes;
  k.terms_ = std::move(terms);
  return k;
}

L2Kernel L2Kernel::constant(int lag_nodes, double c) {
  const std::vector<double> ones(static_cast<std::size_t>(lag_nodes) + 1, 1.0);
  return separable(lag_nodes, {Term{c, ones, ones}});
}

double L2Kernel::at(std::size_t i, std::size_t j) const {
  const std::size_t n = static_cast<std::size_t>(lag_nodes_) + 1;
  if (is_dense()) return matrix_.at(i * n + j);
  double s = 0.0;
  for (const Term& t : terms_) s += t.coeff * t.left.at(i) * t.right.at(j);
  return s;
}

double L2Kernel::norm(double mesh) const {
  const std::vector<double> w = trapezoid_weights(lag_nodes_, mesh);
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i)
    for (std::size_t j = 0; j < w.size(); ++j) {
      const double v = at(i, j);
      s += w[i] * w[j] * v * v;
    }
  return std::sqrt(s);
}

L2Kernel L2Kernel::scaled(double c) const {
  L2Kernel k(*this);
  for (double& v : k.matrix_) v *= c;
  for (Term& t : k.terms_) t.coeff *= c;
  return k;
}

// ---------------------------------------------------------------------------

ChiTag tag_of(const ChiElement& phi) noexcept {
  return static_cast<ChiTag>(phi.index());
}

std::string tag_name(ChiTag tag) {
  switch (tag) {
    case ChiTag::d00: return "atomic00";
    case ChiTag::l2: return "l2";
    case ChiTag::diag: return "diag";
    case ChiTag::chi0: return "chi0";
  }
  return "unknown";
}

double chi_norm(const ChiElement& phi, double mesh) {
  return std::visit(
      overloaded{
          [](const Atomic00& a) { return std::fabs(a.lambda); },
          [&](const L2Kernel& k) { return k.norm(mesh); },
          [](const DiagKernel& d) {
            double m = 0.0;
            for (double v : d.g) m = std::max(m, std::fabs(v));
            return m;
          },
          [&](const Chi0& c) {
            const double l = l2_norm_1d(c.left, mesh);
            const double r = l2_norm_1d(c.right, mesh);
            const double b = c.bulk.norm(mesh);
            return std::sqrt(c.lambda * c.lambda + l * l + r * r + b * b);
          },
      },
      phi);
}

double pairing_constant(const ChiElement& phi, double lag) {
  switch (tag_of(phi)) {
    case ChiTag::d00: return 1.0;
    case ChiTag::l2:
    case ChiTag::diag: return lag;
    case ChiTag::chi0: return 2.0 * std::max(1.0, lag);
  }
  return 0.0;
}

ChiElement scaled(const ChiElement& phi, double c) {
  return std::visit(overloaded{
                        [&](const Atomic00& a) -> ChiElement { return Atomic00{c * a.lambda}; },
                        [&](const L2Kernel& k) -> ChiElement { return k.scaled(c); },
                        [&](const DiagKernel& d) -> ChiElement {
                          DiagKernel out{d.g};
                          for (double& v : out.g) v *= c;
                          return out;
                        },
                        [&](const Chi0& x) -> ChiElement {
                          Chi0 out{c * x.lambda, x.left, x.right, x.bulk.scaled(c)};
                          for (double& v : out.left) v *= c;
                          for (double& v : out.right) v *= c;
                          return out;
                        },
                    },
                    phi);
}

// ---------------------------------------------------------------------------
// Prepared pairing

namespace detail {

void PreparedChi::prepare_kernel(const L2Kernel& k, const std::vector<double>& w) {
  if (k.lag_nodes() != lag_nodes_) throw LagMismatch("L2 kernel: lag nodes differ from window");
  const std::size_t n = w.size();
  if (k.is_dense()) {
    weighted_matrix_.resize(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j)
        weighted_matrix_[i * n + j] = w[i] * k.matrix()[i * n + j] * w[j];
    scratch_.resize(n);
    return;
  }
  for (const L2Kernel::Term& t : k.terms()) {
    term_coeff_.push_back(t.coeff);
    std::vector<double> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = w[i] * t.left[i];
      b[i] = w[i] * t.right[i];
    }
    term_left_.push_back(std::move(a));
    term_right_.push_back(std::move(b));
  }
}

PreparedChi::PreparedChi(const ChiElement& phi, double mesh) : tag_(tag_of(phi)) {
  lag_nodes_ = lag_nodes_of(phi);
  std::vector<double> w;
  if (lag_nodes_ > 0) w = trapezoid_weights(lag_nodes_, mesh);
  switch (tag_) {
    case ChiTag::d00: lambda_ = std::get<Atomic00>(phi).lambda; break;
    case ChiTag::l2: prepare_kernel(std::get<L2Kernel>(phi), w); break;
    case ChiTag::diag: {
      const auto& g = std::get<DiagKernel>(phi).g;
      if (g.size() < 2) throw InvalidArgument("diag kernel: g needs at least two lag nodes");
      weighted_g_.resize(g.size());
      for (std::size_t k = 0; k < g.size(); ++k) weighted_g_[k] = w[k] * g[k];
      break;
    }
    case ChiTag::chi0: {
      const Chi0& c = std::get<Chi0>(phi);
      lambda_ = c.lambda;
      if (!c.left.empty()) {
        require_samples(c.left, lag_nodes_, "chi0 left block");
        weighted_left_.resize(w.size());
        for (std::size_t k = 0; k < w.size(); ++k) weighted_left_[k] = w[k] * c.left[k];
      }
      if (!c.right.empty()) {
        require_samples(c.right, lag_nodes_, "chi0 right block");
        weighted_right_.resize(w.size());
        for (std::size_t k = 0; k < w.size(); ++k) weighted_right_[k] = w[k] * c.right[k];
      }
      prepare_kernel(c.bulk, w);
      break;
    }
  }
}

double PreparedChi::kernel(const double* hi, const double* lo) const {
  const auto& k = simd::active();
  if (!weighted_matrix_.empty()) {
    const std::size_t n = scratch_.size();
    for (std::size_t i = 0; i < n; ++i) scratch_[i] = hi[i] - lo[i];
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i)
      s += scratch_[i] * k.dot(weighted_matrix_.data() + i * n, scratch_.data(), n);
    return s;
  }
  const std::size_t n = static_cast<std::size_t>(lag_nodes_) + 1;
  double s = 0.0;
  for (std::size_t r = 0; r < term_coeff_.size(); ++r)
    s += term_coeff_[r] * k.weighted_diff_sum(term_left_[r].data(), hi, lo, n) *
         k.weighted_diff_sum(term_right_[r].data(), hi, lo, n);
  return s;
}

double PreparedChi::apply(const double* hi, const double* lo) const {
  const auto& k = simd::active();
  const std::size_t last = static_cast<std::size_t>(std::max(lag_nodes_, 0));
  switch (tag_) {
    case ChiTag::d00: {
      const double d0 = hi[last] - lo[last];
      return lambda_ * d0 * d0;
    }
    case ChiTag::l2: return kernel(hi, lo);
    case ChiTag::diag:
      return k.weighted_sq_diff_sum(weighted_g_.data(), hi, lo, weighted_g_.size());
    case ChiTag::chi0: {
      const std::size_t n = last + 1;
      const double d0 = hi[last] - lo[last];
      double s = lambda_ * d0 * d0;
      if (!weighted_left_.empty()) s += d0 * k.weighted_diff_sum(weighted_left_.data(), hi, lo, n);
      if (!weighted_right_.empty())
        s += d0 * k.weighted_diff_sum(weighted_right_.data(), hi, lo, n);
      return s + kernel(hi, lo);
    }
  }
  return 0.0;
}

}  // namespace detail

double pair_chi(const ChiElement& phi, const WindowSegment& eta) {
  const int l = lag_nodes_of(phi);
  if (l >= 0 && l != eta.lag_nodes()) throw LagMismatch("chi element and window lag differ");
  const detail::PreparedChi prepared(phi, eta.mesh());
  const std::vector<double> zeros(eta.samples().size(), 0.0);
  if (l < 0) {
    const double d0 = eta.head();
    return std::get<Atomic00>(phi).lambda * d0 * d0;
  }
  return prepared.apply(eta.samples().data(), zeros.data());
}

// ---------------------------------------------------------------------------
// Estimators

namespace {

struct Geometry {
  int lag_nodes;
  int multiple;
};

Geometry check_geometry(const Path& x, double lag, double eps) {
  const TimeGrid& g = x.grid();
  if (lag > g.horizon() * (1.0 + 1e-12)) throw InvalidArgument("window lag exceeds the horizon");
  const int l = g.node_multiple(lag, "lag");
  const int m = g.node_multiple(eps);
  if (m >= l) throw InvalidArgument("eps must be strictly below the window lag");
  return {l, m};
}

// Per-node pairings <phi, Delta_eps eta(t_j)^(x)2>, j = 0..N-1.
std::vector<double> chi_terms(const Path& x, double lag, const ChiElement& phi, double eps) {
  const Geometry geo = check_geometry(x, lag, eps);
  const int l = lag_nodes_of(phi);
  if (l >= 0 && l != geo.lag_nodes) throw LagMismatch("chi element and window lag differ");
  // Atomic00 only reads eta(0); pad with the window's lag anyway.
  ChiElement sized = phi;
  if (l < 0) sized = Chi0{std::get<Atomic00>(phi).lambda, {}, {}, L2Kernel::zero(geo.lag_nodes)};
  const detail::PreparedChi prepared(sized, x.grid().mesh());
  const detail::PaddedPath xp = detail::pad(x, static_cast<std::size_t>(geo.lag_nodes),
                                            static_cast<std::size_t>(geo.multiple));
  const std::size_t n = static_cast<std::size_t>(x.grid().steps());
  std::vector<double> terms(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double* lo = xp.values.data() + j;
    terms[j] = prepared.apply(lo + geo.multiple, lo);
  }
  return terms;
}

}  // namespace

Path chi_qv_eps(const Path& x, double lag, const ChiElement& phi, double eps) {
  const std::vector<double> terms = chi_terms(x, lag, phi, eps);
  const int m = x.grid().node_multiple(eps);
  return Path(x.grid(), detail::running_sum(terms, 1.0 / m), "chi-qv");
}

double diag_reference(const std::vector<double>& g, const Path& qv, double t, double lag) {
  const TimeGrid& grid = qv.grid();
  const int l = grid.node_multiple(lag, "lag");
  require_samples(g, l, "diag reference g");
  if (t <= 0.0) return 0.0;
  const long i = grid.node_multiple(t, "t");
  const long upper = std::min<long>(i, l);
  double s = 0.0;
  for (long k = 0; k <= upper; ++k) {
    const double w = (k == 0 || k == upper) ? 0.5 : 1.0;
    s += w * g[static_cast<std::size_t>(l - k)] * qv[static_cast<std::size_t>(i - k)];
  }
  return s * grid.mesh();
}

Path diag_reference_path(const std::vector<double>& g, const Path& qv, double lag) {
  const TimeGrid& grid = qv.grid();
  std::vector<double> v(qv.size(), 0.0);
  for (std::size_t i = 1; i < v.size(); ++i) v[i] = diag_reference(g, qv, grid.node(static_cast<long>(i)), lag);
  return Path(grid, std::move(v), "diag-reference");
}

Path chi0_reference(const Chi0& phi, const Path& qv) {
  std::vector<double> v(qv.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = phi.lambda * qv[i];
  return Path(qv.grid(), std::move(v), "chi0-reference");
}

double global_norm_integral(const Path& x, double lag, double eps) {
  const Geometry geo = check_geometry(x, lag, eps);
  const detail::PaddedPath xp = detail::pad(x, static_cast<std::size_t>(geo.lag_nodes),
                                            static_cast<std::size_t>(geo.multiple));
  const auto& k = simd::active();
  const std::size_t n = static_cast<std::size_t>(x.grid().steps());
  const std::size_t width = static_cast<std::size_t>(geo.lag_nodes) + 1;
  double s = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    const double* lo = xp.values.data() + j;
    const double d = k.max_abs_diff(lo + geo.multiple, lo, width);
    s += d * d;
  }
  return s / geo.multiple;
}

double global_norm_scale(double eps, double horizon) { return 2.0 * eps / horizon; }

// ---------------------------------------------------------------------------
// Suite

namespace {

std::optional<Path> reference_for(const ChiElement& phi, const Path& x, const ProcessSource& src,
                                  double lag, double smallest_eps, std::string& kind) {
  std::optional<Path> qv;
  if (src.bracket) {
    qv = path_from_function(x.grid(), *src.bracket, "bracket");
    kind = "closed-form";
  }
  switch (tag_of(phi)) {
    case ChiTag::l2:
      kind = "closed-form";
      return path_from_function(x.grid(), [](double) { return 0.0; }, "zero");
    case ChiTag::d00:
      if (!qv) break;
      return chi0_reference(Chi0{std::get<Atomic00>(phi).lambda, {}, {}, L2Kernel{}}, *qv);
    case ChiTag::chi0:
      if (!qv) break;
      return chi0_reference(std::get<Chi0>(phi), *qv);
    case ChiTag::diag:
      if (!qv) {
        qv = covariation_eps(x, x, smallest_eps);
        kind = "estimated-qv";
      }
      return diag_reference_path(std::get<DiagKernel>(phi).g, *qv, lag);
  }
  kind = "absent";
  return std::nullopt;
}

}  // namespace

ChiQVResult chi_qv_suite(const ProcessSource& process, double lag, const ChiElement& phi,
                         const EpsilonLadder& ladder, double tolerance,
                         std::uint64_t master_seed) {
  const int replicas = ladder.replicas();
  const std::size_t rows = ladder.size();
  std::vector<std::vector<double>> errors(rows, std::vector<double>(static_cast<std::size_t>(replicas)));
  std::vector<double> h1(static_cast<std::size_t>(replicas));

  ChiQVResult res{phi, {}, {}, std::nullopt, false, "absent", {}, "informational", {}, 0, 0, false};
  for (std::size_t k = 0; k < rows; ++k) res.eps.push_back(ladder.eps(k));

  std::vector<std::optional<Path>> first_estimates(rows);
  std::vector<std::string> kinds(static_cast<std::size_t>(replicas));
  std::optional<Path> first_reference;

  detail::parallel_for(replicas, [&](int r) {
    const std::size_t ru = static_cast<std::size_t>(r);
    const Path x = process.draw(master_seed + ru);
    const std::optional<Path> ref =
        reference_for(phi, x, process, lag, ladder.eps(rows - 1), kinds[ru]);
    double h1_sup = 0.0;
    for (std::size_t k = 0; k < rows; ++k) {
      const std::vector<double> terms = chi_terms(x, lag, phi, ladder.eps(k));
      const double m = ladder.multiple(k);
      double abs_sum = 0.0;
      for (double v : terms) abs_sum += std::fabs(v);
      h1_sup = std::max(h1_sup, abs_sum / m);
      const Path est(x.grid(), detail::running_sum(terms, 1.0 / m), "chi-qv");
      errors[k][ru] = ref ? error_statistic(est, *ref, ErrorStatistic::sup_over_grid) : 0.0;
      if (r == 0) first_estimates[k] = est;
    }
    h1[ru] = h1_sup;
    if (r == 0) first_reference = ref;
  });

  for (auto& e : first_estimates) res.estimates.push_back(std::move(*e));
  res.reference = first_reference;
  res.reference_present = first_reference.has_value();
  res.reference_kind = kinds.front();
  res.report = assess(ladder, errors, tolerance);
  res.verdict = res.reference_present ? res.report.verdict() : "informational";

  res.h1_per_replica = h1;
  res.h1_median = quantile(h1, 0.5);
  res.h1_max = *std::max_element(h1.begin(), h1.end());
  res.h1_bounded = res.h1_max < 10.0 * res.h1_median;
  return res;
}

}  // namespace regcalc
