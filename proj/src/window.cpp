#include "regcalc/window.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "regcalc/error.hpp"
#include "regcalc/regularize.hpp"
#include "regcalc/simd.hpp"

namespace regcalc {

namespace {

int lag_node_count(double lag, double mesh) {
  const double r = lag / mesh;
  const double l = std::round(r);
  if (!(lag > 0.0) || l < 1.0 || std::fabs(r - l) > 1e-9 * l)
    throw InvalidArgument("window lag must be a positive multiple of the mesh");
  return static_cast<int>(l);
}

void require_same_lag(double lag_a, double mesh_a, double lag_b, double mesh_b) {
  if (std::fabs(lag_a - lag_b) > 1e-12 * std::max(lag_a, lag_b) ||
      std::fabs(mesh_a - mesh_b) > 1e-12 * std::max(mesh_a, mesh_b))
    throw LagMismatch("lag intervals or meshes differ");
}

}  // namespace

WindowSegment::WindowSegment(double lag, double mesh, double ref_time,
                             std::vector<double> samples)
    : lag_(lag), mesh_(mesh), ref_time_(ref_time), samples_(std::move(samples)) {
  const int l = lag_node_count(lag, mesh);
  if (samples_.size() != static_cast<std::size_t>(l) + 1)
    throw LagMismatch("window segment: sample count must be lag/mesh + 1");
}

double WindowSegment::location(std::size_t k) const noexcept {
  if (k + 1 == samples_.size()) return 0.0;
  return -lag_ + static_cast<double>(k) * mesh_;
}

WindowSegment WindowSegment::scaled(double c) const {
  std::vector<double> v(samples_);
  for (double& x : v) x *= c;
  return WindowSegment(lag_, mesh_, ref_time_, std::move(v));
}

WindowSegment operator+(const WindowSegment& a, const WindowSegment& b) {
  require_same_lag(a.lag_, a.mesh_, b.lag_, b.mesh_);
  std::vector<double> v(a.samples_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.samples_[k] + b.samples_[k];
  return WindowSegment(a.lag_, a.mesh_, a.ref_time_, std::move(v));
}

WindowSegment operator-(const WindowSegment& a, const WindowSegment& b) {
  require_same_lag(a.lag_, a.mesh_, b.lag_, b.mesh_);
  std::vector<double> v(a.samples_.size());
  for (std::size_t k = 0; k < v.size(); ++k) v[k] = a.samples_[k] - b.samples_[k];
  return WindowSegment(a.lag_, a.mesh_, a.ref_time_, std::move(v));
}

WindowSegment window_at(const Path& path, double t, double lag) {
  const TimeGrid& g = path.grid();
  if (lag > g.horizon() * (1.0 + 1e-12)) throw InvalidArgument("window lag exceeds the horizon");
  const int l = g.node_multiple(lag, "lag");
  std::vector<double> v(static_cast<std::size_t>(l) + 1);
  // On-node reference times read node values directly so that eta(0) equals
  // the path value bit for bit.
  const double pos = t / g.mesh();
  const double node = std::round(pos);
  if (std::fabs(pos - node) <= 1e-9 * std::max(1.0, std::fabs(node))) {
    const long j = static_cast<long>(node);
    for (int k = 0; k <= l; ++k) v[static_cast<std::size_t>(k)] = path.extended(j - l + k);
  } else {
    for (int k = 0; k <= l; ++k)
      v[static_cast<std::size_t>(k)] = eval_extended(path, t + (k - l) * g.mesh());
  }
  return WindowSegment(lag, g.mesh(), t, std::move(v));
}

WindowSegment window_increment(const Path& path, double s, double lag, double eps) {
  return window_at(path, s + eps, lag) - window_at(path, s, lag);
}

double sup_norm(const WindowSegment& eta) {
  double m = 0.0;
  for (double v : eta.samples()) m = std::max(m, std::fabs(v));
  return m;
}

std::vector<double> trapezoid_weights(int lag_nodes, double mesh) {
  std::vector<double> w(static_cast<std::size_t>(lag_nodes) + 1, mesh);
  w.front() = 0.5 * mesh;
  w.back() = 0.5 * mesh;
  return w;
}

double integral(const WindowSegment& eta) {
  const std::vector<double> w = trapezoid_weights(eta.lag_nodes(), eta.mesh());
  return simd::active().dot(w.data(), eta.samples().data(), w.size());
}

// ---------------------------------------------------------------------------

SignedMeasure::SignedMeasure(double lag, double mesh, std::vector<Atom> atoms,
                             std::vector<double> density)
    : lag_(lag),
      mesh_(mesh),
      lag_nodes_(lag_node_count(lag, mesh)),
      atoms_(std::move(atoms)),
      density_(std::move(density)) {
  if (!density_.empty() && density_.size() != static_cast<std::size_t>(lag_nodes_) + 1)
    throw LagMismatch("signed measure: density must be sampled on every lag node");
  for (const Atom& a : atoms_) {
    if (!std::isfinite(a.weight)) throw InvalidArgument("signed measure: non-finite atom weight");
    const double k = (a.loc + lag_) / mesh_;
    const double kr = std::round(k);
    if (a.loc > 1e-12 * lag_ || a.loc < -lag_ * (1.0 + 1e-12) ||
        std::fabs(k - kr) > 1e-9 * std::max(1.0, kr)) {
      std::ostringstream os;
      os << "signed measure: atom at " << a.loc << " is not a lag node of [-" << lag_ << ",0]";
      throw InvalidArgument(os.str());
    }
    atom_nodes_.push_back(static_cast<int>(kr));
  }
}

SignedMeasure SignedMeasure::zero(double lag, double mesh) { return SignedMeasure(lag, mesh, {}); }

SignedMeasure SignedMeasure::dirac(double lag, double mesh, double loc, double weight) {
  return SignedMeasure(lag, mesh, {{loc, weight}});
}

SignedMeasure SignedMeasure::with_density(double lag, double mesh, std::vector<double> density) {
  return SignedMeasure(lag, mesh, {}, std::move(density));
}

double SignedMeasure::mass_at_zero() const noexcept {
  double m = 0.0;
  for (std::size_t i = 0; i < atoms_.size(); ++i)
    if (atom_nodes_[i] == lag_nodes_) m += atoms_[i].weight;
  return m;
}

double SignedMeasure::total_variation() const {
  double tv = 0.0;
  for (const Atom& a : atoms_) tv += std::fabs(a.weight);
  if (!density_.empty()) {
    const std::vector<double> w = trapezoid_weights(lag_nodes_, mesh_);
    for (std::size_t k = 0; k < w.size(); ++k) tv += w[k] * std::fabs(density_[k]);
  }
  return tv;
}

SignedMeasure SignedMeasure::scaled(double c) const {
  std::vector<Atom> atoms(atoms_);
  for (Atom& a : atoms) a.weight *= c;
  std::vector<double> d(density_);
  for (double& v : d) v *= c;
  return SignedMeasure(lag_, mesh_, std::move(atoms), std::move(d));
}

SignedMeasure operator+(const SignedMeasure& a, const SignedMeasure& b) {
  require_same_lag(a.lag_, a.mesh_, b.lag_, b.mesh_);
  std::vector<SignedMeasure::Atom> atoms(a.atoms_);
  atoms.insert(atoms.end(), b.atoms_.begin(), b.atoms_.end());
  std::vector<double> d;
  if (a.density_.empty()) {
    d = b.density_;
  } else if (b.density_.empty()) {
    d = a.density_;
  } else {
    d.resize(a.density_.size());
    for (std::size_t k = 0; k < d.size(); ++k) d[k] = a.density_[k] + b.density_[k];
  }
  return SignedMeasure(a.lag_, a.mesh_, std::move(atoms), std::move(d));
}

namespace detail {

PaddedPath pad(const Path& x, std::size_t left, std::size_t right) {
  return PaddedPath{padded_values(x, left, right), left};
}

PreparedMeasure::PreparedMeasure(const SignedMeasure& mu) {
  for (std::size_t i = 0; i < mu.atoms().size(); ++i) {
    atom_nodes_.push_back(mu.atom_node(i));
    atom_weights_.push_back(mu.atoms()[i].weight);
  }
  if (!mu.density().empty()) {
    weighted_density_ = trapezoid_weights(mu.lag_nodes(), mu.mesh());
    for (std::size_t k = 0; k < weighted_density_.size(); ++k)
      weighted_density_[k] *= mu.density()[k];
  }
}

double PreparedMeasure::apply(const double* hi, const double* lo) const {
  double s = 0.0;
  for (std::size_t i = 0; i < atom_nodes_.size(); ++i) {
    const std::size_t k = static_cast<std::size_t>(atom_nodes_[i]);
    s += atom_weights_[i] * (hi[k] - lo[k]);
  }
  if (!weighted_density_.empty())
    s += simd::active().weighted_diff_sum(weighted_density_.data(), hi, lo,
                                          weighted_density_.size());
  return s;
}

}  // namespace detail

double pair_measure(const SignedMeasure& mu, const WindowSegment& eta) {
  require_same_lag(mu.lag(), mu.mesh(), eta.lag(), eta.mesh());
  const std::vector<double> zeros(eta.samples().size(), 0.0);
  return detail::PreparedMeasure(mu).apply(eta.samples().data(), zeros.data());
}

Path banach_forward_integral_eps(const std::function<SignedMeasure(std::size_t node)>& integrand,
                                 const Path& x, double lag, double eps) {
  const TimeGrid& g = x.grid();
  if (lag > g.horizon() * (1.0 + 1e-12)) throw InvalidArgument("window lag exceeds the horizon");
  const int l = g.node_multiple(lag, "lag");
  const int m = g.node_multiple(eps);
  if (m >= g.steps()) throw InvalidArgument("eps must be below the horizon");
  const std::size_t n = static_cast<std::size_t>(g.steps());
  const detail::PaddedPath xp = detail::pad(x, static_cast<std::size_t>(l), static_cast<std::size_t>(m));

  std::vector<double> terms(n);
  for (std::size_t j = 0; j < n; ++j) {
    const SignedMeasure mu = integrand(j);
    require_same_lag(mu.lag(), mu.mesh(), lag, g.mesh());
    if (!std::isfinite(mu.total_variation()))
      throw InvalidArgument("forward integral: integrand has unbounded total variation");
    // Window at node j starts at padded index j (left pad = L).
    const double* lo = xp.values.data() + j;
    terms[j] = detail::PreparedMeasure(mu).apply(lo + m, lo);
  }
  return Path(g, detail::running_sum(terms, 1.0 / m), "banach-forward");
}

}  // namespace regcalc
