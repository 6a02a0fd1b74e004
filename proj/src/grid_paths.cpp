#include "regcalc/grid_paths.hpp"

#include <lapacke.h>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <iostream>
#include <map>
#include <mutex>
#include <random>
#include <sstream>

#include "regcalc/error.hpp"
#include "regcalc/simd.hpp"

namespace regcalc {

TimeGrid::TimeGrid(double horizon, int steps)
    : horizon_(horizon), steps_(steps), mesh_(horizon / steps) {
  if (!(horizon > 0.0) || !std::isfinite(horizon))
    throw InvalidArgument("time grid: horizon must be positive");
  if (steps < 2) throw InvalidArgument("time grid: need at least 2 steps");
}

double TimeGrid::node(long i) const noexcept {
  if (i == steps_) return horizon_;
  return static_cast<double>(i) * horizon_ / steps_;
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> out(static_cast<std::size_t>(steps_) + 1);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = node(static_cast<long>(i));
  return out;
}

int TimeGrid::node_multiple(double eps, std::string_view what) const {
  const double ratio = eps / mesh_;
  const double m = std::round(ratio);
  if (!(eps > 0.0) || m < 1.0 || std::fabs(ratio - m) > 1e-9 * std::max(1.0, m)) {
    std::ostringstream os;
    os << what << " = " << eps << " is not a positive multiple of the mesh " << mesh_;
    throw InvalidArgument(os.str());
  }
  return static_cast<int>(m);
}

TimeGrid make_grid(double horizon, int steps) { return TimeGrid(horizon, steps); }

Path::Path(TimeGrid grid, std::vector<double> values, std::string label)
    : grid_(grid), values_(std::move(values)), label_(std::move(label)) {
  if (values_.size() != static_cast<std::size_t>(grid_.steps()) + 1)
    throw InvalidArgument("path: value count does not match grid");
  for (double v : values_)
    if (!std::isfinite(v)) throw InvalidArgument("path: non-finite value");
}

double Path::extended(long i) const noexcept {
  if (i <= 0) return values_.front();
  if (i >= static_cast<long>(values_.size())) return values_.back();
  return values_[static_cast<std::size_t>(i)];
}

std::vector<double> Path::extended_range(long first, std::size_t count) const {
  std::vector<double> out(count);
  for (std::size_t k = 0; k < count; ++k) out[k] = extended(first + static_cast<long>(k));
  return out;
}

double eval_extended(const Path& path, double t) {
  const TimeGrid& g = path.grid();
  if (t <= 0.0) return path.front();
  if (t >= g.horizon()) return path.back();
  const double pos = t / g.mesh();
  const long i = std::min(static_cast<long>(pos), static_cast<long>(g.steps()) - 1);
  const double w = pos - static_cast<double>(i);
  const std::size_t iu = static_cast<std::size_t>(i);
  if (w == 0.0) return path[iu];
  return (1.0 - w) * path[iu] + w * path[iu + 1];
}

void require_same_grid(const Path& a, const Path& b) {
  if (!(a.grid() == b.grid())) throw GridMismatch("paths live on different grids");
}

Path combine(double a, const Path& x, double b, const Path& y) {
  require_same_grid(x, y);
  std::vector<double> v(x.size());
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = a * x[i] + b * y[i];
  return Path(x.grid(), std::move(v), x.label());
}

Path shifted(const Path& x, long lag_nodes) {
  return Path(x.grid(), x.extended_range(-lag_nodes, x.size()), x.label());
}

// ---------------------------------------------------------------------------
// GaussianSpec

GaussianSpec GaussianSpec::brownian() { return {}; }

GaussianSpec GaussianSpec::fbm(double hurst) {
  GaussianSpec s;
  s.family = Family::fbm;
  s.hurst = hurst;
  return s;
}

GaussianSpec GaussianSpec::bifractional(double hurst, double k) {
  GaussianSpec s;
  s.family = Family::bifractional;
  s.hurst = hurst;
  s.k = k;
  return s;
}

GaussianSpec GaussianSpec::scaled(GaussianSpec base, double c) {
  GaussianSpec s;
  s.family = Family::scaled;
  s.scale = c;
  s.components.push_back(std::move(base));
  return s;
}

GaussianSpec GaussianSpec::mixed(std::vector<GaussianSpec> parts) {
  GaussianSpec s;
  s.family = Family::mixed;
  s.components = std::move(parts);
  return s;
}

void GaussianSpec::validate() const {
  switch (family) {
    case Family::brownian: break;
    case Family::fbm:
      if (!(hurst > 0.0 && hurst < 1.0))
        throw InvalidArgument("fbm: Hurst parameter must lie in (0,1)");
      break;
    case Family::bifractional:
      if (!(hurst > 0.0 && hurst < 1.0))
        throw InvalidArgument("bifractional: H must lie in (0,1)");
      if (!(k > 0.0 && k <= 1.0))
        throw InvalidArgument("bifractional: K must lie in (0,1]");
      break;
    case Family::scaled:
      if (components.size() != 1)
        throw InvalidArgument("scaled: exactly one base spec required");
      if (!std::isfinite(scale)) throw InvalidArgument("scaled: non-finite factor");
      components.front().validate();
      break;
    case Family::mixed:
      if (components.empty()) throw InvalidArgument("mixed: at least one component required");
      for (const auto& c : components) c.validate();
      break;
  }
}

namespace {

std::string number(double v) {
  char buf[64];
  auto r = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, r.ptr);
}

class SpecParser {
 public:
  explicit SpecParser(std::string_view s) : s_(s) {}

  GaussianSpec parse_all() {
    GaussianSpec spec = parse_one();
    if (pos_ != s_.size()) fail("trailing characters");
    return spec;
  }

 private:
  [[noreturn]] void fail(std::string_view why) const {
    std::ostringstream os;
    os << "process spec '" << s_ << "': " << why << " at offset " << pos_;
    throw InvalidArgument(os.str());
  }

  std::string_view word() {
    const std::size_t start = pos_;
    while (pos_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    return s_.substr(start, pos_ - start);
  }

  double num() {
    if (pos_ >= s_.size() || s_[pos_] != ':') fail("expected ':'");
    ++pos_;
    std::size_t end = pos_;
    while (end < s_.size() && s_[end] != ':' && s_[end] != '[' && s_[end] != ',' &&
           s_[end] != ']')
      ++end;
    const std::string_view tok = s_.substr(pos_, end - pos_);
    double v = 0.0;
    // Rational shorthand like 5/6 is convenient for HK = 1/2 families.
    if (auto slash = tok.find('/'); slash != std::string_view::npos) {
      double a = 0.0, b = 0.0;
      auto r1 = std::from_chars(tok.data(), tok.data() + slash, a);
      auto r2 = std::from_chars(tok.data() + slash + 1, tok.data() + tok.size(), b);
      if (r1.ec != std::errc() || r2.ec != std::errc() || r1.ptr != tok.data() + slash ||
          r2.ptr != tok.data() + tok.size() || b == 0.0)
        fail("bad number");
      v = a / b;
    } else {
      auto r = std::from_chars(tok.data(), tok.data() + tok.size(), v);
      if (r.ec != std::errc() || r.ptr != tok.data() + tok.size()) fail("bad number");
    }
    pos_ = end;
    return v;
  }

  std::vector<GaussianSpec> list() {
    if (pos_ >= s_.size() || s_[pos_] != '[') fail("expected '['");
    ++pos_;
    std::vector<GaussianSpec> out;
    out.push_back(parse_one());
    while (pos_ < s_.size() && s_[pos_] == ',') {
      ++pos_;
      out.push_back(parse_one());
    }
    if (pos_ >= s_.size() || s_[pos_] != ']') fail("expected ']'");
    ++pos_;
    return out;
  }

  GaussianSpec parse_one() {
    const std::string_view w = word();
    if (w == "brownian") return GaussianSpec::brownian();
    if (w == "fbm") return GaussianSpec::fbm(num());
    if (w == "bifractional") {
      const double h = num();
      return GaussianSpec::bifractional(h, num());
    }
    if (w == "scaled") {
      const double c = num();
      auto parts = list();
      if (parts.size() != 1) fail("scaled takes one base spec");
      return GaussianSpec::scaled(std::move(parts.front()), c);
    }
    if (w == "mixed") return GaussianSpec::mixed(list());
    fail("unknown family");
  }

  std::string_view s_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string GaussianSpec::describe() const {
  switch (family) {
    case Family::brownian: return "brownian";
    case Family::fbm: return "fbm:" + number(hurst);
    case Family::bifractional: return "bifractional:" + number(hurst) + ":" + number(k);
    case Family::scaled: return "scaled:" + number(scale) + "[" + components.front().describe() + "]";
    case Family::mixed: {
      std::string out = "mixed[";
      for (std::size_t i = 0; i < components.size(); ++i) {
        if (i) out += ",";
        out += components[i].describe();
      }
      return out + "]";
    }
  }
  return {};
}

GaussianSpec GaussianSpec::parse(std::string_view text) { return SpecParser(text).parse_all(); }

// ---------------------------------------------------------------------------
// Covariances

double covariance(const GaussianSpec& spec, double s, double t) {
  switch (spec.family) {
    case GaussianSpec::Family::brownian: return std::min(s, t);
    case GaussianSpec::Family::fbm: {
      // Same operation order as bifractional with K = 1, so the two agree
      // bit for bit.
      const double h2 = 2.0 * spec.hurst;
      return 0.5 * ((std::pow(s, h2) + std::pow(t, h2)) - std::pow(std::fabs(t - s), h2));
    }
    case GaussianSpec::Family::bifractional: {
      const double h2 = 2.0 * spec.hurst;
      const double a = std::pow(s, h2) + std::pow(t, h2);
      return std::pow(2.0, -spec.k) *
             (std::pow(a, spec.k) - std::pow(std::fabs(t - s), h2 * spec.k));
    }
    case GaussianSpec::Family::scaled:
      return spec.scale * spec.scale * covariance(spec.components.front(), s, t);
    case GaussianSpec::Family::mixed: {
      double r = 0.0;
      for (const auto& c : spec.components) r += covariance(c, s, t);
      return r;
    }
  }
  return 0.0;
}

std::vector<double> covariance_matrix(const GaussianSpec& spec, const TimeGrid& grid) {
  spec.validate();
  const std::size_t n = static_cast<std::size_t>(grid.steps());
  std::vector<double> c(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    const double ti = grid.node(static_cast<long>(i) + 1);
    for (std::size_t j = 0; j <= i; ++j) {
      const double v = covariance(spec, ti, grid.node(static_cast<long>(j) + 1));
      c[i * n + j] = v;
      c[j * n + i] = v;
    }
  }
  return c;
}

std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
  std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// ---------------------------------------------------------------------------
// Sampler

namespace {

constexpr int kMaxJitter = 3;
constexpr double kJitterScale = 1e-12;

// Packed lower Cholesky factor (row i holds i + 1 entries).
std::vector<double> factorize(const GaussianSpec& spec, const TimeGrid& grid,
                              int& jitter_events) {
  const std::vector<double> cov = covariance_matrix(spec, grid);
  const std::size_t n = static_cast<std::size_t>(grid.steps());
  double max_diag = 0.0;
  for (std::size_t i = 0; i < n; ++i) max_diag = std::max(max_diag, cov[i * n + i]);

  std::vector<double> a;
  lapack_int info = 0;
  for (int attempt = 0; attempt <= kMaxJitter; ++attempt) {
    a = cov;
    if (attempt > 0) {
      const double jitter = attempt * kJitterScale * max_diag;
      for (std::size_t i = 0; i < n; ++i) a[i * n + i] += jitter;
      ++jitter_events;
      std::clog << "regcalc: covariance of " << spec.describe() << " on N=" << n
                << " not positive definite at minor " << info << "; jitter "
                << jitter << " (attempt " << attempt << ")\n";
    }
    info = LAPACKE_dpotrf(LAPACK_ROW_MAJOR, 'L', static_cast<lapack_int>(n), a.data(),
                          static_cast<lapack_int>(n));
    if (info == 0) break;
    if (info < 0) throw InvalidArgument("dpotrf: bad argument");
  }
  if (info != 0) {
    std::ostringstream os;
    os << "covariance of " << spec.describe() << " is not positive semidefinite: "
       << "leading minor " << info << " fails after " << kMaxJitter << " jitters";
    throw CovarianceNotPsd(static_cast<std::size_t>(info), os.str());
  }

  std::vector<double> packed(n * (n + 1) / 2);
  for (std::size_t i = 0; i < n; ++i)
    std::copy_n(a.data() + i * n, i + 1, packed.data() + i * (i + 1) / 2);
  return packed;
}

struct CachedFactor {
  std::shared_ptr<const std::vector<double>> factor;
  int jitter_events = 0;
};

// Factors are large (N(N+1)/2 doubles) and reused by every sampler of the
// same (spec, grid), including mixed components.
CachedFactor cached_factor(const GaussianSpec& spec, const TimeGrid& grid) {
  static std::mutex mu;
  static std::map<std::string, CachedFactor> cache;
  std::ostringstream key;
  key << spec.describe() << '|' << number(grid.horizon()) << '|' << grid.steps();
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key.str());
  if (it == cache.end()) {
    CachedFactor entry;
    entry.factor = std::make_shared<const std::vector<double>>(
        factorize(spec, grid, entry.jitter_events));
    it = cache.emplace(key.str(), std::move(entry)).first;
  }
  return it->second;
}

}  // namespace

GaussianSampler::GaussianSampler(GaussianSpec spec, TimeGrid grid)
    : spec_(std::move(spec)), grid_(grid) {
  spec_.validate();
  switch (spec_.family) {
    case GaussianSpec::Family::brownian: break;
    case GaussianSpec::Family::fbm:
    case GaussianSpec::Family::bifractional:
    {
      CachedFactor f = cached_factor(spec_, grid_);
      factor_ = std::move(f.factor);
      jitter_events_ = f.jitter_events;
      break;
    }
    case GaussianSpec::Family::scaled:
    case GaussianSpec::Family::mixed:
      for (const auto& c : spec_.components) {
        children_.emplace_back(c, grid_);
        jitter_events_ += children_.back().jitter_events();
      }
      break;
  }
}

void GaussianSampler::sample_into(std::uint64_t seed, std::span<double> out) const {
  const std::size_t n = static_cast<std::size_t>(grid_.steps());
  switch (spec_.family) {
    case GaussianSpec::Family::brownian: {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      const double sd = std::sqrt(grid_.mesh());
      out[0] = 0.0;
      double acc = 0.0;
      for (std::size_t i = 1; i <= n; ++i) {
        acc += sd * normal(rng);
        out[i] = acc;
      }
      return;
    }
    case GaussianSpec::Family::fbm:
    case GaussianSpec::Family::bifractional: {
      std::mt19937_64 rng(seed);
      std::normal_distribution<double> normal(0.0, 1.0);
      std::vector<double> z(n);
      for (double& v : z) v = normal(rng);
      const auto& dot = simd::active().dot;
      const double* l = factor_->data();
      out[0] = 0.0;
      for (std::size_t i = 0; i < n; ++i) out[i + 1] = dot(l + i * (i + 1) / 2, z.data(), i + 1);
      return;
    }
    case GaussianSpec::Family::scaled: {
      children_.front().sample_into(seed, out);
      for (double& v : out) v *= spec_.scale;
      return;
    }
    case GaussianSpec::Family::mixed: {
      std::fill(out.begin(), out.end(), 0.0);
      std::vector<double> part(out.size());
      for (std::size_t k = 0; k < children_.size(); ++k) {
        children_[k].sample_into(derive_seed(seed, k), part);
        for (std::size_t i = 0; i < out.size(); ++i) out[i] += part[i];
      }
      return;
    }
  }
}

Path GaussianSampler::sample(std::uint64_t seed) const {
  std::vector<double> v(static_cast<std::size_t>(grid_.steps()) + 1);
  sample_into(seed, v);
  return Path(grid_, std::move(v), spec_.describe());
}

Path sample(const GaussianSpec& spec, const TimeGrid& grid, std::uint64_t seed) {
  static std::mutex mu;
  static std::map<std::string, std::shared_ptr<const GaussianSampler>> cache;
  std::ostringstream key;
  key << spec.describe() << '|' << number(grid.horizon()) << '|' << grid.steps();
  std::shared_ptr<const GaussianSampler> sampler;
  {
    std::lock_guard<std::mutex> lock(mu);
    auto it = cache.find(key.str());
    if (it == cache.end())
      it = cache.emplace(key.str(), std::make_shared<const GaussianSampler>(spec, grid)).first;
    sampler = it->second;
  }
  return sampler->sample(seed);
}

}  // namespace regcalc
