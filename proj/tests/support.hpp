#pragma once

// Seeded generators for property tests.

#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

#include "regcalc/grid_paths.hpp"
#include "regcalc/window.hpp"

namespace testing_support {

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  double normal() { return std::normal_distribution<double>()(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }
  std::uint64_t seed() { return rng_(); }

  std::vector<double> normals(std::size_t n, double sd = 1.0) {
    std::vector<double> v(n);
    for (double& x : v) x = sd * normal();
    return v;
  }

  // Random walk started at 0 with N(0, dt) steps.
  regcalc::Path walk(const regcalc::TimeGrid& g) {
    std::vector<double> v(static_cast<std::size_t>(g.steps()) + 1, 0.0);
    const double sd = std::sqrt(g.mesh());
    for (std::size_t i = 1; i < v.size(); ++i) v[i] = v[i - 1] + sd * normal();
    return regcalc::Path(g, std::move(v));
  }

  regcalc::WindowSegment segment(double lag, double mesh) {
    const long l = std::lround(lag / mesh);
    return regcalc::WindowSegment(lag, mesh, 0.0, normals(static_cast<std::size_t>(l) + 1));
  }

  regcalc::GaussianSpec spec(int depth = 0) {
    using regcalc::GaussianSpec;
    const int pick = integer(0, depth < 2 ? 4 : 2);
    switch (pick) {
      case 0: return GaussianSpec::brownian();
      case 1: return GaussianSpec::fbm(uniform(0.05, 0.95));
      case 2: return GaussianSpec::bifractional(uniform(0.05, 0.95), uniform(0.05, 1.0));
      case 3: return GaussianSpec::scaled(spec(depth + 1), uniform(-3.0, 3.0));
      default: {
        std::vector<GaussianSpec> parts;
        const int n = integer(1, 3);
        for (int k = 0; k < n; ++k) parts.push_back(spec(depth + 1));
        return GaussianSpec::mixed(std::move(parts));
      }
    }
  }

 private:
  std::mt19937_64 rng_;
};

inline double max_abs_diff(const regcalc::Path& a, const regcalc::Path& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::fabs(a[i] - b[i]));
  return m;
}

}  // namespace testing_support
