#pragma once

// Functionals F(t, eta) on window segments with closed-form first and second
// Frechet derivatives, and a finite-difference check of those derivatives.
//
// The reference time of the segment plays the role of t.

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "regcalc/chi_qv.hpp"
#include "regcalc/window.hpp"

namespace regcalc {

struct Functional {
  std::string name;
  ChiTag chi_tag = ChiTag::d00;
  std::function<double(const WindowSegment&)> eval;
  std::function<SignedMeasure(const WindowSegment&)> d1;
  std::function<ChiElement(const WindowSegment&)> d2;
  // Time derivative; empty means time-independent.
  std::function<double(const WindowSegment&)> dt;

  double time_derivative(const WindowSegment& eta) const { return dt ? dt(eta) : 0.0; }
};

// A C^2 real function with its first two derivatives.
struct ScalarFunction {
  std::string name;
  std::function<double(double)> f;
  std::function<double(double)> df;
  std::function<double(double)> d2f;

  static ScalarFunction linear();  // x
  static ScalarFunction square();  // x^2
  static ScalarFunction cosine();  // cos x
  static ScalarFunction constant(double c);
  // linear, square, cos
  static ScalarFunction named(const std::string& name);
};

// f(eta(0)); D = f'(eta(0)) delta_0; D^2 = f''(eta(0)) delta_0 (x) delta_0.
Functional example_a(ScalarFunction f);

// (int eta)^2; D = 2 (int eta) dx; D^2 = 2 on the square.
Functional example_b();

// int eta^2; D = 2 eta(x) dx; D^2 = 2 delta_x(dy) dx.
Functional example_c();

struct FdRow {
  double first_fd = 0.0;
  double first_analytic = 0.0;
  double first_rel = 0.0;
  double second_fd = 0.0;
  double second_analytic = 0.0;
  double second_rel = 0.0;
};

struct FdReport {
  double h = 0.0;
  std::vector<FdRow> rows;  // one per direction
  double max_first_rel = 0.0;
  double max_second_rel = 0.0;

  bool pass(double tolerance) const {
    return max_first_rel < tolerance && max_second_rel < tolerance;
  }
};

// Relative error |fd - analytic| / (|analytic| + 1e-8) of the central first
// difference against <D F(eta), psi> and of the symmetric second difference
// against <D^2 F(eta), psi (x) psi>.
FdReport fd_check(const Functional& f, const WindowSegment& eta,
                  const std::vector<WindowSegment>& directions, double h);

// Brownian bridge on the lag nodes shifted by an independent N(0, 1) level,
// so eta(0) is generically nonzero.
WindowSegment random_segment(double lag, double mesh, std::uint64_t seed);

}  // namespace regcalc
