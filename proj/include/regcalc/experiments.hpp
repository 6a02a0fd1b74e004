#pragma once

// Experiment orchestration shared by the command-line tool and the acceptance
// run: configuration, named catalogues (processes, chi elements, functionals,
// payoffs), report files and the JSON-lines manifest.
//
// Seeds: replica r of any study uses master_seed + r; mixed processes derive
// component seeds with derive_seed(seed, k).

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "regcalc/chi_qv.hpp"
#include "regcalc/clark_ocone.hpp"
#include "regcalc/functionals.hpp"
#include "regcalc/grid_paths.hpp"
#include "regcalc/ito_check.hpp"
#include "regcalc/serialize.hpp"

namespace regcalc::experiments {

struct RunConfig {
  std::string command;  // paths, qv, chiqv, ito, replicate
  std::string process = "brownian";
  double horizon = 1.0;
  int steps = 4096;
  std::uint64_t seed = 0;
  int replicas = 100;
  std::vector<int> ladder{64, 32, 16, 8};
  double lag = 0.25;
  double shift = 0.0;  // X_t + X_{t - shift} when positive
  double tolerance = 0.05;
  std::string phi = "atomic00";
  std::string functional = "a:square";
  std::string quad = "closed";     // closed, estimated
  std::string payoff = "square";
  std::string hedge = "vanilla";   // vanilla, zero-qv, brownian-qv
  std::string kernel = "one";      // one, T-s
  std::vector<int> sizes{1024, 2048, 4096};
  int quadrature = 64;
  bool override_gate = false;
  std::string isa;                 // empty: whatever is active
  std::string tag;                 // output file prefix suffix
  std::filesystem::path out_dir;
};

json to_json(const RunConfig& c);
RunConfig config_from_json(const json& j);

// Throws InvalidArgument if the configuration cannot run.
void validate(const RunConfig& c);

// t -> [X]_t when the family has a known finite bracket: brownian t; fbm 0
// for H > 1/2; bifractional 2^{1-K} t at HK = 1/2 and 0 above; scaled c^2
// times the base; mixed the sum of the components. With a positive shift s the
// bracket of X + X(. - s) is B(t) + B((t - s)^+).
std::optional<std::function<double(double)>> known_bracket(const GaussianSpec& spec,
                                                           double shift = 0.0);

ProcessSource make_source(const GaussianSpec& spec, const TimeGrid& grid, double shift = 0.0);

// atomic00[:l], l2, l2-dense, diag[:c], chi0[:l]
ChiElement named_phi(const std::string& name, double lag, double mesh);

// a:linear, a:square, a:cos, b, c
Functional named_functional(const std::string& name);

// phi(s) for the Wiener-functional hedge: one, T-s
std::function<double(double)> named_kernel(const std::string& name, double horizon);

struct GlobalNormStudy {
  std::vector<double> eps;
  std::vector<double> eps_tilde;
  std::vector<double> median;
  std::vector<double> q90;
  // Least squares median = intercept + slope * ln(1 / eps_tilde).
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

GlobalNormStudy global_norm_study(const ProcessSource& process, double lag, double horizon,
                                  const EpsilonLadder& ladder, std::uint64_t master_seed);

struct HedgeStudy {
  std::vector<int> sizes;
  std::vector<std::vector<HedgeRow>> rows;  // per size, per replica
  std::vector<double> median;
  std::vector<double> q90;
  double h0 = 0.0;
  bool certified_by_construction = false;
};

// Paths are gated individually unless the process has a closed-form bracket
// equal to t (or 0 in the zero-qv mode).
HedgeStudy hedge_study(const RunConfig& c);

struct RunOutcome {
  std::string verdict;  // pass, fail, informational
  std::vector<std::string> files;
  json summary;
};

// Runs one command, writes its files under out_dir and appends a line to
// out_dir/manifest.jsonl.
RunOutcome run(const RunConfig& c);

// Reads line `index` (0-based) of a manifest.
RunConfig config_from_manifest(const std::filesystem::path& manifest, std::size_t index = 0);

// 0 for pass or informational, 2 for fail.
int exit_code(const std::string& verdict);

}  // namespace regcalc::experiments
