// regcalc: sample paths, run convergence studies and hedging experiments.
//
//   regcalc paths --family bifractional --H 0.625 --K 0.8 --N 4096 --seed 7
//   regcalc qv --family brownian --out runs/qv
//   regcalc chiqv --phi diag --family brownian --lag 1
//   regcalc ito --functional a:square --family brownian
//   regcalc replicate --payoff square --family mixed --components brownian,fbm:0.75
//   regcalc rerun --manifest runs/qv/manifest.jsonl --out runs/qv-again
//
// Options may also come from a key=value file given with --config; flags on
// the command line win. Exit status: 0 pass, 2 failed verdict, 64 usage.

#include <CLI11.hpp>
#include <cstdlib>
#include <iostream>

#include "regcalc/error.hpp"
#include "regcalc/experiments.hpp"

namespace {

constexpr int kUsage = 64;
constexpr int kSoftware = 70;

std::vector<int> parse_ints(const std::string& text, const char* what) {
  std::vector<int> out;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t comma = std::min(text.find(',', pos), text.size());
    const std::string item = text.substr(pos, comma - pos);
    std::size_t used = 0;
    int v = 0;
    try {
      v = std::stoi(item, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != item.size())
      throw regcalc::InvalidArgument(std::string(what) + ": bad integer '" + item + "'");
    out.push_back(v);
    pos = comma + 1;
  }
  return out;
}

struct ProcessFlags {
  std::string process;
  std::string family = "brownian";
  std::string hurst;
  std::string k;
  std::string scale;
  std::string components;

  std::string text() const {
    if (!process.empty()) return process;
    const auto need = [&](const std::string& v, const char* flag) {
      if (v.empty()) throw regcalc::InvalidArgument(family + " needs " + flag);
      return v;
    };
    if (family == "brownian") return "brownian";
    if (family == "fbm") return "fbm:" + need(hurst, "--H");
    if (family == "bifractional") return "bifractional:" + need(hurst, "--H") + ":" + need(k, "--K");
    if (family == "mixed") return "mixed[" + need(components, "--components") + "]";
    if (family == "scaled")
      return "scaled:" + need(scale, "--scale") + "[" + need(components, "--components") + "]";
    throw regcalc::InvalidArgument("unknown family '" + family + "'");
  }
};

int report(const regcalc::experiments::RunOutcome& out, const regcalc::experiments::RunConfig& c) {
  std::cout << c.command << ": " << out.verdict << '\n';
  for (const auto& f : out.files) std::cout << "  " << (c.out_dir / f).string() << '\n';
  return regcalc::experiments::exit_code(out.verdict);
}

}  // namespace

int main(int argc, char** argv) {
  using regcalc::experiments::RunConfig;

  CLI::App app{"Regularization calculus experiments"};
  app.set_config("--config", "", "key=value configuration file");
  app.option_defaults()->multi_option_policy(CLI::MultiOptionPolicy::TakeLast);
  app.require_subcommand(1);

  RunConfig cfg;
  ProcessFlags pf;
  std::string ladder = "64,32,16,8";
  std::string sizes = "1024,2048,4096";
  std::string out_dir;

  app.add_option("--process", pf.process, "process spec, e.g. mixed[brownian,fbm:0.75]");
  app.add_option("--family", pf.family, "brownian, fbm, bifractional, mixed, scaled");
  app.add_option("--H", pf.hurst, "Hurst parameter (a or a/b)");
  app.add_option("--K", pf.k, "bifractional K (a or a/b)");
  app.add_option("--scale", pf.scale, "factor for the scaled family");
  app.add_option("--components", pf.components, "comma-separated component specs");
  app.add_option("--T", cfg.horizon, "horizon");
  app.add_option("--N", cfg.steps, "grid steps");
  app.add_option("--seed", cfg.seed, "master seed");
  app.add_option("--M,--replicas", cfg.replicas, "Monte Carlo replicas");
  app.add_option("--ladder", ladder, "eps / dt multiples, decreasing");
  app.add_option("--lag,--tau", cfg.lag, "window lag");
  app.add_option("--shift", cfg.shift, "add X(. - shift) to the process");
  app.add_option("--tol", cfg.tolerance, "verdict tolerance");
  app.add_option("--phi", cfg.phi, "atomic00[:l], l2, l2-dense, diag[:c], chi0[:l], global");
  app.add_option("--functional", cfg.functional, "a:linear, a:square, a:cos, b, c");
  app.add_option("--quad", cfg.quad, "closed or estimated quadratic term");
  app.add_option("--payoff", cfg.payoff, "linear, square, cos, call:K");
  app.add_option("--hedge", cfg.hedge, "vanilla, zero-qv, brownian-qv");
  app.add_option("--kernel", cfg.kernel, "Wiener-functional kernel: one, T-s");
  app.add_option("--sizes", sizes, "grid sizes for replicate");
  app.add_option("--Q", cfg.quadrature, "Gauss-Hermite nodes");
  app.add_flag("--override-gate", cfg.override_gate, "hedge paths that fail the QV gate");
  app.add_option("--isa", cfg.isa, "scalar, avx2, neon");
  app.add_option("--tag", cfg.tag, "output file name suffix");
  app.add_option("--out", out_dir, "output directory (default $REGCALC_OUT_DIR or ./regcalc-out)");

  for (const char* name : {"paths", "qv", "chiqv", "ito", "replicate"})
    app.add_subcommand(name)->fallthrough();
  std::string manifest;
  std::size_t line = 0;
  auto* rerun = app.add_subcommand("rerun", "repeat a run recorded in a manifest");
  rerun->add_option("--manifest", manifest)->required();
  rerun->add_option("--line", line, "0-based manifest line");
  rerun->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  if (out_dir.empty()) {
    const char* env = std::getenv("REGCALC_OUT_DIR");
    out_dir = env && *env ? env : "regcalc-out";
  }

  try {
    if (rerun->parsed()) {
      RunConfig again = regcalc::experiments::config_from_manifest(manifest, line);
      again.out_dir = out_dir;
      return report(regcalc::experiments::run(again), again);
    }
    cfg.command = app.get_subcommands().front()->get_name();
    cfg.process = pf.text();
    cfg.ladder = parse_ints(ladder, "--ladder");
    cfg.sizes = parse_ints(sizes, "--sizes");
    cfg.out_dir = out_dir;
    return report(regcalc::experiments::run(cfg), cfg);
  } catch (const regcalc::InvalidArgument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const regcalc::UnsupportedCombination& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kSoftware;
  }
}
