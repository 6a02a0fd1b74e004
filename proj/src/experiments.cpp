#include "regcalc/experiments.hpp"

#include <cmath>
#include <fstream>
#include <numbers>

#include "parallel.hpp"
#include "regcalc/error.hpp"
#include "regcalc/simd.hpp"

namespace regcalc::experiments {

json to_json(const RunConfig& c) {
  return {{"command", c.command},     {"process", c.process},
          {"horizon", c.horizon},     {"steps", c.steps},
          {"seed", c.seed},           {"replicas", c.replicas},
          {"ladder", c.ladder},       {"lag", c.lag},
          {"shift", c.shift},         {"tolerance", c.tolerance},
          {"phi", c.phi},             {"functional", c.functional},
          {"quad", c.quad},           {"payoff", c.payoff},
          {"hedge", c.hedge},         {"kernel", c.kernel},
          {"sizes", c.sizes},         {"quadrature", c.quadrature},
          {"override_gate", c.override_gate}, {"isa", c.isa},
          {"tag", c.tag},             {"out_dir", c.out_dir.string()}};
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  c.command = j.at("command").get<std::string>();
  c.process = j.value("process", c.process);
  c.horizon = j.value("horizon", c.horizon);
  c.steps = j.value("steps", c.steps);
  c.seed = j.value("seed", c.seed);
  c.replicas = j.value("replicas", c.replicas);
  c.ladder = j.value("ladder", c.ladder);
  c.lag = j.value("lag", c.lag);
  c.shift = j.value("shift", c.shift);
  c.tolerance = j.value("tolerance", c.tolerance);
  c.phi = j.value("phi", c.phi);
  c.functional = j.value("functional", c.functional);
  c.quad = j.value("quad", c.quad);
  c.payoff = j.value("payoff", c.payoff);
  c.hedge = j.value("hedge", c.hedge);
  c.kernel = j.value("kernel", c.kernel);
  c.sizes = j.value("sizes", c.sizes);
  c.quadrature = j.value("quadrature", c.quadrature);
  c.override_gate = j.value("override_gate", c.override_gate);
  c.isa = j.value("isa", c.isa);
  c.tag = j.value("tag", c.tag);
  c.out_dir = j.value("out_dir", std::string{});
  return c;
}

// ---------------------------------------------------------------------------
// Catalogues

namespace {

bool near(double a, double b) { return std::fabs(a - b) <= 1e-12 * std::max(1.0, std::fabs(b)); }

using Bracket = std::function<double(double)>;

std::optional<Bracket> family_bracket(const GaussianSpec& s) {
  using F = GaussianSpec::Family;
  switch (s.family) {
    case F::brownian: return Bracket([](double t) { return t; });
    case F::fbm:
      if (near(s.hurst, 0.5)) return Bracket([](double t) { return t; });
      if (s.hurst > 0.5) return Bracket([](double) { return 0.0; });
      return std::nullopt;
    case F::bifractional: {
      const double hk = s.hurst * s.k;
      if (near(hk, 0.5)) {
        const double c = std::pow(2.0, 1.0 - s.k);
        return Bracket([c](double t) { return c * t; });
      }
      if (hk > 0.5) return Bracket([](double) { return 0.0; });
      return std::nullopt;
    }
    case F::scaled: {
      auto base = family_bracket(s.components.front());
      if (!base) return std::nullopt;
      const double c2 = s.scale * s.scale;
      return Bracket([c2, b = *base](double t) { return c2 * b(t); });
    }
    case F::mixed: {
      std::vector<Bracket> parts;
      for (const auto& c : s.components) {
        auto b = family_bracket(c);
        if (!b) return std::nullopt;
        parts.push_back(*b);
      }
      return Bracket([parts](double t) {
        double v = 0.0;
        for (const auto& b : parts) v += b(t);
        return v;
      });
    }
  }
  return std::nullopt;
}

}  // namespace

std::optional<std::function<double(double)>> known_bracket(const GaussianSpec& spec,
                                                           double shift) {
  auto base = family_bracket(spec);
  if (!base || shift <= 0.0) return base;
  return Bracket([b = *base, shift](double t) { return b(t) + b(std::max(t - shift, 0.0)); });
}

ProcessSource make_source(const GaussianSpec& spec, const TimeGrid& grid, double shift) {
  spec.validate();
  if (shift < 0.0) throw InvalidArgument("shift must be nonnegative");
  long shift_nodes = 0;
  if (shift > 0.0) shift_nodes = grid.node_multiple(shift, "shift");
  ProcessSource src;
  src.label = spec.describe();
  if (shift_nodes > 0) src.label += "+shift";
  src.bracket = known_bracket(spec, shift);
  src.draw = [spec, grid, shift_nodes](std::uint64_t seed) {
    Path x = sample(spec, grid, seed);
    if (shift_nodes == 0) return x;
    return combine(1.0, x, 1.0, shifted(x, shift_nodes));
  };
  return src;
}

namespace {

// name or name:value
std::pair<std::string, std::optional<double>> split_param(const std::string& name) {
  const auto colon = name.find(':');
  if (colon == std::string::npos) return {name, std::nullopt};
  const std::string arg = name.substr(colon + 1);
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(arg, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != arg.size()) throw InvalidArgument("bad parameter in '" + name + "'");
  return {name.substr(0, colon), v};
}

}  // namespace

ChiElement named_phi(const std::string& name, double lag, double mesh) {
  const auto [base, value] = split_param(name);
  const long l = std::lround(lag / mesh);
  if (l < 1) throw InvalidArgument("chi element: lag below the mesh");
  const int ln = static_cast<int>(l);
  const std::size_t n = static_cast<std::size_t>(l) + 1;
  std::vector<double> u(n);
  for (std::size_t k = 0; k < n; ++k) u[k] = -lag + static_cast<double>(k) * mesh;
  u.back() = 0.0;

  if (base == "atomic00") return Atomic00{value.value_or(1.0)};
  if (base == "diag") return DiagKernel{std::vector<double>(n, value.value_or(1.0))};
  if (base == "l2") {
    // 1 + x y / lag^2
    std::vector<double> a(n);
    for (std::size_t k = 0; k < n; ++k) a[k] = u[k] / lag;
    return L2Kernel::separable(ln, {{1.0, std::vector<double>(n, 1.0), std::vector<double>(n, 1.0)},
                                    {1.0, a, a}});
  }
  if (base == "l2-dense") {
    // exp(-|x - y| / lag)
    std::vector<double> m(n * n);
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) m[i * n + j] = std::exp(-std::fabs(u[i] - u[j]) / lag);
    return L2Kernel::dense(ln, std::move(m));
  }
  if (base == "chi0") {
    std::vector<double> right(n);
    for (std::size_t k = 0; k < n; ++k) right[k] = 1.0 + u[k] / lag;
    return Chi0{value.value_or(1.0), std::vector<double>(n, 1.0), std::move(right),
                L2Kernel::constant(ln, 1.0)};
  }
  throw InvalidArgument("unknown chi element '" + name +
                        "' (atomic00[:l], l2, l2-dense, diag[:c], chi0[:l])");
}

Functional named_functional(const std::string& name) {
  if (name.rfind("a:", 0) == 0) return example_a(ScalarFunction::named(name.substr(2)));
  if (name == "b") return example_b();
  if (name == "c") return example_c();
  throw InvalidArgument("unknown functional '" + name + "' (a:linear, a:square, a:cos, b, c)");
}

std::function<double(double)> named_kernel(const std::string& name, double horizon) {
  if (name == "one") return [](double) { return 1.0; };
  if (name == "T-s") return [horizon](double s) { return horizon - s; };
  throw InvalidArgument("unknown kernel '" + name + "' (one, T-s)");
}

// ---------------------------------------------------------------------------
// Studies

namespace {

void fit(GlobalNormStudy& s) {
  const std::size_t n = s.eps.size();
  std::vector<double> x(n);
  double mx = 0.0, my = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    x[k] = std::log(1.0 / s.eps_tilde[k]);
    mx += x[k];
    my += s.median[k];
  }
  mx /= static_cast<double>(n);
  my /= static_cast<double>(n);
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    sxx += (x[k] - mx) * (x[k] - mx);
    sxy += (x[k] - mx) * (s.median[k] - my);
    syy += (s.median[k] - my) * (s.median[k] - my);
  }
  s.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  s.intercept = my - s.slope * mx;
  s.r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
}

}  // namespace

GlobalNormStudy global_norm_study(const ProcessSource& process, double lag, double horizon,
                                  const EpsilonLadder& ladder, std::uint64_t master_seed) {
  const std::size_t rows = ladder.size();
  const int replicas = ladder.replicas();
  std::vector<std::vector<double>> stats(rows, std::vector<double>(static_cast<std::size_t>(replicas)));
  detail::parallel_for(replicas, [&](int r) {
    const Path x = process.draw(master_seed + static_cast<std::uint64_t>(r));
    for (std::size_t k = 0; k < rows; ++k)
      stats[k][static_cast<std::size_t>(r)] = global_norm_integral(x, lag, ladder.eps(k));
  });
  GlobalNormStudy out;
  for (std::size_t k = 0; k < rows; ++k) {
    out.eps.push_back(ladder.eps(k));
    out.eps_tilde.push_back(global_norm_scale(ladder.eps(k), horizon));
    out.median.push_back(quantile(stats[k], 0.5));
    out.q90.push_back(quantile(stats[k], 0.9));
  }
  fit(out);
  return out;
}

HedgeStudy hedge_study(const RunConfig& c) {
  const GaussianSpec spec = GaussianSpec::parse(c.process);
  const Payoff payoff = Payoff::named(c.payoff);
  std::optional<ValueFunction> vanilla;
  std::optional<MultiPayoff> multi;
  WienerOptions wopt;
  wopt.q = c.quadrature;
  std::function<double(double)> kernel;
  if (c.hedge == "vanilla") {
    vanilla.emplace(solve_vanilla(payoff, c.horizon, c.quadrature));
  } else if (c.hedge == "zero-qv" || c.hedge == "brownian-qv") {
    multi = MultiPayoff::from_scalar(payoff);
    wopt.mode = c.hedge == "zero-qv" ? WienerMode::zero_qv : WienerMode::brownian_qv;
    kernel = named_kernel(c.kernel, c.horizon);
  } else {
    throw InvalidArgument("unknown hedge mode '" + c.hedge + "' (vanilla, zero-qv, brownian-qv)");
  }

  // A process whose bracket is t (or 0 for the zero-QV mode) by construction
  // needs no per-path gate; sampling noise would otherwise reject a few
  // honest paths at small N.
  bool certified = false;
  if (const auto b = known_bracket(spec, c.shift)) {
    certified = true;
    for (int k = 1; k <= 8; ++k) {
      const double t = c.horizon * k / 8.0;
      const double want = c.hedge == "zero-qv" ? 0.0 : t;
      if (std::fabs((*b)(t) - want) > 1e-12 * c.horizon) certified = false;
    }
  }
  const bool override_gate = c.override_gate || certified;
  wopt.override_gate = override_gate;

  HedgeStudy out;
  out.sizes = c.sizes;
  out.certified_by_construction = certified;
  for (int n : c.sizes) {
    const TimeGrid grid(c.horizon, n);
    const ProcessSource src = make_source(spec, grid, c.shift);
    std::vector<HedgeRow> rows(static_cast<std::size_t>(c.replicas));
    detail::parallel_for(c.replicas, [&](int r) {
      const Path x = src.draw(c.seed + static_cast<std::uint64_t>(r));
      HedgeRow& row = rows[static_cast<std::size_t>(r)];
      row.replica = r;
      row.result = vanilla ? hedge_vanilla(*vanilla, x, override_gate)
                           : hedge_wiener_functional(*multi, {kernel}, x, wopt);
    });
    std::vector<double> errors;
    for (const auto& r : rows) errors.push_back(r.result.error);
    out.median.push_back(quantile(errors, 0.5));
    out.q90.push_back(quantile(errors, 0.9));
    out.h0 = rows.front().result.h0;
    out.rows.push_back(std::move(rows));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Commands

void validate(const RunConfig& c) {
  static const std::vector<std::string> commands{"paths", "qv", "chiqv", "ito", "replicate"};
  if (std::find(commands.begin(), commands.end(), c.command) == commands.end())
    throw InvalidArgument("unknown command '" + c.command + "'");
  GaussianSpec::parse(c.process).validate();
  if (!(c.tolerance > 0.0)) throw InvalidArgument("tolerance must be positive");
  if (c.replicas < 1) throw InvalidArgument("replicas must be positive");
  if (!c.isa.empty() && !simd::parse_isa(c.isa))
    throw InvalidArgument("unknown isa '" + c.isa + "' (scalar, avx2, neon)");
  if (c.command == "replicate") {
    if (c.sizes.empty()) throw InvalidArgument("replicate: no grid sizes");
    for (int n : c.sizes) TimeGrid(c.horizon, n);
    Payoff::named(c.payoff);
    return;
  }
  const TimeGrid grid(c.horizon, c.steps);
  if (c.shift > 0.0) grid.node_multiple(c.shift, "shift");
  if (c.command == "paths") return;
  if (c.command == "qv") {
    EpsilonLadder(grid, c.ladder, c.replicas);
    return;
  }
  grid.node_multiple(c.lag, "lag");
  EpsilonLadder(grid, c.ladder, c.replicas, c.lag);
  if (c.command == "chiqv" && c.phi != "global") named_phi(c.phi, c.lag, grid.mesh());
  if (c.command == "ito") {
    named_functional(c.functional);
    if (c.quad != "closed" && c.quad != "estimated")
      throw InvalidArgument("quad must be 'closed' or 'estimated'");
  }
}

namespace {

class Outputs {
 public:
  Outputs(const RunConfig& c) : dir_(c.out_dir), prefix_(c.command + (c.tag.empty() ? "" : "-" + c.tag)) {
    std::filesystem::create_directories(dir_);
  }

  std::ofstream open(const std::string& suffix) {
    const std::string name = prefix_ + suffix;
    files_.push_back(name);
    std::ofstream os(dir_ / name, std::ios::binary | std::ios::trunc);
    if (!os) throw std::runtime_error("cannot write " + (dir_ / name).string());
    return os;
  }

  const std::vector<std::string>& files() const { return files_; }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::filesystem::path dir_;
  std::string prefix_;
  std::vector<std::string> files_;
};

void write_comparison(std::ostream& os, const Path& estimate, const std::optional<Path>& ref) {
  os << "t,estimate,reference\n";
  for (std::size_t i = 0; i < estimate.size(); ++i) {
    os << format_double(estimate.grid().node(static_cast<long>(i))) << ','
       << format_double(estimate[i]) << ',';
    if (ref) os << format_double((*ref)[i]);
    os << '\n';
  }
}

RunOutcome run_paths(const RunConfig& c, Outputs& out) {
  const GaussianSpec spec = GaussianSpec::parse(c.process);
  const TimeGrid grid(c.horizon, c.steps);
  const Path x = make_source(spec, grid, c.shift).draw(c.seed);
  {
    auto os = out.open(".csv");
    write_path_csv(os, x);
  }
  {
    auto os = out.open(".json");
    os << json{{"spec", spec.describe()}, {"seed", c.seed}, {"T", c.horizon}, {"N", c.steps},
               {"shift", c.shift}, {"label", x.label()}}
              .dump(2)
       << '\n';
  }
  return {"pass", {}, json{{"terminal", x.back()}}};
}

RunOutcome run_qv(const RunConfig& c, Outputs& out) {
  const GaussianSpec spec = GaussianSpec::parse(c.process);
  const TimeGrid grid(c.horizon, c.steps);
  const ProcessSource src = make_source(spec, grid, c.shift);
  const EpsilonLadder ladder(grid, c.ladder, c.replicas);
  const bool closed = src.bracket.has_value();
  const auto bracket = src.bracket.value_or([](double) { return 0.0; });
  const ConvergenceReport rep = converge(
      [&](std::uint64_t seed, double eps) {
        const Path x = src.draw(seed);
        return covariation_eps(x, x, eps);
      },
      [&](std::uint64_t) { return path_from_function(grid, bracket, "bracket"); }, ladder,
      c.tolerance, c.seed);
  {
    auto os = out.open("-report.csv");
    write_report_csv(os, rep, closed ? "closed-form" : "absent");
  }
  {
    const Path x = src.draw(c.seed);
    const Path est = covariation_eps(x, x, ladder.eps(ladder.size() - 1));
    std::optional<Path> ref;
    if (closed) ref = path_from_function(grid, bracket, "bracket");
    auto os = out.open("-path.csv");
    write_comparison(os, est, ref);
  }
  const std::string verdict = closed ? rep.verdict() : "informational";
  return {verdict, {}, json{{"report", to_json(rep)}}};
}

RunOutcome run_chiqv(const RunConfig& c, Outputs& out) {
  const GaussianSpec spec = GaussianSpec::parse(c.process);
  const TimeGrid grid(c.horizon, c.steps);
  const ProcessSource src = make_source(spec, grid, c.shift);
  const EpsilonLadder ladder(grid, c.ladder, c.replicas, c.lag);

  if (c.phi == "global") {
    const GlobalNormStudy s = global_norm_study(src, c.lag, c.horizon, ladder, c.seed);
    std::string verdict = "informational";
    if (src.bracket) {
      const bool zero = (*src.bracket)(c.horizon) == 0.0;
      verdict = zero ? (s.median.back() < c.tolerance ? "pass" : "fail")
                     : (s.slope > 0.0 && s.r2 > 0.9 ? "pass" : "fail");
    }
    auto os = out.open("-global.csv");
    os << "eps,eps_tilde,median,q90\n";
    for (std::size_t k = 0; k < s.eps.size(); ++k)
      os << format_double(s.eps[k]) << ',' << format_double(s.eps_tilde[k]) << ','
         << format_double(s.median[k]) << ',' << format_double(s.q90[k]) << '\n';
    return {verdict, {}, json{{"slope", s.slope}, {"intercept", s.intercept}, {"r2", s.r2}}};
  }

  const ChiElement phi = named_phi(c.phi, c.lag, grid.mesh());
  const ChiQVResult res = chi_qv_suite(src, c.lag, phi, ladder, c.tolerance, c.seed);
  {
    auto os = out.open("-report.csv");
    write_report_csv(os, res.report, res.reference_kind);
  }
  {
    auto os = out.open("-path.csv");
    write_comparison(os, res.estimates.back(), res.reference);
  }
  return {res.verdict, {},
          json{{"report", to_json(res.report)},
               {"reference", res.reference_kind},
               {"h1_median", res.h1_median},
               {"h1_max", res.h1_max},
               {"h1_bounded", res.h1_bounded}}};
}

RunOutcome run_ito(const RunConfig& c, Outputs& out) {
  const GaussianSpec spec = GaussianSpec::parse(c.process);
  const TimeGrid grid(c.horizon, c.steps);
  const ProcessSource src = make_source(spec, grid, c.shift);
  const EpsilonLadder ladder(grid, c.ladder, c.replicas, c.lag);
  const Functional f = named_functional(c.functional);
  const QuadraticTerm mode = c.quad == "estimated" ? QuadraticTerm::estimated : QuadraticTerm::closed_form;
  const ItoResidualReport rep = ito_residual(f, src, c.lag, ladder, c.tolerance, c.seed, mode);
  {
    auto os = out.open("-report.csv");
    write_report_csv(os, rep.report);
  }
  {
    auto os = out.open("-terms.csv");
    write_ito_csv(os, rep.terms);
  }
  return {rep.report.verdict(), {}, json{{"report", to_json(rep.report)}}};
}

RunOutcome run_replicate(const RunConfig& c, Outputs& out) {
  const HedgeStudy s = hedge_study(c);
  {
    auto os = out.open(".csv");
    for (std::size_t k = 0; k < s.rows.size(); ++k) {
      if (k == 0) {
        write_hedge_csv(os, s.rows[k]);
      } else {
        std::ostringstream tmp;
        write_hedge_csv(tmp, s.rows[k]);
        const std::string body = tmp.str();
        os << body.substr(body.find('\n') + 1);
      }
    }
  }
  {
    auto os = out.open("-summary.csv");
    os << "N,median,q90\n";
    for (std::size_t k = 0; k < s.sizes.size(); ++k)
      os << s.sizes[k] << ',' << format_double(s.median[k]) << ',' << format_double(s.q90[k]) << '\n';
  }
  bool pass = s.median.back() < c.tolerance * c.horizon;
  for (std::size_t k = 1; k < s.median.size(); ++k)
    if (s.median[k] > 1.2 * s.median[k - 1]) pass = false;
  return {pass ? "pass" : "fail", {},
          json{{"h0", s.h0}, {"median", s.median}, {"certified_by_construction", s.certified_by_construction}}};
}

class IsaScope {
 public:
  explicit IsaScope(const std::string& name) : previous_(simd::active().isa) {
    if (name.empty()) return;
    const auto isa = simd::parse_isa(name);
    if (!isa || !simd::select(*isa)) throw InvalidArgument("isa '" + name + "' is not available");
  }
  ~IsaScope() { simd::select(previous_); }

 private:
  simd::Isa previous_;
};

}  // namespace

RunOutcome run(const RunConfig& c) {
  validate(c);
  IsaScope isa(c.isa);
  Outputs out(c);
  RunOutcome res;
  if (c.command == "paths") res = run_paths(c, out);
  else if (c.command == "qv") res = run_qv(c, out);
  else if (c.command == "chiqv") res = run_chiqv(c, out);
  else if (c.command == "ito") res = run_ito(c, out);
  else res = run_replicate(c, out);
  res.files = out.files();

  RunConfig recorded = c;
  recorded.isa = std::string(simd::isa_name(simd::active().isa));
  const json line{{"command", c.command},
                  {"config", to_json(recorded)},
                  {"outputs", res.files},
                  {"verdict", res.verdict},
                  {"summary", res.summary}};
  std::ofstream manifest(out.dir() / "manifest.jsonl", std::ios::app);
  manifest << line.dump() << '\n';
  return res;
}

RunConfig config_from_manifest(const std::filesystem::path& manifest, std::size_t index) {
  std::ifstream is(manifest);
  if (!is) throw InvalidArgument("cannot read manifest " + manifest.string());
  std::string line;
  for (std::size_t i = 0; std::getline(is, line); ++i)
    if (i == index) return config_from_json(json::parse(line).at("config"));
  throw InvalidArgument("manifest has no line " + std::to_string(index));
}

int exit_code(const std::string& verdict) { return verdict == "fail" ? 2 : 0; }

}  // namespace regcalc::experiments
