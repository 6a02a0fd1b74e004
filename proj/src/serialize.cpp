#include "regcalc/serialize.hpp"

#include <cstdio>
#include <istream>
#include <ostream>
#include <sstream>

#include "regcalc/error.hpp"

namespace regcalc {

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_path_csv(std::ostream& os, const Path& path) {
  os << "t,value\n";
  for (std::size_t i = 0; i < path.size(); ++i)
    os << format_double(path.grid().node(static_cast<long>(i))) << ',' << format_double(path[i])
       << '\n';
}

Path read_path_csv(std::istream& is, std::string label) {
  std::string line;
  if (!std::getline(is, line) || line != "t,value")
    throw InvalidArgument("path csv: expected a 't,value' header");
  std::vector<double> t, v;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) throw InvalidArgument("path csv: malformed row '" + line + "'");
    try {
      t.push_back(std::stod(line.substr(0, comma)));
      v.push_back(std::stod(line.substr(comma + 1)));
    } catch (const std::exception&) {
      throw InvalidArgument("path csv: malformed row '" + line + "'");
    }
  }
  if (v.size() < 3) throw InvalidArgument("path csv: too few rows");
  const TimeGrid grid(t.back(), static_cast<int>(v.size()) - 1);
  return Path(grid, std::move(v), std::move(label));
}

void write_report_csv(std::ostream& os, const ConvergenceReport& rep,
                      const std::string& reference) {
  os << "eps,median,q90,verdict";
  if (!reference.empty()) os << ",reference";
  os << '\n';
  for (const ConvergenceRow& r : rep.rows) {
    os << format_double(r.eps) << ',' << format_double(r.median) << ',' << format_double(r.q90)
       << ',' << rep.verdict();
    if (!reference.empty()) os << ',' << reference;
    os << '\n';
  }
}

void write_ito_csv(std::ostream& os, const std::vector<ItoTerms>& terms) {
  os << "eps,t,lhs,dt_term,fwd_term,quad_term,residual\n";
  for (const ItoTerms& it : terms) {
    const TimeGrid& g = it.lhs.grid();
    for (std::size_t i = 0; i < it.lhs.size(); ++i)
      os << format_double(it.eps) << ',' << format_double(g.node(static_cast<long>(i))) << ','
         << format_double(it.lhs[i]) << ',' << format_double(it.dt_term[i]) << ','
         << format_double(it.fwd_term[i]) << ',' << format_double(it.quad_term[i]) << ','
         << format_double(it.residual[i]) << '\n';
  }
}

void write_hedge_csv(std::ostream& os, const std::vector<HedgeRow>& rows) {
  os << "replica,N,H0,payoff,integral,error\n";
  for (const HedgeRow& r : rows)
    os << r.replica << ',' << r.result.steps << ',' << format_double(r.result.h0) << ','
       << format_double(r.result.payoff) << ',' << format_double(r.result.integral) << ','
       << format_double(r.result.error) << '\n';
}

// ---------------------------------------------------------------------------

json to_json(const SignedMeasure& mu) {
  json atoms = json::array();
  for (const auto& a : mu.atoms()) atoms.push_back({{"loc", a.loc}, {"weight", a.weight}});
  return {{"lag", mu.lag()}, {"mesh", mu.mesh()}, {"atoms", atoms}, {"density", mu.density()}};
}

SignedMeasure measure_from_json(const json& j) {
  std::vector<SignedMeasure::Atom> atoms;
  for (const auto& a : j.at("atoms")) atoms.push_back({a.at("loc").get<double>(), a.at("weight").get<double>()});
  return SignedMeasure(j.at("lag").get<double>(), j.at("mesh").get<double>(), std::move(atoms),
                       j.value("density", std::vector<double>{}));
}

namespace {

json kernel_json(const L2Kernel& k) {
  json out{{"lag_nodes", k.lag_nodes()}};
  if (k.is_dense()) {
    out["matrix"] = k.matrix();
  } else {
    json terms = json::array();
    for (const auto& t : k.terms())
      terms.push_back({{"coeff", t.coeff}, {"left", t.left}, {"right", t.right}});
    out["terms"] = terms;
  }
  return out;
}

L2Kernel kernel_from_json(const json& j) {
  const int l = j.at("lag_nodes").get<int>();
  if (j.contains("matrix")) return L2Kernel::dense(l, j.at("matrix").get<std::vector<double>>());
  std::vector<L2Kernel::Term> terms;
  for (const auto& t : j.at("terms"))
    terms.push_back({t.at("coeff").get<double>(), t.at("left").get<std::vector<double>>(),
                     t.at("right").get<std::vector<double>>()});
  return L2Kernel::separable(l, std::move(terms));
}

}  // namespace

json to_json(const ChiElement& phi) {
  json out{{"kind", tag_name(tag_of(phi))}};
  switch (tag_of(phi)) {
    case ChiTag::d00: out["lambda"] = std::get<Atomic00>(phi).lambda; break;
    case ChiTag::l2: out["kernel"] = kernel_json(std::get<L2Kernel>(phi)); break;
    case ChiTag::diag: out["g"] = std::get<DiagKernel>(phi).g; break;
    case ChiTag::chi0: {
      const Chi0& c = std::get<Chi0>(phi);
      out["lambda"] = c.lambda;
      out["left"] = c.left;
      out["right"] = c.right;
      out["bulk"] = kernel_json(c.bulk);
      break;
    }
  }
  return out;
}

ChiElement chi_from_json(const json& j) {
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "atomic00") return Atomic00{j.at("lambda").get<double>()};
  if (kind == "l2") return kernel_from_json(j.at("kernel"));
  if (kind == "diag") return DiagKernel{j.at("g").get<std::vector<double>>()};
  if (kind == "chi0")
    return Chi0{j.at("lambda").get<double>(), j.at("left").get<std::vector<double>>(),
                j.at("right").get<std::vector<double>>(), kernel_from_json(j.at("bulk"))};
  throw InvalidArgument("chi element: unknown kind '" + kind + "'");
}

json to_json(const ConvergenceReport& rep) {
  json rows = json::array();
  for (const auto& r : rep.rows)
    rows.push_back({{"eps", r.eps}, {"multiple", r.multiple}, {"median", r.median}, {"q90", r.q90}});
  return {{"rows", rows},
          {"tolerance", rep.tolerance},
          {"slack", rep.slack},
          {"statistic", rep.statistic == ErrorStatistic::terminal ? "terminal" : "sup"},
          {"small_enough", rep.small_enough},
          {"monotone", rep.monotone},
          {"verdict", rep.verdict()}};
}

}  // namespace regcalc
