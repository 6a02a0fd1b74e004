#pragma once

// CSV and JSON forms of paths, reports, measures and chi elements. Doubles are
// written with 17 significant digits so a read-back is exact.

#include <iosfwd>
#include <string>
#include <vector>

#include <json.hpp>

#include "regcalc/chi_qv.hpp"
#include "regcalc/clark_ocone.hpp"
#include "regcalc/ito_check.hpp"
#include "regcalc/regularize.hpp"
#include "regcalc/window.hpp"

namespace regcalc {

using json = nlohmann::json;

std::string format_double(double v);

// t,value
void write_path_csv(std::ostream& os, const Path& path);
// Reads the CSV above; the grid is rebuilt from the last t and the row count.
Path read_path_csv(std::istream& is, std::string label = {});

// eps,median,q90,verdict[,reference]
void write_report_csv(std::ostream& os, const ConvergenceReport& rep,
                      const std::string& reference = {});

// eps,t,lhs,dt_term,fwd_term,quad_term,residual
void write_ito_csv(std::ostream& os, const std::vector<ItoTerms>& terms);

struct HedgeRow {
  int replica = 0;
  HedgeResult result;
};
// replica,N,H0,payoff,integral,error
void write_hedge_csv(std::ostream& os, const std::vector<HedgeRow>& rows);

json to_json(const SignedMeasure& mu);
SignedMeasure measure_from_json(const json& j);

json to_json(const ChiElement& phi);
ChiElement chi_from_json(const json& j);

json to_json(const ConvergenceReport& rep);

}  // namespace regcalc
