#include "dplab/report_io.hpp"

#include <cmath>
#include <cstdio>

#include "dplab/error.hpp"

namespace dplab {

namespace {

nlohmann::json num(double v) {
  if (std::isfinite(v)) return v;
  if (std::isnan(v)) return "nan";
  return v > 0.0 ? "inf" : "-inf";
}

double parse_num(const nlohmann::json& j) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return HUGE_VAL;
    if (s == "-inf") return -HUGE_VAL;
    if (s == "nan") return std::nan("");
  }
  throw Error(ErrorCode::Io, "expected a number in report json");
}

nlohmann::json num_array(const std::vector<double>& v) {
  auto a = nlohmann::json::array();
  for (const double x : v) a.push_back(num(x));
  return a;
}

}  // namespace

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0.0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

nlohmann::json to_json(const ExponentSet& e) {
  return {{"n", e.n},
          {"p", e.p},
          {"q", e.q},
          {"nu", e.nu},
          {"L", e.ell_bound},
          {"a_sup", e.a_sup},
          {"tilde_p", e.tilde_p},
          {"theta", e.theta},
          {"theta_embedding", num(e.theta_embedding)},
          {"vartheta", e.vartheta},
          {"vartheta_theorem", e.vartheta_theorem},
          {"lambda", num(e.lambda)},
          {"log_lambda", e.log_lambda}};
}

nlohmann::json to_json(const GridDescriptor& g) {
  return {{"dim", g.dim}, {"nx", g.nx}, {"nt", g.nt}, {"h", g.h}, {"dt", g.dt}};
}

nlohmann::json to_json(const EstimateReport& r) {
  nlohmann::json terms = nlohmann::json::object();
  for (const auto& [k, v] : r.terms) terms[k] = num(v);
  nlohmann::json j = {{"schema_version", kReportSchemaVersion},
                      {"kind", "estimate_report"},
                      {"name", r.name},
                      {"lhs", num(r.lhs)},
                      {"rhs_unconstant", num(r.rhs_unconstant)},
                      {"empirical_c", num(r.empirical_c)},
                      {"empty_level_set", r.empty_level_set},
                      {"grid", to_json(r.grid)},
                      {"seed", r.seed},
                      {"terms", terms}};
  j["params"] = r.params ? to_json(*r.params) : nlohmann::json(nullptr);
  return j;
}

EstimateReport estimate_report_from_json(const nlohmann::json& j) {
  try {
    DPLAB_THROW_IF(j.at("schema_version").get<int>() != kReportSchemaVersion, ErrorCode::Io,
                   "unsupported report schema_version");
    EstimateReport r;
    r.name = j.at("name").get<std::string>();
    r.lhs = parse_num(j.at("lhs"));
    r.rhs_unconstant = parse_num(j.at("rhs_unconstant"));
    r.empirical_c = parse_num(j.at("empirical_c"));
    r.empty_level_set = j.at("empty_level_set").get<bool>();
    const auto& g = j.at("grid");
    r.grid = {g.at("dim").get<int>(), g.at("nx").get<int>(), g.at("nt").get<int>(), g.at("h").get<double>(),
              g.at("dt").get<double>()};
    r.seed = j.at("seed").get<std::uint64_t>();
    for (const auto& [k, v] : j.at("terms").items()) r.terms[k] = parse_num(v);
    const auto& p = j.at("params");
    if (!p.is_null()) {
      r.params = ExponentSet::make(p.at("n").get<int>(), p.at("p").get<double>(), p.at("q").get<double>(),
                                   p.at("nu").get<double>(), p.at("L").get<double>(), p.at("a_sup").get<double>());
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::Io, std::string("malformed report json: ") + e.what());
  }
}

nlohmann::json to_json(const DeGiorgiTrace& t) {
  auto flags = nlohmann::json::array();
  for (const bool b : t.decay_flags) flags.push_back(b);
  return {{"schema_version", kReportSchemaVersion},
          {"kind", "degiorgi_trace"},
          {"sign", t.sign == Sign::plus ? "plus" : "minus"},
          {"k", num(t.k)},
          {"lambda", num(t.lambda)},
          {"y", num_array(t.y)},
          {"levelset_measures", num_array(t.levelset_measures)},
          {"recursion_constants", num_array(t.recursion_constants)},
          {"decay_flags", flags},
          {"terminated_at", t.terminated_at}};
}

nlohmann::json to_json(const SolveTrace& t) {
  auto steps = nlohmann::json::array();
  for (const auto& s : t.steps) {
    steps.push_back({{"step", s.step},
                     {"picard_iters", s.picard_iters},
                     {"cg_iters", s.cg_iters},
                     {"residual", num(s.residual)},
                     {"converged", s.converged},
                     {"damped", s.damped},
                     {"max_principle_correction", num(s.max_principle_correction)}});
  }
  return {{"schema_version", kReportSchemaVersion}, {"kind", "solve_trace"}, {"steps", steps}};
}

CsvRow CsvRow::from(const EstimateReport& r, std::string case_label, double aux) {
  return {r.name, std::move(case_label), r.grid.h, r.grid.dt, r.lhs, r.rhs_unconstant, r.empirical_c, r.seed, aux};
}

std::string csv_header() { return "name,case,h,dt,lhs,rhs_unconstant,empirical_c,seed,aux\n"; }

std::string csv_line(const CsvRow& r) {
  std::string s = r.name + ',' + r.case_label;
  for (const double v : {r.h, r.dt, r.lhs, r.rhs_unconstant, r.empirical_c}) s += ',' + format_double(v);
  s += ',' + std::to_string(r.seed) + ',' + format_double(r.aux) + '\n';
  return s;
}

std::string csv_body(const std::vector<CsvRow>& rows) {
  std::string s;
  for (const auto& r : rows) s += csv_line(r);
  return s;
}

}  // namespace dplab
