#include "dplab/harness.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <numbers>
#include <set>
#include <sstream>

#include "dplab/error.hpp"
#include "dplab/field_io.hpp"

namespace dplab {

namespace {

using nlohmann::json;

const std::set<std::string> kExperiments = {"solve", "embedding", "caccioppoli", "supbound", "degiorgi",
                                            "convergence"};

template <class T>
T read(const json& j, const std::string& key, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw Error(ErrorCode::ConfigInvalid, "config key '" + key + "' has the wrong type");
  }
}

void reject_unknown(const json& j, const std::set<std::string>& allowed, const std::string& where) {
  DPLAB_THROW_IF(!j.is_object(), ErrorCode::ConfigInvalid, "'" + where + "' must be an object");
  for (const auto& [k, v] : j.items()) {
    (void)v;
    DPLAB_THROW_IF(!allowed.count(k), ErrorCode::ConfigInvalid, "unknown config key '" + where + "." + k + "'");
  }
}

std::string level_case(int level) { return "level=" + std::to_string(level); }

double window(const ExperimentConfig& cfg, const Point& x, int dim) {
  double w = 1.0;
  for (int a = 0; a < dim; ++a)
    w *= std::cos(std::numbers::pi * (x[static_cast<std::size_t>(a)] - cfg.problem.center[static_cast<std::size_t>(a)]) /
                  (2.0 * cfg.problem.radius));
  return std::max(w, 0.0);
}

double max_of(std::span<const double> v) { return *std::max_element(v.begin(), v.end()); }
double min_of(std::span<const double> v) { return *std::min_element(v.begin(), v.end()); }

std::string fmt(double v) { return format_double(v); }

std::string label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%g", v);
  return buf;
}

double rel_change(double a, double b) {
  if (a == b) return 0.0;
  return std::abs(b - a) / std::max(std::abs(a), std::abs(b));
}

std::vector<std::pair<double, double>> ladder_points(const std::vector<double>& h, const std::vector<double>& v) {
  std::vector<std::pair<double, double>> pts;
  for (std::size_t i = 0; i < h.size(); ++i) pts.emplace_back(h[i], v[i]);
  return pts;
}

}  // namespace

CoefficientFn CoefficientSpec::build() const {
  if (kind == "constant") return CoefficientFn::constant(value);
  if (kind == "smooth_bump") return CoefficientFn::smooth_bump(a_sup, center, width);
  if (kind == "checkerboard") return CoefficientFn::checkerboard(a_sup, cell_size, time_cell);
  if (kind == "sampled") {
    DPLAB_THROW_IF(path.empty(), ErrorCode::ConfigInvalid, "sampled coefficient needs 'path'");
    return CoefficientFn::sampled(load_field(path));
  }
  throw Error(ErrorCode::ConfigInvalid, "unknown coefficient kind '" + kind + "'");
}

ExperimentConfig ExperimentConfig::from_json(const json& j) {
  reject_unknown(j,
                 {"schema_version", "experiment", "params", "ladder", "sigma_list", "seed", "sample_count", "field",
                  "problem", "cylinder", "solver", "workers", "output", "stability_tolerance"},
                 "config");
  ExperimentConfig c;
  const int version = read<int>(j, "schema_version", kConfigSchemaVersion);
  DPLAB_THROW_IF(version != kConfigSchemaVersion, ErrorCode::ConfigInvalid,
                 "unsupported schema_version " + std::to_string(version));
  c.experiment = read<std::string>(j, "experiment", c.experiment);
  if (j.contains("params")) {
    const auto& p = j.at("params");
    reject_unknown(p, {"n", "p", "q", "nu", "L", "coefficient"}, "params");
    c.n = read<int>(p, "n", c.n);
    c.p = read<double>(p, "p", c.p);
    c.q = read<double>(p, "q", c.q);
    c.nu = read<double>(p, "nu", c.nu);
    c.ell_bound = read<double>(p, "L", c.ell_bound);
    if (p.contains("coefficient")) {
      const auto& a = p.at("coefficient");
      reject_unknown(a, {"kind", "value", "a_sup", "center", "width", "cell_size", "time_cell", "path"},
                     "params.coefficient");
      auto& s = c.coefficient;
      s.kind = read<std::string>(a, "kind", s.kind);
      s.value = read<double>(a, "value", s.value);
      s.a_sup = read<double>(a, "a_sup", s.a_sup);
      s.center = read<double>(a, "center", s.center);
      s.width = read<double>(a, "width", s.width);
      s.cell_size = read<double>(a, "cell_size", s.cell_size);
      s.time_cell = read<double>(a, "time_cell", s.time_cell);
      s.path = read<std::string>(a, "path", s.path);
    }
  }
  if (j.contains("ladder")) {
    const auto& l = j.at("ladder");
    DPLAB_THROW_IF(!l.is_array(), ErrorCode::ConfigInvalid, "'ladder' must be an array");
    for (const auto& e : l) {
      if (e.is_number_integer()) {
        c.ladder.emplace_back(e.get<int>(), 0);
      } else if (e.is_array() && e.size() == 2 && e[0].is_number_integer() && e[1].is_number_integer()) {
        c.ladder.emplace_back(e[0].get<int>(), e[1].get<int>());
      } else {
        throw Error(ErrorCode::ConfigInvalid, "ladder entries must be nx or [nx, nt]");
      }
    }
  }
  c.sigma_list = read<std::vector<double>>(j, "sigma_list", c.sigma_list);
  c.seed = read<std::uint64_t>(j, "seed", c.seed);
  c.sample_count = read<int>(j, "sample_count", c.sample_count);
  if (j.contains("field")) {
    const auto& f = j.at("field");
    reject_unknown(f, {"modes", "decay"}, "field");
    c.field.modes = read<int>(f, "modes", c.field.modes);
    c.field.decay = read<double>(f, "decay", c.field.decay);
  }
  if (j.contains("problem")) {
    const auto& p = j.at("problem");
    reject_unknown(p, {"center", "radius", "t0", "time_length", "initial", "amplitude", "boundary_value", "oracle"},
                   "problem");
    auto& s = c.problem;
    if (p.contains("center")) {
      const auto v = read<std::vector<double>>(p, "center", {});
      DPLAB_THROW_IF(v.empty() || v.size() > 2, ErrorCode::ConfigInvalid, "problem.center needs 1 or 2 entries");
      s.center = {v[0], v.size() > 1 ? v[1] : 0.0};
    }
    s.radius = read<double>(p, "radius", s.radius);
    s.t0 = read<double>(p, "t0", s.t0);
    s.time_length = read<double>(p, "time_length", s.time_length);
    s.initial = read<std::string>(p, "initial", s.initial);
    s.amplitude = read<double>(p, "amplitude", s.amplitude);
    s.boundary_value = read<double>(p, "boundary_value", s.boundary_value);
    s.oracle = read<std::string>(p, "oracle", s.oracle);
  }
  if (j.contains("cylinder")) {
    const auto& p = j.at("cylinder");
    reject_unknown(p, {"rho", "outer_radius", "outer_length", "inner_ratio", "levels_per_sign", "depth"}, "cylinder");
    auto& s = c.cylinder;
    s.rho = read<double>(p, "rho", s.rho);
    s.outer_radius = read<double>(p, "outer_radius", s.outer_radius);
    s.outer_length = read<double>(p, "outer_length", s.outer_length);
    s.inner_ratio = read<double>(p, "inner_ratio", s.inner_ratio);
    s.levels_per_sign = read<int>(p, "levels_per_sign", s.levels_per_sign);
    s.depth = read<int>(p, "depth", s.depth);
  }
  if (j.contains("solver")) {
    const auto& p = j.at("solver");
    reject_unknown(p, {"dt_rule", "dt_value", "eps", "picard_tol", "picard_max", "cg_tol", "cg_max"}, "solver");
    auto& s = c.solver;
    const auto rule = read<std::string>(p, "dt_rule", "intrinsic");
    DPLAB_THROW_IF(rule != "intrinsic" && rule != "fixed", ErrorCode::ConfigInvalid,
                   "solver.dt_rule must be 'intrinsic' or 'fixed'");
    s.dt_rule.kind = rule == "fixed" ? DtRule::Kind::fixed : DtRule::Kind::intrinsic;
    s.dt_rule.value = read<double>(p, "dt_value", s.dt_rule.value);
    s.regularization_eps = read<double>(p, "eps", s.regularization_eps);
    s.picard_tol = read<double>(p, "picard_tol", s.picard_tol);
    s.picard_max = read<int>(p, "picard_max", s.picard_max);
    s.cg_tol = read<double>(p, "cg_tol", s.cg_tol);
    s.cg_max = read<int>(p, "cg_max", s.cg_max);
  }
  c.workers = read<int>(j, "workers", c.workers);
  c.stability_tolerance = read<double>(j, "stability_tolerance", c.stability_tolerance);
  if (j.contains("output")) {
    const auto& o = j.at("output");
    reject_unknown(o, {"dir", "svg"}, "output");
    c.output_dir = read<std::string>(o, "dir", c.output_dir);
    c.svg = read<bool>(o, "svg", c.svg);
  }
  c.validate();
  return c;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream is(path);
  DPLAB_THROW_IF(!is, ErrorCode::Io, "cannot open config " + path);
  json j;
  try {
    is >> j;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ConfigInvalid, std::string("config is not valid json: ") + e.what());
  }
  return from_json(j);
}

json ExperimentConfig::to_json() const {
  auto ladder_j = json::array();
  for (const auto& [nx, nt] : ladder) ladder_j.push_back({nx, nt});
  const auto& a = coefficient;
  return {{"schema_version", kConfigSchemaVersion},
          {"experiment", experiment},
          {"params",
           {{"n", n},
            {"p", p},
            {"q", q},
            {"nu", nu},
            {"L", ell_bound},
            {"coefficient",
             {{"kind", a.kind},
              {"value", a.value},
              {"a_sup", a.a_sup},
              {"center", a.center},
              {"width", a.width},
              {"cell_size", a.cell_size},
              {"time_cell", a.time_cell},
              {"path", a.path}}}}},
          {"ladder", ladder_j},
          {"sigma_list", sigma_list},
          {"seed", seed},
          {"sample_count", sample_count},
          {"field", {{"modes", field.modes}, {"decay", field.decay}}},
          {"problem",
           {{"center", {problem.center[0], problem.center[1]}},
            {"radius", problem.radius},
            {"t0", problem.t0},
            {"time_length", problem.time_length},
            {"initial", problem.initial},
            {"amplitude", problem.amplitude},
            {"boundary_value", problem.boundary_value},
            {"oracle", problem.oracle}}},
          {"cylinder",
           {{"rho", cylinder.rho},
            {"outer_radius", cylinder.outer_radius},
            {"outer_length", cylinder.outer_length},
            {"inner_ratio", cylinder.inner_ratio},
            {"levels_per_sign", cylinder.levels_per_sign},
            {"depth", cylinder.depth}}},
          {"solver",
           {{"dt_rule", solver.dt_rule.kind == DtRule::Kind::fixed ? "fixed" : "intrinsic"},
            {"dt_value", solver.dt_rule.value},
            {"eps", solver.regularization_eps},
            {"picard_tol", solver.picard_tol},
            {"picard_max", solver.picard_max},
            {"cg_tol", solver.cg_tol},
            {"cg_max", solver.cg_max}}},
          {"workers", workers},
          {"stability_tolerance", stability_tolerance},
          {"output", {{"dir", output_dir}, {"svg", svg}}}};
}

void ExperimentConfig::validate() const {
  const auto bad = [](bool cond, const std::string& msg) { DPLAB_THROW_IF(cond, ErrorCode::ConfigInvalid, msg); };
  bad(!kExperiments.count(experiment), "unknown experiment '" + experiment + "'");
  bad(ladder.empty(), "ladder must be nonempty");
  for (const auto& [nx, nt] : ladder) {
    bad(nx < 3, "ladder nx must be >= 3");
    bad(nt != 0 && nt < 2, "ladder nt must be 0 (auto) or >= 2");
  }
  bad(sample_count < 1, "sample_count must be >= 1");
  bad(sigma_list.empty(), "sigma_list must be nonempty");
  for (const double s : sigma_list) bad(!(s > 0.0 && s < 1.0), "sigma values must lie in (0,1)");
  bad(!(problem.radius > 0.0) || !(problem.time_length > 0.0), "problem box must have positive size");
  bad(problem.initial != "random" && problem.initial != "zero" && problem.initial != "bump",
      "problem.initial must be random, zero or bump");
  bad(problem.oracle != "heat" && problem.oracle != "barenblatt" && problem.oracle != "both",
      "problem.oracle must be heat, barenblatt or both");
  bad(cylinder.levels_per_sign < 1, "cylinder.levels_per_sign must be >= 1");
  bad(cylinder.depth < 2, "cylinder.depth must be >= 2");
  bad(!(cylinder.inner_ratio > 0.0 && cylinder.inner_ratio < 1.0), "cylinder.inner_ratio must lie in (0,1)");
  bad(workers < 0, "workers must be >= 0");
  try {
    field.validate();
    solver.validate();
    if (experiment == "solve") {
      bad(n != 1 && n != 2, "solve runs in dimension 1 or 2");
      (void)flux();
    } else if (experiment != "convergence") {
      bad(n != 2, "estimate experiments run in dimension n = 2");
      (void)exponents();
      (void)flux();
    }
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ConfigInvalid) throw;
    throw Error(ErrorCode::ConfigInvalid, e.what());
  }
}

ExponentSet ExperimentConfig::exponents() const {
  return ExponentSet::make(n, p, q, nu, ell_bound, coefficient.build().a_sup());
}

FluxModel ExperimentConfig::flux() const { return FluxModel(p, q, coefficient.build()); }

bool ExperimentResult::ok() const {
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.passed || !c.hard; });
}

std::vector<std::string> ExperimentResult::failures() const {
  std::vector<std::string> out;
  for (const auto& c : checks)
    if (!c.passed && c.hard) out.push_back(c.name + (c.detail.empty() ? "" : ": " + c.detail));
  return out;
}

void ExperimentResult::check(std::string name, bool passed, std::string detail, bool hard) {
  checks.push_back({std::move(name), passed, hard, std::move(detail)});
}

SpaceTimeGrid problem_grid(const ExperimentConfig& cfg, int level) {
  const auto [nx, nt] = cfg.ladder.at(static_cast<std::size_t>(level));
  const auto& pr = cfg.problem;
  if (nt == 0) return make_solver_grid(cfg.n, nx, pr.center, pr.t0, pr.radius, pr.time_length, cfg.solver, cfg.p);
  return {cfg.n, nx, nt, pr.center, pr.t0, pr.radius, pr.time_length};
}

std::vector<double> initial_data(const ExperimentConfig& cfg, const SpaceTimeGrid& grid) {
  const std::size_t np = grid.nodes_per_slice();
  const auto& pr = cfg.problem;
  std::vector<double> u(np, pr.boundary_value);
  if (pr.initial == "zero") return u;
  std::vector<double> shape(np, 1.0);
  if (pr.initial == "random") {
    const SpaceTimeGrid probe(grid.dim(), grid.nx(), 2, grid.x0(), grid.time(0), grid.radius(), grid.dt());
    const auto f = generate_field({cfg.field.modes, cfg.field.decay, cfg.seed}, probe);
    const auto s0 = f.slice(0);
    std::copy(s0.begin(), s0.end(), shape.begin());
  }
  for (std::size_t i = 0; i < np; ++i) u[i] += pr.amplitude * shape[i] * window(cfg, grid.node_x(i), grid.dim());
  return u;
}

std::vector<LevelSolution> solve_ladder(const ExperimentConfig& cfg) {
  const FluxModel flux = cfg.flux();
  const double bv = cfg.problem.boundary_value;
  return parallel_map(cfg.ladder.size(), cfg.workers, [&](std::size_t l) {
    const auto grid = problem_grid(cfg, static_cast<int>(l));
    const auto u0 = initial_data(cfg, grid);
    return LevelSolution{static_cast<int>(l),
                         solve_cylinder(u0, flux, grid, cfg.solver, [bv](const SpaceTimePoint&) { return bv; })};
  });
}

ExperimentResult run_solve(const ExperimentConfig& cfg, const std::vector<LevelSolution>& sols) {
  ExperimentResult res;
  res.experiment = "solve";
  const FluxModel flux = cfg.flux();
  const double bv = cfg.problem.boundary_value;
  std::vector<double> hs, energies;
  for (const auto& s : sols) {
    const Field& u = s.result.u;
    const auto& grid = u.grid();
    const auto u0 = u.slice(0);
    const double lo = std::min(min_of(u0), bv);
    const double hi = std::max(max_of(u0), bv);
    const double umin = min_of(u.values());
    const double umax = max_of(u.values());
    double correction = 0.0;
    int picard = 0;
    bool converged = true;
    for (const auto& st : s.result.trace.steps) {
      correction = std::max(correction, st.max_principle_correction);
      picard += st.picard_iters;
      converged = converged && st.converged;
    }
    const double scale = std::max({1.0, std::abs(lo), std::abs(hi)});
    const std::string tag = level_case(s.level);
    res.check("max_principle/" + tag, umin >= lo && umax <= hi,
              "range [" + fmt(umin) + ", " + fmt(umax) + "] vs bounds [" + fmt(lo) + ", " + fmt(hi) + "]");
    res.check("max_principle_projection/" + tag, correction <= 1e3 * cfg.solver.cg_tol * scale,
              "largest projection " + fmt(correction));
    res.check("picard_converged/" + tag, converged, {}, false);

    double worst_increase = 0.0;
    double prev = spatial_energy(grid, u.slice(0));
    for (int j = 1; j < grid.nt(); ++j) {
      const double e = spatial_energy(grid, u.slice(j));
      worst_increase = std::max(worst_increase, e - prev);
      prev = e;
    }
    if (bv == 0.0) {
      const double e0 = spatial_energy(grid, u.slice(0));
      res.check("energy_nonincreasing/" + tag, worst_increase <= 1e-12 * std::max(e0, 1e-300),
                "largest increase " + fmt(worst_increase));
    }

    // Weak-form residual against a cutoff vanishing on the parabolic boundary and the top slice.
    const double tb = grid.time(0);
    const double len = grid.time_length();
    const Field test = Field::from_function(grid, [&](const SpaceTimePoint& z) {
      return window(cfg, z.x, grid.dim()) * std::sin(std::numbers::pi * (z.t - tb) / len);
    });
    Field cleaned = test;
    {
      std::vector<double> v(test.values().begin(), test.values().end());
      for (int j = 0; j < grid.nt(); ++j) {
        for (std::size_t i = 0; i < grid.nodes_per_slice(); ++i) {
          if (j == 0 || j == grid.nt() - 1 || grid.is_boundary_node(i))
            v[static_cast<std::size_t>(j) * grid.nodes_per_slice() + i] = 0.0;
        }
      }
      cleaned = Field(grid, std::move(v));
    }
    const double residual = weak_form_residual(u, flux, cleaned);

    CsvRow row{"solve", tag, grid.h(), grid.dt(), std::max(std::abs(umin), std::abs(umax)),
               std::max(std::abs(lo), std::abs(hi)), 0.0, cfg.seed, residual};
    row.empirical_c = row.rhs_unconstant > 0.0 ? row.lhs / row.rhs_unconstant : 0.0;
    res.rows.push_back(row);
    auto tj = to_json(s.result.trace);
    tj["level"] = s.level;
    tj["weak_residual"] = residual;
    res.reports.push_back(tj);
    hs.push_back(grid.h());
    energies.push_back(spatial_energy(grid, u.slice(grid.nt() - 1)));
    res.summary[tag] = {{"picard_iterations", picard},
                        {"max_principle_correction", correction},
                        {"weak_residual", residual},
                        {"final_energy", energies.back()}};
  }
  res.series.emplace_back("final energy vs h", ladder_points(hs, energies));
  return res;
}

ExperimentResult run_embedding(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = "embedding";
  const auto exps = cfg.exponents();
  const auto& pr = cfg.problem;
  const std::size_t levels = cfg.ladder.size();
  std::vector<SpaceTimeGrid> grids;
  for (const auto& [nx, nt] : cfg.ladder) {
    const int auto_nt =
        std::max(2, static_cast<int>(std::lround((nx - 1) * pr.time_length / (2.0 * pr.radius))) + 1);
    grids.emplace_back(cfg.n, nx, nt == 0 ? auto_nt : nt, pr.center, pr.t0, pr.radius, pr.time_length);
  }
  struct Sample {
    EstimateReport report;
    double scale_deviation;
  };
  const std::size_t total = static_cast<std::size_t>(cfg.sample_count) * levels;
  const auto samples = parallel_map(total, cfg.workers, [&](std::size_t i) {
    const std::uint64_t seed = cfg.seed + i / levels;
    const auto& grid = grids[i % levels];
    const Cylinder cyl = grid.cover();
    const Field f = generate_field({cfg.field.modes, cfg.field.decay, seed}, grid);
    auto r = embedding_sides(f, cyl, exps);
    r.seed = seed;
    double dev = 0.0;
    for (const double lam : {1e-3, 1e3}) {
      std::vector<double> v(f.values().begin(), f.values().end());
      for (double& x : v) x *= lam;
      const auto rs = embedding_sides(Field(grid, std::move(v)), cyl, exps);
      dev = std::max(dev, rel_change(r.empirical_c, rs.empirical_c));
    }
    return Sample{std::move(r), dev};
  });

  std::vector<double> max_c(levels, 0.0), hs;
  double max_dev = 0.0;
  bool all_finite = true;
  for (std::size_t i = 0; i < total; ++i) {
    const auto& s = samples[i];
    const std::size_t l = i % levels;
    res.rows.push_back(CsvRow::from(s.report, level_case(static_cast<int>(l)), s.scale_deviation));
    max_c[l] = std::max(max_c[l], s.report.empirical_c);
    max_dev = std::max(max_dev, s.scale_deviation);
    all_finite = all_finite && std::isfinite(s.report.empirical_c);
    res.reports.push_back(to_json(s.report));
  }
  for (const auto& g : grids) hs.push_back(g.h());
  res.check("embedding_scale_invariance", max_dev <= 1e-10, "max relative deviation " + fmt(max_dev));
  res.check("embedding_finite_constant", all_finite);
  double stability = 0.0;
  if (levels >= 2) {
    stability = rel_change(max_c[levels - 2], max_c[levels - 1]);
    res.check("embedding_refinement_stability", stability <= cfg.stability_tolerance,
              "relative change " + fmt(stability) + " over the last two levels");
  }
  res.summary["max_empirical_c"] = max_c;
  res.summary["h"] = hs;
  res.summary["max_scale_deviation"] = max_dev;
  res.summary["last_two_level_change"] = stability;
  res.series.emplace_back("max empirical c vs h", ladder_points(hs, max_c));
  return res;
}

ExperimentResult run_caccioppoli(const ExperimentConfig& cfg, const std::vector<LevelSolution>& sols) {
  ExperimentResult res;
  res.experiment = "caccioppoli";
  const FluxModel flux = cfg.flux();
  const auto& cy = cfg.cylinder;
  const Cylinder outer{cfg.problem.center, cfg.problem.t0, cy.outer_radius, cy.outer_length};
  const Cylinder inner{cfg.problem.center, cfg.problem.t0, cy.outer_radius * cy.inner_ratio,
                       cy.outer_length * cy.inner_ratio};
  const CutoffPair cut = build_cutoffs(outer, inner);
  const int per = cy.levels_per_sign;

  struct Task {
    std::size_t sol;
    Sign sign;
    int index;  // 1..per, or per + 1 for the empty level
  };
  std::vector<Task> tasks;
  for (std::size_t s = 0; s < sols.size(); ++s)
    for (const Sign sign : {Sign::plus, Sign::minus})
      for (int i = 1; i <= per + 1; ++i) tasks.push_back({s, sign, i});

  // Levels are spread over the range of u inside the outer cylinder.
  std::vector<std::pair<double, double>> range;
  for (const auto& s : sols) {
    const Field& u = s.result.u;
    const CylinderQuadrature quad(u.grid(), outer);
    double lo = 0.0, hi = 0.0;
    for (const int j : quad.active_slices())
      for (const std::size_t i : quad.active_nodes()) {
        lo = std::min(lo, u.at(i, j));
        hi = std::max(hi, u.at(i, j));
      }
    range.emplace_back(lo, hi);
  }

  const auto reports = parallel_map(tasks.size(), cfg.workers, [&](std::size_t t) {
    const auto& task = tasks[t];
    const Field& u = sols[task.sol].result.u;
    const double ext = task.sign == Sign::plus ? range[task.sol].second : range[task.sol].first;
    const double k = task.index <= per ? ext * task.index / (per + 1.0)
                                       : ext + (task.sign == Sign::plus ? 1.0 : -1.0);
    auto r = caccioppoli_sides(u, flux, k, task.sign, outer, cut);
    r.seed = cfg.seed;
    r.params = cfg.exponents();
    return r;
  });

  std::vector<double> max_c(sols.size(), 0.0), hs;
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const auto& task = tasks[t];
    const auto& r = reports[t];
    const bool empty_case = task.index > per;
    const std::string tag = level_case(sols[task.sol].level) + (task.sign == Sign::plus ? ";sign=+" : ";sign=-") +
                            (empty_case ? ";k=empty" : ";k=" + std::to_string(task.index));
    res.rows.push_back(CsvRow::from(r, tag, r.terms.at("k")));
    res.reports.push_back(to_json(r));
    res.check("caccioppoli_nonnegative/" + tag, r.lhs >= 0.0 && r.rhs_unconstant >= 0.0);
    if (empty_case) {
      res.check("caccioppoli_empty_level/" + tag, r.lhs == 0.0 && r.rhs_unconstant == 0.0 && r.empty_level_set);
    } else {
      res.check("caccioppoli_finite_constant/" + tag, std::isfinite(r.empirical_c),
                "lhs " + fmt(r.lhs) + ", rhs " + fmt(r.rhs_unconstant));
      max_c[task.sol] = std::max(max_c[task.sol], r.empirical_c);
    }
  }
  for (std::size_t s = 0; s < sols.size(); ++s) hs.push_back(sols[s].result.u.grid().h());
  for (std::size_t s = 1; s < sols.size(); ++s) {
    res.check("caccioppoli_constant_trend/" + level_case(sols[s].level), max_c[s] <= 1.1 * max_c[s - 1],
              fmt(max_c[s]) + " vs previous " + fmt(max_c[s - 1]));
  }
  res.summary["max_empirical_c"] = max_c;
  res.summary["h"] = hs;
  res.series.emplace_back("max empirical c vs h", ladder_points(hs, max_c));
  return res;
}

ExperimentResult run_supbound(const ExperimentConfig& cfg, const std::vector<LevelSolution>& sols) {
  ExperimentResult res;
  res.experiment = "supbound";
  const auto exps = cfg.exponents();
  std::vector<double> sigmas = cfg.sigma_list;
  std::sort(sigmas.begin(), sigmas.end());
  sigmas.erase(std::unique(sigmas.begin(), sigmas.end()), sigmas.end());
  const VarthetaConvention conventions[] = {VarthetaConvention::theorem, VarthetaConvention::proof};

  const std::size_t per_level = sigmas.size() * 2;
  const auto reports = parallel_map(sols.size() * per_level, cfg.workers, [&](std::size_t t) {
    const auto& u = sols[t / per_level].result.u;
    const double sigma = sigmas[(t % per_level) / 2];
    auto r = supbound_sides(u, cfg.problem.center, cfg.problem.t0, cfg.cylinder.rho, sigma, exps, conventions[t % 2]);
    r.seed = cfg.seed;
    return r;
  });

  const double predicted = blowup_exponent(exps);
  // max_c[convention][level][sigma]
  std::vector<std::vector<std::vector<double>>> cs(2, std::vector<std::vector<double>>(sols.size()));
  for (std::size_t l = 0; l < sols.size(); ++l) {
    const std::string tag = level_case(sols[l].level);
    for (int cv = 0; cv < 2; ++cv) {
      std::vector<EstimateReport> sweep;
      double prev_lhs = -1.0;
      bool monotone = true;
      for (std::size_t s = 0; s < sigmas.size(); ++s) {
        const auto& r = reports[l * per_level + s * 2 + static_cast<std::size_t>(cv)];
        const std::string case_tag = tag + ";sigma=" + label(sigmas[s]) + ";convention=" + (cv == 0 ? "theorem" : "proof");
        res.rows.push_back(CsvRow::from(r, case_tag, sigmas[s]));
        res.reports.push_back(to_json(r));
        res.check("supbound_finite_constant/" + case_tag,
                  std::isfinite(r.empirical_c) && (r.rhs_unconstant > 0.0 || r.lhs == 0.0),
                  "lhs " + fmt(r.lhs) + ", rhs " + fmt(r.rhs_unconstant));
        monotone = monotone && r.lhs >= prev_lhs;
        prev_lhs = r.lhs;
        cs[static_cast<std::size_t>(cv)][l].push_back(r.empirical_c);
        sweep.push_back(r);
      }
      const std::string cv_tag = tag + (cv == 0 ? ";convention=theorem" : ";convention=proof");
      res.check("supbound_lhs_monotone_in_sigma/" + cv_tag, monotone);
      std::size_t distinct = 0;
      for (const auto& r : sweep) distinct += r.rhs_unconstant > 0.0 && r.lhs > 0.0;
      if (distinct >= 4) {
        const auto fit = fit_blowup_exponent(sweep);
        res.summary["blowup_fit"][cv_tag] = {{"slope", fit.slope}, {"predicted", predicted}};
        res.check("supbound_blowup_fit/" + cv_tag, true,
                  "fitted " + fmt(fit.slope) + ", predicted " + fmt(predicted), false);
      }
    }
  }
  res.summary["predicted_blowup_exponent"] = predicted;
  res.summary["sigma_list"] = sigmas;
  std::vector<double> hs;
  for (const auto& s : sols) hs.push_back(s.result.u.grid().h());
  res.summary["h"] = hs;
  for (int cv = 0; cv < 2; ++cv) {
    const std::string name = cv == 0 ? "theorem" : "proof";
    res.summary["empirical_c_" + name] = cs[static_cast<std::size_t>(cv)];
    if (sols.size() >= 2) {
      const auto& a = cs[static_cast<std::size_t>(cv)][sols.size() - 2];
      const auto& b = cs[static_cast<std::size_t>(cv)][sols.size() - 1];
      for (std::size_t s = 0; s < sigmas.size(); ++s) {
        const double change = rel_change(a[s], b[s]);
        res.check("supbound_refinement_stability/sigma=" + label(sigmas[s]) + ";convention=" + name, change <= 0.2,
                  "relative change " + fmt(change));
      }
    }
    std::vector<double> col;
    for (const auto& lv : cs[static_cast<std::size_t>(cv)]) col.push_back(lv.empty() ? 0.0 : lv.front());
    res.series.emplace_back("empirical c (" + name + ", first sigma) vs h", ladder_points(hs, col));
  }
  return res;
}

ExperimentResult run_degiorgi(const ExperimentConfig& cfg, const std::vector<LevelSolution>& sols) {
  ExperimentResult res;
  res.experiment = "degiorgi";
  const auto exps = cfg.exponents();
  const double sigma = cfg.sigma_list.front();
  const double rho = cfg.cylinder.rho;
  const int depth = cfg.cylinder.depth;

  const auto cals = parallel_map(sols.size() * 2, cfg.workers, [&](std::size_t t) {
    return calibrate_level(sols[t / 2].result.u, cfg.problem.center, cfg.problem.t0, rho, sigma, exps,
                           t % 2 == 0 ? Sign::plus : Sign::minus, depth);
  });

  for (std::size_t t = 0; t < cals.size(); ++t) {
    const auto& cal = cals[t];
    const auto& u = sols[t / 2].result.u;
    const auto& tr = cal.trace;
    const std::string tag = level_case(sols[t / 2].level) + (t % 2 == 0 ? ";sign=+" : ";sign=-");
    const double y0 = tr.y.front();
    for (std::size_t n = 0; n < tr.y.size(); ++n) {
      CsvRow row{"degiorgi_y", tag + ";n=" + std::to_string(n), u.grid().h(), u.grid().dt(), tr.y[n],
                 y0 == 0.0 ? 0.0 : std::exp(std::log(y0) - static_cast<double>(n) * exps.log_lambda), 0.0, cfg.seed,
                 tr.levelset_measures[n]};
      row.empirical_c = row.rhs_unconstant > 0.0 ? row.lhs / row.rhs_unconstant : 0.0;
      res.rows.push_back(row);
    }
    res.check("degiorgi_decay/" + tag, tr.all_decay());
    res.check("degiorgi_smallness/" + tag, cal.smallness <= 1.0, "smallness " + fmt(cal.smallness));
    bool monotone = true;
    for (std::size_t n = 1; n < tr.levelset_measures.size(); ++n)
      monotone = monotone && tr.levelset_measures[n] <= tr.levelset_measures[n - 1];
    res.check("degiorgi_levelset_monotone/" + tag, monotone);

    const auto sched = CylinderSchedule::make(cfg.problem.center, cfg.problem.t0, rho, sigma, cal.k, exps.tilde_p, depth);
    double worst = HUGE_VAL;
    for (int n = 0; n < depth; ++n) {
      for (const double s : {2.0, exps.p, exps.tilde_p}) {
        const auto [first, second] = levelset_chebyshev(u, sched, n, s);
        if (first < second * (1.0 - 1e-12)) worst = std::min(worst, first / second);
        res.check("chebyshev/" + tag + ";n=" + std::to_string(n) + ";s=" + label(s), first >= second * (1.0 - 1e-12),
                  fmt(first) + " < " + fmt(second));
      }
    }
    auto tj = to_json(tr);
    tj["case"] = tag;
    tj["c_star"] = cal.c_star;
    tj["doublings"] = cal.doublings;
    tj["smallness"] = cal.smallness;
    res.reports.push_back(tj);
    const double sup_u = std::max(std::abs(max_of(u.values())), std::abs(min_of(u.values())));
    res.summary[tag] = {{"k", cal.k},       {"c_star", cal.c_star},         {"y0", y0},
                        {"sup_abs_u", sup_u}, {"smallness", cal.smallness}, {"doublings", cal.doublings}};
  }
  res.summary["lambda"] = exps.lambda;
  res.summary["sigma"] = sigma;
  return res;
}

double barenblatt_1d_p3(double x, double t, double c) {
  const double s = std::pow(t, -0.25);
  const double inner = c - std::pow(std::abs(x) * s, 1.5) / 6.0;
  return inner > 0.0 ? s * inner * inner : 0.0;
}

ExperimentResult run_convergence(const ExperimentConfig& cfg) {
  ExperimentResult res;
  res.experiment = "convergence";
  std::vector<std::string> oracles;
  if (cfg.problem.oracle != "barenblatt") oracles.push_back("heat");
  if (cfg.problem.oracle != "heat") oracles.push_back("barenblatt");

  for (const auto& oracle : oracles) {
    const bool heat = oracle == "heat";
    const double p = heat ? 2.0 : 3.0;
    const FluxModel flux = FluxModel::p_only(p);
    const auto errors = parallel_map(cfg.ladder.size(), cfg.workers, [&](std::size_t l) {
      const int nx = cfg.ladder[l].first;
      const int nt = cfg.ladder[l].second;
      const Point x0 = heat ? Point{0.5, 0.0} : Point{0.0, 0.0};
      const double radius = heat ? 0.5 : 6.0;
      const double t0 = heat ? 0.1 : 2.0;
      const double len = heat ? 0.1 : 1.0;
      const SpaceTimeGrid grid =
          nt == 0 ? make_solver_grid(1, nx, x0, t0, radius, len, cfg.solver, p) : SpaceTimeGrid(1, nx, nt, x0, t0, radius, len);
      const auto exact = [&](const SpaceTimePoint& z) {
        return heat ? std::exp(-std::numbers::pi * std::numbers::pi * z.t) * std::sin(std::numbers::pi * z.x[0])
                    : barenblatt_1d_p3(z.x[0], z.t);
      };
      std::vector<double> u0(grid.nodes_per_slice());
      for (std::size_t i = 0; i < u0.size(); ++i) u0[i] = exact({grid.node_x(i), grid.time(0)});
      const auto sol = solve_cylinder(u0, flux, grid, cfg.solver, [](const SpaceTimePoint&) { return 0.0; });
      double err = 0.0;
      for (int j = 0; j < grid.nt(); ++j)
        for (std::size_t i = 0; i < grid.nodes_per_slice(); ++i)
          err = std::max(err, std::abs(sol.u.at(i, j) - exact({grid.node_x(i), grid.time(j)})));
      return std::array<double, 3>{grid.h(), grid.dt(), err};
    });
    std::vector<double> hs, es, orders;
    for (std::size_t l = 0; l < errors.size(); ++l) {
      const auto [h, dt, err] = errors[l];
      double order = 0.0;
      if (l > 0) order = std::log(es.back() / err) / std::log(hs.back() / h);
      res.rows.push_back({"convergence_" + oracle, level_case(static_cast<int>(l)), h, dt, err, 0.0, 0.0, cfg.seed, order});
      hs.push_back(h);
      es.push_back(err);
      if (l > 0) orders.push_back(order);
    }
    for (std::size_t l = 1; l < es.size(); ++l) {
      const bool required = l + 2 >= es.size();
      res.check("convergence_" + oracle + "_decreasing/" + level_case(static_cast<int>(l)), es[l] < es[l - 1],
                fmt(es[l]) + " vs " + fmt(es[l - 1]), required);
    }
    res.summary[oracle] = {{"h", hs}, {"error", es}, {"order", orders}};
    res.series.emplace_back(oracle + " error vs h", ladder_points(hs, es));
  }
  return res;
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  cfg.validate();
  if (cfg.experiment == "embedding") return run_embedding(cfg);
  if (cfg.experiment == "convergence") return run_convergence(cfg);
  const auto sols = solve_ladder(cfg);
  if (cfg.experiment == "solve") return run_solve(cfg, sols);
  if (cfg.experiment == "caccioppoli") return run_caccioppoli(cfg, sols);
  if (cfg.experiment == "supbound") return run_supbound(cfg, sols);
  return run_degiorgi(cfg, sols);
}

BlowupFit fit_blowup_exponent(const std::vector<std::pair<double, double>>& sigma_constant) {
  std::vector<std::pair<double, double>> pts;
  std::set<double> distinct;
  for (const auto& [sigma, c] : sigma_constant) {
    DPLAB_THROW_IF(!(sigma > 0.0 && sigma < 1.0), ErrorCode::InvalidArgument, "sigma must lie in (0,1)");
    if (!(c > 0.0) || !std::isfinite(c)) continue;
    pts.emplace_back(std::log1p(-sigma), std::log(c));
    distinct.insert(sigma);
  }
  DPLAB_THROW_IF(distinct.size() < 4, ErrorCode::InsufficientPoints,
                 "need at least 4 distinct sigma values with a positive constant, got " +
                     std::to_string(distinct.size()));
  double mx = 0.0, my = 0.0;
  for (const auto& [x, y] : pts) {
    mx += x;
    my += y;
  }
  mx /= static_cast<double>(pts.size());
  my /= static_cast<double>(pts.size());
  double sxx = 0.0, sxy = 0.0;
  for (const auto& [x, y] : pts) {
    sxx += (x - mx) * (x - mx);
    sxy += (x - mx) * (y - my);
  }
  BlowupFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  fit.points = pts.size();
  return fit;
}

BlowupFit fit_blowup_exponent(const std::vector<EstimateReport>& reports) {
  std::vector<std::pair<double, double>> pairs;
  for (const auto& r : reports) {
    const auto sigma = r.terms.find("sigma");
    const auto free = r.terms.find("sigma_free_rhs");
    DPLAB_THROW_IF(sigma == r.terms.end() || free == r.terms.end(), ErrorCode::InvalidArgument,
                   "fit needs sup-bound reports");
    pairs.emplace_back(sigma->second, free->second > 0.0 ? r.lhs / free->second : 0.0);
  }
  return fit_blowup_exponent(pairs);
}

namespace {

std::string svg_plot(const ExperimentResult& res) {
  const double w = 640, h = 400, m = 50;
  std::ostringstream os;
  os << std::setprecision(6);
  os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << w << "\" height=\"" << h << "\">\n";
  os << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  os << "<text x=\"" << m << "\" y=\"20\" font-family=\"sans-serif\" font-size=\"14\">" << res.experiment
     << " (log-log)</text>\n";
  double x_lo = HUGE_VAL, x_hi = -HUGE_VAL, y_lo = HUGE_VAL, y_hi = -HUGE_VAL;
  for (const auto& [label, pts] : res.series) {
    for (const auto& [x, y] : pts) {
      if (x <= 0.0 || y <= 0.0) continue;
      x_lo = std::min(x_lo, std::log10(x));
      x_hi = std::max(x_hi, std::log10(x));
      y_lo = std::min(y_lo, std::log10(y));
      y_hi = std::max(y_hi, std::log10(y));
    }
  }
  if (x_lo > x_hi) {
    os << "</svg>\n";
    return os.str();
  }
  if (x_hi - x_lo < 1e-12) { x_lo -= 0.5; x_hi += 0.5; }
  if (y_hi - y_lo < 1e-12) { y_lo -= 0.5; y_hi += 0.5; }
  const auto px = [&](double x) { return m + (std::log10(x) - x_lo) / (x_hi - x_lo) * (w - 2 * m); };
  const auto py = [&](double y) { return h - m - (std::log10(y) - y_lo) / (y_hi - y_lo) * (h - 2 * m); };
  os << "<line x1=\"" << m << "\" y1=\"" << h - m << "\" x2=\"" << w - m << "\" y2=\"" << h - m
     << "\" stroke=\"black\"/>\n";
  os << "<line x1=\"" << m << "\" y1=\"" << m << "\" x2=\"" << m << "\" y2=\"" << h - m << "\" stroke=\"black\"/>\n";
  const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"};
  int idx = 0;
  for (const auto& [label, pts] : res.series) {
    const char* color = colors[idx % 5];
    os << "<polyline fill=\"none\" stroke=\"" << color << "\" points=\"";
    for (const auto& [x, y] : pts)
      if (x > 0.0 && y > 0.0) os << px(x) << ',' << py(y) << ' ';
    os << "\"/>\n";
    os << "<text x=\"" << w - m - 250 << "\" y=\"" << m + 16 * idx << "\" font-family=\"sans-serif\" font-size=\"12\" fill=\""
       << color << "\">" << label << "</text>\n";
    ++idx;
  }
  os << "</svg>\n";
  return os.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream os(path, std::ios::binary);
  DPLAB_THROW_IF(!os, ErrorCode::Io, "cannot write " + path.string());
  os << text;
  DPLAB_THROW_IF(!os, ErrorCode::Io, "failed writing " + path.string());
}

}  // namespace

void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg, const std::string& dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  DPLAB_THROW_IF(ec, ErrorCode::Io, "cannot create " + dir + ": " + ec.message());
  const fs::path base(dir);
  write_text(base / "results.csv", csv_header() + csv_body(result.rows));

  json reports = {{"schema_version", kReportSchemaVersion}, {"experiment", result.experiment}, {"reports", result.reports}};
  write_text(base / "reports.json", reports.dump(1) + "\n");

  auto checks = json::array();
  for (const auto& c : result.checks)
    checks.push_back({{"name", c.name}, {"passed", c.passed}, {"hard", c.hard}, {"detail", c.detail}});
  json summary = {{"schema_version", kReportSchemaVersion},
                  {"experiment", result.experiment},
                  {"ok", result.ok()},
                  {"failures", result.failures()},
                  {"summary", result.summary},
                  {"checks", checks},
                  {"config", cfg.to_json()}};
  write_text(base / "summary.json", summary.dump(1) + "\n");

  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream ts;
  ts << std::put_time(&tm, "%Y-%m-%dT%H:%M:%SZ");
  json meta = {{"schema_version", kReportSchemaVersion}, {"created", ts.str()}, {"experiment", result.experiment}};
  write_text(base / "metadata.json", meta.dump(1) + "\n");

  if (cfg.svg) write_text(base / "plot.svg", svg_plot(result));
}

}  // namespace dplab
