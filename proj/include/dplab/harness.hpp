#pragma once

// Experiment driver: configuration, refinement ladders, sigma sweeps, result
// aggregation and output files.

#include <atomic>
#include <cstdint>
#include <exception>
#include <functional>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <json.hpp>

#include "dplab/doublephase.hpp"
#include "dplab/estimates.hpp"
#include "dplab/random_field.hpp"
#include "dplab/report_io.hpp"
#include "dplab/solver.hpp"

namespace dplab {

inline constexpr int kConfigSchemaVersion = 1;

struct CoefficientSpec {
  std::string kind = "constant";  ///< constant | smooth_bump | checkerboard | sampled
  double value = 0.0;             ///< constant
  double a_sup = 1.0;             ///< smooth_bump, checkerboard
  double center = 1.0;
  double width = 1.0;
  double cell_size = 0.25;
  double time_cell = 0.125;
  std::string path;  ///< sampled: field file

  [[nodiscard]] CoefficientFn build() const;
};

/// Space-time box and initial data of the solver problems.
struct ProblemSpec {
  Point center{0.0, 0.0};
  double radius = 1.0;
  double t0 = 0.25;           ///< final time
  double time_length = 0.25;  ///< the run covers [t0 - time_length, t0]
  std::string initial = "random";  ///< random | zero | bump
  double amplitude = 1.0;
  double boundary_value = 0.0;  ///< constant Dirichlet data
  std::string oracle = "both";  ///< convergence: heat | barenblatt | both
};

/// Cylinders and levels used by the estimate experiments.
struct CylinderSpec {
  double rho = 0.5;           ///< sup-bound and level-set iteration
  double outer_radius = 0.75; ///< Caccioppoli outer cylinder
  double outer_length = 0.2;
  double inner_ratio = 0.5;   ///< inner cylinder = ratio * outer in radius and length
  int levels_per_sign = 5;
  int depth = 8;
};

struct ExperimentConfig {
  std::string experiment = "embedding";  ///< solve | embedding | caccioppoli | supbound | degiorgi | convergence
  int n = 2;
  double p = 2.0;
  double q = 2.5;
  double nu = 1.0;
  double ell_bound = 1.0;
  CoefficientSpec coefficient;
  std::vector<std::pair<int, int>> ladder;  ///< (nx, nt); nt == 0 picks nt from the step rule
  std::vector<double> sigma_list{0.5};
  std::uint64_t seed = 1;
  int sample_count = 1;
  RandomFieldSpec field;
  ProblemSpec problem;
  CylinderSpec cylinder;
  SolverConfig solver;
  int workers = 0;  ///< 0 selects the hardware concurrency
  std::string output_dir;
  bool svg = false;
  double stability_tolerance = 0.05;  ///< embedding: relative change of max c over the last two levels

  /// Throws ConfigInvalid with the offending key.
  static ExperimentConfig from_json(const nlohmann::json& j);
  static ExperimentConfig load(const std::string& path);
  [[nodiscard]] nlohmann::json to_json() const;
  void validate() const;
  [[nodiscard]] ExponentSet exponents() const;
  [[nodiscard]] FluxModel flux() const;
};

/// A named assertion. Hard failures make the run exit nonzero.
struct Check {
  std::string name;
  bool passed = true;
  bool hard = true;
  std::string detail;
};

struct ExperimentResult {
  std::string experiment;
  std::vector<CsvRow> rows;
  std::vector<Check> checks;
  nlohmann::json summary = nlohmann::json::object();
  std::vector<nlohmann::json> reports;  ///< per-evaluation JSON reports
  /// Plot series: (label, points).
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;

  [[nodiscard]] bool ok() const;
  [[nodiscard]] std::vector<std::string> failures() const;
  void check(std::string name, bool passed, std::string detail = {}, bool hard = true);
};

/// Solution on one ladder level.
struct LevelSolution {
  int level = 0;
  SolveResult result;
};

/// Grid of ladder level `level` for the solver problems.
SpaceTimeGrid problem_grid(const ExperimentConfig& cfg, int level);
/// Initial slice of the configured problem on `grid`.
std::vector<double> initial_data(const ExperimentConfig& cfg, const SpaceTimeGrid& grid);
/// Solves the configured problem on every ladder level.
std::vector<LevelSolution> solve_ladder(const ExperimentConfig& cfg);

ExperimentResult run_solve(const ExperimentConfig& cfg, const std::vector<LevelSolution>& sols);
ExperimentResult run_embedding(const ExperimentConfig& cfg);
ExperimentResult run_caccioppoli(const ExperimentConfig& cfg, const std::vector<LevelSolution>& sols);
ExperimentResult run_supbound(const ExperimentConfig& cfg, const std::vector<LevelSolution>& sols);
ExperimentResult run_degiorgi(const ExperimentConfig& cfg, const std::vector<LevelSolution>& sols);
ExperimentResult run_convergence(const ExperimentConfig& cfg);

/// Dispatches on cfg.experiment, solving the ladder where needed.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

/// Writes results.csv, reports.json, summary.json, metadata.json and
/// optionally plot.svg into `dir`. Only metadata.json carries a timestamp.
void write_outputs(const ExperimentResult& result, const ExperimentConfig& cfg, const std::string& dir);

struct BlowupFit {
  double slope = 0.0;
  double intercept = 0.0;
  std::size_t points = 0;
};

/// Least-squares slope of log C against log(1 - sigma) over (sigma, C) pairs.
/// Pairs with C <= 0 are skipped; fewer than 4 distinct sigma values throws
/// InsufficientPoints.
BlowupFit fit_blowup_exponent(const std::vector<std::pair<double, double>>& sigma_constant);
/// Same, with C = lhs / sigma_free_rhs taken from sup-bound reports.
BlowupFit fit_blowup_exponent(const std::vector<EstimateReport>& reports);

/// Closed-form Barenblatt profile for n = 1, p = 3:
/// t^{-1/4} [c - (|x| t^{-1/4})^{3/2} / 6]_+^2.
double barenblatt_1d_p3(double x, double t, double c = 1.0);

/// Runs f(0..count-1) on a bounded pool; results keep index order and the
/// exception of the lowest failing index is rethrown.
template <class F>
auto parallel_map(std::size_t count, int workers, F&& f) -> std::vector<decltype(f(std::size_t{0}))> {
  using R = decltype(f(std::size_t{0}));
  std::vector<std::optional<R>> slots(count);
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        slots[i].emplace(f(i));
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  std::size_t w = workers > 0 ? static_cast<std::size_t>(workers) : std::thread::hardware_concurrency();
  w = std::max<std::size_t>(1, std::min(w, count));
  if (w == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < w; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  std::vector<R> out;
  out.reserve(count);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

}  // namespace dplab
