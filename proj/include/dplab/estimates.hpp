#pragma once

// Both sides of the energy estimates evaluated on discrete fields: the
// Caccioppoli inequality for truncations, the parabolic interpolation
// (embedding) inequality, the level-set iteration on shrinking cylinders and
// the resulting sup-bound.

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "dplab/doublephase.hpp"
#include "dplab/exponents.hpp"
#include "dplab/mesh.hpp"

namespace dplab {

struct GridDescriptor {
  int dim = 0;
  int nx = 0;
  int nt = 0;
  double h = 0.0;
  double dt = 0.0;

  static GridDescriptor of(const SpaceTimeGrid& grid) {
    return {grid.dim(), grid.nx(), grid.nt(), grid.h(), grid.dt()};
  }
};

/// Paired evaluation of an inequality lhs <= c * rhs_unconstant.
struct EstimateReport {
  std::string name;
  double lhs = 0.0;
  double rhs_unconstant = 0.0;
  double empirical_c = 0.0;  ///< lhs / rhs; 0 when both vanish, +inf when only rhs does
  bool empty_level_set = false;  ///< both sides are exactly zero
  GridDescriptor grid;
  std::optional<ExponentSet> params;
  std::uint64_t seed = 0;
  std::map<std::string, double> terms;  ///< per-term breakdown

  void finish();
};

/// Both sides of the Caccioppoli inequality for (u - k)_{+-} on `outer`:
///   lhs = sup_t avg_B (u-k)^2 eta^q zeta^2 / len + avg_Q H(z, eta |D(u-k)|) zeta^2
///   rhs = avg_Q H(z, (u-k) |D eta|) zeta^2 + avg_Q (u-k)^2 eta^q zeta d_t zeta
/// The zeroth-order integrands live on nodes, the gradient ones on cells.
EstimateReport caccioppoli_sides(const Field& u, const FluxModel& flux, double k, Sign sign,
                                 const Cylinder& outer, const CutoffPair& cut);

/// lhs = avg_Q |f/R|^q,
/// rhs = (avg_Q |Df|^p + |f/R|^p)^{q theta/p} (sup_t avg_B |f/R|^2)^{q(1-theta)/2}
/// with theta = theta(n, p, q). Requires grid.dim() == n.
EstimateReport embedding_sides(const Field& f, const Cylinder& cylinder, int n, double p, double q);
EstimateReport embedding_sides(const Field& f, const Cylinder& cylinder, const ExponentSet& exps);

/// Nested cylinders Q_n = B_{R_n} x (t0 - ell_n^2, t0) with
/// R_n = (sigma + (1-sigma) 2^-n) rho and ell_n = (sigma + (1-sigma) 2^-n) rho^{p~/2},
/// so Q_0 has time length rho^{p~} and the limit has time length sigma^2 rho^{p~}.
/// Levels k_n = k - k/2^n move monotonically from 0 towards k.
struct CylinderSchedule {
  Point x0{};
  double t0 = 0.0;
  double sigma = 0.5;
  double rho = 1.0;
  double k = 1.0;
  int depth = 8;
  std::vector<double> radii;              ///< R_n, n = 0..depth+1
  std::vector<double> time_lengths;       ///< ell_n^2, n = 0..depth+1
  std::vector<double> half_radii;         ///< (R_n + R_{n+1})/2, n = 0..depth
  std::vector<double> half_time_lengths;  ///< ((ell_n + ell_{n+1})/2)^2, n = 0..depth
  std::vector<double> levels;             ///< k_n, n = 0..depth+1

  static CylinderSchedule make(Point x0, double t0, double rho, double sigma, double k,
                               double tilde_p, int depth = 8);

  [[nodiscard]] Sign sign() const { return k > 0.0 ? Sign::plus : Sign::minus; }
  [[nodiscard]] Cylinder cylinder(int n) const;
  [[nodiscard]] Cylinder half_cylinder(int n) const;
  /// Limit cylinder B_{sigma rho} x (t0 - sigma^2 rho^{p~}, t0).
  [[nodiscard]] Cylinder limit_cylinder() const;
};

struct DeGiorgiTrace {
  Sign sign = Sign::plus;
  double k = 0.0;
  double lambda = 0.0;
  std::vector<double> y;                    ///< Y_n, n = 0..depth
  std::vector<double> levelset_measures;    ///< |A_n|, n = 0..depth
  std::vector<double> recursion_constants;  ///< c_n with Y_{n+1} = c_n (2^{p~ n} K)^{1+vt} Y_n^{1+vt}
  std::vector<bool> decay_flags;            ///< Y_n <= Y_0 / lambda^n
  int terminated_at = -1;                   ///< first n with an empty level set, or -1

  [[nodiscard]] double max_recursion_constant() const;
  [[nodiscard]] bool all_decay() const;
};

/// avg_{Q_0} ((u)_{+-} / rho)^{p~}; independent of the level since k_0 = 0.
double initial_energy(const Field& u, const CylinderSchedule& sched, const ExponentSet& exps);

/// Y_n, |A_n|, recursion constants and decay flags along the schedule.
/// Throws LevelSignMismatch for k == 0.
DeGiorgiTrace degiorgi_sequence(const Field& u, const CylinderSchedule& sched, const ExponentSet& exps);

/// (int_{Q_n} (u - k_n)^s dz, |k|^s |A_{n+1}| / 2^{(n+1)s}); the first dominates the second.
std::pair<double, double> levelset_chebyshev(const Field& u, const CylinderSchedule& sched, int n, double s);

enum class VarthetaConvention { theorem, proof };

/// lhs = sup |u| over B_{sigma rho} x (t0 - sigma^2 rho^{p~}, t0),
/// rhs = (1-sigma)^{q/(q-p~)} E1^{e1} E2^{e2} on B_rho x (t0 - rho^{p~}, t0) with
/// E1 = avg |Du|^p + |u|^p/rho^p, E2 = sup_t avg |u|^2/rho^2, e1 = chi p~ theta/p,
/// e2 = chi p~ (1-theta)/2, chi = vartheta/((p~-q)(1+vartheta)).
EstimateReport supbound_sides(const Field& u, Point x0, double t0, double rho, double sigma,
                              const ExponentSet& exps, VarthetaConvention convention);

/// Input of the abstract recursion replay. level_factor is |k|^{q-p~} / (1-sigma)^q.
struct FastConvergenceInput {
  double y0 = 0.0;
  double c = 1.0;
  double b = 8.0;  ///< 2^{p~}
  double vartheta = 0.5;
  double level_factor = 1.0;
  int depth = 8;
};

struct FastConvergenceResult {
  std::vector<double> y;      ///< worst-case sequence with equality in the recursion
  std::vector<double> bound;  ///< Y_0 / lambda^n
  std::vector<bool> flags;
  double lambda = 0.0;
  double smallness = 0.0;  ///< c lambda K^{1+vartheta} Y_0^vartheta; the induction needs <= 1
  double max_equality_margin = 0.0;  ///< max_n |Y_n / bound_n - 1| over nonzero entries
  int first_violation = -1;
};

/// Replays the induction Y_n <= Y_0/lambda^n, lambda^vartheta = b^{1+vartheta}, on the
/// equality sequence Y_{n+1} = c (b^n K)^{1+vartheta} Y_n^{1+vartheta}. Never throws on violation.
FastConvergenceResult replay_fast_convergence(const FastConvergenceInput& in);

/// As replay_fast_convergence, but throws SmallnessViolated naming the first failing n.
FastConvergenceResult fast_convergence_check(const FastConvergenceInput& in);

/// c lambda (|k|^{q-p~}/(1-sigma)^q)^{1+vartheta} Y_0^vartheta for a recursion constant c.
double smallness_product(const ExponentSet& exps, double sigma, double k, double y0, double c);

struct LevelCalibration {
  double c_star = 2.0;
  double k = 0.0;
  double y0 = 0.0;
  double smallness = 0.0;
  int doublings = 0;
  DeGiorgiTrace trace;
};

/// Picks |k| = level_magnitude(c_star), doubling c_star from `c_star_start` until
/// the smallness product with the trace's own recursion constant is <= 1.
LevelCalibration calibrate_level(const Field& u, Point x0, double t0, double rho, double sigma,
                                 const ExponentSet& exps, Sign sign, int depth = 8, double c_star_start = 2.0);

}  // namespace dplab
