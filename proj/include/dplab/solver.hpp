#pragma once

// Backward Euler in time, Q1 finite elements with lumped mass in space, and a
// Picard linearization with the regularized diffusivity
//   D_eps(s, z) = (s^2 + eps^2)^{(p-2)/2} + a(z) (s^2 + eps^2)^{(q-2)/2},
// evaluated at the cell-centered gradient. Every linear system is a symmetric
// M-matrix, solved by Jacobi-preconditioned conjugate gradients.

#include <functional>
#include <span>
#include <vector>

#include "dplab/doublephase.hpp"
#include "dplab/error.hpp"
#include "dplab/mesh.hpp"

namespace dplab {

/// Time step selection: a fixed dt, or dt = factor * h^p.
struct DtRule {
  enum class Kind { fixed, intrinsic };
  Kind kind = Kind::intrinsic;
  double value = 1.0;

  [[nodiscard]] double target_dt(double h, double p) const;
};

struct SolverConfig {
  double regularization_eps = -1.0;  ///< negative selects eps = h
  double picard_tol = 1e-8;
  int picard_max = 200;
  double cg_tol = 1e-12;
  int cg_max = 20000;
  DtRule dt_rule{};

  void validate() const;
  [[nodiscard]] double eps_for(double h) const { return regularization_eps < 0.0 ? h : regularization_eps; }
};

struct StepTrace {
  int step = 0;
  int picard_iters = 0;
  int cg_iters = 0;
  double residual = 0.0;  ///< final relative Picard update
  double seconds = 0.0;
  bool converged = false;
  bool damped = false;
  /// Largest distance by which the computed iterate left the max-principle
  /// bounds before projection; limited by the CG tolerance.
  double max_principle_correction = 0.0;
};

struct SolveTrace {
  std::vector<StepTrace> steps;
};

/// Solver failure; carries the trace up to the failing step.
class SolverError : public Error {
 public:
  SolverError(ErrorCode code, const std::string& what, SolveTrace trace, int slice)
      : Error(code, what), trace_(std::move(trace)), slice_(slice) {}
  [[nodiscard]] const SolveTrace& trace() const { return trace_; }
  [[nodiscard]] int slice() const { return slice_; }

 private:
  SolveTrace trace_;
  int slice_;
};

using BoundaryFn = std::function<double(const SpaceTimePoint&)>;

/// One implicit step from `u_prev` to time `t_next`. Only the boundary entries
/// of `bc_next` are read.
std::vector<double> step_implicit(const SpaceTimeGrid& grid, std::span<const double> u_prev,
                                  const FluxModel& flux, const SolverConfig& cfg, double t_next,
                                  double dt, std::span<const double> bc_next,
                                  StepTrace* trace = nullptr);

struct SolveResult {
  Field u;
  SolveTrace trace;
};

/// Marches from slice 0 (`initial`) through every slice of `grid`.
SolveResult solve_cylinder(std::span<const double> initial, const FluxModel& flux,
                           const SpaceTimeGrid& grid, const SolverConfig& cfg, const BoundaryFn& bc);

/// Grid on [x0 - R, x0 + R]^dim x [t0 - time_length, t0] whose step follows cfg.dt_rule.
SpaceTimeGrid make_solver_grid(int dim, int nx, Point x0, double t0, double radius,
                               double time_length, const SolverConfig& cfg, double p);

/// Lumped-mass L2 energy sum_i m_i u_i^2 of one slice over the whole box.
double spatial_energy(const SpaceTimeGrid& grid, std::span<const double> slice);

/// Discrete value of the weak form  int int (-u phi_t + A(z, Du) . D phi) dz.
/// The test field must vanish on the lateral boundary and on the first and
/// last slices; otherwise TestNotCompactlySupported.
double weak_form_residual(const Field& u, const FluxModel& flux, const Field& test);

}  // namespace dplab
