#include "dplab/solver.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <cmath>
#include <string>

namespace dplab {

namespace {

// Q1 stiffness of a square cell with corners ordered (0,0), (1,0), (0,1), (1,1).
constexpr double kQ1[4][4] = {
    {4.0 / 6.0, -1.0 / 6.0, -1.0 / 6.0, -2.0 / 6.0},
    {-1.0 / 6.0, 4.0 / 6.0, -2.0 / 6.0, -1.0 / 6.0},
    {-1.0 / 6.0, -2.0 / 6.0, 4.0 / 6.0, -1.0 / 6.0},
    {-2.0 / 6.0, -1.0 / 6.0, -1.0 / 6.0, 4.0 / 6.0},
};

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (const double x : v) m = std::max(m, std::abs(x));
  return m;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// x^T K_cell y for one cell with unit diffusivity.
double cell_form(const SpaceTimeGrid& grid, std::size_t cell, std::span<const double> x,
                 std::span<const double> y) {
  const auto c = grid.cell_corners(cell);
  if (grid.dim() == 1) return (x[c[1]] - x[c[0]]) * (y[c[1]] - y[c[0]]) / grid.h();
  double s = 0.0;
  for (int i = 0; i < 4; ++i) {
    double row = 0.0;
    for (int k = 0; k < 4; ++k) row += kQ1[i][k] * x[c[k]];
    s += row * y[c[i]];
  }
  return s;
}

// Mass-plus-stiffness operator restricted to interior nodes.
class StepOperator {
 public:
  StepOperator(const SpaceTimeGrid& grid, std::vector<double> cell_d, double dt)
      : grid_(grid), cell_d_(std::move(cell_d)), dt_(dt), mass_(std::pow(grid.h(), grid.dim())),
        interior_(grid.nodes_per_slice()) {
    for (std::size_t i = 0; i < interior_.size(); ++i) interior_[i] = grid.is_boundary_node(i) ? 0 : 1;
    diag_.assign(grid.nodes_per_slice(), 0.0);
    const double kii = grid.dim() == 1 ? 1.0 / grid.h() : kQ1[0][0];
    for (std::size_t c = 0; c < cell_d_.size(); ++c) {
      const auto corners = grid.cell_corners(c);
      for (int k = 0; k < grid.corners_per_cell(); ++k) diag_[corners[k]] += cell_d_[c] * kii;
    }
    for (std::size_t i = 0; i < diag_.size(); ++i) diag_[i] = interior_[i] ? mass_ + dt_ * diag_[i] : 1.0;
  }

  // y = sum_c D_c K_ref x_c over all nodes.
  void stiffness(std::span<const double> x, std::span<double> y) const {
    std::fill(y.begin(), y.end(), 0.0);
    if (grid_.dim() == 1) {
      const double inv_h = 1.0 / grid_.h();
      for (std::size_t c = 0; c < cell_d_.size(); ++c) {
        const double flux = cell_d_[c] * (x[c + 1] - x[c]) * inv_h;
        y[c] -= flux;
        y[c + 1] += flux;
      }
      return;
    }
    for (std::size_t c = 0; c < cell_d_.size(); ++c) {
      const auto k = grid_.cell_corners(c);
      const double v[4] = {x[k[0]], x[k[1]], x[k[2]], x[k[3]]};
      for (int i = 0; i < 4; ++i) {
        const double row = kQ1[i][0] * v[0] + kQ1[i][1] * v[1] + kQ1[i][2] * v[2] + kQ1[i][3] * v[3];
        y[k[i]] += cell_d_[c] * row;
      }
    }
  }

  void apply(std::span<const double> x, std::span<double> y) const {
    stiffness(x, y);
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = interior_[i] ? mass_ * x[i] + dt_ * y[i] : 0.0;
  }

  [[nodiscard]] double mass() const { return mass_; }
  [[nodiscard]] double dt() const { return dt_; }
  [[nodiscard]] bool interior(std::size_t i) const { return interior_[i] != 0; }
  [[nodiscard]] std::span<const double> diag() const { return diag_; }

 private:
  const SpaceTimeGrid& grid_;
  std::vector<double> cell_d_;
  double dt_;
  double mass_;
  std::vector<unsigned char> interior_;
  std::vector<double> diag_;
};

// Preconditioned CG on the interior unknowns; x holds the initial guess with
// zero boundary entries. Returns the iteration count or -1 when cg_max is hit.
int conjugate_gradient(const StepOperator& op, std::span<const double> b, std::span<double> x,
                       double tol, int max_iter) {
  const std::size_t n = b.size();
  const double bnorm = std::sqrt(dot(b, b));
  if (bnorm == 0.0) {
    std::fill(x.begin(), x.end(), 0.0);
    return 0;
  }
  std::vector<double> r(n), z(n), p(n), ap(n);
  op.apply(x, ap);
  for (std::size_t i = 0; i < n; ++i) r[i] = op.interior(i) ? b[i] - ap[i] : 0.0;
  const auto diag = op.diag();
  for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
  p = z;
  double rz = dot(r, z);
  for (int it = 0; it < max_iter; ++it) {
    if (std::sqrt(dot(r, r)) <= tol * bnorm) return it;
    op.apply(p, ap);
    const double pap = dot(p, ap);
    if (!(pap > 0.0)) return it;  // exact solve reached
    const double alpha = rz / pap;
    for (std::size_t i = 0; i < n; ++i) {
      x[i] += alpha * p[i];
      r[i] -= alpha * ap[i];
    }
    for (std::size_t i = 0; i < n; ++i) z[i] = r[i] / diag[i];
    const double rz_new = dot(r, z);
    const double beta = rz_new / rz;
    rz = rz_new;
    for (std::size_t i = 0; i < n; ++i) p[i] = z[i] + beta * p[i];
  }
  return std::sqrt(dot(r, r)) <= tol * bnorm ? max_iter : -1;
}

std::vector<double> lumped_weights(const SpaceTimeGrid& grid) {
  std::vector<double> w(grid.nodes_per_slice(), 0.0);
  const double cell = std::pow(grid.h(), grid.dim());
  const double share = cell / grid.corners_per_cell();
  for (std::size_t c = 0; c < grid.cells_per_slice(); ++c) {
    const auto k = grid.cell_corners(c);
    for (int i = 0; i < grid.corners_per_cell(); ++i) w[k[i]] += share;
  }
  return w;
}

}  // namespace

double DtRule::target_dt(double h, double p) const {
  return kind == Kind::fixed ? value : value * std::pow(h, p);
}

void SolverConfig::validate() const {
  DPLAB_THROW_IF(!(picard_tol > 0.0 && picard_tol < 1.0), ErrorCode::InvalidArgument,
                 "picard_tol must lie in (0,1)");
  DPLAB_THROW_IF(!(cg_tol > 0.0 && cg_tol < 1.0), ErrorCode::InvalidArgument, "cg_tol must lie in (0,1)");
  DPLAB_THROW_IF(picard_max < 1 || cg_max < 1, ErrorCode::InvalidArgument,
                 "picard_max and cg_max must be >= 1");
  DPLAB_THROW_IF(!(dt_rule.value > 0.0), ErrorCode::InvalidArgument, "dt rule value must be positive");
}

std::vector<double> step_implicit(const SpaceTimeGrid& grid, std::span<const double> u_prev,
                                  const FluxModel& flux, const SolverConfig& cfg, double t_next,
                                  double dt, std::span<const double> bc_next, StepTrace* trace) {
  cfg.validate();
  const std::size_t n = grid.nodes_per_slice();
  DPLAB_THROW_IF(u_prev.size() != n || bc_next.size() != n, ErrorCode::InvalidArgument,
                 "slice sizes do not match the grid");
  DPLAB_THROW_IF(!(dt > 0.0), ErrorCode::InvalidArgument, "dt must be positive");
  for (std::size_t i = 0; i < n; ++i)
    DPLAB_THROW_IF(!std::isfinite(u_prev[i]) || !std::isfinite(bc_next[i]), ErrorCode::InvalidArgument,
                   "nonfinite input to step_implicit");

  const auto start = std::chrono::steady_clock::now();
  StepTrace st;
  const double eps2 = cfg.eps_for(grid.h()) * cfg.eps_for(grid.h());

  std::vector<double> cell_a(grid.cells_per_slice());
  for (std::size_t c = 0; c < cell_a.size(); ++c) cell_a[c] = flux.a(grid.cell_center(c), t_next);

  std::vector<double> x_bc(n, 0.0);
  double lo = std::numeric_limits<double>::infinity();
  double hi = -lo;
  for (std::size_t i = 0; i < n; ++i) {
    if (grid.is_boundary_node(i)) {
      x_bc[i] = bc_next[i];
      lo = std::min(lo, bc_next[i]);
      hi = std::max(hi, bc_next[i]);
    } else {
      lo = std::min(lo, u_prev[i]);
      hi = std::max(hi, u_prev[i]);
    }
  }

  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) w[i] = grid.is_boundary_node(i) ? bc_next[i] : u_prev[i];

  const double half_p = 0.5 * (flux.p - 2.0);
  const double half_q = 0.5 * (flux.q - 2.0);
  std::vector<double> cell_d(grid.cells_per_slice());
  std::vector<double> x(n), b(n), kbc(n), result;
  double prev_change = std::numeric_limits<double>::infinity();
  int non_contracting = 0;
  bool damping = false;

  for (int m = 0; m < cfg.picard_max; ++m) {
    for (std::size_t c = 0; c < cell_d.size(); ++c) {
      const Point g = cell_gradient(grid, w, c);
      const double s2 = g[0] * g[0] + g[1] * g[1] + eps2;
      double d = std::pow(s2, half_p);
      if (flux.q_phase) d += cell_a[c] * std::pow(s2, half_q);
      cell_d[c] = flux.scale * d;
    }
    const StepOperator op(grid, cell_d, dt);
    op.stiffness(x_bc, kbc);
    for (std::size_t i = 0; i < n; ++i) {
      b[i] = op.interior(i) ? op.mass() * u_prev[i] - dt * kbc[i] : 0.0;
      x[i] = op.interior(i) ? w[i] : 0.0;
    }
    const int its = conjugate_gradient(op, b, x, cfg.cg_tol, cfg.cg_max);
    if (its < 0) {
      st.cg_iters += cfg.cg_max;
      st.picard_iters = m + 1;
      st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      if (trace) *trace = st;
      throw SolverError(ErrorCode::CgStalled, "CG did not reach cg_tol in cg_max iterations", {{st}}, -1);
    }
    st.cg_iters += its;
    for (std::size_t i = 0; i < n; ++i) x[i] += x_bc[i];

    double diff = 0.0;
    for (std::size_t i = 0; i < n; ++i) diff = std::max(diff, std::abs(x[i] - w[i]));
    const double scale = norm_inf(x);
    const double change = scale > 0.0 ? diff / scale : 0.0;
    st.picard_iters = m + 1;
    st.residual = change;
    if (change < cfg.picard_tol) {
      st.converged = true;
      result = x;
      break;
    }
    if (change >= prev_change && ++non_contracting >= 10) damping = true;
    prev_change = change;
    if (damping) {
      st.damped = true;
      for (std::size_t i = 0; i < n; ++i) w[i] += 0.5 * (x[i] - w[i]);
    } else {
      w = x;
    }
  }
  st.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!st.converged) {
    if (trace) *trace = st;
    throw SolverError(ErrorCode::PicardDiverged,
                      "Picard iteration did not reach picard_tol in picard_max iterations", {{st}}, -1);
  }

  // The exact solution of each linear system obeys these bounds (M-matrix);
  // the projection only removes the CG error that leaves them.
  for (std::size_t i = 0; i < n; ++i) {
    const double clamped = std::clamp(result[i], lo, hi);
    st.max_principle_correction = std::max(st.max_principle_correction, std::abs(clamped - result[i]));
    result[i] = clamped;
  }
  if (trace) *trace = st;
  return result;
}

SolveResult solve_cylinder(std::span<const double> initial, const FluxModel& flux,
                           const SpaceTimeGrid& grid, const SolverConfig& cfg, const BoundaryFn& bc) {
  const std::size_t n = grid.nodes_per_slice();
  DPLAB_THROW_IF(initial.size() != n, ErrorCode::InvalidArgument, "initial slice does not match the grid");
  std::vector<double> values(grid.size());
  std::copy(initial.begin(), initial.end(), values.begin());
  SolveTrace trace;
  std::vector<double> bc_next(n, 0.0);
  for (int j = 1; j < grid.nt(); ++j) {
    const double t = grid.time(j);
    for (std::size_t i = 0; i < n; ++i)
      bc_next[i] = grid.is_boundary_node(i) ? bc({grid.node_x(i), t}) : 0.0;
    const std::span<const double> prev(values.data() + static_cast<std::size_t>(j - 1) * n, n);
    StepTrace st;
    try {
      const auto next = step_implicit(grid, prev, flux, cfg, t, grid.dt(), bc_next, &st);
      std::copy(next.begin(), next.end(), values.begin() + static_cast<std::ptrdiff_t>(j) * static_cast<std::ptrdiff_t>(n));
    } catch (const SolverError& e) {
      st.step = j;
      trace.steps.push_back(st);
      throw SolverError(e.code(), std::string(e.what()) + " at slice " + std::to_string(j), trace, j);
    }
    st.step = j;
    trace.steps.push_back(st);
  }
  return {Field(grid, std::move(values)), std::move(trace)};
}

SpaceTimeGrid make_solver_grid(int dim, int nx, Point x0, double t0, double radius,
                               double time_length, const SolverConfig& cfg, double p) {
  const double h = 2.0 * radius / (nx - 1);
  const double target = cfg.dt_rule.target_dt(h, p);
  DPLAB_THROW_IF(!(target > 0.0), ErrorCode::InvalidArgument, "time step must be positive");
  const double steps = std::ceil(time_length / target - 1e-9);
  return {dim, nx, std::max(2, static_cast<int>(steps) + 1), x0, t0, radius, time_length};
}

double spatial_energy(const SpaceTimeGrid& grid, std::span<const double> slice) {
  const auto w = lumped_weights(grid);
  double e = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) e += w[i] * slice[i] * slice[i];
  return e;
}

double weak_form_residual(const Field& u, const FluxModel& flux, const Field& test) {
  const auto& grid = u.grid();
  DPLAB_THROW_IF(!(test.grid() == grid), ErrorCode::InvalidArgument, "test and solution grids differ");
  const std::size_t n = grid.nodes_per_slice();
  const double tol = 1e-12 * std::max(norm_inf(test.values()), 1e-300);
  for (int j = 0; j < grid.nt(); ++j) {
    const bool cap = j == 0 || j == grid.nt() - 1;
    for (std::size_t i = 0; i < n; ++i) {
      if ((cap || grid.is_boundary_node(i)) && std::abs(test.at(i, j)) > tol)
        throw Error(ErrorCode::TestNotCompactlySupported,
                    "test field is nonzero on the boundary of the grid cover");
    }
  }
  const auto m = lumped_weights(grid);
  double total = 0.0;
  for (int j = 0; j + 1 < grid.nt(); ++j) {
    const auto uj = u.slice(j);
    const auto un = u.slice(j + 1);
    const auto pj = test.slice(j);
    const auto pn = test.slice(j + 1);
    double time_part = 0.0;
    for (std::size_t i = 0; i < n; ++i) time_part -= m[i] * uj[i] * (pn[i] - pj[i]);
    const double t = grid.time(j + 1);
    double flux_part = 0.0;
    for (std::size_t c = 0; c < grid.cells_per_slice(); ++c) {
      const Point g = cell_gradient(grid, un, c);
      const double factor = flux.flux_factor(flux.a(grid.cell_center(c), t), std::hypot(g[0], g[1]));
      if (factor != 0.0) flux_part += factor * cell_form(grid, c, un, pn);
    }
    total += time_part + grid.dt() * flux_part;
  }
  return total;
}

}  // namespace dplab
