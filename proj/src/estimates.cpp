#include "dplab/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "dplab/error.hpp"

namespace dplab {

namespace {

double powr(double x, double e) {
  if (e == 2.0) return x * x;
  if (e == 3.0) return x * x * x;
  return std::pow(x, e);
}

double norm(const Point& g) { return std::sqrt(g[0] * g[0] + g[1] * g[1]); }

// Coefficient values at cell centers for every slice the quadrature touches.
std::vector<double> cell_coefficients(const CylinderQuadrature& quad, const FluxModel& flux) {
  const auto& grid = quad.grid();
  const std::size_t nc = grid.cells_per_slice();
  std::vector<double> a(nc * static_cast<std::size_t>(grid.nt()), 0.0);
  if (!flux.q_phase) return a;
  for (const int j : quad.active_slices()) {
    const double t = grid.time(j);
    for (const std::size_t c : quad.active_cells())
      a[static_cast<std::size_t>(j) * nc + c] = flux.a(grid.cell_center(c), t);
  }
  return a;
}

double log_or_neg_inf(double x) {
  return x > 0.0 ? std::log(x) : -std::numeric_limits<double>::infinity();
}

}  // namespace

void EstimateReport::finish() {
  empty_level_set = lhs == 0.0 && rhs_unconstant == 0.0;
  if (rhs_unconstant > 0.0) {
    empirical_c = lhs / rhs_unconstant;
  } else {
    empirical_c = lhs == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  }
}

EstimateReport caccioppoli_sides(const Field& u, const FluxModel& flux, double k, Sign sign,
                                 const Cylinder& outer, const CutoffPair& cut) {
  const auto& grid = u.grid();
  const CylinderQuadrature quad(grid, outer);
  const Field w = truncate(u, k, sign);
  const std::size_t np = grid.nodes_per_slice();
  const std::size_t nc = grid.cells_per_slice();
  const double q = flux.q;

  std::vector<double> eta(np), eta_q(np);
  for (std::size_t i = 0; i < np; ++i) {
    eta[i] = cut.eta(grid.node_x(i), grid.dim());
    eta_q[i] = std::pow(eta[i], q);
  }
  std::vector<double> eta_c(nc), grad_eta(nc);
  for (std::size_t c = 0; c < nc; ++c) {
    eta_c[c] = cell_average(grid, eta, c);
    grad_eta[c] = norm(cell_gradient(grid, eta, c));
  }
  std::vector<double> zeta(static_cast<std::size_t>(grid.nt())), dzeta(zeta.size());
  for (int j = 0; j < grid.nt(); ++j) {
    zeta[static_cast<std::size_t>(j)] = cut.zeta(grid.time(j));
    dzeta[static_cast<std::size_t>(j)] = cut.dzeta(grid.time(j));
  }
  const auto a = cell_coefficients(quad, flux);
  const auto at = [&](std::size_t c, int j) { return a[static_cast<std::size_t>(j) * nc + c]; };
  const auto zj = [&](int j) { return zeta[static_cast<std::size_t>(j)]; };

  const double sup_term = sup_spatial_mean(quad, [&](std::size_t i, int j) {
                            const double v = w.at(i, j);
                            return v * v * eta_q[i] * zj(j) * zj(j);
                          }) / outer.length;
  const double energy_term = integrate_cells(quad, [&](std::size_t c, int j) {
                               const double kappa = eta_c[c] * norm(cell_gradient(grid, w.slice(j), c));
                               return flux.h(at(c, j), kappa) * zj(j) * zj(j);
                             }) / quad.measure();
  const double cutoff_term = integrate_cells(quad, [&](std::size_t c, int j) {
                               const double kappa = cell_average(grid, w.slice(j), c) * grad_eta[c];
                               return flux.h(at(c, j), kappa) * zj(j) * zj(j);
                             }) / quad.measure();
  const double time_term = integrate_nodes(quad, [&](std::size_t i, int j) {
                             const double v = w.at(i, j);
                             return v * v * eta_q[i] * zj(j) * dzeta[static_cast<std::size_t>(j)];
                           }) / quad.measure();

  EstimateReport r;
  r.name = "caccioppoli";
  r.lhs = sup_term + energy_term;
  r.rhs_unconstant = cutoff_term + time_term;
  r.grid = GridDescriptor::of(grid);
  r.terms = {{"sup_term", sup_term},
             {"energy_term", energy_term},
             {"cutoff_term", cutoff_term},
             {"time_term", time_term},
             {"k", k},
             {"sign", sign == Sign::plus ? 1.0 : -1.0}};
  r.finish();
  return r;
}

EstimateReport embedding_sides(const Field& f, const Cylinder& cylinder, int n, double p, double q) {
  const auto& grid = f.grid();
  DPLAB_THROW_IF(grid.dim() != n, ErrorCode::InvalidArgument,
                 "embedding needs a grid of spatial dimension n");
  const double theta = compute_theta(n, p, q);
  const CylinderQuadrature quad(grid, cylinder);
  const double inv_r = 1.0 / cylinder.radius;

  const double lhs = integrate_nodes(quad, [&](std::size_t i, int j) {
                       return powr(std::abs(f.at(i, j)) * inv_r, q);
                     }) / quad.measure();
  const double grad_part = integrate_cells(quad, [&](std::size_t c, int j) {
    return powr(norm(cell_gradient(grid, f.slice(j), c)), p);
  });
  const double zero_part = integrate_nodes(quad, [&](std::size_t i, int j) {
    return powr(std::abs(f.at(i, j)) * inv_r, p);
  });
  const double energy = (grad_part + zero_part) / quad.measure();
  const double sup_l2 = sup_spatial_mean(quad, [&](std::size_t i, int j) {
    const double v = f.at(i, j) * inv_r;
    return v * v;
  });
  double rhs = 0.0;
  if (energy > 0.0 && sup_l2 > 0.0)
    rhs = std::exp(q * theta / p * std::log(energy) + q * (1.0 - theta) / 2.0 * std::log(sup_l2));

  EstimateReport r;
  r.name = "embedding";
  r.lhs = lhs;
  r.rhs_unconstant = rhs;
  r.grid = GridDescriptor::of(grid);
  r.terms = {{"energy", energy}, {"sup_l2", sup_l2}, {"theta", theta}, {"q", q}};
  r.finish();
  return r;
}

EstimateReport embedding_sides(const Field& f, const Cylinder& cylinder, const ExponentSet& exps) {
  auto r = embedding_sides(f, cylinder, exps.n, exps.p, exps.q);
  r.params = exps;
  return r;
}

CylinderSchedule CylinderSchedule::make(Point x0, double t0, double rho, double sigma, double k,
                                        double tilde_p, int depth) {
  DPLAB_THROW_IF(!(sigma > 0.0 && sigma < 1.0), ErrorCode::InvalidArgument, "sigma must be in (0,1)");
  DPLAB_THROW_IF(!(rho > 0.0 && rho <= 1.0), ErrorCode::InvalidArgument, "rho must be in (0,1]");
  DPLAB_THROW_IF(depth < 2, ErrorCode::InvalidArgument, "depth must be >= 2");
  DPLAB_THROW_IF(k == 0.0 || !std::isfinite(k), ErrorCode::LevelSignMismatch, "level k must be nonzero");
  CylinderSchedule s;
  s.x0 = x0;
  s.t0 = t0;
  s.sigma = sigma;
  s.rho = rho;
  s.k = k;
  s.depth = depth;
  const double ell = std::pow(rho, tilde_p / 2.0);
  std::vector<double> ells;
  for (int n = 0; n <= depth + 1; ++n) {
    const double f = sigma + (1.0 - sigma) * std::ldexp(1.0, -n);
    s.radii.push_back(f * rho);
    ells.push_back(f * ell);
    s.time_lengths.push_back(ells.back() * ells.back());
    s.levels.push_back(k - std::ldexp(k, -n));
  }
  for (int n = 0; n <= depth; ++n) {
    const auto un = static_cast<std::size_t>(n);
    s.half_radii.push_back(0.5 * (s.radii[un] + s.radii[un + 1]));
    const double half_ell = 0.5 * (ells[un] + ells[un + 1]);
    s.half_time_lengths.push_back(half_ell * half_ell);
  }
  return s;
}

Cylinder CylinderSchedule::cylinder(int n) const {
  const auto un = static_cast<std::size_t>(n);
  return {x0, t0, radii.at(un), time_lengths.at(un)};
}

Cylinder CylinderSchedule::half_cylinder(int n) const {
  const auto un = static_cast<std::size_t>(n);
  return {x0, t0, half_radii.at(un), half_time_lengths.at(un)};
}

Cylinder CylinderSchedule::limit_cylinder() const {
  return {x0, t0, sigma * rho, sigma * sigma * time_lengths.front()};
}

double DeGiorgiTrace::max_recursion_constant() const {
  double m = 0.0;
  for (const double c : recursion_constants) m = std::max(m, c);
  return m;
}

bool DeGiorgiTrace::all_decay() const {
  return std::all_of(decay_flags.begin(), decay_flags.end(), [](bool b) { return b; });
}

namespace {

double level_energy(const Field& u, const CylinderQuadrature& quad, double level, Sign sign,
                    double rho, double tilde_p) {
  const double inv_rho = 1.0 / rho;
  return integrate_nodes(quad, [&](std::size_t i, int j) {
           return powr(truncation(u.at(i, j), level, sign) * inv_rho, tilde_p);
         }) / quad.measure();
}

double level_set_measure(const Field& u, const CylinderQuadrature& quad, double level, Sign sign) {
  return integrate_nodes(quad, [&](std::size_t i, int j) {
    const double v = u.at(i, j);
    return (sign == Sign::plus ? v > level : v < level) ? 1.0 : 0.0;
  });
}

}  // namespace

double initial_energy(const Field& u, const CylinderSchedule& sched, const ExponentSet& exps) {
  const CylinderQuadrature quad(u.grid(), sched.cylinder(0));
  return level_energy(u, quad, 0.0, sched.sign(), sched.rho, exps.tilde_p);
}

DeGiorgiTrace degiorgi_sequence(const Field& u, const CylinderSchedule& sched, const ExponentSet& exps) {
  DPLAB_THROW_IF(sched.k == 0.0, ErrorCode::LevelSignMismatch, "level k must be nonzero");
  DPLAB_THROW_IF(sched.levels.empty() || (sched.k > 0.0) != (sched.levels.back() > 0.0),
                 ErrorCode::LevelSignMismatch, "levels inconsistent with the sign of k");
  DPLAB_THROW_IF(sched.depth < 2, ErrorCode::InvalidArgument, "depth must be >= 2");
  DeGiorgiTrace tr;
  tr.sign = sched.sign();
  tr.k = sched.k;
  tr.lambda = exps.lambda;
  const double tp = exps.tilde_p;
  const double vt = exps.vartheta;

  for (int n = 0; n <= sched.depth; ++n) {
    if (tr.terminated_at >= 0) {
      tr.y.push_back(0.0);
      tr.levelset_measures.push_back(0.0);
      continue;
    }
    const CylinderQuadrature quad(u.grid(), sched.cylinder(n));
    const double level = sched.levels[static_cast<std::size_t>(n)];
    const double y = level_energy(u, quad, level, tr.sign, sched.rho, tp);
    tr.y.push_back(y);
    tr.levelset_measures.push_back(level_set_measure(u, quad, level, tr.sign));
    if (y == 0.0) tr.terminated_at = n;
  }

  const double log_level_factor =
      (exps.q - tp) * std::log(std::abs(sched.k)) - exps.q * std::log1p(-sched.sigma);
  for (int n = 0; n < sched.depth; ++n) {
    const double yn = tr.y[static_cast<std::size_t>(n)];
    const double yn1 = tr.y[static_cast<std::size_t>(n) + 1];
    if (yn == 0.0 || yn1 == 0.0) {
      tr.recursion_constants.push_back(0.0);
      continue;
    }
    const double log_c = std::log(yn1) - (1.0 + vt) * (tp * n * std::numbers::ln2 + log_level_factor) -
                         (1.0 + vt) * std::log(yn);
    tr.recursion_constants.push_back(std::exp(log_c));
  }

  const double log_y0 = log_or_neg_inf(tr.y.front());
  for (int n = 0; n <= sched.depth; ++n) {
    const double yn = tr.y[static_cast<std::size_t>(n)];
    tr.decay_flags.push_back(yn == 0.0 || std::log(yn) <= log_y0 - n * exps.log_lambda);
  }
  return tr;
}

std::pair<double, double> levelset_chebyshev(const Field& u, const CylinderSchedule& sched, int n, double s) {
  DPLAB_THROW_IF(n < 0 || n >= sched.depth + 1, ErrorCode::InvalidArgument, "n must be below the depth");
  DPLAB_THROW_IF(!(s > 0.0), ErrorCode::InvalidArgument, "s must be positive");
  const Sign sign = sched.sign();
  const auto un = static_cast<std::size_t>(n);
  const CylinderQuadrature outer(u.grid(), sched.cylinder(n));
  const CylinderQuadrature inner(u.grid(), sched.cylinder(n + 1));
  const double level = sched.levels[un];
  const double first = integrate_nodes(outer, [&](std::size_t i, int j) {
    return powr(truncation(u.at(i, j), level, sign), s);
  });
  const double measure = level_set_measure(u, inner, sched.levels[un + 1], sign);
  const double second = std::pow(std::abs(sched.k), s) * measure * std::exp2(-(n + 1.0) * s);
  return {first, second};
}

EstimateReport supbound_sides(const Field& u, Point x0, double t0, double rho, double sigma,
                              const ExponentSet& exps, VarthetaConvention convention) {
  const auto& grid = u.grid();
  DPLAB_THROW_IF(grid.dim() != exps.n, ErrorCode::InvalidArgument,
                 "sup-bound needs a grid of spatial dimension n");
  DPLAB_THROW_IF(!(sigma > 0.0 && sigma < 1.0), ErrorCode::InvalidArgument, "sigma must be in (0,1)");
  DPLAB_THROW_IF(!(rho > 0.0), ErrorCode::InvalidArgument, "rho must be positive");
  const double tp = exps.tilde_p;
  const Cylinder outer{x0, t0, rho, std::pow(rho, tp)};
  const Cylinder inner{x0, t0, sigma * rho, sigma * sigma * std::pow(rho, tp)};
  const CylinderQuadrature quad(grid, outer);
  const CylinderQuadrature inner_quad(grid, inner);

  double lhs = 0.0;
  bool any = false;
  for (const int j : inner_quad.slices_inside()) {
    for (const std::size_t i : inner_quad.nodes_inside()) {
      lhs = std::max(lhs, std::abs(u.at(i, j)));
      any = true;
    }
  }
  DPLAB_THROW_IF(!any, ErrorCode::EmptyRegion, "no grid node inside the inner cylinder");

  const double inv_rho = 1.0 / rho;
  const double grad_part = integrate_cells(quad, [&](std::size_t c, int j) {
    return powr(norm(cell_gradient(grid, u.slice(j), c)), exps.p);
  });
  const double zero_part = integrate_nodes(quad, [&](std::size_t i, int j) {
    return powr(std::abs(u.at(i, j)) * inv_rho, exps.p);
  });
  const double e1_base = (grad_part + zero_part) / quad.measure();
  const double e2_base = sup_spatial_mean(quad, [&](std::size_t i, int j) {
    const double v = u.at(i, j) * inv_rho;
    return v * v;
  });
  const double vt = convention == VarthetaConvention::proof ? exps.vartheta : exps.vartheta_theorem;
  const double chi = energy_exponent(exps, vt);
  const double e1 = chi * tp * exps.theta / exps.p;
  const double e2 = chi * tp * (1.0 - exps.theta) / 2.0;
  const double log_sigma_factor = blowup_exponent(exps) * std::log1p(-sigma);
  double sigma_free = 0.0;
  if (e1_base > 0.0 && e2_base > 0.0) sigma_free = std::exp(e1 * std::log(e1_base) + e2 * std::log(e2_base));

  EstimateReport r;
  r.name = convention == VarthetaConvention::proof ? "supbound_proof" : "supbound_theorem";
  r.lhs = lhs;
  r.rhs_unconstant = sigma_free > 0.0 ? std::exp(log_sigma_factor + std::log(sigma_free)) : 0.0;
  r.grid = GridDescriptor::of(grid);
  r.params = exps;
  r.terms = {{"E1", e1_base},
             {"E2", e2_base},
             {"e1", e1},
             {"e2", e2},
             {"chi", chi},
             {"vartheta", vt},
             {"sigma", sigma},
             {"rho", rho},
             {"sigma_factor", std::exp(log_sigma_factor)},
             {"sigma_free_rhs", sigma_free}};
  r.finish();
  return r;
}

FastConvergenceResult replay_fast_convergence(const FastConvergenceInput& in) {
  DPLAB_THROW_IF(!(in.y0 >= 0.0) || !(in.c >= 0.0) || !(in.b > 1.0) || !(in.vartheta > 0.0) ||
                     !(in.level_factor > 0.0) || in.depth < 1,
                 ErrorCode::InvalidArgument, "invalid recursion parameters");
  FastConvergenceResult out;
  const double vt = in.vartheta;
  const double log_b = std::log(in.b);
  const double log_lambda = (1.0 + vt) / vt * log_b;
  out.lambda = std::exp(log_lambda);
  const double log_k = std::log(in.level_factor);

  if (in.y0 == 0.0 || in.c == 0.0) {
    out.smallness = 0.0;
  } else {
    out.smallness = std::exp(std::log(in.c) + log_lambda + (1.0 + vt) * log_k + vt * std::log(in.y0));
  }

  double log_y = log_or_neg_inf(in.y0);
  const double log_y0 = log_y;
  for (int n = 0; n <= in.depth; ++n) {
    if (n > 0) {
      // Y_n = c (b^{n-1} K)^{1+vt} Y_{n-1}^{1+vt}
      log_y = in.c == 0.0 ? -std::numeric_limits<double>::infinity()
                          : std::log(in.c) + (1.0 + vt) * ((n - 1) * log_b + log_k) + (1.0 + vt) * log_y;
    }
    const double log_bound = log_y0 - n * log_lambda;
    out.y.push_back(std::exp(log_y));
    out.bound.push_back(std::exp(log_bound));
    const bool zero = std::isinf(log_y) && log_y < 0.0;
    const bool ok = zero || log_y <= log_bound + 1e-12 * std::max(1.0, std::abs(log_bound));
    out.flags.push_back(ok);
    if (!ok && out.first_violation < 0) out.first_violation = n;
    if (!zero) out.max_equality_margin = std::max(out.max_equality_margin, std::abs(std::expm1(log_y - log_bound)));
  }
  return out;
}

FastConvergenceResult fast_convergence_check(const FastConvergenceInput& in) {
  auto out = replay_fast_convergence(in);
  if (out.first_violation >= 0) {
    throw Error(ErrorCode::SmallnessViolated,
                "smallness product " + std::to_string(out.smallness) + " > 1; decay bound breaks at n = " +
                    std::to_string(out.first_violation));
  }
  return out;
}

double smallness_product(const ExponentSet& exps, double sigma, double k, double y0, double c) {
  if (c == 0.0 || y0 == 0.0) return 0.0;
  const double vt = exps.vartheta;
  const double log_level_factor =
      (exps.q - exps.tilde_p) * std::log(std::abs(k)) - exps.q * std::log1p(-sigma);
  return std::exp(std::log(c) + exps.log_lambda + (1.0 + vt) * log_level_factor + vt * std::log(y0));
}

LevelCalibration calibrate_level(const Field& u, Point x0, double t0, double rho, double sigma,
                                 const ExponentSet& exps, Sign sign, int depth, double c_star_start) {
  DPLAB_THROW_IF(!(c_star_start > 0.0), ErrorCode::InvalidArgument, "c_star_start must be positive");
  const double s = sign == Sign::plus ? 1.0 : -1.0;
  LevelCalibration cal;
  cal.c_star = c_star_start;
  const auto probe = CylinderSchedule::make(x0, t0, rho, sigma, s, exps.tilde_p, depth);
  cal.y0 = initial_energy(u, probe, exps);
  if (cal.y0 == 0.0) {
    // Every level works; the iteration is identically zero.
    cal.k = s;
    cal.trace = degiorgi_sequence(u, probe, exps);
    return cal;
  }
  for (cal.doublings = 0; cal.doublings < 400; ++cal.doublings) {
    cal.k = s * level_magnitude(exps, sigma, cal.y0, cal.c_star);
    const auto sched = CylinderSchedule::make(x0, t0, rho, sigma, cal.k, exps.tilde_p, depth);
    cal.trace = degiorgi_sequence(u, sched, exps);
    cal.smallness = smallness_product(exps, sigma, cal.k, cal.y0, cal.trace.max_recursion_constant());
    if (cal.smallness <= 1.0) return cal;
    cal.c_star *= 2.0;
  }
  throw Error(ErrorCode::SmallnessViolated, "no c_star up to 2^400 times the start satisfies the smallness condition");
}

}  // namespace dplab
