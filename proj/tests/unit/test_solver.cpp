#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "dplab/error.hpp"
#include "dplab/solver.hpp"

using namespace dplab;

namespace {

constexpr double kPi = std::numbers::pi;

BoundaryFn constant_bc(double c) {
  return [c](const SpaceTimePoint&) { return c; };
}

// Heat problem on (0,1): u0 = sin(pi x), zero data, dt = h^2.
double heat_error(int nx) {
  SolverConfig cfg;
  cfg.dt_rule = {DtRule::Kind::intrinsic, 1.0};
  auto grid = make_solver_grid(1, nx, {0.5, 0.0}, 0.1, 0.5, 0.1, cfg, 2.0);
  std::vector<double> init(grid.nodes_per_slice());
  for (std::size_t i = 0; i < init.size(); ++i) init[i] = std::sin(kPi * grid.node_x(i)[0]);
  auto res = solve_cylinder(init, FluxModel::p_only(2.0), grid, cfg, constant_bc(0.0));
  double err = 0.0;
  for (int j = 0; j < grid.nt(); ++j) {
    const double decay = std::exp(-kPi * kPi * (grid.time(j) - grid.time(0)));
    for (std::size_t i = 0; i < grid.nodes_per_slice(); ++i)
      err = std::max(err, std::abs(res.u.at(i, j) - decay * std::sin(kPi * grid.node_x(i)[0])));
  }
  return err;
}

std::vector<double> bump(const SpaceTimeGrid& grid, double amp) {
  std::vector<double> v(grid.nodes_per_slice());
  for (std::size_t i = 0; i < v.size(); ++i) {
    const auto x = grid.node_x(i);
    double w = amp;
    for (int a = 0; a < grid.dim(); ++a) w *= std::cos(0.5 * kPi * (x[a] - grid.x0()[a]) / grid.radius());
    v[i] = w * (1.0 + 0.5 * x[0]);
  }
  return v;
}

Field test_field(const SpaceTimeGrid& grid) {
  const double tb = grid.time(0), te = grid.time(grid.nt() - 1);
  return Field::from_function(grid, [&](const SpaceTimePoint& z) {
    double w = std::sin(kPi * (z.t - tb) / (te - tb));
    for (int a = 0; a < grid.dim(); ++a) w *= std::cos(0.5 * kPi * (z.x[a] - grid.x0()[a]) / grid.radius());
    return w;
  });
}

// Zero the entries the residual requires to vanish.
Field clip_support(const Field& f) {
  const auto& g = f.grid();
  std::vector<double> v(f.values().begin(), f.values().end());
  for (int j = 0; j < g.nt(); ++j)
    for (std::size_t i = 0; i < g.nodes_per_slice(); ++i)
      if (j == 0 || j == g.nt() - 1 || g.is_boundary_node(i)) v[j * g.nodes_per_slice() + i] = 0.0;
  return Field(g, std::move(v));
}

}  // namespace

TEST(DtRule, Targets) {
  DtRule fixed{DtRule::Kind::fixed, 0.01};
  EXPECT_EQ(fixed.target_dt(0.5, 3.0), 0.01);
  DtRule intrinsic{DtRule::Kind::intrinsic, 2.0};
  EXPECT_DOUBLE_EQ(intrinsic.target_dt(0.5, 3.0), 0.25);
}

TEST(SolverConfig, Validation) {
  SolverConfig ok;
  EXPECT_NO_THROW(ok.validate());
  SolverConfig bad = ok;
  bad.picard_tol = 1.5;
  EXPECT_THROW(bad.validate(), Error);
  bad = ok;
  bad.cg_max = 0;
  EXPECT_THROW(bad.validate(), Error);
  bad = ok;
  bad.cg_tol = 0.0;
  EXPECT_THROW(bad.validate(), Error);
}

TEST(SolverGrid, StepNotLargerThanTarget) {
  SolverConfig cfg;
  cfg.dt_rule = {DtRule::Kind::intrinsic, 1.0};
  auto g = make_solver_grid(1, 11, {0.5, 0.0}, 0.1, 0.5, 0.1, cfg, 2.0);
  EXPECT_DOUBLE_EQ(g.h(), 0.1);
  EXPECT_EQ(g.nt(), 11);
  EXPECT_LE(g.dt(), 0.01 * (1.0 + 1e-12));
  auto g2 = make_solver_grid(2, 9, {0.0, 0.0}, 0.3, 1.0, 0.3, cfg, 2.0);
  EXPECT_LE(g2.dt(), g2.h() * g2.h() * (1.0 + 1e-12));
  EXPECT_DOUBLE_EQ(g2.time(g2.nt() - 1), 0.3);
}

TEST(StepImplicit, ConstantsStationary) {
  SpaceTimeGrid g(2, 9, 2, {0.0, 0.0}, 0.1, 1.0, 0.1);
  std::vector<double> c(g.nodes_per_slice(), 0.7);
  FluxModel f(2.0, 2.5, CoefficientFn::checkerboard(2.0));
  SolverConfig cfg;
  auto next = step_implicit(g, c, f, cfg, 0.1, 0.1, c);
  for (double v : next) EXPECT_NEAR(v, 0.7, 1e-13);
}

TEST(StepImplicit, AffineStationary) {
  SpaceTimeGrid g(2, 9, 2, {0.0, 0.0}, 0.1, 1.0, 0.1);
  std::vector<double> aff(g.nodes_per_slice());
  for (std::size_t i = 0; i < aff.size(); ++i) {
    const auto x = g.node_x(i);
    aff[i] = 0.3 * x[0] - 0.2 * x[1] + 1.0;
  }
  FluxModel f(2.0, 2.5, CoefficientFn::constant(1.0));
  SolverConfig cfg;
  StepTrace tr;
  auto next = step_implicit(g, aff, f, cfg, 0.1, 0.1, aff, &tr);
  for (std::size_t i = 0; i < aff.size(); ++i) EXPECT_NEAR(next[i], aff[i], 1e-9);
  EXPECT_TRUE(tr.converged);
}

TEST(Solve, ZeroDataGivesZero) {
  SpaceTimeGrid g(2, 9, 5, {0.0, 0.0}, 0.1, 1.0, 0.1);
  std::vector<double> zero(g.nodes_per_slice(), 0.0);
  auto res = solve_cylinder(zero, FluxModel(2.0, 2.5, CoefficientFn::constant(1.0)), g, SolverConfig{},
                            constant_bc(0.0));
  for (double v : res.u.values()) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(res.trace.steps.size(), 4u);
}

TEST(Solve, HeatOracleSecondOrder) {
  const double e1 = heat_error(11), e2 = heat_error(21), e3 = heat_error(41);
  EXPECT_LT(e1, 3e-2);
  EXPECT_GT(std::log2(e1 / e2), 1.8);
  EXPECT_GT(std::log2(e2 / e3), 1.8);
}

TEST(Solve, MaxPrincipleAndEnergy) {
  const std::vector<CoefficientFn> coeffs{CoefficientFn::constant(1.0), CoefficientFn::smooth_bump(1.0),
                                          CoefficientFn::checkerboard(2.0), CoefficientFn::constant(0.0)};
  for (double p : {2.0, 3.0}) {
    for (const auto& c : coeffs) {
      SolverConfig cfg;
      cfg.dt_rule = {DtRule::Kind::intrinsic, 1.0};
      auto g = make_solver_grid(2, 17, {0.0, 0.0}, 0.1, 1.0, 0.1, cfg, p);
      auto init = bump(g, 1.5);
      auto res = solve_cylinder(init, FluxModel(p, p + 0.4, c), g, cfg, constant_bc(0.0));
      const double lo = std::min(0.0, *std::min_element(init.begin(), init.end()));
      const double hi = std::max(0.0, *std::max_element(init.begin(), init.end()));
      for (double v : res.u.values()) {
        EXPECT_GE(v, lo);
        EXPECT_LE(v, hi);
      }
      double prev = spatial_energy(g, res.u.slice(0));
      for (int j = 1; j < g.nt(); ++j) {
        const double e = spatial_energy(g, res.u.slice(j));
        EXPECT_LE(e, prev * (1.0 + 1e-12));
        prev = e;
      }
    }
  }
}

TEST(Solve, Comparison) {
  SolverConfig cfg;
  auto g = make_solver_grid(2, 17, {0.0, 0.0}, 0.1, 1.0, 0.1, cfg, 2.0);
  FluxModel f(2.0, 2.5, CoefficientFn::smooth_bump(1.0));
  auto lo = solve_cylinder(bump(g, 0.5), f, g, cfg, constant_bc(0.0));
  auto hi = solve_cylinder(bump(g, 1.0), f, g, cfg, constant_bc(0.1));
  for (std::size_t i = 0; i < lo.u.values().size(); ++i) EXPECT_LE(lo.u.values()[i], hi.u.values()[i] + 1e-12);
}

TEST(Solve, Deterministic) {
  SolverConfig cfg;
  auto g = make_solver_grid(2, 17, {0.0, 0.0}, 0.1, 1.0, 0.1, cfg, 2.0);
  FluxModel f(2.0, 2.5, CoefficientFn::checkerboard(2.0));
  auto a = solve_cylinder(bump(g, 1.0), f, g, cfg, constant_bc(0.0));
  auto b = solve_cylinder(bump(g, 1.0), f, g, cfg, constant_bc(0.0));
  for (std::size_t i = 0; i < a.u.values().size(); ++i) ASSERT_EQ(a.u.values()[i], b.u.values()[i]);
}

TEST(WeakResidual, ZeroSolution) {
  SpaceTimeGrid g(2, 9, 5, {0.0, 0.0}, 0.1, 1.0, 0.1);
  auto u = Field::constant(g, 0.0);
  EXPECT_EQ(weak_form_residual(u, FluxModel(2.0, 2.5, CoefficientFn::constant(1.0)), clip_support(test_field(g))), 0.0);
}

TEST(WeakResidual, RejectsUnsupportedTest) {
  SpaceTimeGrid g(2, 9, 5, {0.0, 0.0}, 0.1, 1.0, 0.1);
  auto u = Field::constant(g, 0.0);
  try {
    (void)weak_form_residual(u, FluxModel(2.0, 2.5, CoefficientFn::constant(1.0)), Field::constant(g, 1.0));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::TestNotCompactlySupported);
  }
}

TEST(WeakResidual, NonSolutionIsOrderOne) {
  // u = t with a space-time bump test: the gradient term vanishes, leaving
  // -int u phi_t = int phi (integration by parts in time).
  SpaceTimeGrid g(2, 33, 33, {0.0, 0.0}, 1.0, 1.0, 1.0);
  auto u = Field::from_function(g, [](const SpaceTimePoint& z) { return z.t; });
  auto phi = clip_support(test_field(g));
  const double r = weak_form_residual(u, FluxModel(2.0, 2.5, CoefficientFn::constant(1.0)), phi);
  // int sin(pi t) dt over (0,1) times (int cos(pi x/2) dx)^2 over (-1,1)
  const double oracle = (2.0 / kPi) * std::pow(4.0 / kPi, 2);
  EXPECT_NEAR(r, oracle, 0.02 * oracle);
}

TEST(WeakResidual, DecreasesUnderRefinement) {
  std::vector<double> res;
  for (int nx : {9, 17, 33}) {
    SolverConfig cfg;
    cfg.dt_rule = {DtRule::Kind::intrinsic, 1.0};
    auto g = make_solver_grid(2, nx, {0.0, 0.0}, 0.1, 1.0, 0.1, cfg, 2.0);
    FluxModel f(2.0, 2.5, CoefficientFn::constant(1.0));
    auto sol = solve_cylinder(bump(g, 1.0), f, g, cfg, constant_bc(0.0));
    res.push_back(std::abs(weak_form_residual(sol.u, f, clip_support(test_field(g)))));
  }
  EXPECT_LT(res[1], res[0]);
  EXPECT_LT(res[2], res[1]);
}
