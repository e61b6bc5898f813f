#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "dplab/doublephase.hpp"
#include "dplab/error.hpp"
#include "dplab/estimates.hpp"
#include "dplab/solver.hpp"

using namespace dplab;

namespace {

SpaceTimePoint origin() { return {{0.0, 0.0}, 0.0}; }

std::vector<std::pair<SpaceTimePoint, std::vector<double>>> random_samples(int count, std::uint64_t seed) {
  std::mt19937_64 g(seed);
  std::uniform_real_distribution<double> u(-2.0, 2.0);
  std::vector<std::pair<SpaceTimePoint, std::vector<double>>> out;
  for (int i = 0; i < count; ++i)
    out.push_back({{{u(g), u(g)}, 0.5 * u(g)}, {u(g), u(g)}});
  return out;
}

}  // namespace

TEST(HIntegrand, Examples) {
  FluxModel f(2.0, 3.0, CoefficientFn::constant(0.5));
  EXPECT_DOUBLE_EQ(h_integrand(f, origin(), 2.0), 8.0);
  EXPECT_EQ(h_integrand(f, origin(), 0.0), 0.0);
  FluxModel g(2.5, 3.0, CoefficientFn::constant(0.0));
  EXPECT_EQ(h_integrand(g, origin(), 1.7), std::pow(1.7, 2.5));
}

TEST(HIntegrand, NegativeKappa) {
  FluxModel f(2.0, 3.0, CoefficientFn::constant(0.5));
  try {
    (void)h_integrand(f, origin(), -1e-3);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NegativeArgument);
  }
}

TEST(HIntegrand, StrictlyIncreasing) {
  FluxModel f(2.0, 2.5, CoefficientFn::checkerboard(2.0));
  SpaceTimePoint z{{0.1, 0.3}, 0.05};
  double prev = 0.0;
  for (int i = 1; i <= 200; ++i) {
    const double v = h_integrand(f, z, 0.01 * i);
    EXPECT_GT(v, prev);
    prev = v;
  }
}

TEST(ModelFlux, Examples) {
  FluxModel f(3.0, 4.0, CoefficientFn::constant(1.0));
  const std::vector<double> xi{2.0, 0.0};
  auto v = model_flux(f, origin(), xi);
  // brute force: |xi|^{p-2} xi + a |xi|^{q-2} xi componentwise
  const double s = std::hypot(xi[0], xi[1]);
  EXPECT_NEAR(v[0], std::pow(s, 1.0) * 2.0 + std::pow(s, 2.0) * 2.0, 1e-13);
  EXPECT_NEAR(v[0], 12.0, 1e-13);
  EXPECT_EQ(v[1], 0.0);

  const std::vector<double> zero{0.0, 0.0};
  auto w = model_flux(f, origin(), zero);
  EXPECT_EQ(w[0], 0.0);
  EXPECT_EQ(w[1], 0.0);

  FluxModel lin(2.0, 2.5, CoefficientFn::constant(0.0));
  const std::vector<double> e{0.3, -1.2};
  auto l = model_flux(lin, origin(), e);
  EXPECT_DOUBLE_EQ(l[0], 0.3);
  EXPECT_DOUBLE_EQ(l[1], -1.2);
}

TEST(ModelFlux, TinyGradientIsZero) {
  FluxModel f(2.0, 2.5, CoefficientFn::constant(1.0));
  const std::vector<double> xi{1e-160, 0.0};
  EXPECT_EQ(model_flux(f, origin(), xi)[0], 0.0);
}

TEST(ModelFlux, RotationEquivariant) {
  FluxModel f(2.3, 2.9, CoefficientFn::constant(0.7));
  std::mt19937_64 g(3);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int i = 0; i < 50; ++i) {
    const std::vector<double> xi{u(g), u(g)};
    const double a = std::numbers::pi * u(g);
    const std::vector<double> rxi{std::cos(a) * xi[0] - std::sin(a) * xi[1],
                                  std::sin(a) * xi[0] + std::cos(a) * xi[1]};
    auto v = model_flux(f, origin(), xi);
    auto rv = model_flux(f, origin(), rxi);
    EXPECT_NEAR(rv[0], std::cos(a) * v[0] - std::sin(a) * v[1], 1e-13);
    EXPECT_NEAR(rv[1], std::sin(a) * v[0] + std::cos(a) * v[1], 1e-13);
  }
}

TEST(Structure, ModelFluxConstants) {
  FluxModel f(2.0, 2.5, CoefficientFn::checkerboard(2.0));
  auto samples = random_samples(500, 11);
  auto sc = check_structure(f, samples);
  EXPECT_NEAR(sc.nu, 1.0, 1e-12);
  EXPECT_LE(sc.ell_bound, 1.0 + 1e-12);

  FluxModel scaled(2.0, 2.5, CoefficientFn::checkerboard(2.0), 2.0);
  auto s2 = check_structure(scaled, samples);
  EXPECT_NEAR(s2.nu, 2.0, 1e-12);
  EXPECT_NEAR(s2.ell_bound, 2.0, 1e-12);
}

TEST(Structure, ExternalSamples) {
  std::vector<FluxSample> samples;
  samples.push_back({0.5, {1.0, 0.0}, {3.0, 0.0}});   // A.xi = 3, H = 1.5
  samples.push_back({0.0, {0.0, 2.0}, {0.0, 4.0}});   // A.xi = 8, H = 4
  auto sc = check_structure(2.0, 3.0, samples);
  EXPECT_DOUBLE_EQ(sc.nu, 2.0);
  EXPECT_DOUBLE_EQ(sc.ell_bound, 2.0);
}

TEST(Structure, EmptySamples) {
  FluxModel f(2.0, 2.5, CoefficientFn::constant(1.0));
  std::vector<std::pair<SpaceTimePoint, std::vector<double>>> none;
  try {
    (void)check_structure(f, none);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::EmptySampleSet);
  }
  std::vector<std::pair<SpaceTimePoint, std::vector<double>>> zeros{{origin(), {0.0, 0.0}}};
  EXPECT_THROW((void)check_structure(f, zeros), Error);
}

TEST(Coefficient, BoundsForBuiltins) {
  std::vector<CoefficientFn> cs{CoefficientFn::constant(0.7), CoefficientFn::smooth_bump(1.5),
                                CoefficientFn::checkerboard(2.0)};
  std::mt19937_64 g(5);
  std::uniform_real_distribution<double> u(-3.0, 3.0);
  for (const auto& c : cs) {
    for (int i = 0; i < 10000; ++i) {
      const double v = c({u(g), u(g)}, u(g));
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, c.a_sup());
    }
  }
}

TEST(Coefficient, SmoothBump) {
  auto c = CoefficientFn::smooth_bump(2.0);
  EXPECT_DOUBLE_EQ(c({1.0, 0.0}, 0.0), 2.0);
  EXPECT_EQ(c({0.0, 0.4}, 0.0), 0.0);
  EXPECT_EQ(c({-0.5, 0.4}, 1.0), 0.0);
  const double s = 0.5;
  EXPECT_NEAR(c({1.5, 0.0}, 0.0), 2.0 * std::exp(1.0 - 1.0 / (1.0 - s * s)), 1e-15);
}

TEST(Coefficient, CheckerboardValues) {
  auto c = CoefficientFn::checkerboard(2.0, 0.25, 0.125);
  EXPECT_EQ(c({0.1, 0.1}, 0.05), 2.0);
  EXPECT_EQ(c({0.3, 0.1}, 0.05), 0.0);
  EXPECT_EQ(c({0.3, 0.3}, 0.05), 2.0);
  EXPECT_EQ(c({0.1, 0.1}, 0.2), 0.0);
  EXPECT_EQ(c({-0.1, 0.1}, 0.05), 0.0);
}

TEST(Coefficient, SampledInterpolation) {
  SpaceTimeGrid grid(2, 5, 3, {0.0, 0.0}, 1.0, 1.0, 1.0);
  auto f = Field::from_function(grid, [](const SpaceTimePoint& z) { return 4.0 + z.x[0] + 2.0 * z.x[1] + z.t; });
  auto c = CoefficientFn::sampled(f);
  EXPECT_NEAR(c({0.1, 0.2}, 0.3), 4.0 + 0.1 + 0.4 + 0.3, 1e-14);
  EXPECT_NEAR(c({5.0, 0.0}, 1.0), 4.0 + 1.0 + 0.0 + 1.0, 1e-14);
  EXPECT_NEAR(c.a_sup(), 8.0, 1e-14);
}

TEST(Coefficient, RejectsNegative) {
  EXPECT_THROW((void)CoefficientFn::constant(-1.0), Error);
  EXPECT_THROW((void)CoefficientFn::checkerboard(-1.0), Error);
  SpaceTimeGrid grid(1, 3, 2, {0.0, 0.0}, 1.0, 1.0, 1.0);
  EXPECT_THROW((void)CoefficientFn::sampled(Field::constant(grid, -0.5)), Error);
}

// a == 0 must reproduce the dedicated p-Laplacian path bit for bit.
class ZeroCoefficient : public ::testing::TestWithParam<double> {};

TEST_P(ZeroCoefficient, BitwiseReduction) {
  const double p = GetParam();
  const double q = p + 0.4;
  FluxModel dp(p, q, CoefficientFn::constant(0.0));
  FluxModel po = FluxModel::p_only(p, q);

  for (double k : {0.0, 1e-8, 0.3, 1.0, 7.5}) EXPECT_EQ(dp.h(0.0, k), po.h(0.0, k));
  const std::vector<double> xi{0.4, -0.9};
  EXPECT_EQ(model_flux(dp, origin(), xi), model_flux(po, origin(), xi));

  SolverConfig cfg;
  cfg.dt_rule = {DtRule::Kind::intrinsic, 1.0};
  auto grid = make_solver_grid(2, 17, {0.0, 0.0}, 0.25, 1.0, 0.25, cfg, p);
  std::vector<double> init(grid.nodes_per_slice());
  for (std::size_t i = 0; i < init.size(); ++i) {
    const auto x = grid.node_x(i);
    init[i] = std::cos(0.5 * std::numbers::pi * x[0]) * std::cos(0.5 * std::numbers::pi * x[1]) * (1.0 + 0.3 * x[0]);
  }
  auto bc = [](const SpaceTimePoint&) { return 0.0; };
  auto a = solve_cylinder(init, dp, grid, cfg, bc);
  auto b = solve_cylinder(init, po, grid, cfg, bc);
  ASSERT_EQ(a.u.values().size(), b.u.values().size());
  for (std::size_t i = 0; i < a.u.values().size(); ++i) ASSERT_EQ(a.u.values()[i], b.u.values()[i]);

  const auto& u = a.u;
  Cylinder outer{{0.0, 0.0}, 0.25, 0.75, 0.08};
  Cylinder inner{{0.0, 0.0}, 0.25, 0.375, 0.04};
  auto cut = build_cutoffs(outer, inner);
  for (double k : {0.1, 0.3}) {
    auto ra = caccioppoli_sides(u, dp, k, Sign::plus, outer, cut);
    auto rb = caccioppoli_sides(u, po, k, Sign::plus, outer, cut);
    EXPECT_EQ(ra.lhs, rb.lhs);
    EXPECT_EQ(ra.rhs_unconstant, rb.rhs_unconstant);
  }
  auto exps = ExponentSet::make(2, p, q);
  auto ea = embedding_sides(u, grid.cover(), exps);
  auto eb = embedding_sides(b.u, grid.cover(), 2, p, q);
  EXPECT_EQ(ea.lhs, eb.lhs);
  EXPECT_EQ(ea.rhs_unconstant, eb.rhs_unconstant);
  auto sa = supbound_sides(u, {0.0, 0.0}, 0.25, 0.5, 0.5, exps, VarthetaConvention::proof);
  auto sb = supbound_sides(b.u, {0.0, 0.0}, 0.25, 0.5, 0.5, exps, VarthetaConvention::proof);
  EXPECT_EQ(sa.lhs, sb.lhs);
  EXPECT_EQ(sa.rhs_unconstant, sb.rhs_unconstant);
}

INSTANTIATE_TEST_SUITE_P(Exponents, ZeroCoefficient, ::testing::Values(2.0, 2.5, 3.0));
