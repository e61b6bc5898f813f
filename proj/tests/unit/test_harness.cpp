#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include "dplab/error.hpp"
#include "dplab/harness.hpp"

using namespace dplab;
using nlohmann::json;

namespace {

ErrorCode config_error(const json& j) {
  try {
    ExperimentConfig::from_json(j).validate();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "config accepted: " << j.dump();
  return ErrorCode::InvalidArgument;
}

ExperimentConfig small_embedding(int samples) {
  auto cfg = ExperimentConfig::from_json(json{{"experiment", "embedding"},
                                              {"ladder", {9, 11, 13}},
                                              {"sample_count", samples},
                                              {"seed", 42},
                                              {"problem", {{"t0", 0.0}, {"time_length", 1.0}}},
                                              {"workers", 2},
                                              {"stability_tolerance", 0.5}});
  cfg.validate();
  return cfg;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(Config, Defaults) {
  auto cfg = ExperimentConfig::from_json(json{{"ladder", {9}}});
  EXPECT_NO_THROW(cfg.validate());
  EXPECT_EQ(cfg.experiment, "embedding");
  EXPECT_EQ(cfg.ladder.front(), std::make_pair(9, 0));
}

TEST(Config, RoundTripsThroughJson) {
  auto cfg = ExperimentConfig::from_json(json{{"experiment", "supbound"},
                                              {"params", {{"p", 2.0}, {"q", 2.6}, {"coefficient", {{"kind", "checkerboard"}, {"a_sup", 2.0}}}}},
                                              {"ladder", {json::array({17, 9}), 33}},
                                              {"sigma_list", {0.25, 0.5}},
                                              {"solver", {{"dt_rule", "fixed"}, {"dt_value", 0.01}}}});
  auto again = ExperimentConfig::from_json(cfg.to_json());
  EXPECT_EQ(again.to_json(), cfg.to_json());
  EXPECT_EQ(again.ladder[0], std::make_pair(17, 9));
  EXPECT_EQ(again.coefficient.kind, "checkerboard");
  EXPECT_EQ(again.solver.dt_rule.kind, DtRule::Kind::fixed);
}

TEST(Config, Rejections) {
  EXPECT_EQ(config_error({{"ladder", {9}}, {"bogus", 1}}), ErrorCode::ConfigInvalid);
  EXPECT_EQ(config_error({{"ladder", {9}}, {"schema_version", 2}}), ErrorCode::ConfigInvalid);
  EXPECT_EQ(config_error({{"ladder", {"x"}}}), ErrorCode::ConfigInvalid);
  EXPECT_EQ(config_error({{"ladder", json::array()}}), ErrorCode::ConfigInvalid);
  EXPECT_EQ(config_error({{"ladder", {9}}, {"experiment", "nope"}}), ErrorCode::ConfigInvalid);
  EXPECT_EQ(config_error({{"ladder", {9}}, {"sigma_list", {1.0}}}), ErrorCode::ConfigInvalid);
  EXPECT_EQ(config_error({{"ladder", {9}}, {"params", {{"q", 3.5}}}}), ErrorCode::ConfigInvalid);
  EXPECT_EQ(config_error({{"ladder", {9}}, {"params", {{"p", "two"}}}}), ErrorCode::ConfigInvalid);
  EXPECT_EQ(config_error({{"ladder", {9}}, {"params", {{"coefficient", {{"kind", "wavy"}}}}}}),
            ErrorCode::ConfigInvalid);
  EXPECT_EQ(config_error({{"ladder", {9}}, {"problem", {{"extra", 1}}}}), ErrorCode::ConfigInvalid);
}

TEST(BlowupFit, SyntheticRoundTrip) {
  std::vector<std::pair<double, double>> pts;
  for (double s : {0.1, 0.3, 0.5, 0.7, 0.9}) pts.emplace_back(s, 3.7 * std::pow(1.0 - s, -5.0));
  const auto fit = fit_blowup_exponent(pts);
  EXPECT_NEAR(fit.slope, -5.0, 1e-8);
  EXPECT_NEAR(std::exp(fit.intercept), 3.7, 1e-8);
  EXPECT_EQ(fit.points, 5u);
}

TEST(BlowupFit, ConstantDataHasZeroSlope) {
  std::vector<std::pair<double, double>> pts;
  for (double s : {0.2, 0.4, 0.6, 0.8}) pts.emplace_back(s, 2.0);
  EXPECT_NEAR(fit_blowup_exponent(pts).slope, 0.0, 1e-12);
}

TEST(BlowupFit, InsufficientPoints) {
  std::vector<std::pair<double, double>> pts{{0.2, 1.0}, {0.4, 2.0}, {0.6, 3.0}, {0.6, 3.5}};
  try {
    (void)fit_blowup_exponent(pts);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientPoints);
  }
}

TEST(BlowupFit, FromReports) {
  std::vector<EstimateReport> reps;
  for (double s : {0.1, 0.3, 0.5, 0.7}) {
    EstimateReport r;
    r.lhs = 2.0 * std::pow(1.0 - s, -3.0);
    r.terms["sigma"] = s;
    r.terms["sigma_free_rhs"] = 1.0;
    reps.push_back(r);
  }
  EXPECT_NEAR(fit_blowup_exponent(reps).slope, -3.0, 1e-10);
}

TEST(Barenblatt, ProfileProperties) {
  EXPECT_DOUBLE_EQ(barenblatt_1d_p3(0.0, 1.0), 1.0);
  EXPECT_EQ(barenblatt_1d_p3(10.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(barenblatt_1d_p3(1.0, 1.0, 2.0), barenblatt_1d_p3(-1.0, 1.0, 2.0));
  EXPECT_NEAR(barenblatt_1d_p3(0.0, 16.0), 0.5, 1e-15);
}

TEST(ParallelMap, KeepsOrderAndRethrows) {
  auto v = parallel_map(100, 4, [](std::size_t i) { return static_cast<int>(i * i); });
  for (std::size_t i = 0; i < v.size(); ++i) EXPECT_EQ(v[i], static_cast<int>(i * i));
  EXPECT_THROW(parallel_map(10, 3,
                            [](std::size_t i) {
                              if (i == 7) throw std::runtime_error("boom");
                              return 0;
                            }),
               std::runtime_error);
  EXPECT_TRUE(parallel_map(0, 2, [](std::size_t) { return 1; }).empty());
}

TEST(Experiments, EmbeddingRowCountAndReproducibility) {
  const auto cfg = small_embedding(200);
  const auto a = run_experiment(cfg);
  EXPECT_EQ(a.rows.size(), 600u);
  EXPECT_TRUE(a.ok()) << ::testing::PrintToString(a.failures());
  const auto b = run_experiment(cfg);
  EXPECT_EQ(csv_body(a.rows), csv_body(b.rows));
}

TEST(Experiments, DegiorgiOnZeroSolution) {
  auto cfg = ExperimentConfig::from_json(json{{"experiment", "degiorgi"},
                                              {"ladder", {17}},
                                              {"problem", {{"initial", "zero"}}},
                                              {"workers", 1}});
  cfg.validate();
  const auto r = run_experiment(cfg);
  EXPECT_TRUE(r.ok()) << ::testing::PrintToString(r.failures());
  for (const auto& row : r.rows) EXPECT_EQ(row.lhs, 0.0);
}

TEST(Experiments, WriteOutputsIsStable) {
  const auto cfg = small_embedding(3);
  const auto dir = std::filesystem::temp_directory_path() / "dplab_harness_test";
  std::filesystem::remove_all(dir);
  const auto r = run_experiment(cfg);
  write_outputs(r, cfg, (dir / "a").string());
  write_outputs(run_experiment(cfg), cfg, (dir / "b").string());
  for (const char* f : {"results.csv", "reports.json", "summary.json"})
    EXPECT_EQ(slurp(dir / "a" / f), slurp(dir / "b" / f)) << f;
  EXPECT_TRUE(std::filesystem::exists(dir / "a" / "metadata.json"));
  const auto csv = slurp(dir / "a" / "results.csv");
  EXPECT_EQ(csv.rfind(csv_header(), 0), 0u);
  std::filesystem::remove_all(dir);
}
