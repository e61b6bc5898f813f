#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <limits>
#include <sstream>

#include "dplab/error.hpp"
#include "dplab/field_io.hpp"
#include "dplab/random_field.hpp"
#include "dplab/report_io.hpp"

using namespace dplab;

namespace {

Field awkward_field() {
  SpaceTimeGrid g(2, 5, 3, {0.1, -0.7}, 0.3, 1.0 / 3.0, 0.7);
  return Field::from_function(g, [](const SpaceTimePoint& z) { return std::exp(z.x[0]) / 3.0 - z.x[1] * z.t * 1e-7; });
}

void expect_same(const Field& a, const Field& b) {
  EXPECT_TRUE(a.grid() == b.grid());
  ASSERT_EQ(a.values().size(), b.values().size());
  for (std::size_t i = 0; i < a.values().size(); ++i) EXPECT_EQ(a.values()[i], b.values()[i]);
}

}  // namespace

TEST(FieldIo, TextRoundTripIsExact) {
  const auto f = awkward_field();
  std::stringstream ss;
  write_field(ss, f, FieldFormat::text);
  expect_same(read_field(ss), f);
}

TEST(FieldIo, BinaryRoundTripIsExact) {
  const auto f = awkward_field();
  std::stringstream ss(std::ios::in | std::ios::out | std::ios::binary);
  write_field(ss, f, FieldFormat::binary);
  expect_same(read_field(ss), f);
}

TEST(FieldIo, Files) {
  const auto f = awkward_field();
  const auto p = std::filesystem::temp_directory_path() / "dplab_io_test.field";
  save_field(p.string(), f, FieldFormat::binary);
  expect_same(load_field(p.string()), f);
  std::filesystem::remove(p);
  try {
    (void)load_field(p.string());
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::Io);
  }
}

TEST(FieldIo, MalformedInput) {
  std::stringstream bad("dplab-field 1\n2 5 3\n0 0 0 1 1\n1 2 3\n");
  EXPECT_THROW((void)read_field(bad), Error);
  std::stringstream junk("hello");
  EXPECT_THROW((void)read_field(junk), Error);
}

TEST(ReportIo, JsonRoundTrip) {
  EstimateReport r;
  r.name = "caccioppoli";
  r.lhs = 0.1;
  r.rhs_unconstant = 0.3;
  r.grid = {2, 17, 9, 0.125, 0.01};
  r.params = ExponentSet::make(2, 2.0, 2.5);
  r.seed = 77;
  r.terms = {{"k", -0.25}, {"sup_term", 1e-300}};
  r.finish();
  const auto back = estimate_report_from_json(to_json(r));
  EXPECT_EQ(back.name, r.name);
  EXPECT_EQ(back.lhs, r.lhs);
  EXPECT_EQ(back.rhs_unconstant, r.rhs_unconstant);
  EXPECT_EQ(back.empirical_c, r.empirical_c);
  EXPECT_EQ(back.seed, 77u);
  EXPECT_EQ(back.terms, r.terms);
  EXPECT_EQ(back.grid.nx, 17);
  ASSERT_TRUE(back.params.has_value());
  EXPECT_EQ(back.params->lambda, r.params->lambda);
}

TEST(ReportIo, NonFiniteNumbers) {
  EstimateReport r;
  r.name = "x";
  r.lhs = 1.0;
  r.finish();
  const auto j = to_json(r);
  EXPECT_EQ(j.at("empirical_c"), "inf");
  EXPECT_TRUE(std::isinf(estimate_report_from_json(j).empirical_c));
  EXPECT_EQ(format_double(-std::numeric_limits<double>::infinity()), "-inf");
  EXPECT_EQ(format_double(std::nan("")), "nan");
}

TEST(Csv, Formatting) {
  CsvRow row{"embedding", "level=0", 0.125, 0.0625, 1.0 / 3.0, 2.0, 1.0 / 6.0, 5, 0.0};
  EXPECT_EQ(csv_header(), "name,case,h,dt,lhs,rhs_unconstant,empirical_c,seed,aux\n");
  EXPECT_EQ(csv_line(row),
            "embedding,level=0,0.125,0.0625,0.33333333333333331,2,0.16666666666666666,5,0\n");
  EXPECT_EQ(std::stod("0.33333333333333331"), 1.0 / 3.0);
  EXPECT_EQ(csv_body({row, row}), csv_line(row) + csv_line(row));
}

TEST(RandomField, Deterministic) {
  SpaceTimeGrid g(2, 9, 5, {0.0, 0.0}, 0.0, 1.0, 1.0);
  const auto a = generate_field({3, 2.0, 9}, g);
  const auto b = generate_field({3, 2.0, 9}, g);
  const auto c = generate_field({3, 2.0, 10}, g);
  expect_same(a, b);
  bool differs = false;
  for (std::size_t i = 0; i < a.values().size(); ++i) differs = differs || a.values()[i] != c.values()[i];
  EXPECT_TRUE(differs);
}

TEST(RandomField, InfiniteDecayIsConstant) {
  SpaceTimeGrid g(2, 9, 5, {0.0, 0.0}, 0.0, 1.0, 1.0);
  const auto f = generate_field({4, std::numeric_limits<double>::infinity(), 3}, g);
  for (double v : f.values()) EXPECT_EQ(v, f.values()[0]);
  EXPECT_LE(std::abs(f.values()[0]), 1.0);
}

TEST(RandomField, SerializationRoundTrip) {
  SpaceTimeGrid g(1, 17, 9, {0.0, 0.0}, 0.0, 1.0, 1.0);
  const auto f = generate_field({1, 2.0, 4}, g);
  std::stringstream ss;
  write_field(ss, f);
  expect_same(read_field(ss), f);
}

TEST(RandomField, Validation) {
  EXPECT_THROW(RandomFieldSpec({0, 2.0, 1}).validate(), Error);
  EXPECT_THROW(RandomFieldSpec({2, -1.0, 1}).validate(), Error);
}
