#pragma once

// JSON and CSV serialization of reports and traces.
//
// JSON documents carry "schema_version"; non-finite numbers are written as
// the strings "inf", "-inf" and "nan". CSV rows use 17 significant digits.

#include <string>
#include <vector>

#include <json.hpp>

#include "dplab/estimates.hpp"
#include "dplab/exponents.hpp"
#include "dplab/solver.hpp"

namespace dplab {

inline constexpr int kReportSchemaVersion = 1;

nlohmann::json to_json(const ExponentSet& exps);
nlohmann::json to_json(const GridDescriptor& grid);
nlohmann::json to_json(const EstimateReport& report);
nlohmann::json to_json(const DeGiorgiTrace& trace);
nlohmann::json to_json(const SolveTrace& trace);

/// Inverse of to_json(EstimateReport); `params` is restored when present.
EstimateReport estimate_report_from_json(const nlohmann::json& j);

/// One evaluated inequality per row.
struct CsvRow {
  std::string name;
  std::string case_label;
  double h = 0.0;
  double dt = 0.0;
  double lhs = 0.0;
  double rhs_unconstant = 0.0;
  double empirical_c = 0.0;
  std::uint64_t seed = 0;
  double aux = 0.0;  ///< experiment specific extra column

  static CsvRow from(const EstimateReport& r, std::string case_label, double aux = 0.0);
};

std::string csv_header();
std::string csv_line(const CsvRow& row);
std::string csv_body(const std::vector<CsvRow>& rows);

/// "%.17g", with inf/-inf/nan spelled out.
std::string format_double(double v);

}  // namespace dplab
