#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <optional>

#include "dplab/error.hpp"
#include "dplab/estimates.hpp"
#include "dplab/exponents.hpp"
#include "dplab/harness.hpp"
#include "dplab/random_field.hpp"
#include "dplab/report_io.hpp"
#include "dplab/solver.hpp"

namespace py = pybind11;
using namespace dplab;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;

Array to_array(const Field& f) {
  const auto& g = f.grid();
  std::vector<py::ssize_t> shape{g.nt()};
  if (g.dim() == 2) shape.push_back(g.nx());
  shape.push_back(g.nx());
  Array a(shape);
  std::copy(f.values().begin(), f.values().end(), a.mutable_data());
  return a;
}

Field from_array(const SpaceTimeGrid& grid, const Array& a) {
  DPLAB_THROW_IF(static_cast<std::size_t>(a.size()) != grid.size(), ErrorCode::InvalidArgument,
                 "array size does not match the grid");
  return Field(grid, std::vector<double>(a.data(), a.data() + a.size()));
}

py::object json_to_py(const nlohmann::json& j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

Point point(const std::vector<double>& v) {
  DPLAB_THROW_IF(v.empty() || v.size() > 2, ErrorCode::InvalidArgument, "points have 1 or 2 coordinates");
  return {v[0], v.size() > 1 ? v[1] : 0.0};
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Degenerate double phase equation lab";

  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);

  m.def("validate_params", &validate_params, py::arg("n"), py::arg("p"), py::arg("q"));
  m.def("compute_tilde_p", &compute_tilde_p, py::arg("n"), py::arg("p"));
  m.def("compute_theta", &compute_theta, py::arg("n"), py::arg("p"), py::arg("q"));

  py::class_<ExponentSet>(m, "ExponentSet")
      .def(py::init(&ExponentSet::make), py::arg("n"), py::arg("p"), py::arg("q"), py::arg("nu") = 1.0,
           py::arg("ell_bound") = 1.0, py::arg("a_sup") = 0.0)
      .def_readonly("n", &ExponentSet::n)
      .def_readonly("p", &ExponentSet::p)
      .def_readonly("q", &ExponentSet::q)
      .def_readonly("tilde_p", &ExponentSet::tilde_p)
      .def_readonly("theta", &ExponentSet::theta)
      .def_readonly("theta_embedding", &ExponentSet::theta_embedding)
      .def_readonly("vartheta", &ExponentSet::vartheta)
      .def_readonly("vartheta_theorem", &ExponentSet::vartheta_theorem)
      .def_readonly("lambda_", &ExponentSet::lambda)
      .def("level_magnitude", [](const ExponentSet& e, double sigma, double y0, double c_star) {
        return level_magnitude(e, sigma, y0, c_star);
      })
      .def("blowup_exponent", [](const ExponentSet& e) { return blowup_exponent(e); });

  py::class_<SpaceTimeGrid>(m, "Grid")
      .def(py::init([](int dim, int nx, int nt, std::vector<double> center, double t0, double radius, double length) {
             return SpaceTimeGrid(dim, nx, nt, point(center), t0, radius, length);
           }),
           py::arg("dim"), py::arg("nx"), py::arg("nt"), py::arg("center") = std::vector<double>{0.0, 0.0},
           py::arg("t0") = 0.0, py::arg("radius") = 1.0, py::arg("time_length") = 1.0)
      .def_property_readonly("dim", &SpaceTimeGrid::dim)
      .def_property_readonly("nx", &SpaceTimeGrid::nx)
      .def_property_readonly("nt", &SpaceTimeGrid::nt)
      .def_property_readonly("h", &SpaceTimeGrid::h)
      .def_property_readonly("dt", &SpaceTimeGrid::dt);

  m.def(
      "generate_field",
      [](const SpaceTimeGrid& grid, int modes, double decay, std::uint64_t seed) {
        return to_array(generate_field({modes, decay, seed}, grid));
      },
      py::arg("grid"), py::arg("modes") = 3, py::arg("decay") = 2.0, py::arg("seed") = 0);

  m.def(
      "solve",
      [](const SpaceTimeGrid& grid, const Array& initial, double p, double q, double a_const, double boundary) {
        DPLAB_THROW_IF(static_cast<std::size_t>(initial.size()) != grid.nodes_per_slice(),
                       ErrorCode::InvalidArgument, "initial data must have one value per node");
        const FluxModel flux(p, q, CoefficientFn::constant(a_const));
        std::vector<double> u0(initial.data(), initial.data() + initial.size());
        std::optional<SolveResult> r;
        {
          py::gil_scoped_release release;
          r.emplace(solve_cylinder(u0, flux, grid, SolverConfig{}, [boundary](const SpaceTimePoint&) { return boundary; }));
        }
        return py::make_tuple(to_array(r->u), json_to_py(to_json(r->trace)));
      },
      py::arg("grid"), py::arg("initial"), py::arg("p"), py::arg("q"), py::arg("a") = 0.0, py::arg("boundary") = 0.0);

  m.def(
      "embedding_sides",
      [](const SpaceTimeGrid& grid, const Array& f, int n, double p, double q) {
        return json_to_py(to_json(embedding_sides(from_array(grid, f), grid.cover(), n, p, q)));
      },
      py::arg("grid"), py::arg("values"), py::arg("n"), py::arg("p"), py::arg("q"));

  m.def(
      "caccioppoli_sides",
      [](const SpaceTimeGrid& grid, const Array& u, double p, double q, double a_const, double k, bool plus,
         double radius, double length, double inner_ratio) {
        const Cylinder outer{grid.x0(), grid.t0(), radius, length};
        const Cylinder inner{grid.x0(), grid.t0(), radius * inner_ratio, length * inner_ratio};
        const FluxModel flux(p, q, CoefficientFn::constant(a_const));
        return json_to_py(to_json(caccioppoli_sides(from_array(grid, u), flux, k, plus ? Sign::plus : Sign::minus,
                                                    outer, build_cutoffs(outer, inner))));
      },
      py::arg("grid"), py::arg("values"), py::arg("p"), py::arg("q"), py::arg("a"), py::arg("k"),
      py::arg("plus") = true, py::arg("radius") = 0.75, py::arg("length") = 0.2, py::arg("inner_ratio") = 0.5);

  m.def(
      "supbound_sides",
      [](const SpaceTimeGrid& grid, const Array& u, const ExponentSet& exps, double rho, double sigma,
         const std::string& convention) {
        DPLAB_THROW_IF(convention != "theorem" && convention != "proof", ErrorCode::InvalidArgument,
                       "convention must be 'theorem' or 'proof'");
        return json_to_py(to_json(supbound_sides(from_array(grid, u), grid.x0(), grid.t0(), rho, sigma, exps,
                                                 convention == "proof" ? VarthetaConvention::proof
                                                                       : VarthetaConvention::theorem)));
      },
      py::arg("grid"), py::arg("values"), py::arg("exps"), py::arg("rho"), py::arg("sigma"),
      py::arg("convention") = "theorem");

  m.def(
      "degiorgi_trace",
      [](const SpaceTimeGrid& grid, const Array& u, const ExponentSet& exps, double rho, double sigma, bool plus,
         int depth) {
        const auto cal = calibrate_level(from_array(grid, u), grid.x0(), grid.t0(), rho, sigma, exps,
                                         plus ? Sign::plus : Sign::minus, depth);
        auto j = to_json(cal.trace);
        j["c_star"] = cal.c_star;
        j["smallness"] = cal.smallness;
        return json_to_py(j);
      },
      py::arg("grid"), py::arg("values"), py::arg("exps"), py::arg("rho"), py::arg("sigma"), py::arg("plus") = true,
      py::arg("depth") = 8);

  m.def(
      "fast_convergence_check",
      [](double y0, double c, double b, double vartheta, double level_factor, int depth) {
        const auto r = fast_convergence_check({y0, c, b, vartheta, level_factor, depth});
        return py::dict(py::arg("y") = r.y, py::arg("bound") = r.bound, py::arg("flags") = r.flags,
                        py::arg("lambda_") = r.lambda, py::arg("smallness") = r.smallness,
                        py::arg("max_equality_margin") = r.max_equality_margin);
      },
      py::arg("y0"), py::arg("c"), py::arg("b"), py::arg("vartheta"), py::arg("level_factor") = 1.0,
      py::arg("depth") = 8);

  m.def(
      "fit_blowup_exponent",
      [](const std::vector<std::pair<double, double>>& pairs) { return fit_blowup_exponent(pairs).slope; },
      py::arg("sigma_constant"));

  m.def(
      "run_experiment",
      [](const std::string& config_json, const std::string& out_dir) {
        const auto cfg = ExperimentConfig::from_json(nlohmann::json::parse(config_json));
        ExperimentResult res;
        {
          py::gil_scoped_release release;
          res = run_experiment(cfg);
          if (!out_dir.empty()) write_outputs(res, cfg, out_dir);
        }
        return py::dict(py::arg("ok") = res.ok(), py::arg("failures") = res.failures(),
                        py::arg("csv") = csv_header() + csv_body(res.rows), py::arg("summary") = json_to_py(res.summary));
      },
      py::arg("config_json"), py::arg("out_dir") = "");
}
