/// @file pymodule.cpp
/// @brief Python bindings for the flow-map library: the family registry and
///        configurations, solution construction, pointwise Lagrangian and
///        Eulerian evaluation, verification reports, frame changes, and the
///        column-minor identities.  Vectors cross the boundary as plain
///        sequences of three floats; matrices as nested row-major lists.
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "lagrflow/errors.hpp"
#include "lagrflow/families.hpp"
#include "lagrflow/verify.hpp"

namespace py = pybind11;
using namespace lagrflow;

namespace {

SpatialSample sample_of(const FlowMap& fm, const Vec3& z) {
  return fm.v.sample(z);
}

py::list row_major(const Mat3& a) {
  py::list rows;
  for (int r = 0; r < 3; ++r) {
    py::list row;
    for (int c = 0; c < 3; ++c) row.append(a[c][r]);
    rows.append(row);
  }
  return rows;
}

MatM square_matrix(const py::sequence& rows) {
  const int n = static_cast<int>(py::len(rows));
  if (n < 3 || n > 6)
    throw ConfigError("frame: expected a square matrix with 3..6 rows");
  MatM h = MatM::identity(n);
  for (int r = 0; r < n; ++r) {
    const py::sequence row = rows[r].cast<py::sequence>();
    if (static_cast<int>(py::len(row)) != n)
      throw ConfigError("frame: matrix rows must all have length " +
                        std::to_string(n));
    for (int c = 0; c < n; ++c) h.at(r, c) = row[c].cast<double>();
  }
  return h;
}

Mat3x<double> column_matrix(const py::sequence& cols) {
  const int m = static_cast<int>(py::len(cols));
  if (m < 3 || m > 6)
    throw ConfigError("columns: expected between 3 and 6 columns");
  Mat3x<double> a;
  a.cols = m;
  for (int j = 0; j < m; ++j) {
    const py::sequence col = cols[j].cast<py::sequence>();
    if (py::len(col) != 3)
      throw ConfigError("columns: each column must have 3 entries");
    for (int r = 0; r < 3; ++r) a[j][r] = col[r].cast<double>();
  }
  return a;
}

VerificationReport run_verify(const FlowMap& fm, double tol, bool fd_checks) {
  VerifyOptions opt;
  opt.constancy_tol = tol;
  opt.with_fd_checks = fd_checks;
  return constancy_report(fm, opt);
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() =
      "Explicit incompressible flow maps phi(z, t) = A(t) v(z): family "
      "catalog, construction, evaluation, and verification.";

  py::register_exception<ParseError>(m, "ParseError", PyExc_ValueError);
  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<NumericError>(m, "NumericError", PyExc_RuntimeError);

  py::class_<FamilyInfo>(m, "FamilyInfo", "Registry entry for one family.")
      .def_readonly("id", &FamilyInfo::id)
      .def_readonly("m", &FamilyInfo::m, "number of columns")
      .def_readonly("kind", &FamilyInfo::kind, "'closed-form' or 'ode'")
      .def_readonly("anchor", &FamilyInfo::anchor,
                    "one-line description of the construction")
      .def_readonly("parameters", &FamilyInfo::parameters,
                    "expected constants / functions / initial keys")
      .def("__repr__", [](const FamilyInfo& f) {
        return "FamilyInfo(id='" + f.id + "', m=" + std::to_string(f.m) +
               ", kind='" + f.kind + "')";
      });

  py::class_<FamilyConfig>(
      m, "FamilyConfig",
      "Value bag configuring one family: constants, function descriptors, "
      "initial values, horizon, box, and grid.  The mapping properties "
      "return copies; use set_constant / set_function / set_initial / "
      "override_declared to modify single entries.")
      .def(py::init<>())
      .def_readwrite("family", &FamilyConfig::family)
      .def_readwrite("t0", &FamilyConfig::t0)
      .def_readwrite("t1", &FamilyConfig::t1)
      .def_readwrite("box_lo", &FamilyConfig::box_lo)
      .def_readwrite("box_hi", &FamilyConfig::box_hi)
      .def_readwrite("grid_n", &FamilyConfig::grid_n)
      .def_readwrite("grid_t", &FamilyConfig::grid_t)
      .def_readwrite("seed", &FamilyConfig::seed)
      .def_property(
          "constants", [](const FamilyConfig& c) { return c.constants; },
          [](FamilyConfig& c, std::map<std::string, double> v) {
            c.constants = std::move(v);
          })
      .def_property(
          "functions", [](const FamilyConfig& c) { return c.functions; },
          [](FamilyConfig& c, std::map<std::string, std::string> v) {
            c.functions = std::move(v);
          })
      .def_property(
          "initial", [](const FamilyConfig& c) { return c.initial; },
          [](FamilyConfig& c, std::map<std::string, double> v) {
            c.initial = std::move(v);
          })
      .def_property(
          "declare_override",
          [](const FamilyConfig& c) { return c.declare_override; },
          [](FamilyConfig& c, std::map<std::string, double> v) {
            c.declare_override = std::move(v);
          })
      .def("set_constant",
           [](FamilyConfig& c, const std::string& k, double v) {
             c.constants[k] = v;
           })
      .def("set_function",
           [](FamilyConfig& c, const std::string& k, const std::string& v) {
             c.functions[k] = v;
           })
      .def("set_initial",
           [](FamilyConfig& c, const std::string& k, double v) {
             c.initial[k] = v;
           })
      .def("override_declared",
           [](FamilyConfig& c, const std::string& k, double v) {
             c.declare_override[k] = v;
           },
           "Replace the declared value of a named functional (negative "
           "control; the construction itself is untouched).")
      .def("to_json", &FamilyConfig::to_json)
      .def_static("from_json", &FamilyConfig::from_json, py::arg("text"))
      .def("__repr__", [](const FamilyConfig& c) {
        return "FamilyConfig(family='" + c.family + "')";
      });

  py::class_<CheckResult>(m, "CheckResult", "One verification check.")
      .def_readonly("name", &CheckResult::name)
      .def_property_readonly("passed",
                             [](const CheckResult& c) { return c.pass; })
      .def_readonly("residual", &CheckResult::residual)
      .def_readonly("tolerance", &CheckResult::tolerance)
      .def_readonly("location", &CheckResult::location,
                    "where the worst residual occurred")
      .def("__repr__", [](const CheckResult& c) {
        return "CheckResult(name='" + c.name + "', passed=" +
               (c.pass ? std::string("True") : std::string("False")) +
               ", residual=" + std::to_string(c.residual) + ")";
      });

  py::class_<VerificationReport>(m, "VerificationReport",
                                 "Verdict of the constancy checks.")
      .def_readonly("family", &VerificationReport::family)
      .def_property_readonly(
          "passed", [](const VerificationReport& r) { return r.pass; })
      .def_readonly("truncated", &VerificationReport::truncated)
      .def_readonly("t_begin", &VerificationReport::t_begin)
      .def_readonly("t_end", &VerificationReport::t_end)
      .def_readonly("truncation_reason", &VerificationReport::truncation_reason)
      .def_readonly("checks", &VerificationReport::checks)
      .def("find",
           [](const VerificationReport& r, const std::string& name)
               -> py::object {
             const CheckResult* c = r.find(name);
             return c ? py::cast(*c) : py::none();
           },
           py::arg("name"))
      .def("to_json", &VerificationReport::to_json)
      .def("__repr__", [](const VerificationReport& r) {
        return "VerificationReport(family='" + r.family + "', passed=" +
               (r.pass ? std::string("True") : std::string("False")) + ")";
      });

  py::class_<FlowMap>(
      m, "Solution",
      "A built flow map phi(z, t) = A(t) v(z).  Points are sequences of "
      "three floats; times must lie in [t0, t_end].")
      .def_readonly("family", &FlowMap::family)
      .def_readonly("m", &FlowMap::m, "number of columns")
      .def_readonly("box_lo", &FlowMap::box_lo)
      .def_readonly("box_hi", &FlowMap::box_hi)
      .def_readonly("grid_n", &FlowMap::grid_n)
      .def_readonly("grid_t", &FlowMap::grid_t)
      .def_readonly("seed", &FlowMap::seed)
      .def_readonly("has_closed_invariant", &FlowMap::has_closed_invariant)
      .def_property_readonly("t0",
                             [](const FlowMap& f) { return f.tc.t0; })
      .def_property_readonly("t1",
                             [](const FlowMap& f) { return f.tc.t1; },
                             "requested end of the horizon")
      .def_property_readonly("t_end", &FlowMap::t_end,
                             "usable end of the horizon")
      .def_property_readonly(
          "truncated", [](const FlowMap& f) { return f.tc.truncated; })
      .def_property_readonly(
          "truncation_reason",
          [](const FlowMap& f) { return f.tc.truncation_reason; })
      .def("phi",
           [](const FlowMap& f, const Vec3& z, double t) { return f.phi(z, t); },
           py::arg("z"), py::arg("t"), "particle position A(t) v(z)")
      .def("velocity",
           [](const FlowMap& f, const Vec3& z, double t) {
             return f.velocity(z, t);
           },
           py::arg("z"), py::arg("t"), "particle velocity A'(t) v(z)")
      .def("acceleration",
           [](const FlowMap& f, const Vec3& z, double t) {
             return f.acceleration(sample_of(f, z), t);
           },
           py::arg("z"), py::arg("t"), "particle acceleration A''(t) v(z)")
      .def("alpha",
           [](const FlowMap& f, const Vec3& z, double t) {
             return f.alpha(sample_of(f, z), t);
           },
           py::arg("z"), py::arg("t"), "volume factor det d_z phi")
      .def("jacobian",
           [](const FlowMap& f, const Vec3& z, double t) {
             return row_major(f.jacobian(sample_of(f, z), t));
           },
           py::arg("z"), py::arg("t"), "d_z phi as nested row-major lists")
      .def("invariant_two_form",
           [](const FlowMap& f, const Vec3& z, double t) {
             return f.invariant_two_form(sample_of(f, z), t);
           },
           py::arg("z"), py::arg("t"),
           "h = sum_k grad(phidot_k) x grad(phi_k) via the pair sum")
      .def("closed_invariant",
           [](const FlowMap& f, const Vec3& z) -> py::object {
             if (!f.has_closed_invariant) return py::none();
             return py::cast(f.closed_invariant(sample_of(f, z)));
           },
           py::arg("z"),
           "family closed form for h(z), or None when the family has none")
      .def("vorticity",
           [](const FlowMap& f, const Vec3& z, double t) {
             return f.vorticity(sample_of(f, z), t);
           },
           py::arg("z"), py::arg("t"),
           "vorticity carried along the trajectory of z")
      .def("pair_coefficient",
           [](const FlowMap& f, double t, int i, int j) {
             return f.tc.pair_coefficient(t, i, j);
           },
           py::arg("t"), py::arg("i"), py::arg("j"),
           "q_ij(t) = <A_i', A_j> - <A_j', A_i> (1-based columns)")
      .def("wedge_residual",
           [](const FlowMap& f, double t) {
             return omega_wedge_residual(f.tc, t);
           },
           py::arg("t"),
           "alternating pair/triple pairing residual (0 below 5 columns)")
      .def("invert",
           [](const FlowMap& f, const Vec3& x, double t,
              py::object guess) {
             if (guess.is_none()) return invert_map(f, x, t);
             const Vec3 g = guess.cast<Vec3>();
             return invert_map(f, x, t, &g);
           },
           py::arg("x"), py::arg("t"), py::arg("guess") = py::none(),
           "solve phi(z, t) = x for z by damped Newton iteration")
      .def("eulerian_velocity",
           [](const FlowMap& f, const Vec3& x, double t, py::object guess) {
             if (guess.is_none()) return eulerian_velocity(f, x, t);
             const Vec3 g = guess.cast<Vec3>();
             return eulerian_velocity(f, x, t, &g);
           },
           py::arg("x"), py::arg("t"), py::arg("guess") = py::none(),
           "u(x, t) = A'(t) v(phi^{-1}(x, t))")
      .def("eulerian_vorticity",
           [](const FlowMap& f, const Vec3& x, double t, py::object guess) {
             if (guess.is_none()) return eulerian_vorticity(f, x, t);
             const Vec3 g = guess.cast<Vec3>();
             return eulerian_vorticity(f, x, t, &g);
           },
           py::arg("x"), py::arg("t"), py::arg("guess") = py::none(),
           "vorticity at the spatial point x")
      .def("verify", &run_verify, py::arg("tol") = 1e-6,
           py::arg("fd_checks") = true,
           "run every constancy check over the deterministic grid")
      .def("gauge",
           [](const FlowMap& f, const py::sequence& rows) {
             return gauge_transform(f, square_matrix(rows));
           },
           py::arg("matrix"),
           "frame change by an invertible m x m matrix (nested rows); the "
           "map is pointwise unchanged")
      .def("__repr__", [](const FlowMap& f) {
        return "Solution(family='" + f.family + "', m=" + std::to_string(f.m) +
               ")";
      });

  m.def("registry", [] { return family_registry(); },
        "all families in stable order");
  m.def("family_info", &family_info, py::arg("id"),
        py::return_value_policy::copy);
  m.def("catalog_config", &catalog_config, py::arg("id"),
        "ready-to-run configuration with catalog parameter values");
  m.def("randomized_config", &randomized_config, py::arg("id"),
        py::arg("seed"),
        "catalog configuration with constants redrawn admissibly at random");
  m.def("build_solution", &build_solution, py::arg("config"),
        "construct the flow map; raises ConfigError on inadmissible input");
  m.def("minor_identity_residuals",
        [](const py::sequence& cols) {
          const Mat3x<double> a = column_matrix(cols);
          const auto r = minor_identity_residuals(a);
          py::dict out;
          out["three_two"] = r.three_two;
          out["four_pair"] = r.four_pair;
          out["column"] = r.column;
          out["compound"] = r.compound;
          out["scale"] = minor_identity_scale(a);
          return out;
        },
        py::arg("columns"),
        "residuals of the four minor identities for 3..6 columns of three "
        "floats; all vanish identically");

  m.attr("__version__") = "0.1.0";
}
