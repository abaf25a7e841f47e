#include "gfem/study.hpp"

#include <pybind11/eigen.h>
#include <pybind11/functional.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

namespace py = pybind11;
using namespace gfem;

namespace {

py::object to_python(const nlohmann::json &j) {
  return py::module_::import("json").attr("loads")(j.dump());
}

nlohmann::json from_python(const py::object &o) {
  return nlohmann::json::parse(py::module_::import("json").attr("dumps")(o).cast<std::string>());
}

QuadRule rule_for(const GfemSpace &space, std::size_t points) {
  return gauss_rule(points == 0 ? auto_quadrature_points(space.mesh().h()) : points);
}

Vector coefficients(const GfemSpace &space, const Vector &c) {
  if (static_cast<std::size_t>(c.size()) != space.size()) {
    throw std::invalid_argument("coefficient vector length does not match the space");
  }
  return c;
}

} // namespace

PYBIND11_MODULE(_gfem, m) {
  m.doc() = "GFEM solver for the 1D Burgers equation";

  py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
  py::register_exception<SeriesTruncationError>(m, "SeriesTruncationError", PyExc_ArithmeticError);
  py::register_exception<UnsupportedError>(m, "UnsupportedError", PyExc_NotImplementedError);
  py::register_exception<SimulationError>(m, "SimulationError", PyExc_RuntimeError);
  py::register_exception<NewtonError>(m, "NewtonError", PyExc_RuntimeError);
  py::register_exception<ZeroReferenceNormError>(m, "ZeroReferenceNormError", PyExc_ZeroDivisionError);
  py::register_exception<LinearSolveError>(m, "LinearSolveError", PyExc_ArithmeticError);
  py::register_exception<SingularSystemError>(m, "SingularSystemError", PyExc_ArithmeticError);

  // mesh
  py::class_<Mesh1D>(m, "Mesh1D")
      .def(py::init<double, double, std::vector<double>>(), py::arg("lo"), py::arg("hi"), py::arg("nodes"))
      .def_property_readonly("lo", &Mesh1D::lo)
      .def_property_readonly("hi", &Mesh1D::hi)
      .def_property_readonly("h", &Mesh1D::h)
      .def_property_readonly("nodes", &Mesh1D::nodes)
      .def_property_readonly("n_nodes", &Mesh1D::n_nodes)
      .def_property_readonly("n_elements", &Mesh1D::n_elements)
      .def("locate", &Mesh1D::locate)
      .def("patch", &Mesh1D::patch);
  m.def("build_uniform_mesh", &build_uniform_mesh, py::arg("n_elements"), py::arg("lo") = 0.0, py::arg("hi") = 1.0);
  m.def("hat_eval", [](const Mesh1D &mesh, std::size_t alpha, double x) {
    const HatEval e = hat_eval(mesh, alpha, x);
    return py::make_tuple(e.value, e.derivative);
  }, py::arg("mesh"), py::arg("alpha"), py::arg("x"));

  // enrichment
  py::enum_<BoundarySide>(m, "BoundarySide").value("LEFT", BoundarySide::Left).value("RIGHT", BoundarySide::Right);
  py::enum_<EnrichmentScaling>(m, "EnrichmentScaling")
      .value("PATCH_LOCAL", EnrichmentScaling::PatchLocal)
      .value("RAW", EnrichmentScaling::Raw);
  py::class_<EnrichmentRule>(m, "EnrichmentRule")
      .def_readonly("local_lo", &EnrichmentRule::local_lo)
      .def_readonly("local_hi", &EnrichmentRule::local_hi)
      .def_property_readonly("kind", [](const EnrichmentRule &r) { return kind_name(r.kind); })
      .def("__repr__", [](const EnrichmentRule &r) {
        return "<EnrichmentRule " + kind_name(r.kind) + " on [" + format_double(r.local_lo) + ", " +
               format_double(r.local_hi) + "]>";
      });
  m.def("exponential_rule", [](double rate, double lo, double hi) { return EnrichmentRule{Exponential{rate}, lo, hi}; },
        py::arg("rate"), py::arg("lo"), py::arg("hi"));
  m.def("heaviside_rule", [](BoundarySide side) {
    const double x = side == BoundarySide::Right ? 1.0 : 0.0;
    return EnrichmentRule{HeavisideBoundary{side}, x, x};
  }, py::arg("side") = BoundarySide::Right);
  m.def("tanh_rule", [](double center, double thickness, double lo, double hi) {
    return EnrichmentRule{TanhShock{center, thickness}, lo, hi};
  }, py::arg("center"), py::arg("thickness"), py::arg("lo"), py::arg("hi"));
  m.def("local_domain_for_tanh", &local_domain_for_tanh, py::arg("center"), py::arg("thickness"), py::arg("h_e"));

  py::class_<GfemSpace>(m, "GfemSpace")
      .def(py::init([](const Mesh1D &mesh, std::vector<EnrichmentRule> rules, EnrichmentScaling scaling,
                       bool exclude_boundary_nodes) {
             return GfemSpace(mesh, std::move(rules), {scaling, exclude_boundary_nodes});
           }),
           py::arg("mesh"), py::arg("rules") = std::vector<EnrichmentRule>{},
           py::arg("scaling") = EnrichmentScaling::PatchLocal, py::arg("exclude_boundary_nodes") = false)
      .def_property_readonly("mesh", &GfemSpace::mesh)
      .def_property_readonly("size", &GfemSpace::size)
      .def_property_readonly("dofs", [](const GfemSpace &s) {
        std::vector<std::pair<std::size_t, std::size_t>> out;
        for (const auto &e : s.dof_map().entries) out.emplace_back(e.node, e.j);
        return out;
      }, "(node, j) per global DOF; j = 1 is the standard hat")
      .def_property_readonly("warnings", [](const GfemSpace &s) { return s.dof_map().warnings; })
      .def("shape", [](const GfemSpace &s, std::size_t dof, double x) {
        const ShapeEval e = s.eval(dof, x);
        return py::make_tuple(e.value, e.derivative);
      }, py::arg("dof"), py::arg("x"))
      .def("evaluate", [](const GfemSpace &s, const Vector &c, const std::vector<double> &xs) {
        const Vector cc = coefficients(s, c);
        Eigen::MatrixX2d out(static_cast<Eigen::Index>(xs.size()), 2);
        for (std::size_t i = 0; i < xs.size(); ++i) {
          const ShapeEval e = s.evaluate({cc.data(), static_cast<std::size_t>(cc.size())}, xs[i]);
          out(static_cast<Eigen::Index>(i), 0) = e.value;
          out(static_cast<Eigen::Index>(i), 1) = e.derivative;
        }
        return out;
      }, py::arg("coefficients"), py::arg("x"), "Columns u_h(x) and u_h'(x)");

  // quadrature
  m.def("gauss_rule", [](std::size_t n) {
    const QuadRule r = gauss_rule(n);
    return py::make_tuple(r.points, r.weights);
  }, py::arg("n"));
  m.def("auto_quadrature_points", &auto_quadrature_points, py::arg("h"));

  // assembly (dense results)
  m.def("assemble_mass", [](const GfemSpace &s, std::size_t points) {
    return DenseMatrix(assemble_mass(s, rule_for(s, points)));
  }, py::arg("space"), py::arg("points") = 0);
  m.def("assemble_stiffness", [](const GfemSpace &s, double nu, std::size_t points) {
    return DenseMatrix(assemble_stiffness(s, nu, rule_for(s, points)));
  }, py::arg("space"), py::arg("nu"), py::arg("points") = 0);
  m.def("assemble_advection", [](const GfemSpace &s, const Vector &c, std::size_t points) {
    return DenseMatrix(assemble_advection(s, coefficients(s, c), rule_for(s, points)));
  }, py::arg("space"), py::arg("c"), py::arg("points") = 0);
  m.def("assemble_advection_tangent", [](const GfemSpace &s, const Vector &c, std::size_t points) {
    return DenseMatrix(assemble_advection_tangent(s, coefficients(s, c), rule_for(s, points)));
  }, py::arg("space"), py::arg("c"), py::arg("points") = 0);
  m.def("project", [](const GfemSpace &s, const std::function<double(double)> &f, std::size_t points) {
    const QuadratureTable table(s, rule_for(s, points));
    return project_initial_condition(table, f, nullptr);
  }, py::arg("space"), py::arg("f"), py::arg("points") = 0, "L2 projection without boundary penalty");

  // linear solver
  py::class_<LinearSolveResult>(m, "LinearSolveResult")
      .def_readonly("solution", &LinearSolveResult::solution)
      .def_readonly("refinements", &LinearSolveResult::refinements)
      .def_readonly("energy_ratio", &LinearSolveResult::energy_ratio)
      .def_readonly("ratio_history", &LinearSolveResult::ratio_history);
  m.def("linear_solve", [](const DenseMatrix &a, const Vector &b, double perturbation, double criterion,
                           std::size_t max_refinements) {
    return linear_solve(a, b, {perturbation, criterion, max_refinements});
  }, py::arg("a"), py::arg("b"), py::arg("perturbation") = 1e-10, py::arg("criterion") = 1e-10,
        py::arg("max_refinements") = 200);

  // solver
  py::class_<Problem>(m, "Problem")
      .def(py::init([](double nu, std::function<double(double)> u_ic,
                       std::vector<std::pair<double, std::function<double(double)>>> dirichlet) {
             Problem p{nu, std::move(u_ic), {}, {}};
             for (auto &[x, g] : dirichlet) p.dirichlet.push_back({x, std::move(g)});
             return p;
           }),
           py::arg("nu"), py::arg("u_ic"), py::arg("dirichlet"),
           "dirichlet: list of (x, g(t)) pairs")
      .def_readonly("nu", &Problem::nu);
  m.def("boundary_layer_problem", [](double nu) { return make_problem(ProblemKind::BoundaryLayer, nu); }, py::arg("nu"));
  m.def("shock_problem", [](double nu) { return make_problem(ProblemKind::Shock, nu); }, py::arg("nu"));

  py::class_<SolutionHistory>(m, "SolutionHistory")
      .def_readonly("times", &SolutionHistory::times)
      .def_readonly("coefficients", &SolutionHistory::coefficients)
      .def_readonly("newton_iterations", &SolutionHistory::newton_iterations)
      .def_readonly("beta", &SolutionHistory::beta)
      .def_readonly("quadrature_points", &SolutionHistory::quadrature_points)
      .def("snapshot_index", &SolutionHistory::snapshot_index);
  m.def("run_simulation", [](const Problem &p, const GfemSpace &space, double dt, double t_end,
                             std::vector<double> snapshots, std::size_t newton_max_iters,
                             std::size_t quadrature_points) {
    SolverOptions opts;
    opts.newton.max_iters = newton_max_iters;
    opts.quadrature_points = quadrature_points;
    if (snapshots.empty()) snapshots = {0.0, t_end};
    py::gil_scoped_release release;
    // Python callables in the problem re-acquire the GIL when invoked.
    return run_simulation(p, space, {dt, t_end, std::move(snapshots)}, opts);
  }, py::arg("problem"), py::arg("space"), py::arg("dt"), py::arg("t_end"),
        py::arg("snapshots") = std::vector<double>{}, py::arg("newton_max_iters") = 25,
        py::arg("quadrature_points") = 0);

  // references
  py::class_<ReferenceSolution, std::shared_ptr<ReferenceSolution>>(m, "ReferenceSolution")
      .def_property_readonly("kind", &ReferenceSolution::kind)
      .def("value", &ReferenceSolution::value, py::arg("x"), py::arg("t"))
      .def("derivative", &ReferenceSolution::derivative, py::arg("x"), py::arg("t"))
      .def_property_readonly("metadata", [](const ReferenceSolution &r) { return to_python(r.metadata()); });
  m.def("fourier_reference", [](double nu, double accuracy) {
    FourierParams p;
    p.nu = nu;
    p.accuracy = accuracy;
    return std::shared_ptr<ReferenceSolution>(std::make_shared<FourierSolution>(p));
  }, py::arg("nu"), py::arg("accuracy") = 1e-6);
  m.def("characteristics_reference", [](std::function<double(double)> u_ic, double lo, double hi) {
    return std::shared_ptr<ReferenceSolution>(std::make_shared<InviscidSolution>(std::move(u_ic), lo, hi));
  }, py::arg("u_ic"), py::arg("lo") = 0.0, py::arg("hi") = 1.0);
  m.def("steady_reference", [](double nu) {
    return std::shared_ptr<ReferenceSolution>(std::make_shared<SteadyShockSolution>(nu));
  }, py::arg("nu"));
  m.def("fine_fem_reference", [](const Problem &p, std::vector<double> times, std::size_t n_elements, double dt) {
    py::gil_scoped_release release;
    return std::shared_ptr<ReferenceSolution>(fine_fem_reference(p, 0.0, 1.0, n_elements, dt, times));
  }, py::arg("problem"), py::arg("times"), py::arg("n_elements") = 1000, py::arg("dt") = 1e-3);
  m.def("breaking_time", [](const std::function<double(double)> &u_ic, double lo, double hi) {
    return breaking_time(u_ic, lo, hi);
  }, py::arg("u_ic"), py::arg("lo") = 0.0, py::arg("hi") = 1.0);
  m.def("riemann_ic", &riemann_ic, py::arg("b"), py::arg("x"));
  m.def("solve_steady_k", &solve_steady_k, py::arg("nu"));
  m.def("steady_state_shock", &steady_state_shock, py::arg("nu"), py::arg("x"));
  m.def("stability_h_limit", [](double nu, const std::function<double(double)> &u_ic, double lo, double hi) {
    return stability_h_limit(nu, u_ic, lo, hi);
  }, py::arg("nu"), py::arg("u_ic"), py::arg("lo") = 0.0, py::arg("hi") = 1.0);

  // analysis
  m.def("relative_errors", [](const SolutionHistory &h, const GfemSpace &space, const ReferenceSolution &ref,
                              std::vector<double> times, std::size_t subintervals, std::size_t points) {
    ErrorQuadrature q;
    q.subintervals = subintervals;
    q.points = points;
    py::list out;
    for (const ErrorSample &s : error_time_series(h, space, ref, times, q)) {
      py::dict d;
      d["t"] = s.time;
      d["dofs"] = s.dofs;
      d["rel_l2"] = s.rel_l2;
      d["rel_h1"] = s.rel_h1;
      out.append(d);
    }
    return out;
  }, py::arg("history"), py::arg("space"), py::arg("reference"), py::arg("times"), py::arg("subintervals") = 2000,
        py::arg("points") = 4);
  m.def("convergence_rate", [](const std::vector<std::size_t> &dofs, const std::vector<double> &errors) {
    if (dofs.size() != errors.size()) throw std::invalid_argument("dofs and errors differ in length");
    std::vector<ErrorSample> s;
    for (std::size_t i = 0; i < dofs.size(); ++i) s.push_back({0.0, errors[i], errors[i], dofs[i]});
    return convergence_rate(s).l2;
  }, py::arg("dofs"), py::arg("errors"));

  // studies; configs travel as JSON-compatible Python objects
  m.def("list_studies", [] {
    std::vector<std::pair<std::string, std::string>> out;
    for (const auto &s : list_studies()) out.emplace_back(s.name, s.description);
    return out;
  });
  m.def("builtin_study", [](const std::string &name) { return to_python(builtin_study(name)); }, py::arg("name"));
  m.def("resolve_config", [](const py::object &cfg, bool paper_fidelity) {
    return to_python(to_json(parse_config(resolve_config(from_python(cfg), paper_fidelity))));
  }, py::arg("config"), py::arg("paper_fidelity") = false);
  m.def("validate_config", [](const py::object &cfg, bool paper_fidelity) {
    const ValidationReport r = validate_config(resolve_config(from_python(cfg), paper_fidelity));
    py::dict d;
    d["ok"] = r.ok;
    d["errors"] = r.errors;
    d["warnings"] = r.warnings;
    return d;
  }, py::arg("config"), py::arg("paper_fidelity") = false);
  m.def("run_study", [](const py::object &cfg, const std::filesystem::path &out, std::size_t threads,
                        bool paper_fidelity) {
    const StudyConfig c = parse_config(resolve_config(from_python(cfg), paper_fidelity));
    StudyResult r;
    {
      py::gil_scoped_release release;
      r = c.problem == ProblemKind::Riemann ? run_riemann_gallery(c, out) : run_study(c, out, {threads});
    }
    return to_python(r.manifest);
  }, py::arg("config"), py::arg("out"), py::arg("threads") = 1, py::arg("paper_fidelity") = false,
        "Runs a study and returns its manifest");
}
