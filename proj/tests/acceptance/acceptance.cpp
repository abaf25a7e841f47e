// End-to-end acceptance checks at desk-scale settings (reference 1000
// elements, dt = 1/1000, grids {11, 23, 47, 95}). One line per criterion.

#include "gfem/study.hpp"
#include "support/plain_fem.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <numbers>
#include <random>
#include <sstream>
#include <string>

using namespace gfem;
using nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char *f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

StudyConfig study(const json &overrides) { return parse_config(resolve_config(overrides)); }

const EnrichmentSet &find_set(const StudyConfig &cfg, const std::string &label) {
  for (const auto &s : cfg.sets) {
    if (s.label == label) return s;
  }
  throw std::invalid_argument("no enrichment set " + label);
}

struct CellRun {
  std::unique_ptr<GfemSpace> space;
  SolutionHistory history;
};

CellRun run_cell(const StudyConfig &cfg, double nu, const std::string &label, std::size_t n,
                 std::vector<double> snapshots) {
  const Mesh1D mesh = build_uniform_mesh(n, 0.0, 1.0);
  CellRun run;
  run.space = std::make_unique<GfemSpace>(mesh, resolve_rules(find_set(cfg, label), cfg.problem, nu, mesh),
                                          EnrichmentOptions{cfg.scaling, cfg.exclude_boundary_nodes});
  TimeConfig time{cfg.dt, *std::max_element(snapshots.begin(), snapshots.end()), snapshots};
  run.history = run_simulation(make_problem(cfg, nu), *run.space, time, cfg.solver);
  return run;
}

ErrorSample error_at(const CellRun &run, const ReferenceSolution &ref, double t) {
  return error_time_series(run.history, *run.space, ref, {t})[0];
}

Outcome partition_of_unity() {
  const Mesh1D mesh = build_uniform_mesh(95, 0.0, 1.0);
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> dist(0.0, 1.0);
  double worst = 0.0, worst_d = 0.0;
  for (int s = 0; s < 10000; ++s) {
    const double x = dist(rng);
    const double frac = x / mesh.h() - std::floor(x / mesh.h());
    double sum = 0.0, dsum = 0.0;
    for (std::size_t a = 0; a < mesh.n_nodes(); ++a) {
      const HatEval e = hat_eval(mesh, a, x);
      sum += e.value;
      dsum += e.derivative;
    }
    worst = std::max(worst, std::abs(sum - 1.0));
    if (frac > 1e-6 && frac < 1.0 - 1e-6) worst_d = std::max(worst_d, std::abs(dsum));
  }
  return {worst < 1e-12 && worst_d < 1e-10,
          "max|sum phi - 1| = " + fmt("%.1e", worst) + ", max|sum phi'| = " + fmt("%.1e", worst_d)};
}

Outcome element_matrices() {
  const double h = 0.173, nu = 0.37, u = -1.3;
  const GfemSpace space(build_uniform_mesh(1, 0.2, 0.2 + h), {});
  const QuadRule rule = gauss_rule(2);
  DenseMatrix m(2, 2), k(2, 2), a(2, 2);
  m << 2, 1, 1, 2;
  k << 1, -1, -1, 1;
  a << -1, 1, -1, 1;
  m *= h / 6.0;
  k *= nu / h;
  a *= u / 2.0;
  const double em = (DenseMatrix(assemble_mass(space, rule)) - m).cwiseAbs().maxCoeff();
  const double ek = (DenseMatrix(assemble_stiffness(space, nu, rule)) - k).cwiseAbs().maxCoeff();
  const double ea = (DenseMatrix(assemble_advection(space, Vector::Constant(2, u), rule)) - a).cwiseAbs().maxCoeff();
  const double worst = std::max({em, ek, ea});
  return {worst <= 1e-14, "max entry deviation M " + fmt("%.1e", em) + ", K " + fmt("%.1e", ek) + ", A " + fmt("%.1e", ea)};
}

Outcome jacobian() {
  const Mesh1D mesh = build_uniform_mesh(11, 0.0, 1.0);
  const auto [lo, hi] = local_domain_for_tanh(0.5, 0.02, mesh.h());
  const GfemSpace space(mesh, {{Exponential{100.0}, 0.8, 1.0}, {TanhShock{0.5, 0.02}, lo, hi}});
  const double dt = 1e-3, delta = 1e-6;
  const BurgersSystem sys(space, make_problem(ProblemKind::BoundaryLayer, 0.01), dt);
  const Vector c0 = sys.initial_coefficients();
  const Vector rhs = crank_nicolson_rhs(sys.table(), sys.matrices(), sys.loads(0.0, dt), c0, dt);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> d(-1.0, 1.0);
  double worst = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    Vector c(space.size()), e(space.size());
    for (auto &x : c) x = d(rng);
    for (auto &x : e) x = d(rng);
    const Vector fd = (crank_nicolson_residual(sys.table(), sys.matrices(), rhs, c + delta * e, dt) -
                       crank_nicolson_residual(sys.table(), sys.matrices(), rhs, c - delta * e, dt)) /
                      (2.0 * delta);
    const Vector je = crank_nicolson_jacobian(sys.table(), sys.matrices(), c, dt) * e;
    worst = std::max(worst, (fd - je).norm() / je.norm());
  }
  return {worst <= 1e-6, "worst relative FD deviation over 20 draws " + fmt("%.1e", worst)};
}

Outcome algorithm1() {
  DenseMatrix h(8, 8);
  for (int i = 0; i < 8; ++i)
    for (int j = 0; j < 8; ++j) h(i, j) = 1.0 / (i + j + 1);
  const LinearSolveResult r = linear_solve(h, (h * Vector::Ones(8)).eval());
  const double err = (r.solution - Vector::Ones(8)).cwiseAbs().maxCoeff();
  const LinearSolveResult id = linear_solve(DenseMatrix::Identity(8, 8), Vector::LinSpaced(8, 1.0, 8.0));
  return {r.energy_ratio <= 1e-10 && id.refinements == 0,
          "Hilbert ratio " + fmt("%.1e", r.energy_ratio) + " after " + std::to_string(r.refinements) +
              " refinements (max|x - 1| = " + fmt("%.1e", err) + "), identity refinements " +
              std::to_string(id.refinements)};
}

Outcome breaking_times() {
  const double tb_sine = *breaking_time([](double x) { return std::sin(kPi * x); }, 0.0, 1.0);
  const double tb_riemann = *breaking_time([](double x) { return riemann_ic(0.5, x); }, 0.0, 2.0);
  const double e1 = std::abs(tb_sine - 1.0 / kPi), e2 = std::abs(tb_riemann - 0.5);
  return {e1 <= 1e-10 && e2 <= 1e-10,
          "sin: t_b = " + fmt("%.12f", tb_sine) + ", Riemann: t_b = " + fmt("%.12f", tb_riemann)};
}

Outcome steady_constant() {
  const double nu = 1.0 / 1000.0;
  const double k = solve_steady_k(nu);
  const double res = std::abs(std::sqrt(2.0 * k) * std::tanh(std::sqrt(k / (8.0 * nu * nu))) - 1.0);
  return {std::abs(k - 0.5) <= 1e-4 && res < 1e-12, "k = " + fmt("%.15f", k) + ", residual " + fmt("%.1e", res)};
}

Outcome fem_rates() {
  const StudyConfig cfg = study({{"study", "example1-fem"}});
  const double nu = 0.1, t = 0.5;
  const FourierSolution ref(FourierParams{nu});
  std::vector<ErrorSample> samples;
  for (std::size_t n : cfg.grids) samples.push_back(error_at(run_cell(cfg, nu, "fem", n, {t}), ref, t));
  const ConvergenceRates r = convergence_rate(samples);
  const double l2 = r.l2.value_or(NAN), h1 = r.h1.value_or(NAN);
  return {l2 >= 1.7 && l2 <= 2.3 && h1 >= 0.7 && h1 <= 1.3,
          "rates L2 " + fmt("%.2f", l2) + ", H1 " + fmt("%.2f", h1)};
}

/// Sign changes of consecutive nodal differences over the elements that
/// intersect [lo, 1].
int sign_changes(const CellRun &run, double lo) {
  const Mesh1D &mesh = run.space->mesh();
  const Vector &c = run.history.coefficients.back();
  std::vector<double> diffs;
  for (std::size_t e = 0; e < mesh.n_elements(); ++e) {
    if (mesh.element_right(e) <= lo) continue;
    diffs.push_back(c[e + 1] - c[e]);
  }
  int changes = 0;
  for (std::size_t i = 1; i < diffs.size(); ++i) {
    if (diffs[i] * diffs[i - 1] < 0.0) ++changes;
  }
  return changes;
}

Outcome oscillation_onset() {
  const StudyConfig cfg = study({{"study", "example1-fem"}});
  const double nu = 0.01, t = 0.75;
  const int coarse = sign_changes(run_cell(cfg, nu, "fem", 11, {t}), 0.7);
  const int fine = sign_changes(run_cell(cfg, nu, "fem", 191, {t}), 0.7);
  // The fine solution rises to the boundary-layer peak and falls to zero: one
  // physical sign change.
  return {coarse >= 3 && fine <= 1, "sign changes in [0.7, 1]: 11 elements " + std::to_string(coarse) +
                                        ", 191 elements " + std::to_string(fine) + " (peak counts as 1)"};
}

Outcome exp_gfem_reduction() {
  const StudyConfig cfg = study({{"study", "example1-exp-gfem"}});
  const double nu = 0.01, t = 0.75;
  std::string note;
  const auto ref = build_reference(cfg, nu, &note);
  const double fem = error_at(run_cell(cfg, nu, "fem", 11, {t}), *ref, t).rel_l2;
  const double gfem = error_at(run_cell(cfg, nu, "exp", 11, {t}), *ref, t).rel_l2;
  return {gfem <= fem / 5.0, "rel. L2 FEM " + fmt("%.4f", fem) + ", GFEM " + fmt("%.2e", gfem) + " (ratio " +
                                 fmt("%.0f", fem / gfem) + ", reference " + ref->kind() + ")"};
}

Outcome inviscid_convergence() {
  const StudyConfig cfg = study({{"study", "example1-disc-gfem"}});
  const double t = 0.5;
  const auto ref = build_reference(cfg, 0.0);
  std::vector<double> fem, disc;
  for (std::size_t n : cfg.grids) {
    fem.push_back(error_at(run_cell(cfg, 0.0, "fem", n, {t}), *ref, t).rel_l2);
    disc.push_back(error_at(run_cell(cfg, 0.0, "disc", n, {t}), *ref, t).rel_l2);
  }
  bool fem_monotone = true, disc_monotone = true;
  for (std::size_t i = 1; i < fem.size(); ++i) {
    fem_monotone = fem_monotone && fem[i] < fem[i - 1];
    disc_monotone = disc_monotone && disc[i] < disc[i - 1];
  }
  std::string detail = "FEM";
  for (double e : fem) detail += " " + fmt("%.4f", e);
  detail += fem_monotone ? " (decreasing)" : " (not monotone)";
  detail += "; GFEM";
  for (double e : disc) detail += " " + fmt("%.4f", e);
  detail += disc_monotone ? " (decreasing)" : " (not monotone)";
  return {!fem_monotone && disc_monotone, detail};
}

Outcome shock_errors() {
  // A 5000-element reference: the desk-scale reference's own H1 error is
  // comparable to the GFEM errors being measured.
  const StudyConfig cfg = study({{"study", "example2-ss-gfem"}, {"reference", {{"elements", 5000}}}});
  const double t = 0.75;
  struct Case {
    double nu, fem_l2, fem_h1, gfem_h1;
  };
  bool ok = true;
  std::string detail;
  for (const Case &c : {Case{1.0 / 50, 0.0010, 0.044, 0.0013}, Case{1.0 / 100, 0.0027, 0.104, 0.0026}}) {
    const auto ref = build_reference(cfg, c.nu);
    const ErrorSample fem = error_at(run_cell(cfg, c.nu, "fem", 95, {t}), *ref, t);
    const ErrorSample ss = error_at(run_cell(cfg, c.nu, "ss", 95, {t}), *ref, t);
    const auto within = [](double v, double target, double factor) { return v >= target / factor && v <= target * factor; };
    ok = ok && within(fem.rel_l2, c.fem_l2, 2.0) && within(fem.rel_h1, c.fem_h1, 2.0) && within(ss.rel_h1, c.gfem_h1, 3.0);
    detail += (detail.empty() ? "" : "; ") + std::string("nu = 1/") + fmt("%.0f", 1.0 / c.nu) + ": FEM L2 " +
              fmt("%.3f%%", 100 * fem.rel_l2) + " H1 " + fmt("%.2f%%", 100 * fem.rel_h1) + ", GFEM H1 " +
              fmt("%.3f%%", 100 * ss.rel_h1);
  }
  return {ok, detail};
}

Outcome multi_rho() {
  const StudyConfig cfg = study({{"study", "example2-ss-rho"}});
  const double nu = 1.0 / 500;
  const std::vector<double> times = study_series_times(cfg);
  const auto ref = build_reference(cfg, nu);
  const auto max_h1 = [&](const std::string &label) {
    const CellRun run = run_cell(cfg, nu, label, 11, times);
    double worst = 0.0;
    for (const auto &s : error_time_series(run.history, *run.space, *ref, times)) worst = std::max(worst, s.rel_h1);
    return worst;
  };
  const double ss = max_h1("ss"), all = max_h1("ss-rho-all");
  return {all <= ss / 3.0, "max rel. H1: ss " + fmt("%.1f%%", 100 * ss) + ", ss+all rho " + fmt("%.1f%%", 100 * all) +
                               " (ratio " + fmt("%.2f", ss / all) + ")"};
}

Outcome fem_reduction() {
  const double nu = 0.01, dt = 1e-3;
  const GfemSpace space(build_uniform_mesh(11, 0.0, 1.0), {});
  TimeConfig time{dt, 50 * dt, {}};
  for (int k = 0; k <= 50; ++k) time.snapshot_times.push_back(k * dt);
  const SolutionHistory h = run_simulation(make_problem(ProblemKind::BoundaryLayer, nu), space, time);
  const plain_fem::Solver oracle(11, nu, dt, 0.0, 0.0);
  std::vector<double> c = oracle.project_sine();
  double worst = 0.0;
  for (int k = 0; k <= 50; ++k) {
    if (k > 0) c = oracle.step(c);
    for (std::size_t i = 0; i < c.size(); ++i) worst = std::max(worst, std::abs(h.coefficients[k][i] - c[i]));
  }
  return {worst <= 1e-10, "max coefficient deviation over 50 steps " + fmt("%.1e", worst)};
}

std::string slurp(const std::filesystem::path &p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

Outcome determinism() {
  const StudyConfig cfg = study({{"study", "example1-exp-gfem"},
                                 {"grids", {11, 23}},
                                 {"time", {{"t_end", 0.25}, {"snapshots", {0.0, 0.25}}}},
                                 {"error", {{"series_dt", 0.05}}},
                                 {"reference", {{"kind", "fine-fem"}, {"elements", 200}}}});
  const auto base = std::filesystem::temp_directory_path() / "gfem_acceptance_determinism";
  std::filesystem::remove_all(base);
  const StudyResult a = run_study(cfg, base / "a", {1});
  const StudyResult b = run_study(cfg, base / "b", {2});
  std::size_t files = 0, differing = 0;
  for (const auto &entry : std::filesystem::directory_iterator(base / "a")) {
    if (entry.path().extension() != ".csv") continue;
    ++files;
    if (slurp(entry.path()) != slurp(base / "b" / entry.path().filename())) ++differing;
  }
  std::filesystem::remove_all(base);
  return {a.ok && b.ok && files > 0 && differing == 0,
          std::to_string(files) + " CSV files compared (1 vs 2 threads), " + std::to_string(differing) + " differ"};
}

} // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"partition of unity", partition_of_unity},
      {"element matrices", element_matrices},
      {"Jacobian by central differences", jacobian},
      {"iterative refinement solver", algorithm1},
      {"breaking times", breaking_times},
      {"steady-state constant", steady_constant},
      {"FEM convergence rates, nu = 1/10", fem_rates},
      {"oscillation onset, nu = 1/100", oscillation_onset},
      {"exponential GFEM error reduction", exp_gfem_reduction},
      {"inviscid FEM vs discontinuous GFEM", inviscid_convergence},
      {"shock problem errors at 95 elements", shock_errors},
      {"multi-rho enrichment", multi_rho},
      {"FEM reduction vs independent FEM", fem_reduction},
      {"determinism", determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception &ex) {
      o = {false, std::string("exception: ") + ex.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failed;
    std::printf("%s  %2zu  %s: %s [%.1f s]\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(),
                o.detail.c_str(), secs);
    std::fflush(stdout);
  }
  std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
