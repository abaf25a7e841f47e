#include "gfem/solver.hpp"

#include <algorithm>
#include <cmath>

namespace gfem {

std::size_t TimeConfig::steps() const {
  if (!(dt > 0.0) || !(t_end > 0.0)) {
    throw std::invalid_argument("time config: dt and t_end must be positive");
  }
  const double ratio = t_end / dt;
  const double n = std::round(ratio);
  if (n < 1.0 || std::abs(n * dt - t_end) > 1e-12 * std::max(1.0, t_end)) {
    throw std::invalid_argument("time config: dt must divide t_end");
  }
  return static_cast<std::size_t>(n);
}

std::size_t TimeConfig::step_of(double t) const {
  if (t < -1e-12 || t > t_end + 1e-12) {
    throw std::invalid_argument("time config: snapshot time " + std::to_string(t) + " outside [0, t_end]");
  }
  return static_cast<std::size_t>(std::llround(std::max(t, 0.0) / dt));
}

std::size_t SolutionHistory::snapshot_index(double t) const {
  if (times.empty()) throw std::out_of_range("solution history is empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < times.size(); ++i) {
    if (std::abs(times[i] - t) < std::abs(times[best] - t)) best = i;
  }
  return best;
}

Vector crank_nicolson_rhs(const QuadratureTable &table, const StepMatrices &mats,
                          const StepLoads &loads, const Vector &c_old, double dt) {
  Vector rhs = (2.0 / dt) * (mats.mass * c_old) - mats.stiffness * c_old - advection_action(table, c_old);
  rhs += loads.neumann_old + loads.neumann_new + loads.dirichlet_new;
  return rhs;
}

Vector crank_nicolson_residual(const QuadratureTable &table, const StepMatrices &mats,
                               const Vector &rhs, const Vector &c, double dt) {
  return (2.0 / dt) * (mats.mass * c) + mats.stiffness * c + mats.penalty * c +
         advection_action(table, c) - rhs;
}

Matrix crank_nicolson_jacobian(const QuadratureTable &table, const StepMatrices &mats,
                               const Vector &c, double dt) {
  Matrix j = (2.0 / dt) * mats.mass + mats.stiffness + mats.penalty;
  j += assemble_advection_jacobian(table, c);
  j.makeCompressed();
  return j;
}

NewtonResult newton_solve_timestep(const QuadratureTable &table, const StepMatrices &mats,
                                   const StepLoads &loads, const Vector &c_old, double dt,
                                   const NewtonConfig &newton, const LinearSolveConfig &linear) {
  if (!(dt > 0.0)) throw std::invalid_argument("newton_solve_timestep: dt must be positive");
  if (newton.max_iters < 1 || !(newton.tol > 0.0)) {
    throw std::invalid_argument("newton_solve_timestep: invalid Newton configuration");
  }
  const Vector rhs = crank_nicolson_rhs(table, mats, loads, c_old, dt);
  NewtonResult result;
  result.solution = c_old;
  Vector &c = result.solution;
  while (result.iterations < newton.max_iters) {
    const Vector residual = crank_nicolson_residual(table, mats, rhs, c, dt);
    const Matrix jac = crank_nicolson_jacobian(table, mats, c, dt);
    const LinearSolveResult lin = linear_solve(jac, -residual, linear);
    result.max_refinements = std::max(result.max_refinements, lin.refinements);
    result.max_energy_ratio = std::max(result.max_energy_ratio, lin.energy_ratio);
    c += lin.solution;
    ++result.iterations;
    result.last_correction = lin.solution.norm() / std::max(c.norm(), 1.0);
    result.corrections.push_back(result.last_correction);
    if (!c.allFinite()) {
      throw NewtonError("Newton iterate is not finite", result.iterations, result.last_correction);
    }
    if (result.last_correction <= newton.tol) {
      result.converged = true;
      break;
    }
  }
  if (!result.converged && newton.require_convergence) {
    throw NewtonError("Newton did not converge in " + std::to_string(result.iterations) +
                          " iterations (last relative correction " +
                          std::to_string(result.last_correction) + ")",
                      result.iterations, result.last_correction);
  }
  return result;
}

BurgersSystem::BurgersSystem(const GfemSpace &space, Problem problem, double dt, SolverOptions options)
    : space_(&space), problem_(std::move(problem)), dt_(dt), options_(options) {
  if (!(dt_ > 0.0)) throw std::invalid_argument("BurgersSystem: dt must be positive");
  if (!(problem_.nu >= 0.0)) throw std::invalid_argument("BurgersSystem: nu must be non-negative");
  if (!problem_.u_ic) throw std::invalid_argument("BurgersSystem: initial condition missing");
  quad_points_ = options_.quadrature_points == 0 ? auto_quadrature_points(space.mesh().h())
                                                 : options_.quadrature_points;
  table_ = std::make_unique<QuadratureTable>(space, cached_gauss_rule(quad_points_));
  mats_.mass = assemble_mass(*table_);
  mats_.stiffness = assemble_stiffness(*table_, problem_.nu);
  const Matrix base = (2.0 / dt_) * mats_.mass + mats_.stiffness;
  beta_ = options_.beta_scale * max_diagonal(base);
  std::vector<double> xs;
  for (const auto &bc : problem_.dirichlet) xs.push_back(bc.x);
  if (xs.empty()) {
    mats_.penalty = Matrix(mats_.mass.rows(), mats_.mass.cols());
  } else {
    mats_.penalty = boundary_penalty_matrix(space, xs, beta_);
  }
  // Validates that Gamma_D and Gamma_N are disjoint.
  (void)assemble_neumann(space, problem_.neumann, problem_.dirichlet, problem_.nu, 0.0);
}

Vector BurgersSystem::initial_coefficients() const {
  const ProjectionPenalty pen{problem_.dirichlet, options_.beta_scale};
  return project_initial_condition(*table_, problem_.u_ic, &pen, options_.linear);
}

StepLoads BurgersSystem::loads(double t_old, double t_new) const {
  StepLoads loads;
  loads.neumann_old = assemble_neumann(*space_, problem_.neumann, problem_.dirichlet, problem_.nu, t_old);
  loads.neumann_new = assemble_neumann(*space_, problem_.neumann, problem_.dirichlet, problem_.nu, t_new);
  loads.dirichlet_new = problem_.dirichlet.empty()
                            ? Vector::Zero(static_cast<Eigen::Index>(space_->size()))
                            : boundary_penalty_load(*space_, problem_.dirichlet, t_new, beta_);
  return loads;
}

NewtonResult BurgersSystem::step(const Vector &c_old, double t_old) const {
  return newton_solve_timestep(*table_, mats_, loads(t_old, t_old + dt_), c_old, dt_,
                               options_.newton, options_.linear);
}

SolutionHistory run_simulation(const Problem &problem, const GfemSpace &space, const TimeConfig &time,
                               const SolverOptions &options) {
  const std::size_t n_steps = time.steps();
  std::vector<std::size_t> snap_steps;
  for (double t : time.snapshot_times) snap_steps.push_back(time.step_of(t));
  std::sort(snap_steps.begin(), snap_steps.end());
  snap_steps.erase(std::unique(snap_steps.begin(), snap_steps.end()), snap_steps.end());

  const BurgersSystem system(space, problem, time.dt, options);
  SolutionHistory history;
  history.beta = system.beta();
  history.quadrature_points = system.quadrature_points();
  history.newton_iterations.reserve(n_steps);

  Vector c;
  try {
    c = system.initial_coefficients();
  } catch (const std::exception &ex) {
    throw SimulationError(std::string("initial projection failed: ") + ex.what(), history, 0);
  }

  auto next_snap = snap_steps.begin();
  const auto record = [&](std::size_t step) {
    while (next_snap != snap_steps.end() && *next_snap == step) {
      history.times.push_back(static_cast<double>(step) * time.dt);
      history.coefficients.push_back(c);
      ++next_snap;
    }
  };
  record(0);
  for (std::size_t n = 0; n < n_steps; ++n) {
    const double t_old = static_cast<double>(n) * time.dt;
    try {
      const NewtonResult r = system.step(c, t_old);
      c = r.solution;
      history.newton_iterations.push_back(r.iterations);
      history.max_linear_refinements = std::max(history.max_linear_refinements, r.max_refinements);
      history.max_energy_ratio = std::max(history.max_energy_ratio, r.max_energy_ratio);
    } catch (const std::exception &ex) {
      throw SimulationError("step " + std::to_string(n + 1) + " failed: " + ex.what(), history, n + 1);
    }
    record(n + 1);
  }
  return history;
}

ShapeEval evaluate_solution(const SolutionHistory &history, const GfemSpace &space, double x,
                            std::size_t snapshot) {
  if (snapshot >= history.coefficients.size()) {
    throw std::out_of_range("evaluate_solution: snapshot index out of range");
  }
  const Vector &c = history.coefficients[snapshot];
  return space.evaluate({c.data(), static_cast<std::size_t>(c.size())}, x);
}

} // namespace gfem
