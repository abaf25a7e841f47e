#pragma once

#include "gfem/assembly.hpp"
#include "gfem/enrichment.hpp"
#include "gfem/linalg.hpp"
#include "gfem/linear_solver.hpp"

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfem {

/// Burgers problem u_t + u u_x - nu u_xx = 0 with initial and boundary data.
struct Problem {
  double nu = 0.0;
  ScalarFunction u_ic;
  std::vector<BoundaryCondition> dirichlet;
  std::vector<BoundaryCondition> neumann;
};

struct NewtonConfig {
  /// Stop when ||eps||_2 / max(||c||_2, 1) <= tol.
  double tol = 1e-10;
  std::size_t max_iters = 25;
  /// When false, hitting max_iters returns the last iterate instead of
  /// throwing (single-linearization mode uses max_iters = 1).
  bool require_convergence = true;
};

struct TimeConfig {
  double dt = 1e-3;
  double t_end = 1.0;
  std::vector<double> snapshot_times;

  /// Number of steps; throws unless dt divides t_end to 1e-12.
  std::size_t steps() const;
  /// Step index of a requested time (nearest step).
  std::size_t step_of(double t) const;
};

struct SolverOptions {
  NewtonConfig newton;
  LinearSolveConfig linear;
  /// beta = beta_scale * max diag((2/dt) M + K).
  double beta_scale = 1e8;
  /// Gauss points per element; 0 selects auto_quadrature_points(h).
  std::size_t quadrature_points = 0;
};

struct NewtonResult {
  Vector solution;
  std::size_t iterations = 0;
  bool converged = false;
  double last_correction = 0.0;
  std::vector<double> corrections;
  std::size_t max_refinements = 0;
  double max_energy_ratio = 0.0;
};

class NewtonError : public std::runtime_error {
public:
  NewtonError(const std::string &what, std::size_t iterations, double last_correction)
      : std::runtime_error(what), iterations_(iterations), last_correction_(last_correction) {}
  std::size_t iterations() const { return iterations_; }
  double last_correction() const { return last_correction_; }

private:
  std::size_t iterations_;
  double last_correction_;
};

/// Time-independent matrices of one Crank-Nicolson step.
struct StepMatrices {
  Matrix mass;
  Matrix stiffness;
  Matrix penalty;
};

/// Boundary loads of one step: f_N(t^n), f_N(t^{n+1}), f_D(t^{n+1}).
struct StepLoads {
  Vector neumann_old;
  Vector neumann_new;
  Vector dirichlet_new;
};

/// Crank-Nicolson right-hand side built from the previous state c^n.
Vector crank_nicolson_rhs(const QuadratureTable &table, const StepMatrices &mats,
                          const StepLoads &loads, const Vector &c_old, double dt);

/// R(c) = ((2/dt) M + K + M_D) c + A(c) c - rhs.
Vector crank_nicolson_residual(const QuadratureTable &table, const StepMatrices &mats,
                               const Vector &rhs, const Vector &c, double dt);

/// dR/dc = (2/dt) M + K + M_D + A(c) + Atilde(c).
Matrix crank_nicolson_jacobian(const QuadratureTable &table, const StepMatrices &mats,
                               const Vector &c, double dt);

/// Advances c^n one step by Newton iteration, re-linearizing about each
/// iterate.
NewtonResult newton_solve_timestep(const QuadratureTable &table, const StepMatrices &mats,
                                   const StepLoads &loads, const Vector &c_old, double dt,
                                   const NewtonConfig &newton, const LinearSolveConfig &linear);

struct SolutionHistory {
  std::vector<double> times;
  std::vector<Vector> coefficients;
  /// Newton iterations of every step taken (index n -> step n+1).
  std::vector<std::size_t> newton_iterations;
  std::size_t max_linear_refinements = 0;
  double max_energy_ratio = 0.0;
  double beta = 0.0;
  std::size_t quadrature_points = 0;

  /// Snapshot whose time is closest to t.
  std::size_t snapshot_index(double t) const;
};

class SimulationError : public std::runtime_error {
public:
  SimulationError(const std::string &what, SolutionHistory partial, std::size_t failed_step)
      : std::runtime_error(what), partial_(std::move(partial)), failed_step_(failed_step) {}
  const SolutionHistory &partial() const { return partial_; }
  std::size_t failed_step() const { return failed_step_; }

private:
  SolutionHistory partial_;
  std::size_t failed_step_;
};

/**
 * Pre-assembled Burgers system on a GFEM space: mass, stiffness and penalty
 * matrices are built once; advection terms are reassembled per Newton
 * iterate.
 */
class BurgersSystem {
public:
  BurgersSystem(const GfemSpace &space, Problem problem, double dt, SolverOptions options = {});

  const GfemSpace &space() const { return *space_; }
  const Problem &problem() const { return problem_; }
  const QuadratureTable &table() const { return *table_; }
  const StepMatrices &matrices() const { return mats_; }
  double dt() const { return dt_; }
  double beta() const { return beta_; }
  std::size_t quadrature_points() const { return quad_points_; }

  Vector initial_coefficients() const;
  StepLoads loads(double t_old, double t_new) const;
  NewtonResult step(const Vector &c_old, double t_old) const;

private:
  const GfemSpace *space_;
  Problem problem_;
  double dt_;
  SolverOptions options_;
  std::size_t quad_points_;
  std::unique_ptr<QuadratureTable> table_;
  StepMatrices mats_;
  double beta_ = 0.0;
};

SolutionHistory run_simulation(const Problem &problem, const GfemSpace &space, const TimeConfig &time,
                               const SolverOptions &options = {});

/// u_h(x) and u_h'(x) at a stored snapshot.
ShapeEval evaluate_solution(const SolutionHistory &history, const GfemSpace &space, double x,
                            std::size_t snapshot);

} // namespace gfem
