#pragma once

#include "gfem/enrichment.hpp"
#include "gfem/linalg.hpp"
#include "gfem/linear_solver.hpp"
#include "gfem/quadrature.hpp"

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace gfem {

using ScalarFunction = std::function<double(double)>;
/// g(t) at a fixed boundary point.
using TimeFunction = std::function<double(double)>;

struct BoundaryCondition {
  double x = 0.0;
  TimeFunction value;
};

/**
 * Shape function values and derivatives of every element's DOFs at every
 * quadrature point, computed once per (space, rule) pair. Enrichment
 * evaluation (exp, tanh) dominates assembly cost otherwise.
 */
class QuadratureTable {
public:
  QuadratureTable(const GfemSpace &space, const QuadRule &rule);

  const GfemSpace &space() const { return *space_; }
  std::size_t n_points() const { return n_points_; }

  /// Physical weight (reference weight times Jacobian) of point q on element e.
  double weight(std::size_t e, std::size_t q) const { return weights_[e * n_points_ + q]; }
  double x(std::size_t e, std::size_t q) const { return xs_[e * n_points_ + q]; }
  /// Values of element e's DOFs at point q, in element_dofs(e) order.
  std::span<const double> values(std::size_t e, std::size_t q) const;
  std::span<const double> derivatives(std::size_t e, std::size_t q) const;

private:
  const GfemSpace *space_;
  std::size_t n_points_;
  std::vector<double> weights_;
  std::vector<double> xs_;
  std::vector<std::size_t> offsets_;  // per (e, q) start in values_/derivs_
  std::vector<double> values_;
  std::vector<double> derivs_;
};

Matrix assemble_mass(const QuadratureTable &table);
Matrix assemble_stiffness(const QuadratureTable &table, double nu);
/// A(c)_ij = int phi_i u_h phi_j'.
Matrix assemble_advection(const QuadratureTable &table, const Vector &c);
/// Atilde(c)_ij = int phi_i phi_j u_h'.
Matrix assemble_advection_tangent(const QuadratureTable &table, const Vector &c);
/// A(c) + Atilde(c) in one pass: the derivative of c -> A(c) c.
Matrix assemble_advection_jacobian(const QuadratureTable &table, const Vector &c);
/// A(c) c without forming the matrix.
Vector advection_action(const QuadratureTable &table, const Vector &c);
/// int phi_i f.
Vector assemble_load(const QuadratureTable &table, const ScalarFunction &f);

Matrix assemble_mass(const GfemSpace &space, const QuadRule &rule);
Matrix assemble_stiffness(const GfemSpace &space, double nu, const QuadRule &rule);
Matrix assemble_advection(const GfemSpace &space, const Vector &c, const QuadRule &rule);
Matrix assemble_advection_tangent(const GfemSpace &space, const Vector &c, const QuadRule &rule);

struct PenaltyTerms {
  Matrix matrix;
  Vector load;
};

/// Point-evaluation penalty: M(i,j) = beta sum_b phi_i(x_b) phi_j(x_b),
/// f(i) = beta sum_b phi_i(x_b) g_b.
PenaltyTerms assemble_boundary_penalty(const GfemSpace &space, std::span<const double> points,
                                       std::span<const double> g_values, double beta);

Matrix boundary_penalty_matrix(const GfemSpace &space, std::span<const double> points, double beta);
Vector boundary_penalty_load(const GfemSpace &space, std::span<const BoundaryCondition> dirichlet,
                             double t, double beta);

/// nu * g_N(x_b, t) * phi_i(x_b), summed over Neumann points; g_N is the
/// outward normal derivative. Throws when a Neumann point is also Dirichlet.
Vector assemble_neumann(const GfemSpace &space, std::span<const BoundaryCondition> neumann,
                        std::span<const BoundaryCondition> dirichlet, double nu, double t);

struct ProjectionPenalty {
  std::span<const BoundaryCondition> dirichlet;
  double beta_scale = 1e8;
};

class SingularSystemError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// Solves (M [+ M_GD]) c = int phi u_ic [+ f_GD(0)] with the same
/// scale-relative penalty used for time stepping (beta = beta_scale * max
/// diag M). Throws SingularSystemError when the shape set is linearly
/// dependent on the constrained system.
Vector project_initial_condition(const QuadratureTable &table, const ScalarFunction &u_ic,
                                 const ProjectionPenalty *penalty,
                                 const LinearSolveConfig &linear = {});

double max_diagonal(const Matrix &m);

} // namespace gfem
