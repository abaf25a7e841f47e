#include "gfem/assembly.hpp"

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gfem {

QuadratureTable::QuadratureTable(const GfemSpace &space, const QuadRule &rule)
    : space_(&space), n_points_(rule.size()) {
  const Mesh1D &mesh = space.mesh();
  const std::size_t n_el = mesh.n_elements();
  weights_.resize(n_el * n_points_);
  xs_.resize(n_el * n_points_);
  offsets_.resize(n_el * n_points_ + 1);
  std::size_t total = 0;
  for (std::size_t e = 0; e < n_el; ++e) total += space.element_dofs(e).size() * n_points_;
  values_.reserve(total);
  derivs_.reserve(total);

  for (std::size_t e = 0; e < n_el; ++e) {
    const double mid = 0.5 * (mesh.element_left(e) + mesh.element_right(e));
    const double jac = 0.5 * mesh.element_size(e);
    const auto dofs = space.element_dofs(e);
    for (std::size_t q = 0; q < n_points_; ++q) {
      const std::size_t k = e * n_points_ + q;
      const double x = mid + jac * rule.points[q];
      weights_[k] = rule.weights[q] * jac;
      xs_[k] = x;
      offsets_[k] = values_.size();
      for (std::size_t d : dofs) {
        const ShapeEval s = space.eval_on_element(d, e, x);
        values_.push_back(s.value);
        derivs_.push_back(s.derivative);
      }
    }
  }
  offsets_.back() = values_.size();
}

std::span<const double> QuadratureTable::values(std::size_t e, std::size_t q) const {
  const std::size_t k = e * n_points_ + q;
  return {values_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
}

std::span<const double> QuadratureTable::derivatives(std::size_t e, std::size_t q) const {
  const std::size_t k = e * n_points_ + q;
  return {derivs_.data() + offsets_[k], offsets_[k + 1] - offsets_[k]};
}

namespace {

/// Generic element loop: kernel(w, phi, dphi, u, du, local) accumulates the
/// local k x k block, stored row-major.
template <class Kernel>
Matrix assemble_bilinear(const QuadratureTable &table, const Vector *c, Kernel kernel) {
  const GfemSpace &space = table.space();
  const std::size_t n = space.size();
  if (c != nullptr && static_cast<std::size_t>(c->size()) != n) {
    throw std::invalid_argument("assembly: coefficient vector length does not match the DOF map");
  }
  std::vector<Eigen::Triplet<double>> triplets;
  std::vector<double> local;
  for (std::size_t e = 0; e < space.mesh().n_elements(); ++e) {
    const auto dofs = space.element_dofs(e);
    const std::size_t k = dofs.size();
    local.assign(k * k, 0.0);
    for (std::size_t q = 0; q < table.n_points(); ++q) {
      const auto phi = table.values(e, q);
      const auto dphi = table.derivatives(e, q);
      double u = 0.0;
      double du = 0.0;
      if (c != nullptr) {
        for (std::size_t a = 0; a < k; ++a) {
          u += (*c)[dofs[a]] * phi[a];
          du += (*c)[dofs[a]] * dphi[a];
        }
      }
      kernel(table.weight(e, q), phi, dphi, u, du, local);
    }
    for (std::size_t a = 0; a < k; ++a) {
      for (std::size_t b = 0; b < k; ++b) {
        triplets.emplace_back(static_cast<int>(dofs[a]), static_cast<int>(dofs[b]), local[a * k + b]);
      }
    }
  }
  Matrix m(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(n));
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

void check_finite(const Vector &c) {
  if (!c.allFinite()) throw std::invalid_argument("assembly: coefficient vector is not finite");
}

} // namespace

Matrix assemble_mass(const QuadratureTable &table) {
  return assemble_bilinear(table, nullptr,
                           [](double w, auto phi, auto, double, double, std::vector<double> &loc) {
                             const std::size_t k = phi.size();
                             for (std::size_t a = 0; a < k; ++a)
                               for (std::size_t b = 0; b < k; ++b) loc[a * k + b] += w * phi[a] * phi[b];
                           });
}

Matrix assemble_stiffness(const QuadratureTable &table, double nu) {
  if (!(nu >= 0.0)) throw std::invalid_argument("assemble_stiffness: nu must be non-negative");
  return assemble_bilinear(table, nullptr,
                           [nu](double w, auto, auto dphi, double, double, std::vector<double> &loc) {
                             const std::size_t k = dphi.size();
                             for (std::size_t a = 0; a < k; ++a)
                               for (std::size_t b = 0; b < k; ++b)
                                 loc[a * k + b] += nu * w * dphi[a] * dphi[b];
                           });
}

Matrix assemble_advection(const QuadratureTable &table, const Vector &c) {
  check_finite(c);
  return assemble_bilinear(table, &c,
                           [](double w, auto phi, auto dphi, double u, double, std::vector<double> &loc) {
                             const std::size_t k = phi.size();
                             for (std::size_t a = 0; a < k; ++a)
                               for (std::size_t b = 0; b < k; ++b)
                                 loc[a * k + b] += w * phi[a] * u * dphi[b];
                           });
}

Matrix assemble_advection_tangent(const QuadratureTable &table, const Vector &c) {
  check_finite(c);
  return assemble_bilinear(table, &c,
                           [](double w, auto phi, auto, double, double du, std::vector<double> &loc) {
                             const std::size_t k = phi.size();
                             for (std::size_t a = 0; a < k; ++a)
                               for (std::size_t b = 0; b < k; ++b)
                                 loc[a * k + b] += w * phi[a] * phi[b] * du;
                           });
}

Matrix assemble_advection_jacobian(const QuadratureTable &table, const Vector &c) {
  check_finite(c);
  return assemble_bilinear(
      table, &c, [](double w, auto phi, auto dphi, double u, double du, std::vector<double> &loc) {
        const std::size_t k = phi.size();
        for (std::size_t a = 0; a < k; ++a)
          for (std::size_t b = 0; b < k; ++b)
            loc[a * k + b] += w * phi[a] * (u * dphi[b] + du * phi[b]);
      });
}

Vector advection_action(const QuadratureTable &table, const Vector &c) {
  const GfemSpace &space = table.space();
  if (static_cast<std::size_t>(c.size()) != space.size()) {
    throw std::invalid_argument("advection_action: coefficient vector length does not match the DOF map");
  }
  Vector out = Vector::Zero(c.size());
  for (std::size_t e = 0; e < space.mesh().n_elements(); ++e) {
    const auto dofs = space.element_dofs(e);
    for (std::size_t q = 0; q < table.n_points(); ++q) {
      const auto phi = table.values(e, q);
      const auto dphi = table.derivatives(e, q);
      double u = 0.0;
      double du = 0.0;
      for (std::size_t a = 0; a < dofs.size(); ++a) {
        u += c[dofs[a]] * phi[a];
        du += c[dofs[a]] * dphi[a];
      }
      const double f = table.weight(e, q) * u * du;
      for (std::size_t a = 0; a < dofs.size(); ++a) out[dofs[a]] += f * phi[a];
    }
  }
  return out;
}

Vector assemble_load(const QuadratureTable &table, const ScalarFunction &f) {
  const GfemSpace &space = table.space();
  Vector out = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  for (std::size_t e = 0; e < space.mesh().n_elements(); ++e) {
    const auto dofs = space.element_dofs(e);
    for (std::size_t q = 0; q < table.n_points(); ++q) {
      const auto phi = table.values(e, q);
      const double fw = table.weight(e, q) * f(table.x(e, q));
      for (std::size_t a = 0; a < dofs.size(); ++a) out[dofs[a]] += fw * phi[a];
    }
  }
  return out;
}

Matrix assemble_mass(const GfemSpace &space, const QuadRule &rule) {
  return assemble_mass(QuadratureTable(space, rule));
}

Matrix assemble_stiffness(const GfemSpace &space, double nu, const QuadRule &rule) {
  return assemble_stiffness(QuadratureTable(space, rule), nu);
}

Matrix assemble_advection(const GfemSpace &space, const Vector &c, const QuadRule &rule) {
  return assemble_advection(QuadratureTable(space, rule), c);
}

Matrix assemble_advection_tangent(const GfemSpace &space, const Vector &c, const QuadRule &rule) {
  return assemble_advection_tangent(QuadratureTable(space, rule), c);
}

namespace {

struct PointShapes {
  std::vector<std::size_t> dofs;
  std::vector<double> values;
};

PointShapes shapes_at(const GfemSpace &space, double x) {
  if (!space.mesh().contains(x)) {
    throw std::out_of_range("boundary point " + std::to_string(x) + " lies outside the domain");
  }
  const std::size_t e = space.mesh().locate(x);
  PointShapes ps;
  for (std::size_t d : space.element_dofs(e)) {
    const double v = space.eval_on_element(d, e, x).value;
    if (v != 0.0) {
      ps.dofs.push_back(d);
      ps.values.push_back(v);
    }
  }
  return ps;
}

void check_beta(double beta) {
  if (!(beta > 0.0) || !std::isfinite(beta)) {
    throw std::invalid_argument("penalty: beta must be positive and finite");
  }
}

} // namespace

Matrix boundary_penalty_matrix(const GfemSpace &space, std::span<const double> points, double beta) {
  check_beta(beta);
  std::vector<Eigen::Triplet<double>> triplets;
  for (double xb : points) {
    const PointShapes ps = shapes_at(space, xb);
    for (std::size_t a = 0; a < ps.dofs.size(); ++a)
      for (std::size_t b = 0; b < ps.dofs.size(); ++b)
        triplets.emplace_back(static_cast<int>(ps.dofs[a]), static_cast<int>(ps.dofs[b]),
                              beta * ps.values[a] * ps.values[b]);
  }
  const auto n = static_cast<Eigen::Index>(space.size());
  Matrix m(n, n);
  m.setFromTriplets(triplets.begin(), triplets.end());
  m.makeCompressed();
  return m;
}

PenaltyTerms assemble_boundary_penalty(const GfemSpace &space, std::span<const double> points,
                                       std::span<const double> g_values, double beta) {
  if (points.size() != g_values.size()) {
    throw std::invalid_argument("penalty: one boundary value per Dirichlet point is required");
  }
  PenaltyTerms terms{boundary_penalty_matrix(space, points, beta),
                     Vector::Zero(static_cast<Eigen::Index>(space.size()))};
  for (std::size_t i = 0; i < points.size(); ++i) {
    const PointShapes ps = shapes_at(space, points[i]);
    for (std::size_t a = 0; a < ps.dofs.size(); ++a) terms.load[ps.dofs[a]] += beta * ps.values[a] * g_values[i];
  }
  return terms;
}

Vector boundary_penalty_load(const GfemSpace &space, std::span<const BoundaryCondition> dirichlet,
                             double t, double beta) {
  check_beta(beta);
  Vector load = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  for (const auto &bc : dirichlet) {
    const PointShapes ps = shapes_at(space, bc.x);
    const double g = bc.value(t);
    for (std::size_t a = 0; a < ps.dofs.size(); ++a) load[ps.dofs[a]] += beta * ps.values[a] * g;
  }
  return load;
}

Vector assemble_neumann(const GfemSpace &space, std::span<const BoundaryCondition> neumann,
                        std::span<const BoundaryCondition> dirichlet, double nu, double t) {
  const double tol = 1e-12 * space.mesh().length();
  for (const auto &n : neumann) {
    for (const auto &d : dirichlet) {
      if (std::abs(n.x - d.x) <= tol) {
        throw std::invalid_argument("boundary x = " + std::to_string(n.x) +
                                    " is both Dirichlet and Neumann; Gamma_D and Gamma_N must be disjoint");
      }
    }
  }
  Vector f = Vector::Zero(static_cast<Eigen::Index>(space.size()));
  for (const auto &n : neumann) {
    const PointShapes ps = shapes_at(space, n.x);
    const double g = nu * n.value(t);
    for (std::size_t a = 0; a < ps.dofs.size(); ++a) f[ps.dofs[a]] += g * ps.values[a];
  }
  return f;
}

double max_diagonal(const Matrix &m) {
  double best = 0.0;
  for (Eigen::Index i = 0; i < std::min(m.rows(), m.cols()); ++i) best = std::max(best, m.coeff(i, i));
  return best;
}

Vector project_initial_condition(const QuadratureTable &table, const ScalarFunction &u_ic,
                                 const ProjectionPenalty *penalty, const LinearSolveConfig &linear) {
  const GfemSpace &space = table.space();
  Matrix system = assemble_mass(table);
  Vector rhs = assemble_load(table, u_ic);
  if (!rhs.allFinite()) throw std::invalid_argument("project_initial_condition: u_ic is not finite");

  if (penalty != nullptr && !penalty->dirichlet.empty()) {
    const double beta = penalty->beta_scale * max_diagonal(system);
    std::vector<double> xs;
    for (const auto &bc : penalty->dirichlet) xs.push_back(bc.x);
    system += boundary_penalty_matrix(space, xs, beta);
    rhs += boundary_penalty_load(space, penalty->dirichlet, 0.0, beta);
  }

  // Linear dependence shows up as a vanishing pivot of the unit-diagonal
  // scaled (SPD) system.
  Vector t(system.rows());
  for (Eigen::Index i = 0; i < system.rows(); ++i) {
    const double d = system.coeff(i, i);
    if (!(d > 0.0)) throw SingularSystemError("project_initial_condition: shape function " + std::to_string(i) + " has zero norm");
    t[i] = 1.0 / std::sqrt(d);
  }
  const Matrix scaled = t.asDiagonal() * system * t.asDiagonal();
  Eigen::SimplicialLDLT<Matrix> ldlt(scaled);
  if (ldlt.info() != Eigen::Success || ldlt.vectorD().minCoeff() <= 1e-14) {
    throw SingularSystemError(
        "project_initial_condition: mass system is singular; the shape functions are linearly dependent");
  }
  return linear_solve(system, rhs, linear).solution;
}

} // namespace gfem
