#include "gfem/linear_solver.hpp"

#include <Eigen/SparseLU>

#include <cmath>
#include <limits>

namespace gfem {

namespace {

double energy_ratio(const Matrix &a, const Vector &e, const Vector &c) {
  const double num = std::abs(e.dot(a * e));
  const double den = std::abs(c.dot(a * c));
  if (den == 0.0) return num == 0.0 ? 0.0 : std::numeric_limits<double>::infinity();
  return num / den;
}

} // namespace

LinearSolveResult linear_solve(const Matrix &a_raw, const Vector &b_raw, const LinearSolveConfig &cfg) {
  const Eigen::Index n = a_raw.rows();
  if (a_raw.cols() != n || b_raw.size() != n) {
    throw std::invalid_argument("linear_solve: dimension mismatch");
  }
  LinearSolveResult result;
  if (b_raw.isZero(0.0)) {
    result.solution = Vector::Zero(n);
    result.ratio_history.push_back(0.0);
    return result;
  }

  Vector t(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double d = a_raw.coeff(i, i);
    if (d == 0.0 || !std::isfinite(d)) {
      throw LinearSolveError("linear_solve: diagonal entry " + std::to_string(i) +
                                 " is zero or not finite; scaling undefined",
                             Vector::Zero(n), std::numeric_limits<double>::quiet_NaN());
    }
    t[i] = 1.0 / std::sqrt(std::abs(d));
  }

  Matrix a = t.asDiagonal() * a_raw * t.asDiagonal();
  a.makeCompressed();
  const Vector b = t.cwiseProduct(b_raw);

  Matrix identity(n, n);
  identity.setIdentity();
  Matrix perturbed = a + cfg.perturbation * identity;
  perturbed.makeCompressed();

  Eigen::SparseLU<Matrix, Eigen::COLAMDOrdering<int>> lu;
  lu.compute(perturbed);
  if (lu.info() != Eigen::Success) {
    throw LinearSolveError("linear_solve: factorization of the perturbed matrix failed: " +
                               lu.lastErrorMessage(),
                           Vector::Zero(n), std::numeric_limits<double>::quiet_NaN());
  }

  Vector c = lu.solve(b);
  Vector e = lu.solve(b - a * c);
  double ratio = energy_ratio(a, e, c);
  result.ratio_history.push_back(ratio);

  while (ratio > cfg.criterion) {
    if (!std::isfinite(ratio) || result.refinements >= cfg.max_refinements) {
      throw LinearSolveError("linear_solve: energy criterion not met after " +
                                 std::to_string(result.refinements) + " refinements (ratio " +
                                 std::to_string(ratio) + ")",
                             t.cwiseProduct(c + e), ratio);
    }
    c += e;
    e = lu.solve(b - a * c);
    ratio = energy_ratio(a, e, c);
    result.ratio_history.push_back(ratio);
    ++result.refinements;
  }

  result.energy_ratio = ratio;
  result.solution = t.cwiseProduct(c + e);
  return result;
}

LinearSolveResult linear_solve(const DenseMatrix &a, const Vector &b, const LinearSolveConfig &cfg) {
  const Matrix sparse = a.sparseView(0.0, 0.0);
  return linear_solve(sparse, b, cfg);
}

} // namespace gfem
