#pragma once

#include "gfem/linalg.hpp"

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfem {

struct LinearSolveConfig {
  double perturbation = 1e-10;  // epsilon_1
  double criterion = 1e-10;     // epsilon_2
  std::size_t max_refinements = 200;
};

struct LinearSolveResult {
  Vector solution;
  std::size_t refinements = 0;
  /// |e^T A e / c^T A c| of the accepted iterate (scaled system).
  double energy_ratio = 0.0;
  /// Ratio observed at every check, starting with the initial solve.
  std::vector<double> ratio_history;
};

class LinearSolveError : public std::runtime_error {
public:
  LinearSolveError(const std::string &what, Vector last_iterate, double ratio)
      : std::runtime_error(what), last_iterate_(std::move(last_iterate)), ratio_(ratio) {}

  const Vector &last_iterate() const { return last_iterate_; }
  double ratio() const { return ratio_; }

private:
  Vector last_iterate_;
  double ratio_;
};

/**
 * Solves A x = b for possibly ill-conditioned or indefinite A.
 *
 * The system is scaled symmetrically by T = diag(1/sqrt|A_ii|), the scaled
 * matrix is perturbed by epsilon_1 * I and factored once, and the solution is
 * improved by residual correction until the energy ratio
 * |e^T A e / c^T A c| drops to epsilon_2. The final correction is applied
 * before unscaling.
 *
 * Throws LinearSolveError for a zero diagonal entry, a failed factorization,
 * or when the criterion is not met within max_refinements.
 */
LinearSolveResult linear_solve(const Matrix &a, const Vector &b, const LinearSolveConfig &cfg = {});

LinearSolveResult linear_solve(const DenseMatrix &a, const Vector &b,
                               const LinearSolveConfig &cfg = {});

} // namespace gfem
