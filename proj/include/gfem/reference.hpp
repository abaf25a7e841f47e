#pragma once

#include "gfem/assembly.hpp"
#include "gfem/solver.hpp"

#include <json.hpp>

#include <cstddef>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace gfem {

/// A ground-truth field u(x, t) with its x-derivative.
class ReferenceSolution {
public:
  virtual ~ReferenceSolution() = default;
  virtual std::string kind() const = 0;
  virtual double value(double x, double t) const = 0;
  virtual double derivative(double x, double t) const = 0;
  /// Parameters that produced this reference.
  virtual nlohmann::json metadata() const = 0;
};

class SeriesTruncationError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

class UnsupportedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct FourierParams {
  double nu = 0.1;
  std::size_t max_terms = 10000;
  double term_tol = 1e-14;
  std::size_t coeff_quad_points = 200;
  /// Bound on the estimated roundoff error of u (and of u_x relative to
  /// 1 + |u_x|); evaluation throws beyond it.
  double accuracy = 1e-6;
};

/**
 * Hopf-Cole series solution of u_t + u u_x = nu u_xx on [0, 1] with
 * u(x, 0) = sin(pi x) and homogeneous Dirichlet data.
 *
 * The coefficients a_n = 2 int_0^1 exp(-(1 - cos pi x) / (2 pi nu)) cos(n pi x)
 * are computed once at construction by composite Gauss quadrature, doubled
 * until successive values agree to 1e-13 (relative to a_0).
 */
class FourierSolution final : public ReferenceSolution {
public:
  explicit FourierSolution(FourierParams params);

  std::string kind() const override { return "fourier"; }
  double value(double x, double t) const override;
  double derivative(double x, double t) const override;
  nlohmann::json metadata() const override;

  const std::vector<double> &coefficients() const { return coeffs_; }

private:
  /// {u, u_x}; throws SeriesTruncationError when the series does not settle.
  std::pair<double, double> evaluate(double x, double t, bool with_derivative) const;

  FourierParams params_;
  std::vector<double> coeffs_;  // a_0, a_1, ...
  std::size_t quad_points_used_ = 0;
};

double fourier_solution(const FourierParams &params, double x, double t);

/// t_b = -1 / min u_ic' over [lo, hi], or nullopt when u_ic' >= 0 throughout.
/// Slopes come from fourth-order central differences at `scan_points` points,
/// refined by golden-section search around the steepest one.
std::optional<double> breaking_time(const ScalarFunction &u_ic, double lo, double hi,
                                    std::size_t scan_points = 20001);

/**
 * Method-of-characteristics solution u = u_ic(x - u t) of the inviscid
 * equation. After the breaking time only stationary shocks are supported: a
 * downward zero crossing x_b of u_ic about which u_ic is odd. Left of x_b the
 * root whose characteristic starts left of x_b is taken, right of it the one
 * starting to the right, and u(x_b) = 0.
 */
class InviscidSolution final : public ReferenceSolution {
public:
  InviscidSolution(ScalarFunction u_ic, double lo, double hi, ScalarFunction du_ic = {});

  std::string kind() const override { return "characteristics"; }
  double value(double x, double t) const override;
  double derivative(double x, double t) const override;
  nlohmann::json metadata() const override;

  std::optional<double> breaking_time() const { return t_b_; }
  std::optional<double> shock_location() const { return x_b_; }
  /// True when the solution is defined for all t >= 0.
  bool stationary() const { return !t_b_ || x_b_.has_value(); }

private:
  double slope(double x) const;

  ScalarFunction u_ic_;
  ScalarFunction du_ic_;
  double lo_;
  double hi_;
  double u_min_ = 0.0;
  double u_max_ = 0.0;
  std::optional<double> t_b_;
  std::optional<double> x_b_;
};

double inviscid_solution(const ScalarFunction &u_ic, double lo, double hi, double x, double t);

/// b+1 for x <= 1/2, b + 2(1-x) on (1/2, 3/2), b-1 for x >= 3/2.
double riemann_ic(double b, double x);

/// Root of sqrt(2k) tanh(sqrt(k / (8 nu^2))) = 1 on [1e-6, 2].
double solve_steady_k(double nu);

/// sqrt(2k) tanh(sqrt(k / (2 nu^2)) (1/2 - x)).
double steady_state_shock(double nu, double x);

class SteadyShockSolution final : public ReferenceSolution {
public:
  explicit SteadyShockSolution(double nu);

  std::string kind() const override { return "steady"; }
  double value(double x, double t) const override;
  double derivative(double x, double t) const override;
  nlohmann::json metadata() const override;

  double k() const { return k_; }

private:
  double nu_;
  double k_;
};

/// 2 nu / max|u_ic| on [lo, hi]: element size below which linear FEM stays
/// free of advective oscillations. Zero when nu = 0.
double stability_h_limit(double nu, const ScalarFunction &u_ic, double lo, double hi);

/// Linear FEM solution on a fine mesh, interpolated piecewise-linearly in x.
/// Only the stored snapshot times can be evaluated.
class FineFemSolution final : public ReferenceSolution {
public:
  FineFemSolution(Mesh1D mesh, std::vector<double> times, std::vector<Vector> nodal_values,
                  nlohmann::json meta);

  std::string kind() const override { return "fine_fem"; }
  double value(double x, double t) const override;
  double derivative(double x, double t) const override;
  nlohmann::json metadata() const override { return meta_; }

  const Mesh1D &mesh() const { return mesh_; }
  const std::vector<double> &times() const { return times_; }

private:
  const Vector &snapshot(double t) const;

  Mesh1D mesh_;
  std::vector<double> times_;
  std::vector<Vector> values_;
  nlohmann::json meta_;
};

std::unique_ptr<FineFemSolution> fine_fem_reference(const Problem &problem, double lo, double hi,
                                                    std::size_t n_elements, double dt,
                                                    const std::vector<double> &snapshot_times,
                                                    const SolverOptions &options = {});

} // namespace gfem
