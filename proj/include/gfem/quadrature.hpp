#pragma once

#include <cstddef>
#include <functional>
#include <vector>

namespace gfem {

/// Gauss-Legendre rule on [-1, 1].
struct QuadRule {
  std::vector<double> points;
  std::vector<double> weights;

  std::size_t size() const { return points.size(); }
};

inline constexpr std::size_t kMaxGaussPoints = 64;

/// n-point Gauss-Legendre rule, 1 <= n <= 64. Roots of P_n by Newton iteration
/// from Chebyshev-like initial guesses.
QuadRule gauss_rule(std::size_t n);

/// Cached immutable rule; safe to call from several threads.
const QuadRule &cached_gauss_rule(std::size_t n);

double integrate_element(const std::function<double(double)> &f, double x_left, double x_right,
                         const QuadRule &rule);

/// Composite rule: `panels` equal panels on [a, b], each with `rule`.
double integrate_composite(const std::function<double(double)> &f, double a, double b,
                           std::size_t panels, const QuadRule &rule);

/// Default number of Gauss points per element for element size h: 60 on the
/// coarsest meshes down to 10 on the finest.
std::size_t auto_quadrature_points(double h);

} // namespace gfem
