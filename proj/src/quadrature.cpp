#include "gfem/quadrature.hpp"

#include <array>
#include <cmath>
#include <mutex>
#include <numbers>
#include <stdexcept>
#include <string>

namespace gfem {

namespace {

// P_n(x) and P_n'(x) by the three-term recurrence.
std::pair<double, double> legendre(std::size_t n, double x) {
  double p0 = 1.0;
  double p1 = x;
  if (n == 0) return {1.0, 0.0};
  for (std::size_t k = 2; k <= n; ++k) {
    const double pk = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / static_cast<double>(k);
    p0 = p1;
    p1 = pk;
  }
  const double dp = static_cast<double>(n) * (x * p1 - p0) / (x * x - 1.0);
  return {p1, dp};
}

} // namespace

QuadRule gauss_rule(std::size_t n) {
  if (n < 1 || n > kMaxGaussPoints) {
    throw std::invalid_argument("gauss_rule: n must be in [1, 64], got " + std::to_string(n));
  }
  QuadRule rule;
  rule.points.resize(n);
  rule.weights.resize(n);
  const std::size_t half = (n + 1) / 2;
  for (std::size_t i = 0; i < half; ++i) {
    double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) /
                        (static_cast<double>(n) + 0.5));
    double dp = 0.0;
    for (int it = 0; it < 100; ++it) {
      const auto [p, d] = legendre(n, x);
      dp = d;
      const double dx = p / d;
      x -= dx;
      if (std::abs(dx) <= 1e-16) break;
    }
    dp = legendre(n, x).second;
    const double w = 2.0 / ((1.0 - x * x) * dp * dp);
    // Descending roots mirrored so the rule is exactly symmetric.
    rule.points[i] = -x;
    rule.points[n - 1 - i] = x;
    rule.weights[i] = w;
    rule.weights[n - 1 - i] = w;
  }
  if (n % 2 == 1) rule.points[n / 2] = 0.0;
  return rule;
}

const QuadRule &cached_gauss_rule(std::size_t n) {
  static std::array<QuadRule, kMaxGaussPoints + 1> cache;
  static std::array<std::once_flag, kMaxGaussPoints + 1> flags;
  if (n < 1 || n > kMaxGaussPoints) {
    throw std::invalid_argument("gauss_rule: n must be in [1, 64], got " + std::to_string(n));
  }
  std::call_once(flags[n], [n] { cache[n] = gauss_rule(n); });
  return cache[n];
}

double integrate_element(const std::function<double(double)> &f, double x_left, double x_right,
                         const QuadRule &rule) {
  const double mid = 0.5 * (x_left + x_right);
  const double jac = 0.5 * (x_right - x_left);
  double sum = 0.0;
  for (std::size_t q = 0; q < rule.size(); ++q) {
    sum += rule.weights[q] * f(mid + jac * rule.points[q]);
  }
  return sum * jac;
}

double integrate_composite(const std::function<double(double)> &f, double a, double b,
                           std::size_t panels, const QuadRule &rule) {
  double sum = 0.0;
  const double len = (b - a) / static_cast<double>(panels);
  for (std::size_t p = 0; p < panels; ++p) {
    const double xl = a + len * static_cast<double>(p);
    const double xr = p + 1 == panels ? b : a + len * static_cast<double>(p + 1);
    sum += integrate_element(f, xl, xr, rule);
  }
  return sum;
}

std::size_t auto_quadrature_points(double h) {
  if (h >= 1.0 / 12.0) return 60;
  if (h >= 1.0 / 30.0) return 40;
  if (h >= 1.0 / 60.0) return 20;
  return 10;
}

} // namespace gfem
