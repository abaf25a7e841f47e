#include "gfem/reference.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

namespace gfem {

namespace {

constexpr double kPi = std::numbers::pi;

// Fourth-order central difference.
double central_slope(const ScalarFunction &f, double x, double delta) {
  return (-f(x + 2.0 * delta) + 8.0 * f(x + delta) - 8.0 * f(x - delta) + f(x - 2.0 * delta)) /
         (12.0 * delta);
}

/// Fourth-order slope, or the second-order one where halving the step changes
/// the estimate (a kink inside the stencil, where the wider stencil overshoots).
double robust_slope(const ScalarFunction &f, double x, double delta) {
  const double s = central_slope(f, x, delta);
  const double s_half = central_slope(f, x, 0.5 * delta);
  if (std::abs(s - s_half) <= 1e-6 * (1.0 + std::abs(s))) return s;
  return (f(x + 0.5 * delta) - f(x - 0.5 * delta)) / delta;
}

} // namespace

// ---------------------------------------------------------------- Fourier

FourierSolution::FourierSolution(FourierParams params) : params_(params) {
  if (!(params_.nu > 0.0) || !std::isfinite(params_.nu)) {
    throw std::invalid_argument("fourier_solution: nu must be positive (the series is undefined for nu = 0)");
  }
  if (params_.max_terms < 1 || params_.coeff_quad_points < 20) {
    throw std::invalid_argument("fourier_solution: invalid truncation or quadrature settings");
  }
  const double kappa = 1.0 / (2.0 * kPi * params_.nu);
  const QuadRule &rule = cached_gauss_rule(20);
  const auto weight = [kappa](double x) { return std::exp(-kappa * (1.0 - std::cos(kPi * x))); };

  // All coefficients share the quadrature points; cos(n pi x) by recurrence.
  const auto compute = [&](std::size_t panels) {
    std::vector<double> xs;
    std::vector<double> ws;
    const double len = 1.0 / static_cast<double>(panels);
    for (std::size_t p = 0; p < panels; ++p) {
      const double mid = (static_cast<double>(p) + 0.5) * len;
      for (std::size_t q = 0; q < rule.size(); ++q) {
        const double x = mid + 0.5 * len * rule.points[q];
        xs.push_back(x);
        ws.push_back(0.5 * len * rule.weights[q] * weight(x));
      }
    }
    std::vector<double> a;
    std::vector<double> c_prev(xs.size(), 1.0);
    std::vector<double> c_cur(xs.size());
    std::vector<double> two_cos(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
      c_cur[i] = std::cos(kPi * xs[i]);
      two_cos[i] = 2.0 * c_cur[i];
    }
    double a0 = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) a0 += ws[i];
    a.push_back(a0);
    std::size_t small_run = 0;
    for (std::size_t n = 1; n <= params_.max_terms; ++n) {
      double s = 0.0;
      for (std::size_t i = 0; i < xs.size(); ++i) s += ws[i] * c_cur[i];
      a.push_back(2.0 * s);
      small_run = std::abs(a.back()) < 1e-15 * a0 ? small_run + 1 : 0;
      if (small_run >= 3) break;
      for (std::size_t i = 0; i < xs.size(); ++i) {
        const double next = two_cos[i] * c_cur[i] - c_prev[i];
        c_prev[i] = c_cur[i];
        c_cur[i] = next;
      }
    }
    return a;
  };

  std::size_t panels = std::max<std::size_t>(1, params_.coeff_quad_points / rule.size());
  std::vector<double> prev = compute(panels);
  for (int doubling = 0; doubling < 14; ++doubling) {
    panels *= 2;
    std::vector<double> next = compute(panels);
    // Lists may differ in length by entries already below 1e-15 a_0.
    bool agree = true;
    for (std::size_t n = 0; agree && n < std::max(next.size(), prev.size()); ++n) {
      const double a = n < next.size() ? next[n] : 0.0;
      const double b = n < prev.size() ? prev[n] : 0.0;
      agree = std::abs(a - b) <= 1e-13 * next[0];
    }
    prev = std::move(next);
    if (agree) {
      coeffs_ = std::move(prev);
      quad_points_used_ = panels * rule.size();
      return;
    }
  }
  throw SeriesTruncationError("fourier_solution: coefficient quadrature did not converge; nu too small");
}

std::pair<double, double> FourierSolution::evaluate(double x, double t, bool with_derivative) const {
  if (t < 0.0 || x < 0.0 || x > 1.0) {
    throw std::out_of_range("fourier_solution: requires x in [0, 1] and t >= 0");
  }
  const double nu = params_.nu;
  if (t == 0.0) return {std::sin(kPi * x), kPi * std::cos(kPi * x)};
  double num = 0.0;   // sum a_n e_n n sin(n pi x)
  double den = coeffs_[0];
  double dnum = 0.0;  // d/dx of num
  double dden = 0.0;  // d/dx of den
  // Sums of |a_n e_n| n^k bound the absolute error of each partial sum.
  double abs0 = coeffs_[0], abs1 = 0.0, abs2 = 0.0;
  std::size_t small_run = 0;
  const std::size_t last = coeffs_.size() - 1;
  bool settled = false;
  for (std::size_t n = 1; n <= last; ++n) {
    const double dn = static_cast<double>(n);
    const double decay = std::exp(-dn * dn * kPi * kPi * nu * t);
    const double an = coeffs_[n] * decay;
    const double s = std::sin(dn * kPi * x);
    const double c = std::cos(dn * kPi * x);
    const double tn = an * dn * s;
    const double td = an * c;
    num += tn;
    den += td;
    abs0 += std::abs(an);
    abs1 += std::abs(an) * dn;
    abs2 += std::abs(an) * dn * dn;
    bool small = std::abs(tn) <= params_.term_tol * std::abs(num) &&
                 std::abs(td) <= params_.term_tol * std::abs(den);
    if (with_derivative) {
      const double tdn = an * dn * dn * kPi * c;
      const double tdd = -an * dn * kPi * s;
      dnum += tdn;
      dden += tdd;
      small = small && std::abs(tdn) <= params_.term_tol * std::abs(dnum) &&
              std::abs(tdd) <= params_.term_tol * std::abs(dden);
    }
    // Terms whose coefficient has underflowed to nothing count as settled.
    if (an == 0.0) small = true;
    small_run = small ? small_run + 1 : 0;
    if (small_run >= 3) {
      settled = true;
      break;
    }
  }
  // The coefficient list ends only once a_n < 1e-15 a_0 (the roundoff floor of
  // the quadrature); hitting max_terms before that means the series was cut short.
  if (!settled && coeffs_.size() > params_.max_terms) {
    throw SeriesTruncationError(
        "fourier_solution: series not converged within max_terms; convergence slows for small nu and t, "
        "use a fine FEM reference instead");
  }
  // Near x = 1 the denominator can be many orders of magnitude below a_0 and
  // is then lost to cancellation.
  constexpr double floor = 1e-15;
  const double scale = 2.0 * kPi * nu;
  const double e_den = floor * abs0;
  const double e_num = floor * abs1;
  const double u = scale * num / den;
  const double err_u = scale * (e_num + std::abs(num / den) * e_den) / std::abs(den);
  double du = 0.0;
  double err_du = 0.0;
  if (with_derivative) {
    const double e_dnum = floor * kPi * abs2;
    const double e_dden = floor * kPi * abs1;
    du = scale * (dnum * den - num * dden) / (den * den);
    err_du = scale * (e_dnum / std::abs(den) + (std::abs(dnum) * e_den + e_num * std::abs(dden) +
                                                 std::abs(num) * e_dden) / (den * den) +
                      2.0 * std::abs(num * dden) * e_den / std::abs(den * den * den));
  }
  if (!(err_u <= params_.accuracy) || !(err_du <= params_.accuracy * (1.0 + std::abs(du)))) {
    throw SeriesTruncationError("fourier_solution: cancellation in the series at x = " + std::to_string(x) +
                                ", t = " + std::to_string(t) + " exceeds the accuracy target (nu too small for t); "
                                "use a fine FEM reference instead");
  }
  return {u, du};
}

double FourierSolution::value(double x, double t) const { return evaluate(x, t, false).first; }

double FourierSolution::derivative(double x, double t) const { return evaluate(x, t, true).second; }

nlohmann::json FourierSolution::metadata() const {
  return {{"kind", kind()},
          {"nu", params_.nu},
          {"max_terms", params_.max_terms},
          {"term_tol", params_.term_tol},
          {"accuracy", params_.accuracy},
          {"coefficients", coeffs_.size()},
          {"coefficient_quadrature_points", quad_points_used_}};
}

double fourier_solution(const FourierParams &params, double x, double t) {
  return FourierSolution(params).value(x, t);
}

// ---------------------------------------------------------- breaking time

std::optional<double> breaking_time(const ScalarFunction &u_ic, double lo, double hi,
                                    std::size_t scan_points) {
  if (!(lo < hi)) throw std::invalid_argument("breaking_time: requires lo < hi");
  if (scan_points < 3) throw std::invalid_argument("breaking_time: need at least 3 scan points");
  const double len = hi - lo;
  const double delta = 1e-3 * len;
  const auto slope = [&](double x) { return robust_slope(u_ic, x, delta); };

  const double step = len / static_cast<double>(scan_points - 1);
  std::size_t best = 0;
  double best_slope = std::numeric_limits<double>::infinity();
  double u_scale = 0.0;
  for (std::size_t k = 0; k < scan_points; ++k) {
    const double x = k + 1 == scan_points ? hi : lo + step * static_cast<double>(k);
    u_scale = std::max(u_scale, std::abs(u_ic(x)));
    const double s = slope(x);
    if (s < best_slope) {
      best_slope = s;
      best = k;
    }
  }

  // Golden-section refinement of the minimum slope around the best scan point.
  double a = std::max(lo, lo + step * (static_cast<double>(best) - 1.0));
  double b = std::min(hi, lo + step * (static_cast<double>(best) + 1.0));
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = b - g * (b - a);
  double x2 = a + g * (b - a);
  double f1 = slope(x1);
  double f2 = slope(x2);
  for (int it = 0; it < 200 && b - a > 1e-14 * len; ++it) {
    if (f1 < f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - g * (b - a);
      f1 = slope(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + g * (b - a);
      f2 = slope(x2);
    }
  }
  best_slope = std::min({best_slope, f1, f2});

  const double noise = 1e-9 * (1.0 + u_scale / len);
  if (best_slope >= -noise) return std::nullopt;
  return -1.0 / best_slope;
}

// ----------------------------------------------------------- inviscid

InviscidSolution::InviscidSolution(ScalarFunction u_ic, double lo, double hi, ScalarFunction du_ic)
    : u_ic_(std::move(u_ic)), du_ic_(std::move(du_ic)), lo_(lo), hi_(hi) {
  if (!u_ic_) throw std::invalid_argument("inviscid_solution: initial condition missing");
  if (!(lo_ < hi_)) throw std::invalid_argument("inviscid_solution: requires lo < hi");
  const std::size_t scan = 20001;
  const double len = hi_ - lo_;
  std::vector<double> xs(scan);
  std::vector<double> us(scan);
  u_min_ = std::numeric_limits<double>::infinity();
  u_max_ = -std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < scan; ++k) {
    xs[k] = k + 1 == scan ? hi_ : lo_ + len * static_cast<double>(k) / static_cast<double>(scan - 1);
    us[k] = u_ic_(xs[k]);
    u_min_ = std::min(u_min_, us[k]);
    u_max_ = std::max(u_max_, us[k]);
  }
  t_b_ = gfem::breaking_time(u_ic_, lo_, hi_);
  if (!t_b_) return;

  // Downward zero crossings about which u_ic is odd are stationary shocks.
  const double zero_tol = 1e-12 * std::max(1.0, std::max(std::abs(u_min_), std::abs(u_max_)));
  std::vector<double> crossings;
  for (std::size_t k = 0; k + 1 < scan; ++k) {
    if (!(us[k] > zero_tol) || us[k + 1] > zero_tol) continue;
    double root = xs[k + 1];
    if (us[k + 1] < -zero_tol) {
      double a = xs[k];
      double b = xs[k + 1];
      for (int it = 0; it < 200 && b - a > 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(b)); ++it) {
        const double m = 0.5 * (a + b);
        (u_ic_(m) > 0.0 ? a : b) = m;
      }
      root = 0.5 * (a + b);
    }
    if (slope(root) >= 0.0) continue;
    bool odd = true;
    for (int i = 1; i <= 200 && odd; ++i) {
      const double s = len * static_cast<double>(i) / 200.0;
      odd = std::abs(u_ic_(root + s) + u_ic_(root - s)) <= 1e-8 * std::max(1.0, u_max_ - u_min_);
    }
    if (odd) crossings.push_back(root);
  }
  if (crossings.size() == 1) x_b_ = crossings.front();
}

double InviscidSolution::slope(double x) const {
  if (du_ic_) return du_ic_(x);
  return robust_slope(u_ic_, x, 1e-4 * (hi_ - lo_));
}

double InviscidSolution::value(double x, double t) const {
  if (t < 0.0) throw std::invalid_argument("inviscid_solution: t must be non-negative");
  if (t == 0.0) return u_ic_(x);
  const auto residual = [&](double u) { return u - u_ic_(x - u * t); };

  const double spread = std::max(1.0, u_max_ - u_min_);
  double a = u_min_ - 1e-9 * spread;
  double b = u_max_ + 1e-9 * spread;
  const bool post_break = t_b_ && t >= *t_b_;
  if (post_break) {
    if (!x_b_) {
      throw UnsupportedError("inviscid_solution: moving shocks after the breaking time are not supported");
    }
    if (x == *x_b_) return 0.0;
    const double split = (x - *x_b_) / t;
    if (x < *x_b_) a = std::max(a, split);
    else b = std::min(b, split);
  }
  double fa = residual(a);
  double fb = residual(b);
  if (!post_break) {
    // Feet outside the scanned domain can take values beyond its range.
    double w = spread;
    for (int it = 0; it < 60 && (fa > 0.0 || fb < 0.0); ++it, w *= 2.0) {
      if (fa > 0.0) fa = residual(a -= w);
      if (fb < 0.0) fb = residual(b += w);
    }
  }
  if (fa > 0.0 || fb < 0.0) {
    throw std::runtime_error("inviscid_solution: could not bracket the characteristic root");
  }
  if (fa == 0.0) return a;
  if (fb == 0.0) return b;
  for (int it = 0; it < 200; ++it) {
    const double m = 0.5 * (a + b);
    if (m <= a || m >= b) break;
    const double fm = residual(m);
    if (fm == 0.0) return m;
    (fm < 0.0 ? a : b) = m;
  }
  double u = 0.5 * (a + b);
  // Newton polish, kept inside the bracket.
  for (int it = 0; it < 3; ++it) {
    const double f = residual(u);
    const double df = 1.0 + t * slope(x - u * t);
    if (df == 0.0) break;
    const double next = u - f / df;
    if (next < a || next > b) break;
    if (std::abs(residual(next)) > std::abs(f)) break;
    u = next;
  }
  return u;
}

double InviscidSolution::derivative(double x, double t) const {
  const double u = value(x, t);
  if (t_b_ && x_b_ && t >= *t_b_ && x == *x_b_) {
    return -std::numeric_limits<double>::infinity();
  }
  const double s = slope(x - u * t);
  return s / (1.0 + t * s);
}

nlohmann::json InviscidSolution::metadata() const {
  nlohmann::json j{{"kind", kind()}, {"lo", lo_}, {"hi", hi_}};
  j["breaking_time"] = t_b_ ? nlohmann::json(*t_b_) : nlohmann::json(nullptr);
  j["shock_location"] = x_b_ ? nlohmann::json(*x_b_) : nlohmann::json(nullptr);
  return j;
}

double inviscid_solution(const ScalarFunction &u_ic, double lo, double hi, double x, double t) {
  return InviscidSolution(u_ic, lo, hi).value(x, t);
}

// ---------------------------------------------------------------- others

double riemann_ic(double b, double x) {
  if (x <= 0.5) return b + 1.0;
  if (x < 1.5) return b + 2.0 * (1.0 - x);
  return b - 1.0;
}

double solve_steady_k(double nu) {
  if (!(nu > 0.0)) throw std::invalid_argument("solve_steady_k: nu must be positive");
  const auto f = [nu](double k) { return std::sqrt(2.0 * k) * std::tanh(std::sqrt(k / (8.0 * nu * nu))) - 1.0; };
  const auto df = [nu](double k) {
    const double s = std::sqrt(k / (8.0 * nu * nu));
    const double th = std::tanh(s);
    const double ds = 1.0 / (2.0 * std::sqrt(8.0 * nu * nu * k));
    return th / std::sqrt(2.0 * k) + std::sqrt(2.0 * k) * (1.0 - th * th) * ds;
  };
  double a = 1e-6;
  double b = 2.0;
  if (f(a) > 0.0 || f(b) < 0.0) {
    throw std::runtime_error("solve_steady_k: root not bracketed in [1e-6, 2] for nu = " + std::to_string(nu));
  }
  double k = 0.5;
  for (int it = 0; it < 200; ++it) {
    const double fk = f(k);
    if (std::abs(fk) < 1e-14) break;
    (fk < 0.0 ? a : b) = k;
    double next = k - fk / df(k);
    if (!(next > a && next < b)) next = 0.5 * (a + b);
    if (next == k) break;
    k = next;
  }
  return k;
}

double steady_state_shock(double nu, double x) {
  const double k = solve_steady_k(nu);
  return std::sqrt(2.0 * k) * std::tanh(std::sqrt(k / (2.0 * nu * nu)) * (0.5 - x));
}

SteadyShockSolution::SteadyShockSolution(double nu) : nu_(nu), k_(solve_steady_k(nu)) {}

double SteadyShockSolution::value(double x, double) const {
  return std::sqrt(2.0 * k_) * std::tanh(std::sqrt(k_ / (2.0 * nu_ * nu_)) * (0.5 - x));
}

double SteadyShockSolution::derivative(double x, double) const {
  const double s = std::sqrt(k_ / (2.0 * nu_ * nu_));
  const double th = std::tanh(s * (0.5 - x));
  return -std::sqrt(2.0 * k_) * s * (1.0 - th * th);
}

nlohmann::json SteadyShockSolution::metadata() const {
  return {{"kind", kind()}, {"nu", nu_}, {"k", k_}};
}

double stability_h_limit(double nu, const ScalarFunction &u_ic, double lo, double hi) {
  if (!(nu >= 0.0)) throw std::invalid_argument("stability_h_limit: nu must be non-negative");
  double u_max = 0.0;
  const std::size_t scan = 10001;
  for (std::size_t k = 0; k < scan; ++k) {
    const double x = lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(scan - 1);
    u_max = std::max(u_max, std::abs(u_ic(x)));
  }
  if (u_max == 0.0) throw std::invalid_argument("stability_h_limit: u_ic vanishes identically");
  return 2.0 * nu / u_max;
}

// ------------------------------------------------------------ fine FEM

FineFemSolution::FineFemSolution(Mesh1D mesh, std::vector<double> times, std::vector<Vector> nodal_values,
                                 nlohmann::json meta)
    : mesh_(std::move(mesh)), times_(std::move(times)), values_(std::move(nodal_values)), meta_(std::move(meta)) {
  if (times_.size() != values_.size()) throw std::invalid_argument("fine FEM reference: times/values mismatch");
  for (const auto &v : values_) {
    if (static_cast<std::size_t>(v.size()) != mesh_.n_nodes()) {
      throw std::invalid_argument("fine FEM reference: one value per node required");
    }
  }
}

const Vector &FineFemSolution::snapshot(double t) const {
  for (std::size_t i = 0; i < times_.size(); ++i) {
    if (std::abs(times_[i] - t) <= 1e-9 * std::max(1.0, std::abs(t))) return values_[i];
  }
  throw std::out_of_range("fine FEM reference: no snapshot stored at t = " + std::to_string(t));
}

double FineFemSolution::value(double x, double t) const {
  const Vector &v = snapshot(t);
  const std::size_t e = mesh_.locate(x);
  const double w = (x - mesh_.element_left(e)) / mesh_.element_size(e);
  return (1.0 - w) * v[e] + w * v[e + 1];
}

double FineFemSolution::derivative(double x, double t) const {
  const Vector &v = snapshot(t);
  const std::size_t e = mesh_.locate(x);
  return (v[e + 1] - v[e]) / mesh_.element_size(e);
}

std::unique_ptr<FineFemSolution> fine_fem_reference(const Problem &problem, double lo, double hi,
                                                    std::size_t n_elements, double dt,
                                                    const std::vector<double> &snapshot_times,
                                                    const SolverOptions &options) {
  if (!(problem.nu > 0.0)) {
    throw std::invalid_argument(
        "fine FEM reference: refused for nu = 0 (linear FEM does not converge); use the characteristics reference");
  }
  if (snapshot_times.empty()) throw std::invalid_argument("fine FEM reference: no snapshot times");
  const double t_end = *std::max_element(snapshot_times.begin(), snapshot_times.end());
  GfemSpace space(build_uniform_mesh(n_elements, lo, hi), {});
  TimeConfig time{dt, t_end, snapshot_times};
  SolutionHistory history = run_simulation(problem, space, time, options);
  nlohmann::json meta{{"kind", "fine_fem"},
                      {"nu", problem.nu},
                      {"elements", n_elements},
                      {"dt", dt},
                      {"t_end", t_end},
                      {"quadrature_points", history.quadrature_points}};
  return std::make_unique<FineFemSolution>(space.mesh(), std::move(history.times),
                                           std::move(history.coefficients), std::move(meta));
}

} // namespace gfem
