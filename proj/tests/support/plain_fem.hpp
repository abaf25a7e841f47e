#pragma once

// Textbook p = 1 FEM for u_t + u u_x = nu u_xx on a uniform mesh: closed-form
// element matrices, tridiagonal storage, Thomas solves. Shares no code with
// the library so it can serve as an oracle.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <functional>
#include <vector>

namespace plain_fem {

struct Tridiagonal {
  std::vector<double> lower, diag, upper;  // lower[i] couples i to i-1

  explicit Tridiagonal(std::size_t n) : lower(n, 0.0), diag(n, 0.0), upper(n, 0.0) {}

  std::vector<double> apply(const std::vector<double> &x) const {
    const std::size_t n = diag.size();
    std::vector<double> y(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      y[i] = diag[i] * x[i];
      if (i > 0) y[i] += lower[i] * x[i - 1];
      if (i + 1 < n) y[i] += upper[i] * x[i + 1];
    }
    return y;
  }

  std::vector<double> solve(std::vector<double> rhs) const {
    const std::size_t n = diag.size();
    std::vector<double> c(n), d(n);
    c[0] = upper[0] / diag[0];
    d[0] = rhs[0] / diag[0];
    for (std::size_t i = 1; i < n; ++i) {
      const double m = diag[i] - lower[i] * c[i - 1];
      c[i] = upper[i] / m;
      d[i] = (rhs[i] - lower[i] * d[i - 1]) / m;
    }
    std::vector<double> x(n);
    x[n - 1] = d[n - 1];
    for (std::size_t i = n - 1; i-- > 0;) x[i] = d[i] - c[i] * x[i + 1];
    return x;
  }
};

class Solver {
public:
  Solver(std::size_t n_elements, double nu, double dt, double g_left, double g_right)
      : n_(n_elements + 1), h_(1.0 / static_cast<double>(n_elements)), nu_(nu), dt_(dt), gl_(g_left),
        gr_(g_right), mass_(n_), stiff_(n_) {
    for (std::size_t e = 0; e + 1 < n_; ++e) {
      mass_.diag[e] += h_ / 3.0;
      mass_.diag[e + 1] += h_ / 3.0;
      mass_.upper[e] += h_ / 6.0;
      mass_.lower[e + 1] += h_ / 6.0;
      stiff_.diag[e] += nu_ / h_;
      stiff_.diag[e + 1] += nu_ / h_;
      stiff_.upper[e] -= nu_ / h_;
      stiff_.lower[e + 1] -= nu_ / h_;
    }
    double max_diag = 0.0;
    for (std::size_t i = 0; i < n_; ++i) max_diag = std::max(max_diag, 2.0 / dt_ * mass_.diag[i] + stiff_.diag[i]);
    beta_ = 1e8 * max_diag;
  }

  std::size_t size() const { return n_; }

  /// L2 projection of sin(pi x) with the boundary penalty 1e8 * max diag M;
  /// loads integrated in closed form.
  std::vector<double> project_sine() const {
    const double pi = 3.14159265358979323846;
    // Antiderivatives of x sin(pi x) and sin(pi x).
    const auto xs = [pi](double x) { return std::sin(pi * x) / (pi * pi) - x * std::cos(pi * x) / pi; };
    const auto s = [pi](double x) { return -std::cos(pi * x) / pi; };
    std::vector<double> rhs(n_, 0.0);
    for (std::size_t e = 0; e + 1 < n_; ++e) {
      const double xl = static_cast<double>(e) * h_, xr = static_cast<double>(e + 1) * h_;
      const double ix = xs(xr) - xs(xl), i0 = s(xr) - s(xl);
      rhs[e] += (xr * i0 - ix) / h_;
      rhs[e + 1] += (ix - xl * i0) / h_;
    }
    Tridiagonal a = mass_;
    double max_diag = 0.0;
    for (double d : mass_.diag) max_diag = std::max(max_diag, d);
    const double beta = 1e8 * max_diag;
    a.diag[0] += beta;
    a.diag[n_ - 1] += beta;
    rhs[0] += beta * gl_;
    rhs[n_ - 1] += beta * gr_;
    return a.solve(rhs);
  }

  /// One Crank-Nicolson step solved by Newton to a relative correction of 1e-14.
  std::vector<double> step(const std::vector<double> &c_old) const {
    const std::vector<double> mc = mass_.apply(c_old), kc = stiff_.apply(c_old), nc = advection(c_old);
    std::vector<double> rhs(n_);
    for (std::size_t i = 0; i < n_; ++i) rhs[i] = 2.0 / dt_ * mc[i] - kc[i] - nc[i];
    rhs[0] += beta_ * gl_;
    rhs[n_ - 1] += beta_ * gr_;

    std::vector<double> c = c_old;
    for (int it = 0; it < 50; ++it) {
      const std::vector<double> m = mass_.apply(c), k = stiff_.apply(c), nl = advection(c);
      std::vector<double> r(n_);
      for (std::size_t i = 0; i < n_; ++i) r[i] = -(2.0 / dt_ * m[i] + k[i] + nl[i] - rhs[i]);
      r[0] -= beta_ * c[0];
      r[n_ - 1] -= beta_ * c[n_ - 1];
      Tridiagonal j = jacobian(c);
      for (std::size_t i = 0; i < n_; ++i) {
        j.diag[i] += 2.0 / dt_ * mass_.diag[i] + stiff_.diag[i];
        j.lower[i] += 2.0 / dt_ * mass_.lower[i] + stiff_.lower[i];
        j.upper[i] += 2.0 / dt_ * mass_.upper[i] + stiff_.upper[i];
      }
      j.diag[0] += beta_;
      j.diag[n_ - 1] += beta_;
      const std::vector<double> dc = j.solve(r);
      double dn = 0.0, cn = 0.0;
      for (std::size_t i = 0; i < n_; ++i) {
        c[i] += dc[i];
        dn += dc[i] * dc[i];
        cn += c[i] * c[i];
      }
      if (std::sqrt(dn) <= 1e-14 * std::max(1.0, std::sqrt(cn))) break;
    }
    return c;
  }

private:
  /// int phi_i u u' with u linear on each element.
  std::vector<double> advection(const std::vector<double> &c) const {
    std::vector<double> out(n_, 0.0);
    for (std::size_t e = 0; e + 1 < n_; ++e) {
      const double a = c[e], b = c[e + 1];
      out[e] += (b - a) * (2.0 * a + b) / 6.0;
      out[e + 1] += (b - a) * (a + 2.0 * b) / 6.0;
    }
    return out;
  }

  Tridiagonal jacobian(const std::vector<double> &c) const {
    Tridiagonal j(n_);
    for (std::size_t e = 0; e + 1 < n_; ++e) {
      const double a = c[e], b = c[e + 1];
      j.diag[e] += (-4.0 * a + b) / 6.0;
      j.upper[e] += (a + 2.0 * b) / 6.0;
      j.lower[e + 1] += (-2.0 * a - b) / 6.0;
      j.diag[e + 1] += (-a + 4.0 * b) / 6.0;
    }
    return j;
  }

  std::size_t n_;
  double h_, nu_, dt_, gl_, gr_;
  Tridiagonal mass_, stiff_;
  double beta_ = 0.0;
};

} // namespace plain_fem
