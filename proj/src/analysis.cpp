#include "gfem/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace gfem {

namespace {

std::vector<double> partition(double lo, double hi, const ErrorQuadrature &quad) {
  std::vector<double> pts;
  pts.reserve(quad.subintervals + 1 + quad.breakpoints.size());
  for (std::size_t k = 0; k <= quad.subintervals; ++k) {
    pts.push_back(k == quad.subintervals
                      ? hi
                      : lo + (hi - lo) * static_cast<double>(k) / static_cast<double>(quad.subintervals));
  }
  for (double b : quad.breakpoints) {
    if (b > lo && b < hi) pts.push_back(b);
  }
  std::sort(pts.begin(), pts.end());
  const double tol = 1e-13 * (hi - lo);
  std::vector<double> out;
  for (double p : pts) {
    if (out.empty() || p - out.back() > tol) out.push_back(p);
  }
  if (out.back() != hi) out.back() = hi;
  return out;
}

} // namespace

ErrorSample relative_errors(const FieldEvaluator &u_h, const FieldEvaluator &u, double lo, double hi,
                            const ErrorQuadrature &quad) {
  if (!(lo < hi)) throw std::invalid_argument("relative_error: requires lo < hi");
  if (quad.subintervals < 1 || quad.points < 1) {
    throw std::invalid_argument("relative_error: empty error quadrature");
  }
  const QuadRule &rule = cached_gauss_rule(quad.points);
  const std::vector<double> pts = partition(lo, hi, quad);
  double err0 = 0.0, err1 = 0.0, ref0 = 0.0, ref1 = 0.0;
  for (std::size_t k = 0; k + 1 < pts.size(); ++k) {
    const double a = pts[k];
    const double b = pts[k + 1];
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    for (std::size_t q = 0; q < rule.size(); ++q) {
      const double x = mid + half * rule.points[q];
      const double w = half * rule.weights[q];
      const ShapeEval eh = u_h(x);
      const ShapeEval er = u(x);
      const double dv = eh.value - er.value;
      const double dd = eh.derivative - er.derivative;
      err0 += w * dv * dv;
      err1 += w * dd * dd;
      ref0 += w * er.value * er.value;
      ref1 += w * er.derivative * er.derivative;
    }
  }
  const bool full = quad.h1 == H1Convention::Full;
  const double h1_num = full ? err0 + err1 : err1;
  const double h1_den = full ? ref0 + ref1 : ref1;
  if (!(ref0 > 0.0) || !(h1_den > 0.0)) {
    throw ZeroReferenceNormError("relative_error: reference norm is zero, relative error undefined");
  }
  ErrorSample s;
  s.rel_l2 = std::sqrt(err0 / ref0);
  s.rel_h1 = std::sqrt(h1_num / h1_den);
  return s;
}

double relative_error(const FieldEvaluator &u_h, const FieldEvaluator &u, double lo, double hi,
                      ErrorNorm norm, const ErrorQuadrature &quad) {
  const ErrorSample s = relative_errors(u_h, u, lo, hi, quad);
  return norm == ErrorNorm::L2 ? s.rel_l2 : s.rel_h1;
}

FieldEvaluator at_time(const ReferenceSolution &reference, double t) {
  return [&reference, t](double x) { return ShapeEval{reference.value(x, t), reference.derivative(x, t)}; };
}

FieldEvaluator at_snapshot(const SolutionHistory &history, const GfemSpace &space, std::size_t snapshot) {
  if (snapshot >= history.coefficients.size()) {
    throw std::out_of_range("at_snapshot: snapshot index out of range");
  }
  const Vector *c = &history.coefficients[snapshot];
  return [c, &space](double x) {
    return space.evaluate({c->data(), static_cast<std::size_t>(c->size())}, x);
  };
}

ConvergenceRates convergence_rate(const std::vector<ErrorSample> &samples) {
  if (samples.size() < 2) throw std::invalid_argument("convergence_rate: need at least two samples");
  std::vector<ErrorSample> sorted = samples;
  std::stable_sort(sorted.begin(), sorted.end(),
                   [](const ErrorSample &a, const ErrorSample &b) { return a.dofs < b.dofs; });
  const ErrorSample &coarse = sorted[sorted.size() - 2];
  const ErrorSample &fine = sorted.back();
  if (coarse.dofs == fine.dofs) {
    throw std::invalid_argument("convergence_rate: the two finest samples have equal DOF counts");
  }
  const double dof_ratio = std::log(static_cast<double>(fine.dofs) / static_cast<double>(coarse.dofs));
  const auto rate = [dof_ratio](double e_coarse, double e_fine) -> std::optional<double> {
    if (!(e_coarse > 0.0) || !(e_fine > 0.0)) return std::nullopt;
    return -std::log(e_fine / e_coarse) / dof_ratio;
  };
  return {rate(coarse.rel_l2, fine.rel_l2), rate(coarse.rel_h1, fine.rel_h1)};
}

ConvergenceTable make_convergence_table(double time, std::vector<ErrorSample> samples) {
  std::stable_sort(samples.begin(), samples.end(),
                   [](const ErrorSample &a, const ErrorSample &b) { return a.dofs < b.dofs; });
  ConvergenceTable table;
  table.time = time;
  if (samples.size() >= 2) table.rates = convergence_rate(samples);
  table.samples = std::move(samples);
  return table;
}

std::vector<ErrorSample> error_time_series(const SolutionHistory &history, const GfemSpace &space,
                                           const ReferenceSolution &reference,
                                           const std::vector<double> &sample_times, ErrorQuadrature quad) {
  const Mesh1D &mesh = space.mesh();
  quad.breakpoints.insert(quad.breakpoints.end(), mesh.nodes().begin(), mesh.nodes().end());
  if (const auto *fine = dynamic_cast<const FineFemSolution *>(&reference)) {
    const auto &nodes = fine->mesh().nodes();
    quad.breakpoints.insert(quad.breakpoints.end(), nodes.begin(), nodes.end());
  }
  std::vector<ErrorSample> out;
  for (double t : sample_times) {
    const std::size_t idx = history.snapshot_index(t);
    if (std::abs(history.times[idx] - t) > 1e-9 * std::max(1.0, std::abs(t))) {
      throw std::out_of_range("error_time_series: no snapshot stored at t = " + std::to_string(t));
    }
    ErrorSample s = relative_errors(at_snapshot(history, space, idx), at_time(reference, history.times[idx]),
                                    mesh.lo(), mesh.hi(), quad);
    s.time = history.times[idx];
    s.dofs = space.size();
    out.push_back(s);
  }
  return out;
}

} // namespace gfem
