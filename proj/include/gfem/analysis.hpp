#pragma once

#include "gfem/enrichment.hpp"
#include "gfem/reference.hpp"
#include "gfem/solver.hpp"

#include <cstddef>
#include <functional>
#include <optional>
#include <stdexcept>
#include <vector>

namespace gfem {

/// Value and derivative of a field at x.
using FieldEvaluator = std::function<ShapeEval(double)>;

enum class H1Convention {
  /// L2 part plus derivative part.
  Full,
  Seminorm,
};

struct ErrorQuadrature {
  std::size_t subintervals = 2000;
  std::size_t points = 4;
  /// Extra partition points (typically both meshes' nodes) so kinks and jumps
  /// of either field fall on subinterval boundaries.
  std::vector<double> breakpoints;
  H1Convention h1 = H1Convention::Full;
};

enum class ErrorNorm { L2, H1 };

class ZeroReferenceNormError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

struct ErrorSample {
  double time = 0.0;
  double rel_l2 = 0.0;
  double rel_h1 = 0.0;
  std::size_t dofs = 0;
};

/// Both relative norms from one pass over the partition.
ErrorSample relative_errors(const FieldEvaluator &u_h, const FieldEvaluator &u, double lo, double hi,
                            const ErrorQuadrature &quad = {});

double relative_error(const FieldEvaluator &u_h, const FieldEvaluator &u, double lo, double hi,
                      ErrorNorm norm, const ErrorQuadrature &quad = {});

/// Reference evaluator frozen at time t.
FieldEvaluator at_time(const ReferenceSolution &reference, double t);

/// u_h at a snapshot of a simulation.
FieldEvaluator at_snapshot(const SolutionHistory &history, const GfemSpace &space, std::size_t snapshot);

struct ConvergenceRates {
  /// nullopt when either error is zero (at the precision floor of the
  /// reference) and the rate carries no information.
  std::optional<double> l2;
  std::optional<double> h1;
};

/// -log(e_fine / e_coarse) / log(dofs_fine / dofs_coarse) over the two
/// samples with the most DOFs.
ConvergenceRates convergence_rate(const std::vector<ErrorSample> &samples);

struct ConvergenceTable {
  double time = 0.0;
  /// Ascending in DOFs.
  std::vector<ErrorSample> samples;
  ConvergenceRates rates;
};

ConvergenceTable make_convergence_table(double time, std::vector<ErrorSample> samples);

/// Relative errors at each sample time; every time must be a stored snapshot.
std::vector<ErrorSample> error_time_series(const SolutionHistory &history, const GfemSpace &space,
                                           const ReferenceSolution &reference,
                                           const std::vector<double> &sample_times,
                                           ErrorQuadrature quad = {});

} // namespace gfem
