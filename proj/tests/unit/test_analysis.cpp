#include "gfem/analysis.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

using namespace gfem;

namespace {

constexpr double kPi = std::numbers::pi;

FieldEvaluator field(double scale, double shift = 0.0) {
  return [=](double x) { return ShapeEval{scale * std::sin(kPi * x) + shift, scale * kPi * std::cos(kPi * x)}; };
}

ErrorSample sample(std::size_t dofs, double l2, double h1) { return {0.0, l2, h1, dofs}; }

} // namespace

TEST(Analysis, IdenticalAndZeroFields) {
  const ErrorSample same = relative_errors(field(1.0), field(1.0), 0.0, 1.0);
  EXPECT_EQ(same.rel_l2, 0.0);
  EXPECT_EQ(same.rel_h1, 0.0);
  const ErrorSample zero = relative_errors(field(0.0), field(1.0), 0.0, 1.0);
  EXPECT_NEAR(zero.rel_l2, 1.0, 1e-14);
  EXPECT_NEAR(zero.rel_h1, 1.0, 1e-14);
  EXPECT_NEAR(relative_error(field(0.9), field(1.0), 0.0, 1.0, ErrorNorm::L2), 0.1, 1e-14);
  EXPECT_NEAR(relative_error(field(0.9), field(1.0), 0.0, 1.0, ErrorNorm::H1), 0.1, 1e-14);
}

TEST(Analysis, ClosedFormShift) {
  // u = x, u_h = x + 0.1: ||e||^2 = 0.01, ||u||^2 = 1/3, |u|_1^2 = 1.
  const FieldEvaluator u = [](double x) { return ShapeEval{x, 1.0}; };
  const FieldEvaluator uh = [](double x) { return ShapeEval{x + 0.1, 1.0}; };
  const ErrorSample s = relative_errors(uh, u, 0.0, 1.0);
  EXPECT_NEAR(s.rel_l2, 0.1 / std::sqrt(1.0 / 3.0), 1e-14);
  EXPECT_NEAR(s.rel_h1, 0.1 / std::sqrt(4.0 / 3.0), 1e-14);
  ErrorQuadrature semi;
  semi.h1 = H1Convention::Seminorm;
  EXPECT_EQ(relative_errors(uh, u, 0.0, 1.0, semi).rel_h1, 0.0);
}

TEST(Analysis, Homogeneity) {
  const FieldEvaluator u = field(1.0);
  const double base = relative_error(field(1.0, 0.01), u, 0.0, 1.0, ErrorNorm::L2);
  for (double lambda : {0.5, 2.0, 7.0}) {
    EXPECT_NEAR(relative_error(field(1.0, 0.01 * lambda), u, 0.0, 1.0, ErrorNorm::L2), lambda * base, 1e-13);
  }
}

TEST(Analysis, H1NumeratorDominatesL2Part) {
  const FieldEvaluator u = field(1.0);
  const FieldEvaluator uh = [](double x) { return ShapeEval{std::sin(kPi * x) + 0.02 * x, kPi * std::cos(kPi * x) + 0.02}; };
  const ErrorSample s = relative_errors(uh, u, 0.0, 1.0);
  // Absolute numerators: rel * reference norm.
  const double ref_l2 = std::sqrt(0.5), ref_h1 = std::sqrt(0.5 + 0.5 * kPi * kPi);
  EXPECT_GE(s.rel_h1 * ref_h1, s.rel_l2 * ref_l2);
}

TEST(Analysis, ZeroReferenceRejected) {
  EXPECT_THROW(relative_errors(field(1.0), field(0.0), 0.0, 1.0), ZeroReferenceNormError);
}

TEST(Analysis, Rates) {
  const ConvergenceRates r = convergence_rate({sample(100, 1e-2, 1e-1), sample(200, 2.5e-3, 5e-2)});
  EXPECT_NEAR(*r.l2, 2.0, 1e-14);
  EXPECT_NEAR(*r.h1, 1.0, 1e-14);
  const ConvergenceRates flat = convergence_rate({sample(100, 1e-2, 1e-2), sample(200, 1e-2, 1e-2)});
  EXPECT_EQ(*flat.l2, 0.0);
  const ConvergenceRates floor = convergence_rate({sample(100, 1e-2, 1e-2), sample(200, 0.0, 1e-3)});
  EXPECT_FALSE(floor.l2.has_value());
  EXPECT_TRUE(floor.h1.has_value());
  EXPECT_THROW(convergence_rate({sample(100, 1.0, 1.0)}), std::invalid_argument);
  EXPECT_THROW(convergence_rate({sample(100, 1.0, 1.0), sample(100, 0.5, 0.5)}), std::invalid_argument);
}

TEST(Analysis, TableUsesFinestTwoGrids) {
  const ConvergenceTable t =
      make_convergence_table(0.5, {sample(400, 1e-3, 1e-2), sample(100, 1.6e-2, 4e-2), sample(200, 1e-2, 3e-2)});
  ASSERT_EQ(t.samples.size(), 3u);
  EXPECT_EQ(t.samples.front().dofs, 100u);
  EXPECT_NEAR(*t.rates.l2, std::log(10.0) / std::log(2.0), 1e-12);
}

TEST(Analysis, TimeSeriesStartsWithProjectionError) {
  const double nu = 0.1;
  const GfemSpace space(build_uniform_mesh(11, 0.0, 1.0), {});
  const auto zero = [](double) { return 0.0; };
  const Problem p{nu, [](double x) { return std::sin(kPi * x); }, {{0.0, zero}, {1.0, zero}}, {}};
  const SolutionHistory h = run_simulation(p, space, {1e-2, 0.5, {0.0, 0.25, 0.5}});
  const FourierSolution ref(FourierParams{nu});
  const auto series = error_time_series(h, space, ref, {0.0, 0.25, 0.5});
  ASSERT_EQ(series.size(), 3u);
  ErrorQuadrature q;
  q.breakpoints = space.mesh().nodes();
  const ErrorSample direct = relative_errors(at_snapshot(h, space, 0),
                                             [](double x) { return ShapeEval{std::sin(kPi * x), kPi * std::cos(kPi * x)}; },
                                             0.0, 1.0, q);
  EXPECT_NEAR(series[0].rel_l2, direct.rel_l2, 1e-14);
  EXPECT_NEAR(series[0].rel_h1, direct.rel_h1, 1e-14);
  EXPECT_EQ(series[2].dofs, 12u);
  EXPECT_EQ(series[1].time, 0.25);
  EXPECT_THROW(error_time_series(h, space, ref, {0.3}), std::out_of_range);
}

TEST(Analysis, PartitionDoublingChangesLittle) {
  const double nu = 0.1;
  const GfemSpace space(build_uniform_mesh(23, 0.0, 1.0), {});
  const auto zero = [](double) { return 0.0; };
  const Problem p{nu, [](double x) { return std::sin(kPi * x); }, {{0.0, zero}, {1.0, zero}}, {}};
  const SolutionHistory h = run_simulation(p, space, {1e-2, 0.5, {0.5}});
  const FourierSolution ref(FourierParams{nu});
  ErrorQuadrature coarse, fine;
  fine.subintervals = 4000;
  const ErrorSample a = error_time_series(h, space, ref, {0.5}, coarse)[0];
  const ErrorSample b = error_time_series(h, space, ref, {0.5}, fine)[0];
  EXPECT_LT(std::abs(a.rel_l2 - b.rel_l2), 1e-3 * b.rel_l2);
  EXPECT_LT(std::abs(a.rel_h1 - b.rel_h1), 1e-3 * b.rel_h1);
}
