#pragma once

#include "gfem/mesh.hpp"

#include <cstddef>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace gfem {

/// E(x) = exp(rate * x).
struct Exponential {
  double rate = 0.0;
};

enum class BoundarySide { Left, Right };

/// Indicator of the boundary element adjacent to the domain end on `side`.
/// The indicator is open at the boundary node itself, so E(x_b) = 0 and the
/// enriched shape function is discontinuous there.
struct HeavisideBoundary {
  BoundarySide side = BoundarySide::Right;
};

/// E(x) = tanh((center - x) / (2 * thickness)).
struct TanhShock {
  double center = 0.5;
  double thickness = 0.0;
};

using EnrichmentKind = std::variant<Exponential, HeavisideBoundary, TanhShock>;

std::string kind_name(const EnrichmentKind &kind);

/// An enrichment function together with the interval of nodes it enriches.
struct EnrichmentRule {
  EnrichmentKind kind;
  double local_lo = 0.0;
  double local_hi = 0.0;
};

/// Throws std::invalid_argument when the rule's parameters or interval are
/// ill-formed with respect to the mesh domain.
void validate_rule(const EnrichmentRule &rule, const Mesh1D &mesh);

/// Symmetric interval about `center` with half-width
/// 2 * thickness * atanh(0.99) + h_e: every node where |tanh| <= 0.99, padded
/// by one element.
std::pair<double, double> local_domain_for_tanh(double center, double thickness, double h_e);

/// How shifted enrichments are scaled on their patch.
enum class EnrichmentScaling {
  /// Exponentials evaluated as exp(rate * (x - x_alpha)) - 1. Same span as the
  /// raw form, magnitudes of order one on the patch.
  PatchLocal,
  /// exp(rate * x) - exp(rate * x_alpha) evaluated directly.
  Raw,
};

struct EnrichmentOptions {
  EnrichmentScaling scaling = EnrichmentScaling::PatchLocal;
  /// Skip enrichment of nodes on the domain boundary (Heaviside rules excepted,
  /// they only ever enrich a boundary node).
  bool exclude_boundary_nodes = false;
  /// Relative tolerance (times |Omega|) for deciding node membership in a
  /// rule's local interval.
  double membership_tol = 1e-12;
};

struct DofEntry {
  std::size_t node = 0;
  /// 1 for the standard hat DOF, rule index + 2 for enrichment DOFs.
  std::size_t j = 1;
};

/// Global numbering: all standard DOFs in node order, then enrichment DOFs
/// grouped by rule and ordered by node within each rule.
struct DofMap {
  std::vector<DofEntry> entries;
  std::vector<std::size_t> dofs_per_node;  // m_alpha
  std::size_t total_dofs = 0;
  std::vector<std::string> warnings;

  bool is_enriched(std::size_t dof) const { return entries.at(dof).j >= 2; }
  std::size_t rule_index(std::size_t dof) const { return entries.at(dof).j - 2; }
};

DofMap build_dof_map(const Mesh1D &mesh, std::span<const EnrichmentRule> rules,
                     const EnrichmentOptions &opts = {});

struct ShapeEval {
  double value = 0.0;
  double derivative = 0.0;
};

/**
 * GFEM approximation space: the hat partition of unity times shifted
 * enrichment functions.
 *
 * Owns the mesh, the rules and the DOF map. Immutable; evaluation is
 * reentrant.
 */
class GfemSpace {
public:
  GfemSpace(Mesh1D mesh, std::vector<EnrichmentRule> rules, EnrichmentOptions opts = {});

  const Mesh1D &mesh() const { return mesh_; }
  const DofMap &dof_map() const { return dofs_; }
  const std::vector<EnrichmentRule> &rules() const { return rules_; }
  const EnrichmentOptions &options() const { return opts_; }
  std::size_t size() const { return dofs_.total_dofs; }

  /// DOFs whose support intersects element e, ascending.
  std::span<const std::size_t> element_dofs(std::size_t e) const { return element_dofs_[e]; }

  /// Shape function `dof` at x, with x known to lie in element e.
  ShapeEval eval_on_element(std::size_t dof, std::size_t e, double x) const;

  ShapeEval eval(std::size_t dof, double x) const;

  /// u_h(x) = sum_i c_i phi_i(x) and its derivative.
  ShapeEval evaluate(std::span<const double> coeffs, double x) const;

private:
  /// Shifted enrichment factor and its derivative at x for a DOF at node alpha.
  ShapeEval enrichment_factor(const EnrichmentRule &rule, std::size_t alpha, std::size_t e,
                              double x) const;

  Mesh1D mesh_;
  std::vector<EnrichmentRule> rules_;
  EnrichmentOptions opts_;
  DofMap dofs_;
  std::vector<std::vector<std::size_t>> element_dofs_;
};

ShapeEval shape_eval(const GfemSpace &space, std::size_t global_dof, double x);

} // namespace gfem
