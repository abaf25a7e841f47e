#include "gfem/enrichment.hpp"

#include <cmath>
#include <stdexcept>

namespace gfem {

namespace {

template <class... Ts> struct Overloaded : Ts... { using Ts::operator()...; };
template <class... Ts> Overloaded(Ts...) -> Overloaded<Ts...>;

std::size_t heaviside_node(const HeavisideBoundary &k, const Mesh1D &mesh) {
  return k.side == BoundarySide::Right ? mesh.n_nodes() - 1 : 0;
}

std::size_t heaviside_element(const HeavisideBoundary &k, const Mesh1D &mesh) {
  return k.side == BoundarySide::Right ? mesh.n_elements() - 1 : 0;
}

} // namespace

std::string kind_name(const EnrichmentKind &kind) {
  return std::visit(Overloaded{[](const Exponential &) { return std::string("exponential"); },
                               [](const HeavisideBoundary &) { return std::string("heaviside"); },
                               [](const TanhShock &) { return std::string("tanh"); }},
                    kind);
}

void validate_rule(const EnrichmentRule &rule, const Mesh1D &mesh) {
  std::visit(Overloaded{[](const Exponential &k) {
                          if (!std::isfinite(k.rate) || k.rate == 0.0) {
                            throw std::invalid_argument("exponential enrichment: rate must be finite and nonzero");
                          }
                        },
                        [](const HeavisideBoundary &) {},
                        [](const TanhShock &k) {
                          if (!(k.thickness > 0.0) || !std::isfinite(k.thickness) || !std::isfinite(k.center)) {
                            throw std::invalid_argument("tanh enrichment: thickness must be positive");
                          }
                        }},
             rule.kind);
  if (!(rule.local_lo <= rule.local_hi)) {
    throw std::invalid_argument("enrichment rule: local_lo must not exceed local_hi");
  }
  if (rule.local_hi < mesh.lo() || rule.local_lo > mesh.hi()) {
    throw std::invalid_argument("enrichment rule: local interval does not intersect the domain");
  }
}

std::pair<double, double> local_domain_for_tanh(double center, double thickness, double h_e) {
  if (!(thickness > 0.0)) {
    throw std::invalid_argument("local_domain_for_tanh: thickness must be positive");
  }
  if (!(h_e > 0.0)) {
    throw std::invalid_argument("local_domain_for_tanh: element size must be positive");
  }
  const double half = 2.0 * thickness * std::atanh(0.99) + h_e;
  return {center - half, center + half};
}

DofMap build_dof_map(const Mesh1D &mesh, std::span<const EnrichmentRule> rules,
                     const EnrichmentOptions &opts) {
  DofMap map;
  const std::size_t n_nodes = mesh.n_nodes();
  map.dofs_per_node.assign(n_nodes, 1);
  map.entries.reserve(n_nodes);
  for (std::size_t a = 0; a < n_nodes; ++a) map.entries.push_back({a, 1});

  const double tol = opts.membership_tol * mesh.length();
  for (std::size_t r = 0; r < rules.size(); ++r) {
    const auto &rule = rules[r];
    validate_rule(rule, mesh);
    const auto inside = [&](std::size_t a) {
      const double x = mesh.node(a);
      return x >= rule.local_lo - tol && x <= rule.local_hi + tol;
    };
    std::size_t added = 0;
    if (const auto *hv = std::get_if<HeavisideBoundary>(&rule.kind)) {
      const std::size_t a = heaviside_node(*hv, mesh);
      if (inside(a)) {
        map.entries.push_back({a, r + 2});
        ++map.dofs_per_node[a];
        ++added;
      }
    } else {
      for (std::size_t a = 0; a < n_nodes; ++a) {
        if (!inside(a)) continue;
        if (opts.exclude_boundary_nodes && (a == 0 || a + 1 == n_nodes)) continue;
        map.entries.push_back({a, r + 2});
        ++map.dofs_per_node[a];
        ++added;
      }
    }
    if (added == 0) {
      map.warnings.push_back("rule " + std::to_string(r) + " (" + kind_name(rule.kind) +
                             ") on [" + std::to_string(rule.local_lo) + ", " +
                             std::to_string(rule.local_hi) + "] enriches no node");
    }
  }
  map.total_dofs = map.entries.size();
  return map;
}

GfemSpace::GfemSpace(Mesh1D mesh, std::vector<EnrichmentRule> rules, EnrichmentOptions opts)
    : mesh_(std::move(mesh)), rules_(std::move(rules)), opts_(opts),
      dofs_(build_dof_map(mesh_, rules_, opts_)) {
  element_dofs_.resize(mesh_.n_elements());
  for (std::size_t d = 0; d < dofs_.total_dofs; ++d) {
    for (std::size_t e : mesh_.patch(dofs_.entries[d].node)) element_dofs_[e].push_back(d);
  }
}

ShapeEval GfemSpace::enrichment_factor(const EnrichmentRule &rule, std::size_t alpha,
                                       std::size_t e, double x) const {
  const double xa = mesh_.node(alpha);
  return std::visit(
      Overloaded{
          [&](const Exponential &k) -> ShapeEval {
            if (opts_.scaling == EnrichmentScaling::PatchLocal) {
              const double s = k.rate * (x - xa);
              return {std::expm1(s), k.rate * std::exp(s)};
            }
            const double ex = std::exp(k.rate * x);
            return {ex - std::exp(k.rate * xa), k.rate * ex};
          },
          [&](const HeavisideBoundary &k) -> ShapeEval {
            // Zero at the boundary node, so no shift is applied.
            const bool on = e == heaviside_element(k, mesh_) && x > mesh_.element_left(e) &&
                            x < mesh_.element_right(e);
            return {on ? 1.0 : 0.0, 0.0};
          },
          [&](const TanhShock &k) -> ShapeEval {
            const double w = 2.0 * k.thickness;
            const double th = std::tanh((k.center - x) / w);
            return {th - std::tanh((k.center - xa) / w), -(1.0 - th * th) / w};
          }},
      rule.kind);
}

ShapeEval GfemSpace::eval_on_element(std::size_t dof, std::size_t e, double x) const {
  const auto &entry = dofs_.entries[dof];
  const HatEval hat = mesh_.hat_on_element(entry.node, e, x);
  if (entry.j == 1) return {hat.value, hat.derivative};
  if (hat.value == 0.0 && hat.derivative == 0.0) return {};
  const ShapeEval en = enrichment_factor(rules_[entry.j - 2], entry.node, e, x);
  return {hat.value * en.value, hat.derivative * en.value + hat.value * en.derivative};
}

ShapeEval GfemSpace::eval(std::size_t dof, double x) const {
  if (dof >= dofs_.total_dofs) {
    throw std::out_of_range("shape_eval: dof index " + std::to_string(dof) + " out of range");
  }
  return eval_on_element(dof, mesh_.locate(x), x);
}

ShapeEval GfemSpace::evaluate(std::span<const double> coeffs, double x) const {
  if (coeffs.size() != dofs_.total_dofs) {
    throw std::invalid_argument("evaluate: coefficient vector length does not match the DOF map");
  }
  const std::size_t e = mesh_.locate(x);
  ShapeEval u;
  for (std::size_t d : element_dofs_[e]) {
    const ShapeEval s = eval_on_element(d, e, x);
    u.value += coeffs[d] * s.value;
    u.derivative += coeffs[d] * s.derivative;
  }
  return u;
}

ShapeEval shape_eval(const GfemSpace &space, std::size_t global_dof, double x) {
  return space.eval(global_dof, x);
}

} // namespace gfem
