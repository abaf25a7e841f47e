#pragma once

#include <cstddef>
#include <utility>
#include <vector>

namespace gfem {

/// Value and x-derivative of a piecewise-linear hat function.
struct HatEval {
  double value = 0.0;
  double derivative = 0.0;
};

/**
 * One-dimensional finite element mesh on [lo, hi].
 *
 * Node coordinates are stored explicitly so non-uniform meshes can be added
 * without changing the interface; only uniform meshes are built today.
 * Instances are immutable once constructed.
 */
class Mesh1D {
public:
  Mesh1D(double lo, double hi, std::vector<double> node_coords);

  double lo() const { return lo_; }
  double hi() const { return hi_; }
  double length() const { return hi_ - lo_; }

  std::size_t n_nodes() const { return nodes_.size(); }
  std::size_t n_elements() const { return nodes_.size() - 1; }

  const std::vector<double> &nodes() const { return nodes_; }
  double node(std::size_t alpha) const { return nodes_.at(alpha); }

  std::pair<std::size_t, std::size_t> element(std::size_t e) const;
  double element_left(std::size_t e) const { return nodes_[e]; }
  double element_right(std::size_t e) const { return nodes_[e + 1]; }
  double element_size(std::size_t e) const { return nodes_[e + 1] - nodes_[e]; }

  /// Largest element length (equal to h on a uniform mesh).
  double h() const { return h_max_; }

  bool contains(double x) const { return x >= lo_ && x <= hi_; }

  /// Element that owns x. A point shared by two elements belongs to the left
  /// one, so nodal evaluation picks up left limits; x == lo maps to element 0.
  std::size_t locate(double x) const;

  /// Elements forming the support of node alpha's hat function.
  std::vector<std::size_t> patch(std::size_t alpha) const;

  /// Hat function of node alpha evaluated at x, assuming x lies in element e.
  HatEval hat_on_element(std::size_t alpha, std::size_t e, double x) const;

private:
  double lo_;
  double hi_;
  double h_max_ = 0.0;
  std::vector<double> nodes_;
};

Mesh1D build_uniform_mesh(std::size_t n_elements, double lo, double hi);

std::vector<std::size_t> patch(const Mesh1D &mesh, std::size_t alpha);

HatEval hat_eval(const Mesh1D &mesh, std::size_t alpha, double x);

} // namespace gfem
