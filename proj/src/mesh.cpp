#include "gfem/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gfem {

Mesh1D::Mesh1D(double lo, double hi, std::vector<double> node_coords)
    : lo_(lo), hi_(hi), nodes_(std::move(node_coords)) {
  if (!(lo_ < hi_)) {
    throw std::invalid_argument("mesh: domain requires lo < hi");
  }
  if (nodes_.size() < 2) {
    throw std::invalid_argument("mesh: at least two nodes are required");
  }
  if (nodes_.front() != lo_ || nodes_.back() != hi_) {
    throw std::invalid_argument("mesh: end nodes must coincide with the domain bounds");
  }
  for (std::size_t i = 1; i < nodes_.size(); ++i) {
    const double len = nodes_[i] - nodes_[i - 1];
    if (!(len > 0.0)) {
      throw std::invalid_argument("mesh: node coordinates must be strictly increasing");
    }
    h_max_ = std::max(h_max_, len);
  }
}

std::pair<std::size_t, std::size_t> Mesh1D::element(std::size_t e) const {
  if (e >= n_elements()) {
    throw std::out_of_range("mesh: element index " + std::to_string(e) + " out of range");
  }
  return {e, e + 1};
}

std::size_t Mesh1D::locate(double x) const {
  if (!contains(x)) {
    throw std::out_of_range("mesh: x = " + std::to_string(x) + " lies outside the domain");
  }
  // First node >= x; x sitting on node k (k > 0) resolves to element k-1.
  const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), x);
  const auto k = static_cast<std::size_t>(it - nodes_.begin());
  return k == 0 ? 0 : k - 1;
}

std::vector<std::size_t> Mesh1D::patch(std::size_t alpha) const {
  if (alpha >= n_nodes()) {
    throw std::out_of_range("mesh: node index " + std::to_string(alpha) + " out of range");
  }
  std::vector<std::size_t> elems;
  if (alpha > 0) elems.push_back(alpha - 1);
  if (alpha < n_elements()) elems.push_back(alpha);
  return elems;
}

HatEval Mesh1D::hat_on_element(std::size_t alpha, std::size_t e, double x) const {
  const double xl = nodes_[e];
  const double xr = nodes_[e + 1];
  const double len = xr - xl;
  if (alpha == e) return {(xr - x) / len, -1.0 / len};
  if (alpha == e + 1) return {(x - xl) / len, 1.0 / len};
  return {};
}

Mesh1D build_uniform_mesh(std::size_t n_elements, double lo, double hi) {
  if (n_elements == 0) {
    throw std::invalid_argument("mesh: n_elements must be at least 1");
  }
  if (!(lo < hi)) {
    throw std::invalid_argument("mesh: domain requires lo < hi");
  }
  std::vector<double> nodes(n_elements + 1);
  const double len = hi - lo;
  for (std::size_t k = 0; k <= n_elements; ++k) {
    nodes[k] = lo + len * static_cast<double>(k) / static_cast<double>(n_elements);
  }
  nodes.back() = hi;
  return Mesh1D(lo, hi, std::move(nodes));
}

std::vector<std::size_t> patch(const Mesh1D &mesh, std::size_t alpha) { return mesh.patch(alpha); }

HatEval hat_eval(const Mesh1D &mesh, std::size_t alpha, double x) {
  if (alpha >= mesh.n_nodes()) {
    throw std::out_of_range("hat_eval: node index " + std::to_string(alpha) + " out of range");
  }
  return mesh.hat_on_element(alpha, mesh.locate(x), x);
}

} // namespace gfem
