#include "thinlayer/grid.hpp"

#include <algorithm>
#include <stdexcept>

namespace thinlayer {

int Axis::unknown_of_node(int i) const {
  if (periodic()) return ((i % cells) + cells) % cells;
  if (i <= 0 || i >= cells) return -1;
  return i - 1;
}

Grid::Grid(std::vector<Axis> surface_axes, bool with_transverse, int transverse_cells)
    : axes_(std::move(surface_axes)),
      surface_dim_(static_cast<int>(axes_.size())),
      has_transverse_(with_transverse) {
  if (has_transverse_) axes_.push_back(Axis{-1.0, 1.0, transverse_cells, BoundaryKind::Dirichlet});
  node_total_ = 1;
  unknown_total_ = 1;
  for (const auto& a : axes_) {
    node_total_ *= static_cast<std::size_t>(a.node_count());
    unknown_total_ *= static_cast<std::size_t>(a.unknown_count());
  }
}

Grid Grid::surface() const {
  std::vector<Axis> s(axes_.begin(), axes_.begin() + surface_dim_);
  return Grid(std::move(s), false, 0);
}

std::size_t Grid::surface_node_count() const {
  std::size_t n = 1;
  for (int a = 0; a < surface_dim_; ++a) n *= static_cast<std::size_t>(axis(a).node_count());
  return n;
}

std::size_t Grid::surface_unknown_count() const {
  std::size_t n = 1;
  for (int a = 0; a < surface_dim_; ++a) n *= static_cast<std::size_t>(axis(a).unknown_count());
  return n;
}

int Grid::transverse_node_count() const { return has_transverse_ ? axes_.back().node_count() : 1; }
int Grid::transverse_unknown_count() const {
  return has_transverse_ ? axes_.back().unknown_count() : 1;
}

std::vector<int> Grid::node_multi_index(std::size_t flat) const {
  std::vector<int> idx(axes_.size());
  for (int a = dimension() - 1; a >= 0; --a) {
    const auto n = static_cast<std::size_t>(axis(a).node_count());
    idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % n);
    flat /= n;
  }
  return idx;
}

std::size_t Grid::node_flat_index(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dimension(); ++a)
    flat = flat * static_cast<std::size_t>(axis(a).node_count()) +
           static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
  return flat;
}

std::vector<int> Grid::unknown_multi_index(std::size_t flat) const {
  std::vector<int> idx(axes_.size());
  for (int a = dimension() - 1; a >= 0; --a) {
    const auto n = static_cast<std::size_t>(axis(a).unknown_count());
    idx[static_cast<std::size_t>(a)] = static_cast<int>(flat % n);
    flat /= n;
  }
  return idx;
}

std::size_t Grid::unknown_flat_index(const std::vector<int>& idx) const {
  std::size_t flat = 0;
  for (int a = 0; a < dimension(); ++a)
    flat = flat * static_cast<std::size_t>(axis(a).unknown_count()) +
           static_cast<std::size_t>(idx[static_cast<std::size_t>(a)]);
  return flat;
}

std::size_t Grid::node_of_unknown(std::size_t unknown) const {
  auto idx = unknown_multi_index(unknown);
  for (int a = 0; a < dimension(); ++a)
    idx[static_cast<std::size_t>(a)] = axis(a).node_of_unknown(idx[static_cast<std::size_t>(a)]);
  return node_flat_index(idx);
}

long Grid::unknown_of_node(std::size_t node) const {
  auto idx = node_multi_index(node);
  for (int a = 0; a < dimension(); ++a) {
    const int k = axis(a).unknown_of_node(idx[static_cast<std::size_t>(a)]);
    if (k < 0) return -1;
    idx[static_cast<std::size_t>(a)] = k;
  }
  return static_cast<long>(unknown_flat_index(idx));
}

long Grid::unknown_neighbor(std::size_t unknown, int ax, int step) const {
  auto idx = unknown_multi_index(unknown);
  const Axis& a = axis(ax);
  int k = idx[static_cast<std::size_t>(ax)] + step;
  if (a.periodic()) {
    k = ((k % a.cells) + a.cells) % a.cells;
  } else if (k < 0 || k >= a.unknown_count()) {
    return -1;
  }
  idx[static_cast<std::size_t>(ax)] = k;
  return static_cast<long>(unknown_flat_index(idx));
}

double Grid::cell_weight() const {
  double w = 1.0;
  for (const auto& a : axes_) w *= a.spacing();
  return w;
}

double Grid::max_surface_spacing() const {
  double h = 0.0;
  for (int a = 0; a < surface_dim_; ++a) h = std::max(h, axis(a).spacing());
  return h;
}

}  // namespace thinlayer
