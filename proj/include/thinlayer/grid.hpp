#pragma once

#include <cstddef>
#include <vector>

namespace thinlayer {

enum class BoundaryKind { Dirichlet, Periodic };

/// One coordinate direction of a uniform tensor grid.
///
/// A Dirichlet axis with `cells` intervals has `cells + 1` nodes, of which the
/// two end nodes are eliminated; a periodic axis has `cells` nodes and no
/// duplicated seam node.
struct Axis {
  double lo = 0.0;
  double hi = 1.0;
  int cells = 8;
  BoundaryKind kind = BoundaryKind::Dirichlet;

  bool periodic() const { return kind == BoundaryKind::Periodic; }
  double spacing() const { return (hi - lo) / cells; }
  double length() const { return hi - lo; }
  int node_count() const { return periodic() ? cells : cells + 1; }
  int unknown_count() const { return periodic() ? cells : cells - 1; }
  int node_of_unknown(int k) const { return periodic() ? k : k + 1; }
  /// -1 for eliminated Dirichlet end nodes.
  int unknown_of_node(int i) const;
  double node_coordinate(int i) const { return lo + i * spacing(); }
  double unknown_coordinate(int k) const { return node_coordinate(node_of_unknown(k)); }
};

/// Uniform tensor grid with the last axis varying fastest in every flat index.
///
/// A layer grid is the surface axes followed by the transverse axis on
/// [-1, 1] (always Dirichlet); a surface grid has only the surface axes.
class Grid {
 public:
  Grid() = default;
  Grid(std::vector<Axis> surface_axes, bool with_transverse, int transverse_cells);

  int dimension() const { return static_cast<int>(axes_.size()); }
  int surface_dimension() const { return surface_dim_; }
  bool has_transverse() const { return has_transverse_; }
  const std::vector<Axis>& axes() const { return axes_; }
  const Axis& axis(int a) const { return axes_[static_cast<std::size_t>(a)]; }
  const Axis& transverse_axis() const { return axes_.back(); }

  /// Grid made of the surface axes only.
  Grid surface() const;

  std::size_t node_count() const { return node_total_; }
  std::size_t unknown_count() const { return unknown_total_; }
  std::size_t surface_node_count() const;
  std::size_t surface_unknown_count() const;
  int transverse_node_count() const;
  int transverse_unknown_count() const;

  std::vector<int> node_multi_index(std::size_t flat) const;
  std::size_t node_flat_index(const std::vector<int>& idx) const;
  std::vector<int> unknown_multi_index(std::size_t flat) const;
  std::size_t unknown_flat_index(const std::vector<int>& idx) const;

  std::size_t node_of_unknown(std::size_t unknown) const;
  /// Returns -1 for nodes on an eliminated Dirichlet boundary.
  long unknown_of_node(std::size_t node) const;

  /// Neighbouring unknown along `axis` in direction `step` (+1/-1) with
  /// periodic wrap; -1 if the neighbour is an eliminated boundary node.
  long unknown_neighbor(std::size_t unknown, int axis, int step) const;

  /// Product of the spacings: the quadrature weight of one node.
  double cell_weight() const;
  /// Largest spacing among the surface axes (parameter units).
  double max_surface_spacing() const;

 private:
  std::vector<Axis> axes_;
  int surface_dim_ = 0;
  bool has_transverse_ = false;
  std::size_t node_total_ = 0;
  std::size_t unknown_total_ = 0;
};

}  // namespace thinlayer
