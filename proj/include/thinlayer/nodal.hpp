#pragma once

#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "thinlayer/geometry.hpp"
#include "thinlayer/grid.hpp"

namespace thinlayer {

inline constexpr double kZeroTolRelative = 1e-9;

struct NodalPoint {
  /// Chart coordinates, with u last on layer grids.
  std::vector<double> coordinates;
  AmbientVec ambient;
  /// Grid edge (node, axis) carrying the point; axis = -1 for a node that is
  /// itself within zero_tol of 0.
  std::size_t node = 0;
  int axis = -1;
};

/// Zero set of a discrete field: linear interpolation on every grid edge
/// between two unknowns of opposite sign, plus unknowns where |f| < zero_tol.
struct NodalSet {
  std::vector<NodalPoint> points;
  /// Unknowns with |f| < zero_tol and a small discrete gradient.
  std::vector<std::size_t> singular_unknowns;
  double zero_tol = 0.0;

  bool empty() const { return points.empty(); }
};

/// Embedded point of the layer, X(x) + eps u n(x).
AmbientVec layer_point(const Chart& chart, const SurfVec& x, double eps, double u);

/// `field` lives on the unknowns of `grid` (layer or surface grid); zero_tol is
/// kZeroTolRelative times max |field|.
NodalSet extract_nodal_set(const Eigen::VectorXd& field, const Grid& grid, const Chart& chart, double eps);

/// Surface nodal points swept across the interior transverse nodes.
NodalSet extrude_nodal_set(const NodalSet& surface_set, const Grid& layer_grid, const Chart& chart, double eps);

struct NodalDomains {
  /// Label per unknown, -1 on nodes with |f| < zero_tol.
  std::vector<int> label;
  int count = 0;
  std::vector<int> sign;
  std::vector<double> volume;
};

/// Strict-sign flood fill over axis neighbours (periodic wrap included).
NodalDomains count_nodal_domains(const Eigen::VectorXd& field, const Grid& grid, const Eigen::VectorXd& mass = {});

struct BoundaryTouch {
  double distance = 0.0;
  double in_eps = 0.0;
  /// Distance divided by the largest cell size max(ambient surface spacing,
  /// eps h_u).
  double in_cells = 0.0;
  double cell_size = 0.0;
};

/// Ambient distance from the nodal set to the layer boundary, that is the
/// images of Sigma x {-1, 1} and of (boundary of Sigma) x I.
BoundaryTouch boundary_touch_distance(const NodalSet& set, const Grid& layer_grid, const Chart& chart, double eps);

/// Largest ambient distance between neighbouring surface nodes.
double max_ambient_spacing(const Grid& surface_grid, const Chart& chart);

struct TubeReport {
  double delta = 0.0;
  /// Share of product unknowns farther than delta from N(phi) where psi and
  /// phi have the same sign.
  double agreement_fraction = 1.0;
  std::size_t outside_count = 0;
  /// Per interior u node: psi(., u) changes sign inside the delta-tube around
  /// every surface nodal point of phi.
  std::vector<bool> slice_sign_change;
  bool all_slices_change = true;
  /// Least-squares A in |phi(x)| ~ A dist(x, N(phi)) inside the tube.
  double fitted_A = 0.0;
};

TubeReport sign_agreement_tube(const Eigen::VectorXd& psi, const Eigen::VectorXd& phi, const Grid& layer_grid,
                               const NodalSet& phi_nodal, const Chart& chart, double delta);

/// sup over unknowns of |f(x, u)| / (1 - |u|).
double transverse_lipschitz_ratio(const Eigen::VectorXd& field, const Grid& layer_grid);

/// Symmetric discrete Hausdorff distance between two point clouds.
double hausdorff_distance(const NodalSet& a, const NodalSet& b);

/// B-weighted volume of the symmetric difference between the nodal domains of
/// psi and the extruded domains of phi, each psi domain matched with the phi
/// domain it overlaps most.
double domain_symmetric_difference(const NodalDomains& psi_domains, const NodalDomains& phi_domains,
                                   const Grid& layer_grid, const Eigen::VectorXd& mass);

/// Point cloud CSV: chart coordinates, ambient coordinates, eigen index.
void write_nodal_points_csv(const NodalSet& set, int index, std::ostream& out);

}  // namespace thinlayer
