#pragma once

#include <ostream>
#include <span>
#include <vector>

#include "thinlayer/geometry.hpp"
#include "thinlayer/grid.hpp"
#include "thinlayer/types.hpp"

namespace thinlayer {

/// Largest admissible layer half-width as a fraction of rho_m.
inline constexpr double kOverlapSafety = 0.95;
inline constexpr double kSandwichTol = 1e-10;

/// Dirichlet transverse problem -d^2/du^2 on I = (-1, 1) and its 3-point
/// discretization with `cells` intervals.
struct TransverseModel {
  int cells = 16;

  double spacing() const { return 2.0 / cells; }
  /// E_m = (m pi / 2)^2.
  static double continuum_eigenvalue(int m);
  /// chi_m(u): cos(m pi u / 2) for odd m, sin(m pi u / 2) for even m.
  static double mode(int m, double u);
  /// Eigenvalue of the 3-point stencil: (2/h^2)(1 - cos(m pi h / 2)).
  double discrete_eigenvalue(int m) const;
};

struct LayerMetric {
  SurfMat G;
  SurfMat G_inverse;
  double det_ratio = 1.0;  // det(Id - eps u L)^2 = |G| / (eps^2 |g|)
};

/// G_{mu nu} = g_{mu rho} M^rho_sigma M^sigma_nu with M = Id - eps*u*L.
LayerMetric layer_metric(const SurfMat& g, const SurfMat& weingarten, double eps_u);

/// J = 1/2 ln[1 + sum_mu (-eps u)^mu binom(d-1, mu) K_mu].
double jacobian_factor(const SurfVec& invariants, double eps_u);
/// J = 1/2 ln det(Id - eps u L).
double jacobian_factor_det(const SurfMat& weingarten, double eps_u);

/// Fields of the transformed operator on every node of a layer grid
/// (boundary nodes included). Node index = surface_node * (n_u + 1) + j.
struct LayerFields {
  Grid grid;
  double eps = 0.0;
  double rho_m = 0.0;
  std::vector<SurfMat> G_inverse;
  std::vector<double> det_ratio;
  std::vector<double> J;
  std::vector<double> V;
  /// max |V_4th-order - V_2nd-order| over interior nodes.
  double v_fd_noise = 0.0;

  double c_minus() const;
  double c_plus() const;
};

struct LayerOptions {
  int fd_order = 4;
  double v_fd_tol = 1e-2;
};

/// Builds G^{mu nu}, |G| ratio, J and V. Rejects eps >= 0.95 rho_m.
LayerFields build_layer_fields(const Grid& layer_grid, const GeometryFields& geometry, double eps,
                               const LayerOptions& options = {});

/// V = |g|^{-1/2} d_i(|g|^{1/2} G^{ij} d_j J) + J_i G^{ij} J_j with
/// G^{dd} = eps^{-2}, all derivatives of J by finite differences of order
/// `fd_order` on the grid.
std::vector<double> potential_V(const Grid& layer_grid, const GeometryFields& geometry,
                                std::span<const SurfMat> G_inverse, std::span<const double> J,
                                double eps, int fd_order);

struct SandwichReport {
  double c_minus = 1.0;
  double c_plus = 1.0;
  /// min over nodes of (smallest eigenvalue of g^{-1/2} G g^{-1/2}) - C_-.
  double lower_margin = 0.0;
  /// min over nodes of C_+ - (largest eigenvalue).
  double upper_margin = 0.0;
};

SandwichReport metric_sandwich_check(const LayerFields& layer, const GeometryFields& geometry,
                                     double eps, double rho_m);

/// sup over nodes of the spectral norm of a^{mu nu} = G^{mu nu} - g^{mu nu}.
double metric_deviation_sup(const LayerFields& layer, const GeometryFields& geometry);
/// sup over interior nodes of |V - V_eff|.
double potential_deviation_sup(const LayerFields& layer, const GeometryFields& geometry);

/// CSV dump: x..., u, J, V, det_ratio per product node.
void write_layer_csv(const LayerFields& layer, const GeometryFields& geometry, std::ostream& out);

}  // namespace thinlayer
