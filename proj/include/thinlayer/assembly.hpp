#pragma once

#include <ostream>
#include <span>
#include <vector>

#include <Eigen/Sparse>

#include "thinlayer/geometry.hpp"
#include "thinlayer/grid.hpp"
#include "thinlayer/layer.hpp"

namespace thinlayer {

using SparseMatrix = Eigen::SparseMatrix<double>;

enum class OperatorKind { FullH, Effective, H0, Transverse };

std::string_view to_string(OperatorKind kind);

/// Symmetric stiffness A and diagonal mass B of a discretized operator; the
/// eigenproblem is A v = lambda B v.
struct OperatorPencil {
  SparseMatrix stiffness;
  Eigen::VectorXd mass;
  OperatorKind kind = OperatorKind::Effective;
  Grid grid;
  double eps = 0.0;
  /// Multiple of B already subtracted from A.
  double shift = 0.0;
  /// Lower bound for the spectrum of the pencil (smallest potential value
  /// minus the shift, plus eps^-2 E_1^h for layer operators).
  double spectral_floor = 0.0;

  /// Effective pencils also keep the kinetic part and the potential so that
  /// H0 can be assembled from the same pieces as the full operator.
  SparseMatrix kinetic;
  Eigen::VectorXd potential;

  Eigen::Index size() const { return mass.size(); }
};

/// Minimum cells per coordinate accepted by build_grid.
inline constexpr int kMinCells = 8;

/// Tensor grid over the chart rectangle; `transverse_cells` = 0 gives a
/// surface grid, otherwise the transverse axis [-1, 1] is appended.
Grid build_grid(const Chart& chart, std::span<const int> surface_cells, int transverse_cells);

/// Stiffness of the quadratic form sum_{ab} int coeff^{ab} d_a f d_b f over a
/// surface grid, coeff given per surface node (boundary nodes included).
/// Edge terms use the average of the two nodal coefficients, mixed terms the
/// cell average of coeff^{01} times cell-centred differences.
SparseMatrix surface_form_matrix(const Grid& surface_grid, std::span<const SurfMat> coefficient);

/// Node weight |g|^{1/2} times the cell volume, per surface unknown.
Eigen::VectorXd surface_mass(const Grid& surface_grid, const GeometryFields& geometry);

/// 1D pencil of -d^2/du^2 on the transverse axis: A = tridiag(-1, 2, -1)/h_u,
/// B = h_u I.
OperatorPencil assemble_transverse(const TransverseModel& transverse);

/// Pencil of h_eff = -Delta_g + V_eff on the surface grid.
OperatorPencil assemble_effective(const Grid& surface_grid, const GeometryFields& geometry);

/// Pencil of the transformed layer operator H on the product grid.
OperatorPencil assemble_full(const Grid& layer_grid, const GeometryFields& geometry,
                             const LayerFields& layer, double eps);

/// Kronecker sum h_eff (x) I + I (x) eps^-2 (-d^2/du^2) in the weighted inner
/// product.
OperatorPencil assemble_H0(const OperatorPencil& effective, const TransverseModel& transverse,
                           double eps);

/// Subtracts eps^-2 E_1^h B, with E_1^h the discrete transverse ground state.
OperatorPencil renormalize(const OperatorPencil& pencil, double eps, const TransverseModel& transverse);

/// Max |A - A^T| entry. Throws AsymmetryDetected above 1e-12 max|A|.
double check_symmetry(const SparseMatrix& a);

/// Zero-based "row col value" lines of the upper triangle.
void write_matrix_coo(const SparseMatrix& a, std::ostream& out);

}  // namespace thinlayer
