#include "thinlayer/assembly.hpp"

#include <algorithm>
#include <cmath>

#include <fmt/format.h>

#include "thinlayer/errors.hpp"

namespace thinlayer {

std::string_view to_string(OperatorKind kind) {
  switch (kind) {
    case OperatorKind::FullH: return "full_H";
    case OperatorKind::Effective: return "effective";
    case OperatorKind::H0: return "H0";
    case OperatorKind::Transverse: return "transverse";
  }
  return "unknown";
}

Grid build_grid(const Chart& chart, std::span<const int> surface_cells, int transverse_cells) {
  if (static_cast<int>(surface_cells.size()) != chart.surface_dimension())
    throw Error(ErrorCode::InvalidParams,
                fmt::format("chart '{}' needs {} surface cell counts, got {}", chart.name(),
                            chart.surface_dimension(), surface_cells.size()));
  std::vector<Axis> axes;
  for (std::size_t a = 0; a < surface_cells.size(); ++a) {
    if (surface_cells[a] < kMinCells)
      throw Error(ErrorCode::TooCoarse,
                  fmt::format("{} cells along surface axis {} (minimum {})", surface_cells[a], a, kMinCells));
    const ParameterRange& r = chart.range(static_cast<int>(a));
    axes.push_back(Axis{r.lo, r.hi, surface_cells[a], r.periodic ? BoundaryKind::Periodic : BoundaryKind::Dirichlet});
  }
  if (transverse_cells != 0 && transverse_cells < kMinCells)
    throw Error(ErrorCode::TooCoarse,
                fmt::format("{} transverse cells (minimum {})", transverse_cells, kMinCells));
  return Grid(std::move(axes), transverse_cells != 0, transverse_cells);
}

namespace {

using Triplets = std::vector<Eigen::Triplet<double>>;

// Adds to the upper triangle only; finish() mirrors it, so the result is
// symmetric bit for bit.
void add_upper(Triplets& t, long r, long c, double v) {
  if (r < 0 || c < 0) return;
  if (r <= c)
    t.emplace_back(static_cast<int>(r), static_cast<int>(c), v);
  else
    t.emplace_back(static_cast<int>(c), static_cast<int>(r), v);
}

SparseMatrix finish(Eigen::Index n, const Triplets& t) {
  SparseMatrix u(n, n);
  u.setFromTriplets(t.begin(), t.end());
  SparseMatrix lower = SparseMatrix(u.triangularView<Eigen::StrictlyUpper>()).transpose();
  SparseMatrix a = u + lower;
  a.makeCompressed();
  return a;
}

// w (f_i - f_j)^2
void add_edge(Triplets& t, long ui, long uj, double w) {
  add_upper(t, ui, ui, w);
  add_upper(t, uj, uj, w);
  if (ui >= 0 && uj >= 0) add_upper(t, ui, uj, -w);
}

struct LinearTerm {
  long unknown;
  double coefficient;
};

// s (alpha . f)(beta . f), split symmetrically.
void add_product(Triplets& t, std::span<const LinearTerm> alpha, std::span<const LinearTerm> beta, double s) {
  for (const LinearTerm& a : alpha) {
    if (a.unknown < 0) continue;
    for (const LinearTerm& b : beta) {
      if (b.unknown < 0) continue;
      const double v = s * a.coefficient * b.coefficient;
      add_upper(t, a.unknown, b.unknown, a.unknown == b.unknown ? v : 0.5 * v);
    }
  }
}

// Node reached by one step along `axis`, or -1 past a Dirichlet end.
long step_node(const Grid& grid, std::vector<int> idx, int axis, int step) {
  const Axis& ax = grid.axis(axis);
  int i = idx[static_cast<std::size_t>(axis)] + step;
  if (ax.periodic()) {
    i = (i % ax.node_count() + ax.node_count()) % ax.node_count();
  } else if (i < 0 || i >= ax.node_count()) {
    return -1;
  }
  idx[static_cast<std::size_t>(axis)] = i;
  return static_cast<long>(grid.node_flat_index(idx));
}

void append_surface_form(Triplets& t, const Grid& grid, std::span<const SurfMat> coeff) {
  const int m = grid.dimension();
  const double w = grid.cell_weight();
  for (int a = 0; a < m; ++a) {
    const double h = grid.axis(a).spacing();
    for (std::size_t i = 0; i < grid.node_count(); ++i) {
      const long j = step_node(grid, grid.node_multi_index(i), a, +1);
      if (j < 0) continue;
      const double c = 0.5 * (coeff[i](a, a) + coeff[static_cast<std::size_t>(j)](a, a));
      add_edge(t, grid.unknown_of_node(i), grid.unknown_of_node(static_cast<std::size_t>(j)), w * c / (h * h));
    }
  }
  if (m < 2) return;
  const double h0 = grid.axis(0).spacing();
  const double h1 = grid.axis(1).spacing();
  for (int i0 = 0; i0 < grid.axis(0).cells; ++i0) {
    for (int i1 = 0; i1 < grid.axis(1).cells; ++i1) {
      const std::vector<int> base{i0, i1};
      const auto n00 = static_cast<long>(grid.node_flat_index(base));
      const long n10 = step_node(grid, base, 0, +1);
      const long n01 = step_node(grid, base, 1, +1);
      const long n11 = step_node(grid, grid.node_multi_index(static_cast<std::size_t>(n10)), 1, +1);
      const double c = 0.25 * (coeff[static_cast<std::size_t>(n00)](0, 1) + coeff[static_cast<std::size_t>(n10)](0, 1) +
                               coeff[static_cast<std::size_t>(n01)](0, 1) + coeff[static_cast<std::size_t>(n11)](0, 1));
      if (c == 0.0) continue;
      auto u = [&](long n) { return grid.unknown_of_node(static_cast<std::size_t>(n)); };
      const double a0 = 0.5 / h0;
      const double a1 = 0.5 / h1;
      const LinearTerm d0[] = {{u(n10), a0}, {u(n11), a0}, {u(n00), -a0}, {u(n01), -a0}};
      const LinearTerm d1[] = {{u(n01), a1}, {u(n11), a1}, {u(n00), -a1}, {u(n10), -a1}};
      add_product(t, d0, d1, 2.0 * w * c);
    }
  }
}

void require_surface_grid(const Grid& grid, const GeometryFields& geometry) {
  if (grid.has_transverse() || grid.node_count() != geometry.grid.node_count() ||
      grid.dimension() != geometry.grid.dimension())
    throw Error(ErrorCode::GridMismatch, "surface grid does not match the geometry grid");
}

double min_coeff(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.minCoeff(); }

// sum_j slices[j] (x) (h_u e_j e_j^T) + B_s (x) eps^-2 A_u + diag(potential * mass)
OperatorPencil layer_operator(std::span<const SparseMatrix> slices, const Eigen::VectorXd& surface_mass,
                              const OperatorPencil& transverse, double eps,
                              const Eigen::VectorXd& potential) {
  const Eigen::Index ns = surface_mass.size();
  const Eigen::Index nu = transverse.size();
  const double hu = transverse.grid.axis(0).spacing();
  const double inv_eps2 = 1.0 / (eps * eps);
  OperatorPencil out;
  out.mass.resize(ns * nu);
  for (Eigen::Index s = 0; s < ns; ++s)
    for (Eigen::Index j = 0; j < nu; ++j) out.mass(s * nu + j) = surface_mass(s) * hu;

  Triplets t;
  for (Eigen::Index j = 0; j < nu; ++j) {
    const SparseMatrix& a = slices[static_cast<std::size_t>(j)];
    for (Eigen::Index col = 0; col < a.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(a, col); it; ++it)
        if (it.row() <= it.col()) add_upper(t, it.row() * nu + j, it.col() * nu + j, it.value() * hu);
  }
  for (Eigen::Index s = 0; s < ns; ++s)
    for (Eigen::Index col = 0; col < transverse.stiffness.outerSize(); ++col)
      for (SparseMatrix::InnerIterator it(transverse.stiffness, col); it; ++it)
        if (it.row() <= it.col())
          add_upper(t, s * nu + it.row(), s * nu + it.col(), surface_mass(s) * (inv_eps2 * it.value()));
  for (Eigen::Index p = 0; p < ns * nu; ++p) add_upper(t, p, p, potential(p) * out.mass(p));
  out.stiffness = finish(ns * nu, t);
  out.eps = eps;
  out.potential = potential;
  return out;
}

}  // namespace

SparseMatrix surface_form_matrix(const Grid& grid, std::span<const SurfMat> coefficient) {
  if (coefficient.size() != grid.node_count())
    throw Error(ErrorCode::GridMismatch, "coefficient field does not match the grid");
  Triplets t;
  append_surface_form(t, grid, coefficient);
  return finish(static_cast<Eigen::Index>(grid.unknown_count()), t);
}

Eigen::VectorXd surface_mass(const Grid& grid, const GeometryFields& geometry) {
  Eigen::VectorXd b(static_cast<Eigen::Index>(grid.unknown_count()));
  const double w = grid.cell_weight();
  for (std::size_t k = 0; k < grid.unknown_count(); ++k)
    b(static_cast<Eigen::Index>(k)) = geometry.nodes[grid.node_of_unknown(k)].sqrt_det_g * w;
  return b;
}

OperatorPencil assemble_transverse(const TransverseModel& transverse) {
  if (transverse.cells < 2) throw Error(ErrorCode::TooCoarse, "transverse model needs at least 2 cells");
  OperatorPencil out;
  out.kind = OperatorKind::Transverse;
  out.grid = Grid({Axis{-1.0, 1.0, transverse.cells, BoundaryKind::Dirichlet}}, false, 0);
  const Eigen::Index n = transverse.cells - 1;
  const double h = transverse.spacing();
  Triplets t;
  for (Eigen::Index k = 0; k < n; ++k) {
    add_upper(t, k, k, 2.0 / h);
    if (k + 1 < n) add_upper(t, k, k + 1, -1.0 / h);
  }
  out.stiffness = finish(n, t);
  out.mass = Eigen::VectorXd::Constant(n, h);
  out.potential = Eigen::VectorXd::Zero(n);
  return out;
}

OperatorPencil assemble_effective(const Grid& grid, const GeometryFields& geometry) {
  require_surface_grid(grid, geometry);
  std::vector<SurfMat> coeff(grid.node_count());
  for (std::size_t i = 0; i < coeff.size(); ++i)
    coeff[i] = geometry.nodes[i].sqrt_det_g * geometry.nodes[i].g_inverse;
  OperatorPencil out;
  out.kind = OperatorKind::Effective;
  out.grid = grid;
  out.kinetic = surface_form_matrix(grid, coeff);
  out.mass = surface_mass(grid, geometry);
  out.potential.resize(out.mass.size());
  for (std::size_t k = 0; k < grid.unknown_count(); ++k)
    out.potential(static_cast<Eigen::Index>(k)) = geometry.nodes[grid.node_of_unknown(k)].v_eff;
  Triplets t;
  for (Eigen::Index col = 0; col < out.kinetic.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(out.kinetic, col); it; ++it)
      if (it.row() <= it.col()) add_upper(t, it.row(), it.col(), it.value());
  for (Eigen::Index k = 0; k < out.mass.size(); ++k) add_upper(t, k, k, out.potential(k) * out.mass(k));
  out.stiffness = finish(out.mass.size(), t);
  out.spectral_floor = min_coeff(out.potential);
  check_symmetry(out.stiffness);
  return out;
}

OperatorPencil assemble_full(const Grid& grid, const GeometryFields& geometry, const LayerFields& layer,
                             double eps) {
  if (!grid.has_transverse() || layer.G_inverse.size() != grid.node_count())
    throw Error(ErrorCode::GridMismatch, "layer fields do not match the layer grid");
  const Grid surface = grid.surface();
  require_surface_grid(surface, geometry);
  if (!std::isinf(layer.rho_m) && eps >= kOverlapSafety * layer.rho_m)
    throw Error(ErrorCode::OverlapViolation, fmt::format("eps = {} too large for rho_m = {}", eps, layer.rho_m));
  if (eps != layer.eps) throw Error(ErrorCode::InvalidParams, "layer fields were built for another eps");

  const TransverseModel tm{grid.transverse_axis().cells};
  const OperatorPencil transverse = assemble_transverse(tm);
  const auto nu_nodes = static_cast<std::size_t>(grid.transverse_node_count());
  const int nu = grid.transverse_unknown_count();

  std::vector<SparseMatrix> slices;
  std::vector<SurfMat> coeff(surface.node_count());
  for (int j = 0; j < nu; ++j) {
    const std::size_t ju = static_cast<std::size_t>(j) + 1;
    for (std::size_t s = 0; s < coeff.size(); ++s)
      coeff[s] = geometry.nodes[s].sqrt_det_g * layer.G_inverse[s * nu_nodes + ju];
    slices.push_back(surface_form_matrix(surface, coeff));
  }
  Eigen::VectorXd potential(static_cast<Eigen::Index>(grid.unknown_count()));
  for (std::size_t k = 0; k < grid.unknown_count(); ++k)
    potential(static_cast<Eigen::Index>(k)) = layer.V[grid.node_of_unknown(k)];

  OperatorPencil out = layer_operator(slices, surface_mass(surface, geometry), transverse, eps, potential);
  out.kind = OperatorKind::FullH;
  out.grid = grid;
  out.spectral_floor = min_coeff(potential) + tm.discrete_eigenvalue(1) / (eps * eps);
  check_symmetry(out.stiffness);
  return out;
}

OperatorPencil assemble_H0(const OperatorPencil& effective, const TransverseModel& transverse, double eps) {
  if (effective.kind != OperatorKind::Effective || effective.kinetic.rows() != effective.size())
    throw Error(ErrorCode::GridMismatch, "H0 needs an effective pencil");
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidParams, "eps must be positive");
  const OperatorPencil tp = assemble_transverse(transverse);
  const Eigen::Index ns = effective.size();
  const Eigen::Index nu = tp.size();
  const std::vector<SparseMatrix> slices(static_cast<std::size_t>(nu), effective.kinetic);
  Eigen::VectorXd potential(ns * nu);
  for (Eigen::Index s = 0; s < ns; ++s) potential.segment(s * nu, nu).setConstant(effective.potential(s));
  Eigen::VectorXd surface_b = effective.mass;

  OperatorPencil out = layer_operator(slices, surface_b, tp, eps, potential);
  out.kind = OperatorKind::H0;
  std::vector<Axis> axes = effective.grid.axes();
  out.grid = Grid(std::move(axes), true, transverse.cells);
  out.spectral_floor = min_coeff(potential) + transverse.discrete_eigenvalue(1) / (eps * eps);
  return out;
}

OperatorPencil renormalize(const OperatorPencil& pencil, double eps, const TransverseModel& transverse) {
  OperatorPencil out = pencil;
  const double shift = transverse.discrete_eigenvalue(1) / (eps * eps);
  for (Eigen::Index k = 0; k < out.size(); ++k) out.stiffness.coeffRef(k, k) -= shift * out.mass(k);
  out.shift = pencil.shift + shift;
  out.spectral_floor = pencil.spectral_floor - shift;
  return out;
}

double check_symmetry(const SparseMatrix& a) {
  const SparseMatrix d = a - SparseMatrix(a.transpose());
  double asym = 0.0;
  for (Eigen::Index col = 0; col < d.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(d, col); it; ++it) asym = std::max(asym, std::abs(it.value()));
  double scale = 0.0;
  for (Eigen::Index col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it) scale = std::max(scale, std::abs(it.value()));
  if (asym > 1e-12 * scale)
    throw Error(ErrorCode::AsymmetryDetected, fmt::format("max |A - A^T| = {:.3e}", asym));
  return asym;
}

void write_matrix_coo(const SparseMatrix& a, std::ostream& out) {
  for (Eigen::Index col = 0; col < a.outerSize(); ++col)
    for (SparseMatrix::InnerIterator it(a, col); it; ++it)
      if (it.row() <= it.col()) out << fmt::format("{} {} {:.17g}\n", it.row(), it.col(), it.value());
}

}  // namespace thinlayer
