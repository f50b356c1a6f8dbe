#include "thinlayer/layer.hpp"

#include <cmath>
#include <numbers>

#include <fmt/format.h>

#include "thinlayer/errors.hpp"
#include "thinlayer/finite_difference.hpp"

namespace thinlayer {

double TransverseModel::continuum_eigenvalue(int m) {
  const double k = m * std::numbers::pi / 2.0;
  return k * k;
}

double TransverseModel::mode(int m, double u) {
  const double arg = m * std::numbers::pi * u / 2.0;
  return m % 2 == 1 ? std::cos(arg) : std::sin(arg);
}

double TransverseModel::discrete_eigenvalue(int m) const {
  const double h = spacing();
  return 2.0 / (h * h) * (1.0 - std::cos(m * std::numbers::pi * h / 2.0));
}

LayerMetric layer_metric(const SurfMat& g, const SurfMat& weingarten, double eps_u) {
  const auto m = g.rows();
  const SurfMat M = SurfMat::Identity(m, m) - eps_u * weingarten;
  const double det_m = M.determinant();
  if (!(det_m > 0.0))
    throw Error(ErrorCode::SingularM, fmt::format("det(Id - eps u L) = {:.3e}", det_m));
  LayerMetric out;
  out.det_ratio = det_m * det_m;
  // g M is symmetric because L is g-self-adjoint; symmetrize away rounding.
  SurfMat gm = g * M;
  gm = (0.5 * (gm + gm.transpose())).eval();
  out.G = gm * g.inverse() * gm;
  out.G = (0.5 * (out.G + out.G.transpose())).eval();
  const SurfMat m_inv = M.inverse();
  SurfMat gi = m_inv * g.inverse() * m_inv.transpose();
  out.G_inverse = 0.5 * (gi + gi.transpose());
  return out;
}

double jacobian_factor(const SurfVec& K, double eps_u) {
  double arg = 1.0;
  if (K.size() == 1) {
    arg -= eps_u * K(0);
  } else {
    arg += -2.0 * eps_u * K(0) + eps_u * eps_u * K(1);
  }
  if (!(arg > 0.0))
    throw Error(ErrorCode::OverlapViolation, fmt::format("layer map folds: 1 + ... = {:.3e}", arg));
  return 0.5 * std::log(arg);
}

double jacobian_factor_det(const SurfMat& weingarten, double eps_u) {
  const auto m = weingarten.rows();
  const double det_m = (SurfMat::Identity(m, m) - eps_u * weingarten).determinant();
  if (!(det_m > 0.0))
    throw Error(ErrorCode::OverlapViolation, fmt::format("det(Id - eps u L) = {:.3e}", det_m));
  return 0.5 * std::log(det_m);
}

double LayerFields::c_minus() const {
  const double r = std::isinf(rho_m) ? 0.0 : eps / rho_m;
  return (1.0 - r) * (1.0 - r);
}

double LayerFields::c_plus() const {
  const double r = std::isinf(rho_m) ? 0.0 : eps / rho_m;
  return (1.0 + r) * (1.0 + r);
}

namespace {

void check_grids(const Grid& layer_grid, const GeometryFields& geometry) {
  if (!layer_grid.has_transverse())
    throw Error(ErrorCode::GridMismatch, "layer fields need a grid with a transverse axis");
  if (layer_grid.surface_node_count() != geometry.grid.node_count() ||
      layer_grid.surface_dimension() != geometry.grid.surface_dimension())
    throw Error(ErrorCode::GridMismatch, "layer grid does not match the geometry grid");
}

}  // namespace

std::vector<double> potential_V(const Grid& grid, const GeometryFields& geometry,
                                std::span<const SurfMat> G_inverse, std::span<const double> J,
                                double eps, int fd_order) {
  check_grids(grid, geometry);
  const int m = grid.surface_dimension();
  const std::size_t nn = grid.node_count();
  const auto nu = static_cast<std::size_t>(grid.transverse_node_count());

  const auto Ju = fd::derivative_along(grid, m, J, fd_order, 1);
  const auto Juu = fd::derivative_along(grid, m, J, fd_order, 2);
  std::vector<std::vector<double>> grad(static_cast<std::size_t>(m));
  for (int a = 0; a < m; ++a) grad[static_cast<std::size_t>(a)] = fd::derivative_along(grid, a, J, fd_order, 1);

  std::vector<double> div(nn, 0.0);
  for (int a = 0; a < m; ++a) {
    std::vector<double> flux(nn);
    for (std::size_t p = 0; p < nn; ++p) {
      double f = 0.0;
      for (int b = 0; b < m; ++b) f += G_inverse[p](a, b) * grad[static_cast<std::size_t>(b)][p];
      flux[p] = geometry.nodes[p / nu].sqrt_det_g * f;
    }
    const auto d = fd::derivative_along(grid, a, flux, fd_order, 1);
    for (std::size_t p = 0; p < nn; ++p) div[p] += d[p];
  }

  const double inv_eps2 = 1.0 / (eps * eps);
  std::vector<double> V(nn);
  for (std::size_t p = 0; p < nn; ++p) {
    double quad = 0.0;
    for (int a = 0; a < m; ++a)
      for (int b = 0; b < m; ++b)
        quad += grad[static_cast<std::size_t>(a)][p] * G_inverse[p](a, b) * grad[static_cast<std::size_t>(b)][p];
    V[p] = div[p] / geometry.nodes[p / nu].sqrt_det_g + quad + inv_eps2 * (Juu[p] + Ju[p] * Ju[p]);
  }
  return V;
}

LayerFields build_layer_fields(const Grid& grid, const GeometryFields& geometry, double eps,
                               const LayerOptions& options) {
  check_grids(grid, geometry);
  const CurvatureBounds bounds = curvature_bounds(geometry);
  if (!(eps > 0.0)) throw Error(ErrorCode::InvalidParams, "eps must be positive");
  if (!std::isinf(bounds.rho_m) && eps >= kOverlapSafety * bounds.rho_m)
    throw Error(ErrorCode::OverlapViolation,
                fmt::format("eps = {} >= {} rho_m = {}", eps, kOverlapSafety, kOverlapSafety * bounds.rho_m));

  LayerFields out;
  out.grid = grid;
  out.eps = eps;
  out.rho_m = bounds.rho_m;
  const std::size_t nn = grid.node_count();
  const auto nu = static_cast<std::size_t>(grid.transverse_node_count());
  const Axis& ut = grid.transverse_axis();
  out.G_inverse.resize(nn);
  out.det_ratio.resize(nn);
  out.J.resize(nn);
  for (std::size_t p = 0; p < nn; ++p) {
    const NodeGeometry& n = geometry.nodes[p / nu];
    const double eps_u = eps * ut.node_coordinate(static_cast<int>(p % nu));
    const LayerMetric lm = layer_metric(n.g, n.weingarten, eps_u);
    out.G_inverse[p] = lm.G_inverse;
    out.det_ratio[p] = lm.det_ratio;
    out.J[p] = jacobian_factor(n.invariants, eps_u);
  }

  out.V = potential_V(grid, geometry, out.G_inverse, out.J, eps, options.fd_order);
  const int other = options.fd_order == 4 ? 2 : 4;
  const auto check = potential_V(grid, geometry, out.G_inverse, out.J, eps, other);
  for (std::size_t k = 0; k < grid.unknown_count(); ++k) {
    const std::size_t p = grid.node_of_unknown(k);
    out.v_fd_noise = std::max(out.v_fd_noise, std::abs(out.V[p] - check[p]));
  }
  if (out.v_fd_noise > options.v_fd_tol)
    throw Error(ErrorCode::GridTooCoarse,
                fmt::format("potential stencil disagreement {:.3e} > {:.3e}", out.v_fd_noise, options.v_fd_tol));
  return out;
}

namespace {

std::pair<double, double> relative_eigen_range(const SurfMat& G, const SurfMat& g) {
  if (G.rows() == 1) {
    const double r = G(0, 0) / g(0, 0);
    return {r, r};
  }
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(G, g, Eigen::EigenvaluesOnly);
  return {es.eigenvalues()(0), es.eigenvalues()(1)};
}

}  // namespace

SandwichReport metric_sandwich_check(const LayerFields& layer, const GeometryFields& geometry,
                                     double eps, double rho_m) {
  check_grids(layer.grid, geometry);
  SandwichReport r;
  const double ratio = std::isinf(rho_m) ? 0.0 : eps / rho_m;
  r.c_minus = (1.0 - ratio) * (1.0 - ratio);
  r.c_plus = (1.0 + ratio) * (1.0 + ratio);
  r.lower_margin = std::numeric_limits<double>::infinity();
  r.upper_margin = std::numeric_limits<double>::infinity();
  const auto nu = static_cast<std::size_t>(layer.grid.transverse_node_count());
  for (std::size_t p = 0; p < layer.G_inverse.size(); ++p) {
    const NodeGeometry& n = geometry.nodes[p / nu];
    const SurfMat G = layer.G_inverse[p].inverse();
    const auto [lo, hi] = relative_eigen_range(G, n.g);
    const double lower = lo - r.c_minus;
    const double upper = r.c_plus - hi;
    if (lower < -kSandwichTol || upper < -kSandwichTol)
      throw Error(ErrorCode::SandwichViolation,
                  fmt::format("node {}: eigenvalues [{:.12g}, {:.12g}] outside [{:.12g}, {:.12g}]", p, lo,
                              hi, r.c_minus, r.c_plus));
    r.lower_margin = std::min(r.lower_margin, lower);
    r.upper_margin = std::min(r.upper_margin, upper);
  }
  return r;
}

double metric_deviation_sup(const LayerFields& layer, const GeometryFields& geometry) {
  const auto nu = static_cast<std::size_t>(layer.grid.transverse_node_count());
  double sup = 0.0;
  for (std::size_t p = 0; p < layer.G_inverse.size(); ++p) {
    const SurfMat a = layer.G_inverse[p] - geometry.nodes[p / nu].g_inverse;
    double norm = std::abs(a(0, 0));
    if (a.rows() == 2) {
      Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(Eigen::Matrix2d(a), Eigen::EigenvaluesOnly);
      norm = es.eigenvalues().cwiseAbs().maxCoeff();
    }
    sup = std::max(sup, norm);
  }
  return sup;
}

double potential_deviation_sup(const LayerFields& layer, const GeometryFields& geometry) {
  const auto nu = static_cast<std::size_t>(layer.grid.transverse_node_count());
  double sup = 0.0;
  for (std::size_t k = 0; k < layer.grid.unknown_count(); ++k) {
    const std::size_t p = layer.grid.node_of_unknown(k);
    sup = std::max(sup, std::abs(layer.V[p] - geometry.nodes[p / nu].v_eff));
  }
  return sup;
}

void write_layer_csv(const LayerFields& layer, const GeometryFields& geometry, std::ostream& out) {
  const int m = layer.grid.surface_dimension();
  const auto nu = static_cast<std::size_t>(layer.grid.transverse_node_count());
  std::string header;
  for (int a = 0; a < m; ++a) header += fmt::format("p{},", a + 1);
  out << header << "u,J,V,det_ratio\n";
  for (std::size_t p = 0; p < layer.J.size(); ++p) {
    const NodeGeometry& n = geometry.nodes[p / nu];
    std::string row;
    for (int a = 0; a < m; ++a) row += fmt::format("{:.15g},", n.parameter(a));
    row += fmt::format("{:.15g},{:.15g},{:.15g},{:.15g}",
                       layer.grid.transverse_axis().node_coordinate(static_cast<int>(p % nu)), layer.J[p],
                       layer.V[p], layer.det_ratio[p]);
    out << row << '\n';
  }
}

}  // namespace thinlayer
