#include "thinlayer/nodal.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include <fmt/format.h>

#include "thinlayer/errors.hpp"

namespace thinlayer {

namespace {

constexpr double kAbsoluteZero = 1e-14;

double sup_norm(const Eigen::VectorXd& f) { return f.size() ? f.cwiseAbs().maxCoeff() : 0.0; }

SurfVec surface_part(const Grid& grid, std::span<const double> coords) {
  SurfVec x(grid.surface_dimension());
  for (int a = 0; a < grid.surface_dimension(); ++a) x(a) = coords[static_cast<std::size_t>(a)];
  return x;
}

std::vector<double> node_coordinates(const Grid& grid, std::size_t node) {
  const auto idx = grid.node_multi_index(node);
  std::vector<double> c(idx.size());
  for (std::size_t a = 0; a < idx.size(); ++a) c[a] = grid.axis(static_cast<int>(a)).node_coordinate(idx[a]);
  return c;
}

AmbientVec embed_coordinates(const Grid& grid, const Chart& chart, std::span<const double> c, double eps) {
  const SurfVec x = surface_part(grid, c);
  if (!grid.has_transverse()) return chart.embed(x);
  return layer_point(chart, x, eps, c.back());
}

double point_segment_distance(const AmbientVec& p, const AmbientVec& a, const AmbientVec& b) {
  const AmbientVec ab = b - a;
  const double len2 = ab.squaredNorm();
  const double t = len2 > 0.0 ? std::clamp((p - a).dot(ab) / len2, 0.0, 1.0) : 0.0;
  return (p - (a + t * ab)).norm();
}

// Closest point on a triangle, after Ericson, Real-Time Collision Detection.
double point_triangle_distance(const Eigen::Vector3d& p, const Eigen::Vector3d& a, const Eigen::Vector3d& b,
                               const Eigen::Vector3d& c) {
  const Eigen::Vector3d ab = b - a, ac = c - a, ap = p - a;
  const double d1 = ab.dot(ap), d2 = ac.dot(ap);
  if (d1 <= 0.0 && d2 <= 0.0) return (p - a).norm();
  const Eigen::Vector3d bp = p - b;
  const double d3 = ab.dot(bp), d4 = ac.dot(bp);
  if (d3 >= 0.0 && d4 <= d3) return (p - b).norm();
  const double vc = d1 * d4 - d3 * d2;
  if (vc <= 0.0 && d1 >= 0.0 && d3 <= 0.0) return (p - (a + d1 / (d1 - d3) * ab)).norm();
  const Eigen::Vector3d cp = p - c;
  const double d5 = ab.dot(cp), d6 = ac.dot(cp);
  if (d6 >= 0.0 && d5 <= d6) return (p - c).norm();
  const double vb = d5 * d2 - d1 * d6;
  if (vb <= 0.0 && d2 >= 0.0 && d6 <= 0.0) return (p - (a + d2 / (d2 - d6) * ac)).norm();
  const double va = d3 * d6 - d5 * d4;
  if (va <= 0.0 && (d4 - d3) >= 0.0 && (d5 - d6) >= 0.0)
    return (p - (b + (d4 - d3) / ((d4 - d3) + (d5 - d6)) * (c - b))).norm();
  const double denom = 1.0 / (va + vb + vc);
  return (p - (a + ab * (vb * denom) + ac * (vc * denom))).norm();
}

int sign_of(double v) { return (v > 0.0) - (v < 0.0); }

}  // namespace

AmbientVec layer_point(const Chart& chart, const SurfVec& x, double eps, double u) {
  return chart.embed(x) + (eps * u) * evaluate_weingarten(chart, x).normal;
}

NodalSet extract_nodal_set(const Eigen::VectorXd& f, const Grid& grid, const Chart& chart, double eps) {
  if (static_cast<std::size_t>(f.size()) != grid.unknown_count())
    throw Error(ErrorCode::GridMismatch, "field does not match the grid");
  const double fmax = sup_norm(f);
  if (fmax < kAbsoluteZero) throw Error(ErrorCode::AllZeroField, fmt::format("max |f| = {:.3e}", fmax));
  NodalSet set;
  set.zero_tol = kZeroTolRelative * fmax;
  double h = 0.0;
  for (const Axis& ax : grid.axes()) h = std::max(h, ax.spacing());
  const double grad_tol = h * fmax;

  for (std::size_t k = 0; k < grid.unknown_count(); ++k) {
    const std::size_t node = grid.node_of_unknown(k);
    const double fk = f(static_cast<Eigen::Index>(k));
    if (std::abs(fk) < set.zero_tol) {
      NodalPoint p;
      p.coordinates = node_coordinates(grid, node);
      p.ambient = embed_coordinates(grid, chart, p.coordinates, eps);
      p.node = node;
      set.points.push_back(std::move(p));
      double g2 = 0.0;
      for (int a = 0; a < grid.dimension(); ++a) {
        const long up = grid.unknown_neighbor(k, a, +1);
        const long dn = grid.unknown_neighbor(k, a, -1);
        const double fu = up < 0 ? 0.0 : f(up);
        const double fd = dn < 0 ? 0.0 : f(dn);
        const double d = (fu - fd) / (2.0 * grid.axis(a).spacing());
        g2 += d * d;
      }
      if (std::sqrt(g2) < grad_tol) set.singular_unknowns.push_back(k);
    }
    for (int a = 0; a < grid.dimension(); ++a) {
      const long j = grid.unknown_neighbor(k, a, +1);
      if (j < 0) continue;
      const double fj = f(j);
      if (std::abs(fk) < set.zero_tol || std::abs(fj) < set.zero_tol || fk * fj > 0.0) continue;
      const Axis& ax = grid.axis(a);
      const double t = fk / (fk - fj);
      NodalPoint p;
      p.coordinates = node_coordinates(grid, node);
      double c = p.coordinates[static_cast<std::size_t>(a)] + t * ax.spacing();
      if (ax.periodic() && c >= ax.hi) c -= ax.length();
      p.coordinates[static_cast<std::size_t>(a)] = c;
      p.ambient = embed_coordinates(grid, chart, p.coordinates, eps);
      p.node = node;
      p.axis = a;
      set.points.push_back(std::move(p));
    }
  }
  return set;
}

NodalSet extrude_nodal_set(const NodalSet& surface_set, const Grid& layer_grid, const Chart& chart, double eps) {
  NodalSet out;
  out.zero_tol = surface_set.zero_tol;
  const Axis& ut = layer_grid.transverse_axis();
  for (const NodalPoint& z : surface_set.points) {
    SurfVec x(static_cast<Eigen::Index>(z.coordinates.size()));
    for (std::size_t a = 0; a < z.coordinates.size(); ++a) x(static_cast<Eigen::Index>(a)) = z.coordinates[a];
    const AmbientVec base = chart.embed(x);
    const AmbientVec n = evaluate_weingarten(chart, x).normal;
    for (int k = 0; k < ut.unknown_count(); ++k) {
      const double u = ut.unknown_coordinate(k);
      NodalPoint p;
      p.coordinates = z.coordinates;
      p.coordinates.push_back(u);
      p.ambient = base + (eps * u) * n;
      p.node = z.node;
      p.axis = z.axis;
      out.points.push_back(std::move(p));
    }
  }
  return out;
}

NodalDomains count_nodal_domains(const Eigen::VectorXd& f, const Grid& grid, const Eigen::VectorXd& mass) {
  if (static_cast<std::size_t>(f.size()) != grid.unknown_count())
    throw Error(ErrorCode::GridMismatch, "field does not match the grid");
  const double tol = kZeroTolRelative * sup_norm(f);
  NodalDomains d;
  d.label.assign(grid.unknown_count(), -2);
  for (std::size_t k = 0; k < grid.unknown_count(); ++k)
    if (!(std::abs(f(static_cast<Eigen::Index>(k))) > tol)) d.label[k] = -1;

  std::vector<std::size_t> stack;
  for (std::size_t seed = 0; seed < grid.unknown_count(); ++seed) {
    if (d.label[seed] != -2) continue;
    const int id = d.count++;
    const int s = sign_of(f(static_cast<Eigen::Index>(seed)));
    d.sign.push_back(s);
    d.volume.push_back(0.0);
    d.label[seed] = id;
    stack.assign(1, seed);
    while (!stack.empty()) {
      const std::size_t k = stack.back();
      stack.pop_back();
      if (mass.size()) d.volume.back() += mass(static_cast<Eigen::Index>(k));
      for (int a = 0; a < grid.dimension(); ++a) {
        for (int step : {-1, 1}) {
          const long j = grid.unknown_neighbor(k, a, step);
          if (j < 0) continue;
          const auto uj = static_cast<std::size_t>(j);
          if (d.label[uj] != -2 || sign_of(f(j)) != s) continue;
          d.label[uj] = id;
          stack.push_back(uj);
        }
      }
    }
  }
  return d;
}

double max_ambient_spacing(const Grid& grid, const Chart& chart) {
  std::vector<AmbientVec> x(grid.node_count());
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = chart.embed(surface_part(grid, node_coordinates(grid, i)));
  double h = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    auto idx = grid.node_multi_index(i);
    for (int a = 0; a < grid.surface_dimension(); ++a) {
      const Axis& ax = grid.axis(a);
      auto j = idx;
      j[static_cast<std::size_t>(a)] += 1;
      if (j[static_cast<std::size_t>(a)] >= ax.node_count()) {
        if (!ax.periodic()) continue;
        j[static_cast<std::size_t>(a)] = 0;
      }
      h = std::max(h, (x[i] - x[grid.node_flat_index(j)]).norm());
    }
  }
  return h;
}

BoundaryTouch boundary_touch_distance(const NodalSet& set, const Grid& layer_grid, const Chart& chart, double eps) {
  if (set.empty()) throw Error(ErrorCode::EmptyNodalSet, "no nodal points");
  const Grid surface = layer_grid.surface();
  const Axis& ut = layer_grid.transverse_axis();
  std::vector<AmbientVec> base(surface.node_count());
  std::vector<AmbientVec> normal(surface.node_count());
  for (std::size_t i = 0; i < base.size(); ++i) {
    const SurfVec x = surface_part(surface, node_coordinates(surface, i));
    base[i] = chart.embed(x);
    normal[i] = evaluate_weingarten(chart, x).normal;
  }
  auto at = [&](std::size_t i, double u) -> AmbientVec { return base[i] + (eps * u) * normal[i]; };

  double best = std::numeric_limits<double>::infinity();
  if (surface.dimension() == 1) {
    const Axis& ax = surface.axis(0);
    const int n = ax.node_count();
    const int segments = ax.periodic() ? n : n - 1;
    std::vector<std::pair<AmbientVec, AmbientVec>> segs;
    for (double side : {-1.0, 1.0})
      for (int i = 0; i < segments; ++i)
        segs.emplace_back(at(static_cast<std::size_t>(i), side), at(static_cast<std::size_t>((i + 1) % n), side));
    if (!ax.periodic())
      for (std::size_t end : {std::size_t{0}, static_cast<std::size_t>(n - 1)})
        for (int j = 0; j < ut.cells; ++j)
          segs.emplace_back(at(end, ut.node_coordinate(j)), at(end, ut.node_coordinate(j + 1)));
    for (const NodalPoint& p : set.points)
      for (const auto& [a, b] : segs) best = std::min(best, point_segment_distance(p.ambient, a, b));
  } else {
    std::vector<std::array<Eigen::Vector3d, 3>> tris;
    auto quad = [&](const Eigen::Vector3d& a, const Eigen::Vector3d& b, const Eigen::Vector3d& c,
                    const Eigen::Vector3d& d) {
      tris.push_back({a, b, c});
      tris.push_back({a, c, d});
    };
    const Axis& a0 = surface.axis(0);
    const Axis& a1 = surface.axis(1);
    auto node = [&](int i0, int i1) {
      return surface.node_flat_index({i0 % a0.node_count(), i1 % a1.node_count()});
    };
    for (double side : {-1.0, 1.0})
      for (int i0 = 0; i0 < a0.cells; ++i0)
        for (int i1 = 0; i1 < a1.cells; ++i1)
          quad(at(node(i0, i1), side), at(node(i0 + 1, i1), side), at(node(i0 + 1, i1 + 1), side),
               at(node(i0, i1 + 1), side));
    for (int axis = 0; axis < 2; ++axis) {
      const Axis& fixed = surface.axis(axis);
      const Axis& along = surface.axis(1 - axis);
      if (fixed.periodic()) continue;
      for (int end : {0, fixed.node_count() - 1})
        for (int i = 0; i < along.cells; ++i)
          for (int j = 0; j < ut.cells; ++j) {
            const std::size_t p0 = axis == 0 ? node(end, i) : node(i, end);
            const std::size_t p1 = axis == 0 ? node(end, i + 1) : node(i + 1, end);
            const double u0 = ut.node_coordinate(j);
            const double u1 = ut.node_coordinate(j + 1);
            quad(at(p0, u0), at(p1, u0), at(p1, u1), at(p0, u1));
          }
    }
    for (const NodalPoint& p : set.points) {
      const Eigen::Vector3d q = p.ambient;
      for (const auto& t : tris) best = std::min(best, point_triangle_distance(q, t[0], t[1], t[2]));
    }
  }
  BoundaryTouch out;
  out.distance = best;
  out.in_eps = best / eps;
  out.cell_size = std::max(max_ambient_spacing(surface, chart), eps * ut.spacing());
  out.in_cells = best / out.cell_size;
  return out;
}

TubeReport sign_agreement_tube(const Eigen::VectorXd& psi, const Eigen::VectorXd& phi, const Grid& layer_grid,
                               const NodalSet& phi_nodal, const Chart& chart, double delta) {
  if (phi_nodal.empty()) throw Error(ErrorCode::EmptyNodalSet, "phi has no nodal points");
  const Grid surface = layer_grid.surface();
  const auto ns = static_cast<Eigen::Index>(surface.unknown_count());
  const auto nu = static_cast<Eigen::Index>(layer_grid.transverse_unknown_count());
  if (phi.size() != ns || psi.size() != ns * nu) throw Error(ErrorCode::GridMismatch, "fields do not match the grid");

  std::vector<AmbientVec> x(static_cast<std::size_t>(ns));
  std::vector<double> dist(static_cast<std::size_t>(ns), std::numeric_limits<double>::infinity());
  for (Eigen::Index s = 0; s < ns; ++s) {
    const auto c = node_coordinates(surface, surface.node_of_unknown(static_cast<std::size_t>(s)));
    x[static_cast<std::size_t>(s)] = chart.embed(surface_part(surface, c));
    for (const NodalPoint& z : phi_nodal.points)
      dist[static_cast<std::size_t>(s)] = std::min(dist[static_cast<std::size_t>(s)], (x[static_cast<std::size_t>(s)] - z.ambient).norm());
  }

  TubeReport r;
  r.delta = delta;
  std::size_t agree = 0;
  double num = 0.0, den = 0.0;
  for (Eigen::Index s = 0; s < ns; ++s) {
    const double d = dist[static_cast<std::size_t>(s)];
    if (d > delta) {
      for (Eigen::Index j = 0; j < nu; ++j) {
        ++r.outside_count;
        if (sign_of(psi(s * nu + j)) == sign_of(phi(s)) && sign_of(phi(s)) != 0) ++agree;
      }
    } else {
      num += std::abs(phi(s)) * d;
      den += d * d;
    }
  }
  r.agreement_fraction = r.outside_count ? static_cast<double>(agree) / static_cast<double>(r.outside_count) : 1.0;
  r.fitted_A = den > 0.0 ? num / den : 0.0;

  r.slice_sign_change.assign(static_cast<std::size_t>(nu), true);
  for (Eigen::Index j = 0; j < nu; ++j) {
    for (const NodalPoint& z : phi_nodal.points) {
      bool pos = false, neg = false;
      for (Eigen::Index s = 0; s < ns; ++s) {
        if ((x[static_cast<std::size_t>(s)] - z.ambient).norm() > delta) continue;
        const double v = psi(s * nu + j);
        pos = pos || v > 0.0;
        neg = neg || v < 0.0;
      }
      if (!(pos && neg)) {
        r.slice_sign_change[static_cast<std::size_t>(j)] = false;
        r.all_slices_change = false;
        break;
      }
    }
  }
  return r;
}

double transverse_lipschitz_ratio(const Eigen::VectorXd& f, const Grid& grid) {
  if (!grid.has_transverse() || static_cast<std::size_t>(f.size()) != grid.unknown_count())
    throw Error(ErrorCode::GridMismatch, "field is not on a layer grid");
  const Axis& ut = grid.transverse_axis();
  const int nu = ut.unknown_count();
  double sup = 0.0;
  for (Eigen::Index k = 0; k < f.size(); ++k) {
    const double u = ut.unknown_coordinate(static_cast<int>(k % nu));
    sup = std::max(sup, std::abs(f(k)) / (1.0 - std::abs(u)));
  }
  return sup;
}

double hausdorff_distance(const NodalSet& a, const NodalSet& b) {
  if (a.empty() || b.empty()) throw Error(ErrorCode::EmptyNodalSet, "Hausdorff distance of an empty set");
  auto directed = [](const NodalSet& p, const NodalSet& q) {
    double worst = 0.0;
    for (const NodalPoint& x : p.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const NodalPoint& y : q.points) best = std::min(best, (x.ambient - y.ambient).squaredNorm());
      worst = std::max(worst, best);
    }
    return std::sqrt(worst);
  };
  return std::max(directed(a, b), directed(b, a));
}

double domain_symmetric_difference(const NodalDomains& psi_d, const NodalDomains& phi_d, const Grid& grid,
                                   const Eigen::VectorXd& mass) {
  const std::size_t nu = static_cast<std::size_t>(grid.transverse_unknown_count());
  if (psi_d.label.size() != grid.unknown_count() || phi_d.label.size() * nu != grid.unknown_count())
    throw Error(ErrorCode::GridMismatch, "domain labels do not match the layer grid");
  auto phi_label = [&](std::size_t k) { return phi_d.label[k / nu]; };

  std::vector<std::map<int, double>> overlap(static_cast<std::size_t>(psi_d.count));
  for (std::size_t k = 0; k < psi_d.label.size(); ++k)
    if (psi_d.label[k] >= 0 && phi_label(k) >= 0)
      overlap[static_cast<std::size_t>(psi_d.label[k])][phi_label(k)] += mass(static_cast<Eigen::Index>(k));
  std::vector<int> match(static_cast<std::size_t>(psi_d.count), -1);
  std::vector<bool> used(static_cast<std::size_t>(phi_d.count), false);
  for (int i = 0; i < psi_d.count; ++i) {
    double best = 0.0;
    for (const auto& [j, v] : overlap[static_cast<std::size_t>(i)])
      if (v > best) {
        best = v;
        match[static_cast<std::size_t>(i)] = j;
      }
    if (match[static_cast<std::size_t>(i)] >= 0) used[static_cast<std::size_t>(match[static_cast<std::size_t>(i)])] = true;
  }
  double total = 0.0;
  for (std::size_t k = 0; k < psi_d.label.size(); ++k) {
    const double w = mass(static_cast<Eigen::Index>(k));
    const int li = psi_d.label[k];
    const int lj = phi_label(k);
    for (int i = 0; i < psi_d.count; ++i)
      if ((li == i) != (lj >= 0 && lj == match[static_cast<std::size_t>(i)])) total += w;
    if (lj >= 0 && !used[static_cast<std::size_t>(lj)]) total += w;
  }
  return total;
}

void write_nodal_points_csv(const NodalSet& set, int index, std::ostream& out) {
  const std::size_t nc = set.empty() ? 0 : set.points.front().coordinates.size();
  const Eigen::Index na = set.empty() ? 0 : set.points.front().ambient.size();
  std::string header;
  for (std::size_t a = 0; a < nc; ++a) header += fmt::format("q{},", a + 1);
  for (Eigen::Index a = 0; a < na; ++a) header += fmt::format("x{},", a + 1);
  out << header << "n\n";
  for (const NodalPoint& p : set.points) {
    std::string row;
    for (double c : p.coordinates) row += fmt::format("{:.12g},", c);
    for (Eigen::Index a = 0; a < p.ambient.size(); ++a) row += fmt::format("{:.12g},", p.ambient(a));
    out << row << index << '\n';
  }
}

}  // namespace thinlayer
