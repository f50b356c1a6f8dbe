#include "thinlayer/geometry.hpp"

#include <cmath>
#include <ostream>

#include <fmt/format.h>
#include <fmt/ostream.h>

#include "thinlayer/errors.hpp"
#include "thinlayer/finite_difference.hpp"

namespace thinlayer {

Chart::Chart(std::string name, int ambient_dimension, std::vector<ParameterRange> rectangle,
             PointMap embedding, JetMap jet, double orientation)
    : name_(std::move(name)),
      ambient_dim_(ambient_dimension),
      rectangle_(std::move(rectangle)),
      embedding_(std::move(embedding)),
      jet_(std::move(jet)),
      orientation_(orientation) {
  if (ambient_dim_ != 2 && ambient_dim_ != 3)
    throw Error(ErrorCode::InvalidParams, "ambient dimension must be 2 or 3");
  if (static_cast<int>(rectangle_.size()) != ambient_dim_ - 1)
    throw Error(ErrorCode::InvalidParams, "parameter rectangle must have d-1 coordinates");
  if (!embedding_) throw Error(ErrorCode::InvalidParams, "missing embedding map");
  if (orientation_ != 1.0 && orientation_ != -1.0)
    throw Error(ErrorCode::InvalidParams, "orientation must be +1 or -1");
  for (const auto& r : rectangle_)
    if (!(r.hi > r.lo)) throw Error(ErrorCode::InvalidParams, "parameter interval has non-positive length");

  // A periodic coordinate must close up: compare both ends along a few lines.
  const int m = surface_dimension();
  for (int mu = 0; mu < m; ++mu) {
    if (!range(mu).periodic) continue;
    for (int s = 0; s < 5; ++s) {
      SurfVec a(m), b(m);
      for (int nu = 0; nu < m; ++nu) {
        const auto& r = range(nu);
        a(nu) = b(nu) = r.lo + (r.hi - r.lo) * (0.1 + 0.2 * s);
      }
      a(mu) = range(mu).lo;
      b(mu) = range(mu).hi;
      const AmbientVec xa = embedding_(a);
      const AmbientVec xb = embedding_(b);
      if ((xa - xb).norm() > kPeriodTol * (1.0 + xa.norm()))
        throw Error(ErrorCode::InvalidParams,
                    fmt::format("periodic coordinate {} does not close (gap {:.3e})", mu,
                                (xa - xb).norm()));
    }
  }
}

SurfVec Chart::canonical(const SurfVec& p) const {
  SurfVec q = p;
  for (int mu = 0; mu < surface_dimension(); ++mu) {
    const auto& r = range(mu);
    const double len = r.hi - r.lo;
    if (r.periodic) {
      double t = std::fmod(q(mu) - r.lo, len);
      if (t < 0) t += len;
      q(mu) = r.lo + t;
    } else if (q(mu) < r.lo - 1e-12 * len || q(mu) > r.hi + 1e-12 * len) {
      throw Error(ErrorCode::InvalidParams,
                  fmt::format("parameter {} = {} outside [{}, {}]", mu, q(mu), r.lo, r.hi));
    }
  }
  return q;
}

AmbientVec Chart::embed(const SurfVec& p) const { return embedding_(canonical(p)); }

EmbeddingJet Chart::jet(const SurfVec& p) const {
  const SurfVec q = canonical(p);
  if (jet_) return jet_(q);
  SurfVec step(surface_dimension());
  for (int mu = 0; mu < surface_dimension(); ++mu) step(mu) = default_fd_step(mu);
  return finite_difference_jet(q, step);
}

EmbeddingJet Chart::finite_difference_jet(const SurfVec& p, const SurfVec& step) const {
  const int m = surface_dimension();
  static constexpr std::array<int, 4> off{-2, -1, 1, 2};
  static constexpr std::array<double, 4> w1{1.0, -8.0, 8.0, -1.0};
  static constexpr std::array<double, 5> w2{-1.0, 16.0, -30.0, 16.0, -1.0};

  EmbeddingJet j;
  j.point = embedding_(p);
  for (int mu = 0; mu < m; ++mu) {
    const double h = step(mu);
    AmbientVec d1 = AmbientVec::Zero(ambient_dim_);
    AmbientVec d2 = AmbientVec::Zero(ambient_dim_);
    for (int k = -2; k <= 2; ++k) {
      SurfVec q = p;
      q(mu) += k * h;
      const AmbientVec x = k == 0 ? j.point : embedding_(q);
      d2 += w2[static_cast<std::size_t>(k + 2)] * x;
      if (k != 0) d1 += w1[static_cast<std::size_t>(k < 0 ? k + 2 : k + 1)] * x;
    }
    j.first[static_cast<std::size_t>(mu)] = d1 / (12.0 * h);
    j.second[static_cast<std::size_t>(mu)][static_cast<std::size_t>(mu)] = d2 / (12.0 * h * h);
  }
  if (m == 2) {
    // Tensor product of the 4th-order first-derivative stencils.
    AmbientVec mixed = AmbientVec::Zero(ambient_dim_);
    for (std::size_t a = 0; a < 4; ++a) {
      for (std::size_t b = 0; b < 4; ++b) {
        SurfVec q = p;
        q(0) += off[a] * step(0);
        q(1) += off[b] * step(1);
        mixed += w1[a] * w1[b] * embedding_(q);
      }
    }
    mixed /= 144.0 * step(0) * step(1);
    j.second[0][1] = mixed;
    j.second[1][0] = mixed;
  }
  return j;
}

namespace {

FirstFundamental first_fundamental_from_jet(const EmbeddingJet& j, int m) {
  FirstFundamental f;
  f.g.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      f.g(a, b) = j.first[static_cast<std::size_t>(a)].dot(j.first[static_cast<std::size_t>(b)]);
  f.det_g = f.g.determinant();
  if (!(f.det_g > kDetTol))
    throw Error(ErrorCode::DegenerateChart, fmt::format("Gram determinant {:.3e} <= {:.1e}", f.det_g, kDetTol));
  f.g_inverse = f.g.inverse();
  return f;
}

AmbientVec unit_normal(const EmbeddingJet& j, int d, double orientation) {
  AmbientVec n(d);
  if (d == 2) {
    const AmbientVec& t = j.first[0];
    n << -t(1), t(0);
  } else {
    const Eigen::Vector3d a = j.first[0].head<3>();
    const Eigen::Vector3d b = j.first[1].head<3>();
    n = a.cross(b);
  }
  return orientation * n / n.norm();
}

SurfVec sorted_curvatures(const SurfMat& h, const SurfMat& g) {
  const auto m = h.rows();
  SurfVec k(m);
  if (m == 1) {
    k(0) = h(0, 0) / g(0, 0);
    return k;
  }
  // L = g^{-1} h is g-self-adjoint: solve the symmetric pencil (h, g).
  Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::Matrix2d> es(h, g, Eigen::EigenvaluesOnly);
  k = es.eigenvalues();
  return k;
}

}  // namespace

FirstFundamental evaluate_first_fundamental(const Chart& chart, const SurfVec& node) {
  return first_fundamental_from_jet(chart.jet(node), chart.surface_dimension());
}

namespace {

WeingartenData weingarten_from_jet(const EmbeddingJet& j, const FirstFundamental& ff, int d,
                                   double orientation) {
  const int m = d - 1;
  WeingartenData w;
  w.normal = unit_normal(j, d, orientation);
  w.second_fundamental.resize(m, m);
  for (int a = 0; a < m; ++a)
    for (int b = 0; b < m; ++b)
      w.second_fundamental(a, b) =
          j.second[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)].dot(w.normal);
  w.second_fundamental = 0.5 * (w.second_fundamental + w.second_fundamental.transpose()).eval();
  w.weingarten = ff.g_inverse * w.second_fundamental;
  w.curvatures = sorted_curvatures(w.second_fundamental, ff.g);
  w.invariants = curvature_invariants(w.curvatures);
  return w;
}

}  // namespace

WeingartenData evaluate_weingarten(const Chart& chart, const SurfVec& node) {
  const EmbeddingJet j = chart.jet(node);
  const FirstFundamental ff = first_fundamental_from_jet(j, chart.surface_dimension());
  return weingarten_from_jet(j, ff, chart.ambient_dimension(), chart.orientation());
}

SurfVec curvature_invariants(const SurfVec& k) {
  SurfVec K(k.size());
  if (k.size() == 1) {
    K(0) = k(0);
  } else {
    K(0) = 0.5 * (k(0) + k(1));
    K(1) = k(0) * k(1);
  }
  return K;
}

EffectivePotential effective_potential(const SurfVec& k) {
  EffectivePotential v;
  const double sum = k.sum();
  v.from_curvatures = -0.5 * k.squaredNorm() + 0.25 * sum * sum;
  const SurfVec K = curvature_invariants(k);
  const double m = static_cast<double>(k.size());
  const double binom2 = m * (m - 1.0) / 2.0;
  const double k2 = k.size() > 1 ? K(1) : 0.0;
  const double half_trace = 0.5 * m * K(0);
  v.from_invariants = binom2 * k2 - half_trace * half_trace;
  const double scale = std::max(1.0, k.squaredNorm());
  if (std::abs(v.from_curvatures - v.from_invariants) > 1e-12 * scale)
    throw std::logic_error("effective potential forms disagree");
  return v;
}

GeometryFields evaluate_geometry(const Chart& chart, const Grid& grid) {
  const int m = chart.surface_dimension();
  if (grid.has_transverse() || grid.surface_dimension() != m)
    throw Error(ErrorCode::GridMismatch, "geometry needs a surface grid matching the chart");

  GeometryFields out;
  out.grid = grid;
  out.ambient_dimension = chart.ambient_dimension();
  out.nodes.resize(grid.node_count());
  for (std::size_t i = 0; i < grid.node_count(); ++i) {
    const auto idx = grid.node_multi_index(i);
    SurfVec p(m);
    for (int a = 0; a < m; ++a) p(a) = grid.axis(a).node_coordinate(idx[static_cast<std::size_t>(a)]);
    const EmbeddingJet j = chart.jet(p);
    const FirstFundamental ff = first_fundamental_from_jet(j, m);
    const WeingartenData w = weingarten_from_jet(j, ff, chart.ambient_dimension(), chart.orientation());
    NodeGeometry& n = out.nodes[i];
    n.parameter = p;
    n.position = j.point;
    n.normal = w.normal;
    n.g = ff.g;
    n.g_inverse = ff.g_inverse;
    n.det_g = ff.det_g;
    n.sqrt_det_g = std::sqrt(ff.det_g);
    n.second_fundamental = w.second_fundamental;
    n.weingarten = w.weingarten;
    n.curvatures = w.curvatures;
    n.invariants = w.invariants;
    n.v_eff = effective_potential(w.curvatures).value();
    n.grad_curvature_norm = SurfVec::Zero(m);
    n.laplace_curvature = SurfVec::Zero(m);
  }

  // A2 diagnostics by finite differences of the sampled curvature fields.
  const std::size_t nn = grid.node_count();
  for (int c = 0; c < m; ++c) {
    std::vector<double> kappa(nn);
    for (std::size_t i = 0; i < nn; ++i) kappa[i] = out.nodes[i].curvatures(c);
    std::vector<std::vector<double>> grad(static_cast<std::size_t>(m));
    for (int a = 0; a < m; ++a) grad[static_cast<std::size_t>(a)] = fd::derivative_along(grid, a, kappa, 4, 1);
    std::vector<double> div(nn, 0.0);
    for (int a = 0; a < m; ++a) {
      std::vector<double> flux(nn);
      for (std::size_t i = 0; i < nn; ++i) {
        const auto& n = out.nodes[i];
        double f = 0.0;
        for (int b = 0; b < m; ++b) f += n.g_inverse(a, b) * grad[static_cast<std::size_t>(b)][i];
        flux[i] = n.sqrt_det_g * f;
      }
      const auto d = fd::derivative_along(grid, a, flux, 4, 1);
      for (std::size_t i = 0; i < nn; ++i) div[i] += d[i];
    }
    for (std::size_t i = 0; i < nn; ++i) {
      auto& n = out.nodes[i];
      SurfVec gk(m);
      for (int a = 0; a < m; ++a) gk(a) = grad[static_cast<std::size_t>(a)][i];
      n.grad_curvature_norm(c) = std::sqrt(std::max(0.0, gk.dot(n.g_inverse * gk)));
      n.laplace_curvature(c) = div[i] / n.sqrt_det_g;
    }
  }
  return out;
}

CurvatureBounds curvature_bounds(const GeometryFields& fields) {
  CurvatureBounds b;
  for (const auto& n : fields.nodes) {
    b.max_abs_curvature = std::max(b.max_abs_curvature, n.curvatures.cwiseAbs().maxCoeff());
    b.max_grad_curvature = std::max(b.max_grad_curvature, n.grad_curvature_norm.maxCoeff());
    b.max_laplace_curvature = std::max(b.max_laplace_curvature, n.laplace_curvature.cwiseAbs().maxCoeff());
  }
  b.rho_m = b.max_abs_curvature > 0.0 ? 1.0 / b.max_abs_curvature
                                       : std::numeric_limits<double>::infinity();
  return b;
}

void write_geometry_csv(const GeometryFields& fields, std::ostream& out) {
  const int m = fields.grid.surface_dimension();
  const int d = fields.ambient_dimension;
  std::string header = "node";
  for (int a = 0; a < m; ++a) header += fmt::format(",p{}", a + 1);
  for (int a = 0; a < d; ++a) header += fmt::format(",x{}", a + 1);
  for (int a = 0; a < m; ++a) header += fmt::format(",kappa{}", a + 1);
  for (int a = 0; a < m; ++a) header += fmt::format(",K{}", a + 1);
  header += ",v_eff,det_g";
  out << header << '\n';
  for (std::size_t i = 0; i < fields.nodes.size(); ++i) {
    const auto& n = fields.nodes[i];
    std::string row = fmt::format("{}", i);
    for (int a = 0; a < m; ++a) row += fmt::format(",{:.15g}", n.parameter(a));
    for (int a = 0; a < d; ++a) row += fmt::format(",{:.15g}", n.position(a));
    for (int a = 0; a < m; ++a) row += fmt::format(",{:.15g}", n.curvatures(a));
    for (int a = 0; a < m; ++a) row += fmt::format(",{:.15g}", n.invariants(a));
    row += fmt::format(",{:.15g},{:.15g}", n.v_eff, n.det_g);
    out << row << '\n';
  }
}

}  // namespace thinlayer
