#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include <Eigen/Eigenvalues>

#include "support.hpp"
#include "thinlayer/errors.hpp"

using namespace thinlayer;
using namespace testing_support;
using std::numbers::pi;

namespace {

// d = 2, constant curvature: J = 1/2 ln(1 - eps u k) has no surface
// dependence, so V = eps^-2 (J'' + J'^2) with J' and J'' differentiated by
// hand.
double circle_potential(double kappa, double eps, double u) {
  const double m = 1.0 - eps * u * kappa;
  const double j1 = -eps * kappa / (2.0 * m);
  const double j2 = -eps * eps * kappa * kappa / (2.0 * m * m);
  return (j2 + j1 * j1) / (eps * eps);
}

double dense_transverse_ground(int cells) {
  const int n = cells - 1;
  const double h = 2.0 / cells;
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i) {
    a(i, i) = 2.0 / (h * h);
    if (i + 1 < n) a(i, i + 1) = a(i + 1, i) = -1.0 / (h * h);
  }
  return Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(a).eigenvalues()(0);
}

SurfMat mat1(double v) {
  SurfMat m(1, 1);
  m << v;
  return m;
}

}  // namespace

TEST_SUITE("layer") {

TEST_CASE("transverse model") {
  CHECK(TransverseModel::continuum_eigenvalue(1) == doctest::Approx(2.4674011).epsilon(1e-8));
  CHECK(TransverseModel::continuum_eigenvalue(2) == doctest::Approx(pi * pi).epsilon(1e-14));
  CHECK(std::abs(TransverseModel::mode(1, 1.0)) < 1e-15);
  CHECK(std::abs(TransverseModel::mode(1, -1.0)) < 1e-15);
  for (double u = -0.95; u < 1.0; u += 0.1) CHECK(TransverseModel::mode(1, u) > 0.0);

  for (int cells : {8, 16, 32, 64}) {
    const TransverseModel tm{cells};
    CHECK(tm.discrete_eigenvalue(1) == doctest::Approx(dense_transverse_ground(cells)).epsilon(1e-10));
  }
  const double e1 = TransverseModel::continuum_eigenvalue(1);
  const double r = (e1 - TransverseModel{16}.discrete_eigenvalue(1)) / (e1 - TransverseModel{32}.discrete_eigenvalue(1));
  CHECK(std::log2(r) == doctest::Approx(2.0).epsilon(0.02));
}

TEST_CASE("layer metric examples") {
  const auto flat = layer_metric(mat1(1.0), mat1(0.0), 0.3);
  CHECK(flat.G(0, 0) == 1.0);
  CHECK(flat.det_ratio == 1.0);

  const auto curve = layer_metric(mat1(1.0), mat1(1.0), 0.1);
  CHECK(curve.G(0, 0) == doctest::Approx(0.81).epsilon(1e-14));
  CHECK(curve.G_inverse(0, 0) == doctest::Approx(1.0 / 0.81).epsilon(1e-14));
  CHECK(curve.G_inverse(0, 0) == doctest::Approx(1.23457).epsilon(1e-5));

  SurfMat L(2, 2);
  L << 1.0, 0.0, 0.0, 2.0;
  const auto surf = layer_metric(SurfMat::Identity(2, 2), L, 0.1);
  CHECK(surf.det_ratio == doctest::Approx(0.5184).epsilon(1e-14));
  CHECK(surf.G(0, 0) == doctest::Approx(0.81));
  CHECK(surf.G(1, 1) == doctest::Approx(0.64));
}

TEST_CASE("Jacobian factor examples") {
  SurfVec k1(1);
  k1 << 1.0;
  CHECK(jacobian_factor(k1, 0.0) == 0.0);
  CHECK(jacobian_factor(k1, -0.5) == doctest::Approx(0.2027326).epsilon(1e-7));
  SurfVec k2 = curvature_invariants((SurfVec(2) << 1.0, 2.0).finished());
  // 0.5 ln 0.72 = -0.16425203...; the commonly quoted -0.1642545 agrees to 2e-5.
  CHECK(jacobian_factor(k2, 0.1) == doctest::Approx(0.5 * std::log(0.72)).epsilon(1e-14));
  CHECK(jacobian_factor(k2, 0.1) == doctest::Approx(-0.1642545).epsilon(2e-5));
}

TEST_CASE("Jacobian factor: invariant form equals the determinant form") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> entry(-1.0, 1.0), eu(-0.45, 0.45);
  for (int i = 0; i < 200; ++i) {
    // Weingarten map similar to a symmetric matrix through a random metric.
    const int dim = 1 + i % 2;
    SurfMat s(dim, dim), a(dim, dim);
    for (int r = 0; r < dim; ++r)
      for (int c = 0; c < dim; ++c) {
        s(r, c) = entry(rng);
        a(r, c) = entry(rng);
      }
    s = 0.5 * (s + s.transpose()).eval();
    const SurfMat g = a * a.transpose() + SurfMat::Identity(dim, dim);
    const SurfMat L = g.inverse() * s;
    const Eigen::MatrixXd sd = s, gd = g;
    Eigen::GeneralizedSelfAdjointEigenSolver<Eigen::MatrixXd> es(sd, gd);
    SurfVec kappa = es.eigenvalues();
    const double t = eu(rng) / std::max(1.0, kappa.cwiseAbs().maxCoeff());
    CHECK(std::abs(jacobian_factor(curvature_invariants(kappa), t) - jacobian_factor_det(L, t)) < 1e-12);
  }
}

TEST_CASE("J depends on u only through eps u for constant curvature") {
  const Setup s1 = make_setup("circle", {32}, 16);
  const LayerFields a = build_layer_fields(s1.layer, s1.geometry, 0.2);
  const LayerFields b = build_layer_fields(s1.layer, s1.geometry, 0.1);
  const int nu = s1.layer.transverse_node_count();
  // u = 0.5 at eps 0.2 and u = 1 at eps 0.1 give eps u = 0.1.
  const int j_half = nu / 2 + nu / 4, j_one = nu - 1;
  CHECK(a.J[static_cast<std::size_t>(j_half)] == doctest::Approx(b.J[static_cast<std::size_t>(j_one)]).epsilon(1e-12));
  CHECK(a.J[static_cast<std::size_t>(nu / 2)] == 0.0);
}

TEST_CASE("potential on the unit circle matches the closed form") {
  const Setup s = make_setup("circle", {64}, 32);
  const double eps = 0.1;
  const LayerFields f = build_layer_fields(s.layer, s.geometry, eps);
  const Axis& ut = s.layer.transverse_axis();
  const int nu = ut.node_count();
  double worst = 0.0;
  for (std::size_t node = 0; node < f.V.size(); ++node) {
    const int j = static_cast<int>(node % static_cast<std::size_t>(nu));
    if (j == 0 || j == nu - 1) continue;
    worst = std::max(worst, std::abs(f.V[node] - circle_potential(1.0, eps, ut.node_coordinate(j))));
  }
  CHECK(worst < 1e-6);
  // Frozen values of the closed form.
  CHECK(circle_potential(1.0, eps, 0.0) == doctest::Approx(-0.25).epsilon(1e-15));
  CHECK(circle_potential(1.0, eps, 0.5) == doctest::Approx(-0.2770083102).epsilon(1e-9));
  CHECK(f.v_fd_noise < 1e-2);
}

TEST_CASE("flat geometry is exact") {
  const Setup s = make_setup("segment", {16}, 8);
  const LayerFields f = build_layer_fields(s.layer, s.geometry, 0.1);
  for (std::size_t i = 0; i < f.J.size(); ++i) {
    CHECK(f.J[i] == 0.0);
    CHECK(f.V[i] == 0.0);
    CHECK(f.det_ratio[i] == 1.0);
  }
  CHECK(metric_deviation_sup(f, s.geometry) == 0.0);
  const SandwichReport sw = metric_sandwich_check(f, s.geometry, 0.1, std::numeric_limits<double>::infinity());
  CHECK(sw.c_minus == 1.0);
  CHECK(sw.c_plus == 1.0);
  CHECK(std::abs(sw.lower_margin) < 1e-15);
  CHECK(std::abs(sw.upper_margin) < 1e-15);
}

TEST_CASE("metric sandwich constants and the torus at eps 0.2") {
  const Setup s = make_setup("torus", {48, 48}, 8, {{"R", {2.0}}, {"r", {1.0}}});
  const double rho = curvature_bounds(s.geometry).rho_m;
  const LayerFields f01 = build_layer_fields(s.layer, s.geometry, 0.1 * rho);
  CHECK(f01.c_minus() == doctest::Approx(0.81));
  CHECK(f01.c_plus() == doctest::Approx(1.21));
  const LayerFields f = build_layer_fields(s.layer, s.geometry, 0.2);
  const SandwichReport sw = metric_sandwich_check(f, s.geometry, 0.2, rho);
  // The lower bound is attained at u = 1 on the outer equator, where
  // G / g = (1 - 0.2)^2 = C_-, so the worst margin is zero up to rounding.
  CHECK(sw.lower_margin >= -kSandwichTol);
  CHECK(std::abs(sw.lower_margin) < 1e-12);
  CHECK(sw.upper_margin >= -kSandwichTol);
}

TEST_CASE("overlap and resolution guards") {
  const Setup s = make_setup("circle", {32}, 8);
  try {
    build_layer_fields(s.layer, s.geometry, 0.96);
    FAIL("eps above 0.95 rho_m accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::OverlapViolation);
  }
  const Setup g = make_setup("generic_closed_curve", {128}, 32);
  const double rho = curvature_bounds(g.geometry).rho_m;
  try {
    build_layer_fields(g.layer, g.geometry, 0.2 * rho);
    FAIL("noisy potential accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::GridTooCoarse);
  }
}

TEST_CASE("metric and potential deviations shrink linearly on the circle") {
  const Setup s = make_setup("circle", {64}, 16);
  std::vector<double> dv, dm;
  for (double eps : {0.2, 0.1, 0.05}) {
    const LayerFields f = build_layer_fields(s.layer, s.geometry, eps);
    dv.push_back(potential_deviation_sup(f, s.geometry));
    dm.push_back(metric_deviation_sup(f, s.geometry));
  }
  for (std::size_t i = 1; i < dv.size(); ++i) {
    CHECK(std::log2(dv[i - 1] / dv[i]) >= 0.9);
    CHECK(std::log2(dm[i - 1] / dm[i]) >= 0.9);
  }
}

}  // TEST_SUITE
