#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "thinlayer/errors.hpp"

using namespace thinlayer;
using namespace testing_support;
using std::numbers::pi;

namespace {

// Radius 1 + 0.3 cos t + 0.12 sin 2t, written out independently of the preset.
Eigen::Vector2d generic_point(double t) {
  const double r = 1.0 + 0.3 * std::cos(t) + 0.12 * std::sin(2.0 * t);
  return {r * std::cos(t), r * std::sin(t)};
}

// Curvature as the arc-length derivative of the tangent angle, all by central
// differences of the point map.
double tangent_angle_curvature(double t) {
  const double eta = 1e-4, delta = 1e-3;
  auto tangent = [&](double s) { return Eigen::Vector2d((generic_point(s + eta) - generic_point(s - eta)) / (2 * eta)); };
  auto angle = [&](double s) {
    const Eigen::Vector2d v = tangent(s);
    return std::atan2(v.y(), v.x());
  };
  double dtheta = angle(t + delta) - angle(t - delta);
  if (dtheta > pi) dtheta -= 2 * pi;
  if (dtheta < -pi) dtheta += 2 * pi;
  return dtheta / (2 * delta) / tangent(t).norm();
}

}  // namespace

TEST_SUITE("geometry") {

TEST_CASE("first fundamental form of the presets") {
  const auto circle = evaluate_first_fundamental(preset_chart("circle"), point1(0.7));
  CHECK(circle.g(0, 0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(circle.det_g > 0.0);

  const auto torus = evaluate_first_fundamental(preset_chart("torus", {{"R", {2.0}}, {"r", {1.0}}}), point2(0.0, 0.0));
  CHECK(torus.g(0, 0) == doctest::Approx(1.0));
  CHECK(torus.g(1, 1) == doctest::Approx(9.0));
  CHECK(std::abs(torus.g(0, 1)) < 1e-14);
  CHECK((torus.g_inverse * torus.g - SurfMat::Identity(2, 2)).cwiseAbs().maxCoeff() < 1e-12);

  const auto segment = evaluate_first_fundamental(preset_chart("segment"), point1(0.3));
  CHECK(segment.g(0, 0) == doctest::Approx(1.0));
}

TEST_CASE("principal curvatures and invariants") {
  const auto circle = evaluate_weingarten(preset_chart("circle"), point1(1.3));
  CHECK(circle.curvatures.size() == 1);
  CHECK(circle.curvatures(0) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(circle.invariants(0) == doctest::Approx(1.0).epsilon(1e-12));

  const auto torus = evaluate_weingarten(preset_chart("torus", {{"R", {2.0}}, {"r", {1.0}}}), point2(0.0, 0.4));
  REQUIRE(torus.curvatures.size() == 2);
  CHECK(torus.curvatures(0) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
  CHECK(torus.curvatures(1) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(torus.invariants(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
  CHECK(torus.invariants(1) == doctest::Approx(1.0 / 3.0).epsilon(1e-12));

  const auto segment = evaluate_weingarten(preset_chart("segment"), point1(0.5));
  CHECK(segment.curvatures(0) == 0.0);
  CHECK(segment.invariants(0) == 0.0);
}

TEST_CASE("effective potential in both forms") {
  SurfVec k1(1);
  k1 << 1.0;
  CHECK(effective_potential(k1).value() == doctest::Approx(-0.25));
  SurfVec k2(2);
  k2 << 1.0, 1.0;
  CHECK(std::abs(effective_potential(k2).value()) < 1e-15);
  k2 << 1.0 / 3.0, 1.0;
  const auto v = effective_potential(k2);
  CHECK(v.value() == doctest::Approx(-1.0 / 9.0).epsilon(1e-14));
  CHECK(std::abs(v.from_curvatures - v.from_invariants) < 1e-12);
}

TEST_CASE("curvature bounds") {
  auto rho = [](const std::string& name, const PresetParams& p, std::vector<int> cells) {
    const Chart chart = preset_chart(name, p);
    const Grid grid = build_grid(chart, cells, 0);
    return curvature_bounds(evaluate_geometry(chart, grid));
  };
  CHECK(rho("torus", {{"R", {2.0}}, {"r", {1.0}}}, {24, 24}).rho_m == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(rho("circle", {{"R", {2.0}}}, {32}).rho_m == doctest::Approx(2.0).epsilon(1e-12));
  const auto flat = rho("segment", {}, {16});
  CHECK(std::isinf(flat.rho_m));
  CHECK(flat.flat());
  const auto generic = rho("generic_closed_curve", {}, {256});
  CHECK(generic.max_grad_curvature > 0.0);
  CHECK(generic.max_laplace_curvature > 0.0);
}

TEST_CASE("preset validation") {
  CHECK_THROWS_AS(preset_chart("sphere"), Error);
  try {
    preset_chart("sphere");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::UnknownPreset);
  }
  try {
    preset_chart("torus", {{"R", {1.0}}, {"r", {1.0}}});
    FAIL("torus with r >= R accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidParams);
  }
  try {
    preset_chart("circle", {{"radius", {1.0}}});
    FAIL("unknown parameter accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidParams);
  }
}

TEST_CASE("generic closed curve curvature against the tangent angle") {
  const Chart chart = preset_chart("generic_closed_curve");
  double lo = 1e9, hi = -1e9;
  for (int i = 0; i < 40; ++i) {
    const double t = 2 * pi * i / 40.0 + 0.05;
    const double kappa = evaluate_weingarten(chart, point1(t)).curvatures(0);
    CHECK(kappa == doctest::Approx(tangent_angle_curvature(t)).epsilon(1e-5));
    lo = std::min(lo, kappa);
    hi = std::max(hi, kappa);
  }
  CHECK(hi - lo > 0.1);
}

TEST_CASE("Weingarten reconstruction and invariants at random nodes") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi), polar(pi / 4, 3 * pi / 4);
  const Chart torus = preset_chart("torus", {{"R", {2.0}}, {"r", {1.0}}});
  const Chart band = preset_chart("spherical_band", {{"R", {1.5}}});
  for (int i = 0; i < 20; ++i) {
    const SurfVec q = point2(angle(rng), angle(rng));
    const auto f = evaluate_first_fundamental(torus, q);
    const auto w = evaluate_weingarten(torus, q);
    const SurfMat rebuilt = f.g_inverse * w.second_fundamental;
    CHECK((rebuilt - w.weingarten).norm() <= 1e-10 * std::max(1.0, w.weingarten.norm()));
    CHECK(w.invariants(0) == doctest::Approx(0.5 * w.weingarten.trace()).epsilon(1e-10));
    CHECK(w.invariants(1) == doctest::Approx(w.weingarten.determinant()).epsilon(1e-10));
    CHECK(w.curvatures(0) <= w.curvatures(1));
    // Gaussian curvature cos t / (r (R + r cos t)).
    const double gauss = std::cos(q(0)) / (1.0 * (2.0 + std::cos(q(0))));
    CHECK(std::abs(w.weingarten.determinant() - gauss) < 1e-8);

    const SurfVec p = point2(polar(rng), angle(rng));
    const auto ws = evaluate_weingarten(band, p);
    CHECK(std::abs(ws.weingarten.determinant() - 1.0 / (1.5 * 1.5)) < 1e-8);
    CHECK(std::abs(ws.curvatures(0) - 1.0 / 1.5) < 1e-10);
  }
}

TEST_CASE("finite-difference jet converges to the analytic jet") {
  const Chart torus = preset_chart("torus", {{"R", {2.0}}, {"r", {1.0}}});
  const SurfVec q = point2(0.4, 1.1);
  const EmbeddingJet exact = torus.jet(q);
  auto error = [&](double h) {
    SurfVec step(2);
    step << h, h;
    const EmbeddingJet fd = torus.finite_difference_jet(q, step);
    double e = 0.0;
    for (int a = 0; a < 2; ++a)
      for (int b = 0; b < 2; ++b) e = std::max(e, (fd.second[a][b] - exact.second[a][b]).norm());
    return e;
  };
  const double order = std::log2(error(0.2) / error(0.1));
  CHECK(order >= 1.8);
}

TEST_CASE("user chart without derivatives and orientation flip") {
  auto embed = [](const SurfVec& q) {
    AmbientVec x(2);
    x << std::cos(q(0)), std::sin(q(0));
    return x;
  };
  const Chart plus("user_circle", 2, {{0.0, 2 * pi, true}}, embed, {}, 1.0);
  const Chart minus("user_circle", 2, {{0.0, 2 * pi, true}}, embed, {}, -1.0);
  CHECK_FALSE(plus.has_analytic_derivatives());
  const double kp = evaluate_weingarten(plus, point1(0.9)).curvatures(0);
  const double km = evaluate_weingarten(minus, point1(0.9)).curvatures(0);
  CHECK(kp == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(km == doctest::Approx(-1.0).epsilon(1e-8));
}

TEST_CASE("degenerate chart is rejected") {
  auto embed = [](const SurfVec& q) {
    AmbientVec x(2);
    x << q(0) * q(0), 0.0;
    return x;
  };
  const Chart cusp("cusp", 2, {{-1.0, 1.0, false}}, embed);
  try {
    evaluate_first_fundamental(cusp, point1(0.0));
    FAIL("zero tangent accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateChart);
  }
}

}  // TEST_SUITE
