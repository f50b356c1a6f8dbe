#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "support.hpp"
#include "thinlayer/eigensolve.hpp"
#include "thinlayer/errors.hpp"

using namespace thinlayer;
using namespace testing_support;
using std::numbers::pi;

namespace {

struct LayerPair {
  OperatorPencil full;
  OperatorPencil h0;
  LayerFields fields;
};

LayerPair layer_pair(const Setup& s, double eps) {
  const TransverseModel tm{s.layer.transverse_axis().cells};
  LayerFields f = build_layer_fields(s.layer, s.geometry, eps);
  OperatorPencil full = renormalize(assemble_full(s.layer, s.geometry, f, eps), eps, tm);
  OperatorPencil h0 = renormalize(assemble_H0(assemble_effective(s.surface, s.geometry), tm, eps), eps, tm);
  return {std::move(full), std::move(h0), std::move(f)};
}

double orthonormality_defect(const EigenResult& r, const Eigen::VectorXd& mass) {
  const Eigen::MatrixXd gram = r.vectors.transpose() * mass.asDiagonal() * r.vectors;
  return (gram - Eigen::MatrixXd::Identity(gram.rows(), gram.cols())).cwiseAbs().maxCoeff();
}

}  // namespace

TEST_SUITE("eigensolve") {

TEST_CASE("circle effective pencil: lowest three with the degenerate pair") {
  const Setup c = make_setup("circle", {128}, 8);
  const OperatorPencil eff = assemble_effective(c.surface, c.geometry);
  const EigenResult r = smallest_eigenpairs(eff, 3);
  CHECK(r.values(0) == doctest::Approx(-0.25).epsilon(1e-9));
  CHECK(r.values(1) == doctest::Approx(0.75).epsilon(1e-3));
  CHECK(r.values(2) == doctest::Approx(0.75).epsilon(1e-3));
  CHECK(r.cluster == std::vector<int>{0, 1, 1});
  CHECK(orthonormality_defect(r, eff.mass) <= 1e-8);
}

TEST_CASE("transverse pencil ground state matches the closed form") {
  const TransverseModel tm{40};
  const EigenResult r = smallest_eigenpairs(assemble_transverse(tm), 2);
  CHECK(r.values(0) == doctest::Approx(tm.discrete_eigenvalue(1)).epsilon(1e-12));
  CHECK(r.values(1) == doctest::Approx(tm.discrete_eigenvalue(2)).epsilon(1e-12));
}

TEST_CASE("iterative and dense paths agree and certify their pairs") {
  const Setup c = make_setup("generic_closed_curve", {256}, 8);
  const double eps = 0.05 * curvature_bounds(c.geometry).rho_m;
  const LayerPair p = layer_pair(c, eps);
  REQUIRE(p.full.size() > 800);
  EigenOptions iterative;
  const EigenResult a = smallest_eigenpairs(p.full, 6, iterative);
  EigenOptions dense;
  dense.dense_cap = 4000;
  const EigenResult b = smallest_eigenpairs(p.full, 6, dense);
  CHECK_FALSE(a.dense);
  CHECK(b.dense);
  for (int i = 0; i < 6; ++i) {
    CHECK(a.values(i) == doctest::Approx(b.values(i)).epsilon(1e-9));
    CHECK(a.residuals(i) <= iterative.tol * std::max(1.0, std::abs(a.values(i))));
    CHECK(b.residuals(i) <= dense.tol * std::max(1.0, std::abs(b.values(i))));
    CHECK(pair_residual(p.full, a.values(i), a.vectors.col(i)) == doctest::Approx(a.residuals(i)).epsilon(1e-6));
    CHECK(std::abs(a.vectors.col(i).dot(p.full.mass.asDiagonal() * b.vectors.col(i))) == doctest::Approx(1.0).epsilon(1e-8));
  }
  CHECK(orthonormality_defect(a, p.full.mass) <= 1e-8);
  CHECK(orthonormality_defect(b, p.full.mass) <= 1e-8);
  for (int i = 1; i < 6; ++i) CHECK(a.values(i) >= a.values(i - 1));
}

TEST_CASE("solver output is bitwise reproducible") {
  const Setup c = make_setup("circle", {64}, 16);
  const LayerPair p = layer_pair(c, 0.1);
  const EigenResult a = smallest_eigenpairs(p.full, 5);
  const EigenResult b = smallest_eigenpairs(p.full, 5);
  CHECK(a.values == b.values);
  CHECK(a.vectors == b.vectors);
  CHECK(a.residuals == b.residuals);
}

TEST_CASE("solver errors") {
  const OperatorPencil t = assemble_transverse(TransverseModel{8});
  try {
    smallest_eigenpairs(t, 8);
    FAIL("too many pairs accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::TooManyEigenpairs);
  }
  const Setup c = make_setup("circle", {64}, 16);
  const LayerPair p = layer_pair(c, 0.1);
  EigenOptions o;
  o.max_iterations = 1;
  o.dense_cap = 0;
  try {
    smallest_eigenpairs(p.full, 4, o);
    FAIL("one iteration converged");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NoConvergence);
  }
}

TEST_CASE("renormalized spectrum is bounded below") {
  const Setup c = make_setup("circle", {64}, 16);
  const LayerPair p = layer_pair(c, 0.2);
  double vmax = 0.0;
  for (double v : p.fields.V) vmax = std::max(vmax, std::abs(v));
  CHECK(smallest_eigenpairs(p.full, 1).values(0) > -vmax - 1.0);
}

TEST_CASE("cluster tolerance") {
  CHECK(cluster_tolerance(0.0, 0.01) == doctest::Approx(1e-8));
  CHECK(cluster_tolerance(100.0, 0.01) == doctest::Approx(1e-4));
  CHECK(cluster_tolerance(100.0, 0.1) == doctest::Approx(1e-4 * 10.0));
  Eigen::VectorXd v(5);
  v << -0.25, 0.75, 0.75 + 1e-9, 3.75, 3.75;
  CHECK(cluster_partition(v, 0.01) == std::vector<int>{0, 1, 1, 2, 2});
}

TEST_CASE("alignment recovers a rotated degenerate basis and a sign flip") {
  const Setup c = make_setup("circle", {96}, 8);
  const OperatorPencil eff = assemble_effective(c.surface, c.geometry);
  const EigenResult ref = smallest_eigenpairs(eff, 5);
  REQUIRE(ref.cluster == std::vector<int>{0, 1, 1, 2, 2});
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> angle(0.0, 2 * pi);
  for (int trial = 0; trial < 5; ++trial) {
    EigenResult pert = ref;
    pert.vectors.col(0) *= -1.0;
    for (int k : {1, 3}) {
      const double t = angle(rng);
      const Eigen::VectorXd a = ref.vectors.col(k), b = ref.vectors.col(k + 1);
      pert.vectors.col(k) = std::cos(t) * a + std::sin(t) * b;
      pert.vectors.col(k + 1) = -std::sin(t) * a + std::cos(t) * b;
    }
    const Alignment al = cluster_and_align(pert, ref, eff.mass);
    CHECK((al.aligned_reference - pert.vectors).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK(al.differences.cwiseAbs().maxCoeff() <= 1e-8);
    for (double s : al.subspace_angle) CHECK(s <= 1e-7);
    CHECK(al.cluster_size == std::vector<int>{1, 2, 2, 2, 2});
  }
}

TEST_CASE("alignment is idempotent") {
  const Setup c = make_setup("circle", {64}, 16);
  const LayerPair p = layer_pair(c, 0.1);
  const EigenResult rf = smallest_eigenpairs(p.full, 5);
  const EigenResult r0 = smallest_eigenpairs(p.h0, 5);
  const Alignment a = cluster_and_align(rf, r0, p.full.mass);
  const Alignment b = cluster_and_align(rf, r0, p.full.mass);
  CHECK(a.aligned_reference == b.aligned_reference);
  CHECK(a.subspace_angle == b.subspace_angle);
  EigenResult realigned = r0;
  realigned.vectors = a.aligned_reference;
  const Alignment c2 = cluster_and_align(rf, realigned, p.full.mass);
  CHECK((c2.aligned_reference - a.aligned_reference).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("cluster mismatch is reported") {
  const Setup c = make_setup("circle", {64}, 8);
  const OperatorPencil eff = assemble_effective(c.surface, c.geometry);
  const EigenResult ref = smallest_eigenpairs(eff, 4);
  EigenResult pert = ref;
  pert.values(2) += 0.1;
  pert.cluster = {0, 1, 2, 3};
  try {
    cluster_and_align(pert, ref, eff.mass);
    FAIL("split pair accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ClusterMismatch);
  }
  // Only clusters starting before checked_pairs are compared.
  CHECK_NOTHROW(cluster_and_align(pert, ref, eff.mass, 1));
}

TEST_CASE("flat segment: perturbed and reference coincide") {
  const Setup s = make_setup("segment", {32}, 16);
  const LayerPair p = layer_pair(s, 0.1);
  const EigenResult rf = smallest_eigenpairs(p.full, 4);
  const EigenResult r0 = smallest_eigenpairs(p.h0, 4);
  const Alignment al = cluster_and_align(rf, r0, p.full.mass);
  CHECK(al.differences.cwiseAbs().maxCoeff() <= 1e-8);
  CHECK((rf.values - r0.values).cwiseAbs().maxCoeff() <= 1e-8);
}

TEST_CASE("discrete norms") {
  const Setup s = make_setup("segment", {128}, 64);
  const NormOperators ops = norm_operators(s.layer, s.geometry);
  const DiscreteNorms zero = discrete_norms(Eigen::VectorXd::Zero(static_cast<Eigen::Index>(s.layer.unknown_count())), ops);
  CHECK(zero.l2 == 0.0);
  CHECK(zero.h1_surface == 0.0);
  CHECK(zero.h1_transverse == 0.0);
  CHECK(zero.sup == 0.0);

  // phi_1 (x) chi_1 = sqrt(2) sin(pi x) cos(pi u / 2), unit norm in L2.
  Eigen::VectorXd f(static_cast<Eigen::Index>(s.layer.unknown_count()));
  for (std::size_t k = 0; k < s.layer.unknown_count(); ++k) {
    const auto idx = s.layer.unknown_multi_index(k);
    const double x = s.layer.axis(0).unknown_coordinate(idx[0]);
    const double u = s.layer.axis(1).unknown_coordinate(idx[1]);
    f(static_cast<Eigen::Index>(k)) = std::sqrt(2.0) * std::sin(pi * x) * std::cos(pi * u / 2);
  }
  const DiscreteNorms n = discrete_norms(f, ops);
  CHECK(n.l2 == doctest::Approx(1.0).epsilon(1e-3));
  CHECK(n.h1_transverse * n.h1_transverse == doctest::Approx(pi * pi / 4).epsilon(2e-3));
  CHECK(n.h1_surface * n.h1_surface == doctest::Approx(pi * pi).epsilon(2e-3));
  CHECK(n.sup == doctest::Approx(std::sqrt(2.0)).epsilon(1e-3));

  const OperatorPencil eff = assemble_effective(s.surface, s.geometry);
  const EigenResult r = smallest_eigenpairs(eff, 1);
  const NormOperators sops = norm_operators(s.surface, s.geometry);
  CHECK(discrete_norms(r.vectors.col(0), sops).l2 == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("resolvent difference") {
  const Setup s = make_setup("segment", {32}, 16);
  const LayerPair p = layer_pair(s, 0.1);
  CHECK(resolvent_difference_norm(p.full, p.h0, 1.0).norm <= 1e-8);

  const Setup c = make_setup("circle", {32}, 8);
  const LayerPair q = layer_pair(c, 0.1);
  const EigenResult r0 = smallest_eigenpairs(q.h0, 1, EigenOptions{1e-10});
  try {
    resolvent_difference_norm(q.full, q.h0, -r0.values(0));
    FAIL("shift on an eigenvalue accepted");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SingularShift);
  }
  std::vector<double> norms;
  for (double eps : {0.2, 0.1, 0.05}) {
    const LayerPair l = layer_pair(c, eps);
    norms.push_back(resolvent_difference_norm(l.full, l.h0, 1.25).norm);
  }
  CHECK(norms[0] > norms[1]);
  CHECK(norms[1] > norms[2]);
}

}  // TEST_SUITE
