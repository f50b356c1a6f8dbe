#include "thinlayer/eigensolve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

#include <Eigen/CholmodSupport>
#include <Eigen/SparseCholesky>
#include <fmt/format.h>
#include <unsupported/Eigen/KroneckerProduct>

#include "thinlayer/errors.hpp"

namespace thinlayer {

namespace {

constexpr std::uint64_t kStartSeed = 0x7468696e6c617972ULL;

double uniform_pm1(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
}

void fill_random(Eigen::Ref<Eigen::VectorXd> x, std::mt19937_64& rng) {
  for (Eigen::Index i = 0; i < x.size(); ++i) x(i) = uniform_pm1(rng);
}

double b_dot(const Eigen::VectorXd& b, const Eigen::Ref<const Eigen::VectorXd>& x,
             const Eigen::Ref<const Eigen::VectorXd>& y) {
  return (x.array() * b.array() * y.array()).sum();
}

// Modified Gram-Schmidt in the B inner product, applied twice. Columns that
// collapse are replaced from the random stream.
void b_orthonormalize(Eigen::MatrixXd& x, const Eigen::VectorXd& b, std::mt19937_64& rng) {
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    for (int attempt = 0;; ++attempt) {
      const double before = std::sqrt(b_dot(b, x.col(j), x.col(j)));
      for (int pass = 0; pass < 2; ++pass)
        for (Eigen::Index i = 0; i < j; ++i) x.col(j) -= b_dot(b, x.col(i), x.col(j)) * x.col(i);
      const double after = std::sqrt(b_dot(b, x.col(j), x.col(j)));
      if (after > 1e-10 * before && after > 0.0) {
        x.col(j) /= after;
        break;
      }
      if (attempt > 8) throw Error(ErrorCode::NoConvergence, "cannot extend the search space");
      fill_random(x.col(j), rng);
    }
  }
}

void normalize_signs(Eigen::MatrixXd& v) {
  for (Eigen::Index j = 0; j < v.cols(); ++j) {
    Eigen::Index at = 0;
    v.col(j).cwiseAbs().maxCoeff(&at);
    if (v(at, j) < 0.0) v.col(j) = -v.col(j);
  }
}

EigenResult dense_solve(const OperatorPencil& p, int n) {
  const Eigen::VectorXd s = p.mass.cwiseSqrt().cwiseInverse();
  Eigen::MatrixXd c = s.asDiagonal() * Eigen::MatrixXd(p.stiffness) * s.asDiagonal();
  c = (0.5 * (c + c.transpose())).eval();
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(c);
  if (es.info() != Eigen::Success) throw Error(ErrorCode::NoConvergence, "dense eigensolver failed");
  EigenResult r;
  r.dense = true;
  r.values = es.eigenvalues().head(n);
  r.vectors = s.asDiagonal() * es.eigenvectors().leftCols(n);
  return r;
}

EigenResult subspace_iteration(const OperatorPencil& p, int n, const EigenOptions& opt) {
  const Eigen::Index size = p.size();
  const auto block = static_cast<Eigen::Index>(std::min<Eigen::Index>(size, n + std::max(opt.guard_vectors, n)));

  Eigen::CholmodSimplicialLLT<SparseMatrix> llt;
  llt.cholmod().print = 0;
  double shift = p.spectral_floor - 1.0;
  for (int attempt = 0;; ++attempt) {
    SparseMatrix m = p.stiffness;
    for (Eigen::Index k = 0; k < size; ++k) m.coeffRef(k, k) -= shift * p.mass(k);
    m.makeCompressed();
    llt.compute(m);
    if (llt.info() == Eigen::Success) break;
    if (attempt == 6) throw Error(ErrorCode::NoConvergence, "no positive definite shift found");
    shift -= std::max(1.0, std::abs(shift));
  }

  std::mt19937_64 rng(kStartSeed);
  Eigen::MatrixXd x(size, block);
  x.col(0).setOnes();
  for (Eigen::Index j = 1; j < block; ++j) fill_random(x.col(j), rng);
  b_orthonormalize(x, p.mass, rng);

  EigenResult r;
  Eigen::VectorXd theta;
  double worst = std::numeric_limits<double>::infinity();
  for (int it = 1; it <= opt.max_iterations; ++it) {
    Eigen::MatrixXd y = llt.solve(p.mass.asDiagonal() * x);
    b_orthonormalize(y, p.mass, rng);
    Eigen::MatrixXd k = y.transpose() * (p.stiffness * y);
    k = (0.5 * (k + k.transpose())).eval();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(k);
    theta = es.eigenvalues();
    x = y * es.eigenvectors();
    worst = 0.0;
    for (int i = 0; i < n; ++i)
      worst = std::max(worst, pair_residual(p, theta(i), x.col(i)) / std::max(1.0, std::abs(theta(i))));
    r.iterations = it;
    if (worst <= opt.tol) break;
  }
  if (!(worst <= opt.tol))
    throw Error(ErrorCode::NoConvergence,
                fmt::format("{} iterations, worst scaled residual {:.3e}", r.iterations, worst));
  r.values = theta.head(n);
  r.vectors = x.leftCols(n);
  return r;
}

}  // namespace

double pair_residual(const OperatorPencil& p, double lambda, const Eigen::VectorXd& v) {
  const Eigen::VectorXd res = p.stiffness * v - lambda * p.mass.cwiseProduct(v);
  const double num = std::sqrt((res.array().square() / p.mass.array()).sum());
  const double den = std::sqrt(b_dot(p.mass, v, v));
  return num / den;
}

EigenResult smallest_eigenpairs(const OperatorPencil& p, int n, const EigenOptions& opt) {
  if (n < 1) throw Error(ErrorCode::InvalidParams, "at least one eigenpair must be requested");
  if (n > p.size())
    throw Error(ErrorCode::TooManyEigenpairs, fmt::format("{} eigenpairs requested, {} unknowns", n, p.size()));
  EigenResult r = p.size() <= opt.dense_cap ? dense_solve(p, n) : subspace_iteration(p, n, opt);
  normalize_signs(r.vectors);
  r.residuals.resize(n);
  for (int i = 0; i < n; ++i) {
    r.residuals(i) = pair_residual(p, r.values(i), r.vectors.col(i));
    if (r.residuals(i) > opt.tol * std::max(1.0, std::abs(r.values(i))))
      throw Error(ErrorCode::NoConvergence,
                  fmt::format("pair {} residual {:.3e} above tolerance", i + 1, r.residuals(i)));
  }
  const double h = p.grid.dimension() > 0 ? p.grid.max_surface_spacing() : 0.0;
  r.cluster = cluster_partition(r.values, h);
  return r;
}

double cluster_tolerance(double lambda, double h) {
  return std::max(1e-8, 1e-6 * std::abs(lambda)) * std::max(1.0, 1e3 * h * h);
}

std::vector<int> cluster_partition(const Eigen::VectorXd& values, double h) {
  std::vector<int> id(static_cast<std::size_t>(values.size()), 0);
  for (Eigen::Index i = 1; i < values.size(); ++i) {
    const bool joined = values(i) - values(i - 1) < cluster_tolerance(values(i), h);
    id[static_cast<std::size_t>(i)] = id[static_cast<std::size_t>(i - 1)] + (joined ? 0 : 1);
  }
  return id;
}

Alignment cluster_and_align(const EigenResult& perturbed, const EigenResult& reference,
                            const Eigen::VectorXd& mass, int checked_pairs) {
  const int n = reference.count();
  if (perturbed.count() != n || perturbed.vectors.rows() != reference.vectors.rows() ||
      mass.size() != reference.vectors.rows())
    throw Error(ErrorCode::GridMismatch, "eigen results live on different spaces");
  Alignment out;
  out.aligned_reference = reference.vectors;
  out.subspace_angle.assign(static_cast<std::size_t>(n), 0.0);
  out.cluster = reference.cluster;
  out.cluster_size.assign(static_cast<std::size_t>(n), 1);
  const Eigen::VectorXd sqrt_b = mass.cwiseSqrt();

  for (int k = 0; k < n;) {
    int p = 1;
    while (k + p < n && reference.cluster[static_cast<std::size_t>(k + p)] == reference.cluster[static_cast<std::size_t>(k)]) ++p;

    // A cluster that reaches the end of the list may be truncated, so its
    // multiplicity is not compared.
    if (k + p < n && (checked_pairs < 0 || k < checked_pairs)) {
      const auto& pc = perturbed.cluster;
      const auto at = [&](int i) { return pc[static_cast<std::size_t>(i)]; };
      int q = 1;
      while (k + q < n && at(k + q) == at(k)) ++q;
      const bool starts = k == 0 || at(k - 1) != at(k);
      if (!starts || q != p)
        throw Error(ErrorCode::ClusterMismatch,
                    fmt::format("reference cluster at index {} has {} members, perturbed cluster there has {}", k + 1, p,
                                starts ? q : -1));
    }

    const Eigen::MatrixXd phi = reference.vectors.middleCols(k, p);
    const Eigen::MatrixXd psi = perturbed.vectors.middleCols(k, p);
    const Eigen::MatrixXd c = phi.transpose() * mass.asDiagonal() * psi;
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(c, Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd rotation = svd.matrixU() * svd.matrixV().transpose();
    out.aligned_reference.middleCols(k, p) = phi * rotation;

    const Eigen::MatrixXd outside = sqrt_b.asDiagonal() * (psi - phi * c);
    Eigen::JacobiSVD<Eigen::MatrixXd> s2(outside);
    const double angle = std::asin(std::min(1.0, s2.singularValues()(0)));
    for (int i = k; i < k + p; ++i) {
      out.subspace_angle[static_cast<std::size_t>(i)] = angle;
      out.cluster_size[static_cast<std::size_t>(i)] = p;
    }
    k += p;
  }
  out.differences = perturbed.vectors - out.aligned_reference;
  return out;
}

NormOperators norm_operators(const Grid& grid, const GeometryFields& geometry) {
  NormOperators ops;
  if (!grid.has_transverse()) {
    const OperatorPencil eff = assemble_effective(grid, geometry);
    ops.mass = eff.mass;
    ops.surface = eff.kinetic;
    return ops;
  }
  const OperatorPencil eff = assemble_effective(grid.surface(), geometry);
  const OperatorPencil tp = assemble_transverse(TransverseModel{grid.transverse_axis().cells});
  SparseMatrix bu(tp.size(), tp.size());
  bu.setIdentity();
  bu *= tp.mass(0);
  SparseMatrix bs(eff.size(), eff.size());
  std::vector<Eigen::Triplet<double>> t;
  for (Eigen::Index s = 0; s < eff.size(); ++s) t.emplace_back(static_cast<int>(s), static_cast<int>(s), eff.mass(s));
  bs.setFromTriplets(t.begin(), t.end());
  ops.surface = Eigen::kroneckerProduct(eff.kinetic, bu);
  ops.transverse = Eigen::kroneckerProduct(bs, tp.stiffness);
  ops.mass = Eigen::kroneckerProduct(eff.mass, tp.mass);
  return ops;
}

DiscreteNorms discrete_norms(const Eigen::VectorXd& f, const NormOperators& ops) {
  DiscreteNorms n;
  if (f.size() != ops.mass.size()) throw Error(ErrorCode::GridMismatch, "field does not match the norm operators");
  n.l2 = std::sqrt(std::max(0.0, b_dot(ops.mass, f, f)));
  n.h1_surface = std::sqrt(std::max(0.0, f.dot(ops.surface * f)));
  if (ops.transverse.size() > 0) n.h1_transverse = std::sqrt(std::max(0.0, f.dot(ops.transverse * f)));
  n.sup = f.size() ? f.cwiseAbs().maxCoeff() : 0.0;
  return n;
}

namespace {

void factor_shifted(Eigen::SimplicialLDLT<SparseMatrix>& f, const OperatorPencil& p, double k, double pivot_tol) {
  SparseMatrix m = p.stiffness;
  for (Eigen::Index i = 0; i < p.size(); ++i) m.coeffRef(i, i) += k * p.mass(i);
  f.compute(m);
  if (f.info() != Eigen::Success) throw Error(ErrorCode::SingularShift, fmt::format("factorization failed at k = {}", k));
  const Eigen::VectorXd d = f.vectorD().cwiseAbs();
  if (d.minCoeff() < pivot_tol * d.maxCoeff())
    throw Error(ErrorCode::SingularShift,
                fmt::format("k = {} is (numerically) in the spectrum: pivot ratio {:.3e}", k, d.minCoeff() / d.maxCoeff()));
}

}  // namespace

ResolventEstimate resolvent_difference_norm(const OperatorPencil& h, const OperatorPencil& h0, double k,
                                            const ResolventOptions& opt) {
  if (h.size() != h0.size() || ((h.mass - h0.mass).cwiseAbs().maxCoeff() > 1e-12 * h.mass.maxCoeff()))
    throw Error(ErrorCode::GridMismatch, "resolvent difference needs pencils with one mass matrix");
  Eigen::SimplicialLDLT<SparseMatrix> fh;
  Eigen::SimplicialLDLT<SparseMatrix> fh0;
  factor_shifted(fh, h, k, opt.pivot_tol);
  factor_shifted(fh0, h0, k, opt.pivot_tol);

  std::mt19937_64 rng(kStartSeed);
  Eigen::VectorXd x(h.size());
  fill_random(x, rng);
  x /= std::sqrt(b_dot(h.mass, x, x));
  ResolventEstimate est;
  double previous = 0.0;
  for (int it = 1; it <= opt.max_iterations; ++it) {
    const Eigen::VectorXd bx = h.mass.cwiseProduct(x);
    const Eigen::VectorXd y = fh.solve(bx) - fh0.solve(bx);
    const double norm = std::sqrt(b_dot(h.mass, y, y));
    est.iterations = it;
    est.norm = norm;
    if (norm == 0.0 || std::abs(norm - previous) <= opt.tol * norm) break;
    previous = norm;
    x = y / norm;
  }
  if (!std::isfinite(est.norm) || est.norm > 1e10)
    throw Error(ErrorCode::SingularShift, fmt::format("resolvent estimate {:.3e} at k = {}", est.norm, k));
  return est;
}

}  // namespace thinlayer
