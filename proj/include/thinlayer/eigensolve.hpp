#pragma once

#include <vector>

#include <Eigen/Dense>

#include "thinlayer/assembly.hpp"

namespace thinlayer {

struct EigenOptions {
  /// Residual bound ||A v - lambda B v||_{B^-1} <= tol * max(1, |lambda|).
  double tol = 1e-8;
  int max_iterations = 2000;
  /// Pencils up to this size are solved densely.
  Eigen::Index dense_cap = 800;
  /// Extra block vectors carried by the subspace iteration (at least this
  /// many, or N if larger).
  int guard_vectors = 8;
};

/// Smallest eigenpairs of a pencil, ascending, with B-orthonormal columns.
struct EigenResult {
  Eigen::VectorXd values;
  Eigen::MatrixXd vectors;
  Eigen::VectorXd residuals;
  /// Cluster id per pair; clusters are contiguous and numbered from 0.
  std::vector<int> cluster;
  int iterations = 0;
  bool dense = false;

  int count() const { return static_cast<int>(values.size()); }
};

/// Start block: the all-ones vector, then vectors from a fixed-seed
/// mt19937_64 stream, B-orthonormalized in order. Eigenvectors are returned
/// with their largest-magnitude entry positive.
EigenResult smallest_eigenpairs(const OperatorPencil& pencil, int n, const EigenOptions& options = {});

/// ||A v - lambda B v||_{B^-1} / ||v||_B.
double pair_residual(const OperatorPencil& pencil, double lambda, const Eigen::VectorXd& v);

/// Two eigenvalues closer than this are treated as one cluster.
/// max(1e-8, 1e-6 |lambda|) * max(1, 1e3 h^2), h the largest grid spacing.
double cluster_tolerance(double lambda, double h);
std::vector<int> cluster_partition(const Eigen::VectorXd& values, double h);

struct Alignment {
  /// Reference vectors rotated within each cluster to best match the
  /// perturbed ones.
  Eigen::MatrixXd aligned_reference;
  /// perturbed - aligned reference, column by column.
  Eigen::MatrixXd differences;
  /// Largest principal angle between the perturbed and the reference
  /// cluster spaces, repeated for every member of the cluster.
  std::vector<double> subspace_angle;
  std::vector<int> cluster;
  std::vector<int> cluster_size;
};

/// Clusters follow `reference.cluster`. Raises ClusterMismatch when the
/// perturbed partition does not hold a cluster of the same size at the same
/// index. Only clusters starting before
/// `checked_pairs` are checked (all but a cluster touching the end of the list
/// when negative); the rest are aligned without the check.
Alignment cluster_and_align(const EigenResult& perturbed, const EigenResult& reference,
                            const Eigen::VectorXd& mass, int checked_pairs = -1);

/// Quadratic forms behind the discrete norms of a field on a grid.
struct NormOperators {
  Eigen::VectorXd mass;
  SparseMatrix surface;     // |grad_g f|^2
  SparseMatrix transverse;  // |d_u f|^2, empty for surface grids
};

NormOperators norm_operators(const Grid& grid, const GeometryFields& geometry);

struct DiscreteNorms {
  double l2 = 0.0;
  double h1_surface = 0.0;
  double h1_transverse = 0.0;
  double sup = 0.0;
};

DiscreteNorms discrete_norms(const Eigen::VectorXd& field, const NormOperators& ops);

struct ResolventOptions {
  double tol = 1e-4;
  int max_iterations = 500;
  double pivot_tol = 1e-10;
};

struct ResolventEstimate {
  double norm = 0.0;
  int iterations = 0;
};

/// Power iteration for the B-operator norm of
/// (A_H + k B)^-1 B - (A_H0 + k B)^-1 B.
ResolventEstimate resolvent_difference_norm(const OperatorPencil& h, const OperatorPencil& h0, double k,
                                            const ResolventOptions& options = {});

}  // namespace thinlayer
