#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "thinlayer/config.hpp"
#include "thinlayer/geometry.hpp"
#include "thinlayer/nodal.hpp"
#include "thinlayer/rates.hpp"

namespace thinlayer {

/// Slope every rate check must reach.
inline constexpr double kMinSlope = 0.9;
/// Largest relative change allowed between the base and the doubled grid.
inline constexpr double kRichardsonTol = 0.2;

struct EigenRow {
  double eps = 0.0;
  int n = 0;
  double lambda = 0.0;   // renormalized full operator
  double lambda0 = 0.0;  // renormalized H0
  double difference = 0.0;
  double residual = 0.0;
  double residual0 = 0.0;
  int cluster = 0;
  int cluster_size = 1;
  double sigma = 0.0;  // effective operator
  double shift = 0.0;  // eps^-2 E_1^h
  double oracle = 0.0;          // annulus k^2, NaN when not computed
  double oracle_relative = 0.0; // |lambda + shift - k^2| / k^2
};

struct NormRow {
  double eps = 0.0;
  int n = 0;
  double l2 = 0.0;
  double h1_surface = 0.0;
  double h1_transverse = 0.0;
  double sup = 0.0;
  double transverse_ratio = 0.0;
  double subspace_angle = 0.0;
  // Per-eps quantities, repeated on every row of that eps.
  double potential_dev = 0.0;
  double metric_dev = 0.0;
  double sandwich_lower = 0.0;
  double sandwich_upper = 0.0;
  double resolvent = 0.0;
  double v_fd_noise = 0.0;
};

struct NodalRow {
  double eps = 0.0;
  int n = 0;
  int zeros_phi = 0;
  int domains_psi = 0;
  int domains_phi = 0;
  double boundary_distance = 0.0;
  double boundary_cells = 0.0;
  double hausdorff = 0.0;
  double tube_delta = 0.0;
  double agreement_fraction = 0.0;
  int tube_all_slices = -1;  // -1 when the tube test does not apply
  double fitted_A = 0.0;
  double symmetric_difference = 0.0;
};

struct StageFailure {
  double eps = 0.0;
  std::string stage;
  std::string message;
};

struct RateRow {
  std::string metric;
  int n = 0;
  RateFit fit;
};

struct RichardsonRow {
  std::string metric;
  int n = 0;
  double base = 0.0;
  double refined = 0.0;
  double change = 0.0;
  bool pass = true;
};

struct CheckLine {
  std::string name;
  bool pass = true;
  std::string detail;
};

/// Rows of one eps on one grid.
struct PointResult {
  std::vector<EigenRow> eigen;
  std::vector<NormRow> norms;
  std::vector<NodalRow> nodal;
  std::map<int, NodalSet> nodal_points;
  std::vector<StageFailure> failures;
};

struct SweepReport {
  SweepConfig config;
  std::vector<double> eps;
  CurvatureBounds bounds;
  std::vector<double> sigma;
  double k_shift = 0.0;
  std::vector<EigenRow> eigen;
  std::vector<NormRow> norms;
  std::vector<NodalRow> nodal;
  std::map<std::pair<std::size_t, int>, NodalSet> nodal_points;
  std::vector<StageFailure> failures;
  std::vector<RichardsonRow> richardson;
  std::vector<RateRow> rates;
  std::vector<CheckLine> checks;
  std::vector<std::string> log;
};

/// Validates the config against the chart (overlap bound and the regime
/// eps^-2 (E_2 - E_1) > sigma_N - sigma_1 + 1 at the largest eps), then runs
/// every eps. Failures inside one eps are recorded and the sweep continues.
SweepReport run_sweep(const SweepConfig& config);

/// One eps on the configured grid with every selected check, without the
/// list and regime validation of a sweep.
PointResult run_single(const SweepConfig& config, double eps);

/// Log-log fits of every error column over eps.
std::vector<RateRow> compute_rates(const std::vector<EigenRow>& eigen, const std::vector<NormRow>& norms,
                                   const std::vector<NodalRow>& nodal, const CheckSelection& checks,
                                   double solver_tol);

/// Pass/fail lines derived from the rows, rates and Richardson comparison.
std::vector<CheckLine> evaluate_checks(const SweepReport& report);

/// Errors at or below this count as exact zeros in rate fits.
double exact_floor(double solver_tol);

}  // namespace thinlayer
