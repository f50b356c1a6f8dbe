#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "thinlayer/geometry.hpp"

namespace thinlayer {

struct CheckSelection {
  bool eigenvalues = true;
  bool norms = true;
  bool resolvent = false;
  bool nodal = false;
  bool potential = true;
  bool annulus = false;
  bool richardson = true;

  bool any() const { return eigenvalues || norms || resolvent || nodal || potential || annulus; }
};

/// Everything a sweep needs. Loaded from an INI file with sections [chart],
/// [grid], [sweep], [solver] and [checks]; unknown sections and keys are
/// rejected.
struct SweepConfig {
  std::string preset = "circle";
  PresetParams params;

  std::vector<int> surface_cells{128};
  int transverse_cells = 32;

  /// Descending. Empty means {0.2, 0.1, 0.05, 0.025} times rho_m.
  std::vector<double> eps;
  int n_eigen = 4;
  std::filesystem::path out_dir = "out";

  double solver_tol = 1e-8;
  int max_iterations = 2000;
  long dense_cap = 800;
  /// Resolvent shift; defaults to 1 + |lambda_1^0|.
  std::optional<double> k_shift;

  CheckSelection checks;
  /// Tube radius for the sign tests; defaults to 4 times the largest ambient
  /// surface spacing.
  std::optional<double> tube_radius;
};

SweepConfig load_config(const std::filesystem::path& path);
SweepConfig parse_config(const std::string& text);

/// Comma-separated check names: eigenvalues, norms, resolvent, nodal,
/// potential, annulus, richardson; "all" and "none" are accepted.
CheckSelection parse_checks(const std::string& list);

/// Grid text such as "128x32" or "48x48x12": surface counts, then the
/// transverse count.
void parse_grid(const std::string& text, SweepConfig& config);

/// Echo of the configuration in the INI layout it was read from.
std::string config_echo(const SweepConfig& config);

/// Static checks: eps strictly decreasing with at least 3 entries, positive
/// grid counts, n_eigen >= 1, known preset and parameter keys.
void validate_config(const SweepConfig& config);

}  // namespace thinlayer
