#pragma once

#include <filesystem>
#include <string>

#include "thinlayer/sweep.hpp"

namespace thinlayer {

/// Writes summary.csv, eigenvalues.csv, norms.csv, nodal.csv, one
/// nodal_points_<eps>_<n>.csv per stored nodal set, and run.log into `dir`.
/// Each file is written to a temporary name and renamed into place.
void emit_report(const SweepReport& report, const std::filesystem::path& dir);

/// Reads eigenvalues.csv, norms.csv and nodal.csv back (missing files give
/// empty tables). Rates, checks and nodal point sets are not restored.
SweepReport load_rows(const std::filesystem::path& dir);

/// Recomputes rates and checks of a loaded report under `config`.
void rerender(SweepReport& report, const SweepConfig& config);

/// Text of run.log.
std::string run_log_text(const SweepReport& report);

}  // namespace thinlayer
