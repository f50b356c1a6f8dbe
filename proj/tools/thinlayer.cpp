// Command-line front end: geometry, spectrum, nodal, sweep, report.

#include <cstdlib>
#include <filesystem>
#include <functional>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <fmt/format.h>

#include "thinlayer/assembly.hpp"
#include "thinlayer/config.hpp"
#include "thinlayer/eigensolve.hpp"
#include "thinlayer/errors.hpp"
#include "thinlayer/geometry.hpp"
#include "thinlayer/layer.hpp"
#include "thinlayer/report.hpp"
#include "thinlayer/sweep.hpp"

namespace fs = std::filesystem;
using namespace thinlayer;

namespace {

struct CommonOptions {
  std::string config;
  std::string out;
  std::string preset;
  std::vector<std::string> params;
  std::string eps;
  std::string grid;
  int n_eigen = 0;
  std::string checks;
};

void add_common(CLI::App* app, CommonOptions& o) {
  app->add_option("--config", o.config, "INI configuration file")->check(CLI::ExistingFile);
  app->add_option("--out", o.out, "output directory");
  app->add_option("--preset", o.preset, "chart preset");
  app->add_option("--param", o.params, "preset parameter, key=value[,value]");
  app->add_option("--eps", o.eps, "comma-separated eps values");
  app->add_option("--grid", o.grid, "grid such as 128x32 or 48x48x12");
  app->add_option("--n-eigen", o.n_eigen, "number of eigenpairs");
  app->add_option("--checks", o.checks, "comma-separated checks, all or none");
}

std::vector<double> parse_numbers(const std::string& text) {
  std::vector<double> out;
  std::string cur;
  for (char ch : text + ",") {
    if (ch == ',' || ch == ' ') {
      if (!cur.empty()) out.push_back(std::stod(cur));
      cur.clear();
    } else {
      cur += ch;
    }
  }
  return out;
}

SweepConfig resolve(const CommonOptions& o) {
  SweepConfig c = o.config.empty() ? SweepConfig{} : load_config(o.config);
  if (!o.preset.empty() && o.preset != c.preset) {
    c.preset = o.preset;
    c.params.clear();
  }
  for (const auto& kv : o.params) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw Error(ErrorCode::ConfigError, fmt::format("--param '{}' is not key=value", kv));
    c.params[kv.substr(0, eq)] = parse_numbers(kv.substr(eq + 1));
  }
  if (!o.eps.empty()) c.eps = parse_numbers(o.eps);
  if (!o.grid.empty()) parse_grid(o.grid, c);
  if (o.n_eigen > 0) c.n_eigen = o.n_eigen;
  if (!o.checks.empty()) c.checks = parse_checks(o.checks);
  if (!o.out.empty()) c.out_dir = o.out;
  return c;
}

double single_eps(const SweepConfig& c) {
  if (c.eps.size() != 1) throw Error(ErrorCode::ConfigError, "this command needs exactly one --eps value");
  return c.eps.front();
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& writer) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::IoFailure, fmt::format("cannot open {}", path.string()));
  writer(out);
}

int cmd_geometry(const CommonOptions& o, std::optional<double> layer_eps) {
  const SweepConfig c = resolve(o);
  const Chart chart = preset_chart(c.preset, c.params);
  const Grid grid = build_grid(chart, c.surface_cells, c.transverse_cells);
  const GeometryFields geo = evaluate_geometry(chart, grid.surface());
  const CurvatureBounds b = curvature_bounds(geo);
  fmt::print("preset {}\nrho_m = {:.17g}\nmax |kappa| = {:.17g}\nmax |grad kappa| = {:.17g}\nmax |laplace kappa| = {:.17g}\n",
             c.preset, b.rho_m, b.max_abs_curvature, b.max_grad_curvature, b.max_laplace_curvature);
  if (!o.out.empty()) {
    write_file(c.out_dir / "geometry.csv", [&](std::ostream& s) { write_geometry_csv(geo, s); });
    if (layer_eps) {
      const LayerFields layer = build_layer_fields(grid, geo, *layer_eps);
      write_file(c.out_dir / "layer.csv", [&](std::ostream& s) { write_layer_csv(layer, geo, s); });
      fmt::print("V finite-difference noise = {:.3e}\n", layer.v_fd_noise);
    }
  }
  return 0;
}

int cmd_spectrum(const CommonOptions& o, const std::string& kind, bool dump) {
  const SweepConfig c = resolve(o);
  const Chart chart = preset_chart(c.preset, c.params);
  const Grid grid = build_grid(chart, c.surface_cells, c.transverse_cells);
  const GeometryFields geo = evaluate_geometry(chart, grid.surface());
  const TransverseModel tm{c.transverse_cells};
  OperatorPencil pencil;
  if (kind == "effective") {
    pencil = assemble_effective(grid.surface(), geo);
  } else if (kind == "transverse") {
    pencil = assemble_transverse(tm);
  } else {
    const double eps = single_eps(c);
    if (kind == "full") {
      pencil = renormalize(assemble_full(grid, geo, build_layer_fields(grid, geo, eps), eps), eps, tm);
    } else if (kind == "h0") {
      pencil = renormalize(assemble_H0(assemble_effective(grid.surface(), geo), tm, eps), eps, tm);
    } else {
      throw Error(ErrorCode::ConfigError, fmt::format("unknown operator kind '{}'", kind));
    }
  }
  EigenOptions opts;
  opts.tol = c.solver_tol;
  opts.max_iterations = c.max_iterations;
  opts.dense_cap = c.dense_cap;
  const EigenResult r = smallest_eigenpairs(pencil, c.n_eigen, opts);
  fmt::print("n,lambda,residual,cluster\n");
  for (int n = 0; n < r.count(); ++n)
    fmt::print("{},{:.17g},{:.3e},{}\n", n + 1, r.values(n), r.residuals(n), r.cluster[static_cast<std::size_t>(n)]);
  if (dump) {
    write_file(c.out_dir / "stiffness.coo", [&](std::ostream& s) { write_matrix_coo(pencil.stiffness, s); });
    write_file(c.out_dir / "mass.csv", [&](std::ostream& s) {
      s << "i,mass\n";
      for (Eigen::Index i = 0; i < pencil.mass.size(); ++i) s << fmt::format("{},{:.17g}\n", i, pencil.mass(i));
    });
  }
  return 0;
}

int cmd_nodal(const CommonOptions& o) {
  SweepConfig c = resolve(o);
  const double eps = single_eps(c);
  c.checks = parse_checks("eigenvalues,nodal");
  const PointResult p = run_single(c, eps);
  SweepReport rep;
  rep.config = c;
  rep.eps = {eps};
  rep.eigen = p.eigen;
  rep.nodal = p.nodal;
  rep.failures = p.failures;
  for (const auto& [n, set] : p.nodal_points) rep.nodal_points[{0, n}] = set;
  rep.checks = evaluate_checks(rep);
  fmt::print("n,zeros_phi,domains_psi,domains_phi,boundary_cells,hausdorff,agreement,all_slices\n");
  for (const auto& r : p.nodal)
    fmt::print("{},{},{},{},{:.3g},{:.3e},{:.4f},{}\n", r.n, r.zeros_phi, r.domains_psi, r.domains_phi, r.boundary_cells,
               r.hausdorff, r.agreement_fraction, r.tube_all_slices);
  for (const auto& f : p.failures) fmt::print(stderr, "FAIL {}: {}\n", f.stage, f.message);
  emit_report(rep, c.out_dir);
  return p.failures.empty() ? 0 : 2;
}

int cmd_sweep(const CommonOptions& o) {
  const SweepConfig c = resolve(o);
  const SweepReport rep = run_sweep(c);
  emit_report(rep, c.out_dir);
  bool ok = true;
  for (const auto& line : rep.checks) {
    fmt::print("{} {}: {}\n", line.pass ? "PASS" : "FAIL", line.name, line.detail);
    ok = ok && line.pass;
  }
  return ok ? 0 : 2;
}

int cmd_report(const CommonOptions& o) {
  const SweepConfig c = resolve(o);
  SweepReport rep = load_rows(c.out_dir);
  rerender(rep, c);
  emit_report(rep, c.out_dir);
  std::cout << run_log_text(rep);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Thin-layer Laplacian spectra, eigenfunctions and nodal sets"};
  app.require_subcommand(1);

  CommonOptions geo_o, spectrum_o, nodal_o, sweep_o, report_o;
  auto* geo = app.add_subcommand("geometry", "dump geometry fields, rho_m and curvature diagnostics");
  add_common(geo, geo_o);
  double dump_eps = 0.0;
  auto* dump_flag = geo->add_option("--dump-layer", dump_eps, "also write layer.csv (x, u, J, V, det_ratio) at this eps");

  auto* spectrum_cmd = app.add_subcommand("spectrum", "eigenvalues of one operator at one eps");
  add_common(spectrum_cmd, spectrum_o);
  std::string kind = "full";
  bool dump_matrix = false;
  spectrum_cmd->add_option("--kind", kind, "full, h0, effective or transverse");
  spectrum_cmd->add_flag("--dump-matrix", dump_matrix, "write stiffness.coo and the diagonal mass.csv");

  auto* nodal = app.add_subcommand("nodal", "nodal suite at one eps");
  add_common(nodal, nodal_o);

  auto* sweep = app.add_subcommand("sweep", "full eps sweep with rates and checks");
  add_common(sweep, sweep_o);

  auto* report = app.add_subcommand("report", "re-render summary and run.log from saved rows in --out");
  add_common(report, report_o);

  CLI11_PARSE(app, argc, argv);

  try {
    if (geo->parsed())
      return cmd_geometry(geo_o, dump_flag->count() ? std::optional<double>(dump_eps) : std::nullopt);
    if (spectrum_cmd->parsed()) return cmd_spectrum(spectrum_o, kind, dump_matrix);
    if (nodal->parsed()) return cmd_nodal(nodal_o);
    if (sweep->parsed()) return cmd_sweep(sweep_o);
    if (report->parsed()) return cmd_report(report_o);
  } catch (const Error& e) {
    fmt::print(stderr, "error [{}]: {}\n", to_string(e.code()), e.what());
    return 1;
  } catch (const std::exception& e) {
    fmt::print(stderr, "error: {}\n", e.what());
    return 1;
  }
  return 0;
}
