#include "thinlayer/sweep.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>

#include <fmt/format.h>

#include "thinlayer/assembly.hpp"
#include "thinlayer/eigensolve.hpp"
#include "thinlayer/errors.hpp"
#include "thinlayer/layer.hpp"
#include "thinlayer/oracles.hpp"

namespace thinlayer {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();
constexpr double kAnnulusTol = 5e-3;

struct GridContext {
  Grid layer_grid;
  Grid surface_grid;
  GeometryFields geometry;
  OperatorPencil effective;
  EigenResult effective_pairs;
  NormOperators norms;
  CurvatureBounds bounds;
  double tube_delta = 0.0;
};

EigenOptions solver_options(const SweepConfig& c) {
  EigenOptions o;
  o.tol = c.solver_tol;
  o.max_iterations = c.max_iterations;
  o.dense_cap = c.dense_cap;
  return o;
}

int pair_count(const SweepConfig& c, Eigen::Index surface_unknowns) {
  return static_cast<int>(std::min<Eigen::Index>(c.n_eigen + 4, surface_unknowns));
}

GridContext make_context(const SweepConfig& c, const Chart& chart, const std::vector<int>& cells, int nu) {
  GridContext ctx;
  ctx.layer_grid = build_grid(chart, cells, nu);
  ctx.surface_grid = ctx.layer_grid.surface();
  ctx.geometry = evaluate_geometry(chart, ctx.surface_grid);
  ctx.effective = assemble_effective(ctx.surface_grid, ctx.geometry);
  if (c.n_eigen > ctx.effective.size())
    throw Error(ErrorCode::TooManyEigenpairs, fmt::format("n_eigen = {} exceeds {} surface unknowns", c.n_eigen, ctx.effective.size()));
  ctx.effective_pairs = smallest_eigenpairs(ctx.effective, pair_count(c, ctx.effective.size()), solver_options(c));
  ctx.norms = norm_operators(ctx.layer_grid, ctx.geometry);
  ctx.bounds = curvature_bounds(ctx.geometry);
  ctx.tube_delta = c.tube_radius.value_or(4.0 * max_ambient_spacing(ctx.surface_grid, chart));
  return ctx;
}

double preset_radius(const SweepConfig& c) {
  auto it = c.params.find("R");
  return it == c.params.end() || it->second.empty() ? 1.0 : it->second.front();
}

// phi(s) = <psi0(s, .), chi_1>_u / <chi_1, chi_1>_u with chi_1 = cos(pi u / 2)
// sampled on the transverse unknowns (an exact discrete eigenvector).
Eigen::VectorXd surface_profile(const Eigen::VectorXd& psi0, const Grid& layer_grid) {
  const Axis& ut = layer_grid.transverse_axis();
  const int nu = ut.unknown_count();
  Eigen::VectorXd chi(nu);
  for (int j = 0; j < nu; ++j) chi(j) = std::cos(0.5 * std::numbers::pi * ut.unknown_coordinate(j));
  const Eigen::Index ns = psi0.size() / nu;
  Eigen::VectorXd phi(ns);
  for (Eigen::Index s = 0; s < ns; ++s) phi(s) = psi0.segment(s * nu, nu).dot(chi) / chi.squaredNorm();
  return phi;
}

PointResult run_point(const SweepConfig& c, const Chart& chart, const GridContext& ctx, double eps,
                      double k_shift, bool with_nodal) {
  PointResult r;
  const int n_report = c.n_eigen;
  const CheckSelection& checks = c.checks;
  std::string stage = "layer";
  NormRow base;
  base.eps = eps;
  base.resolvent = kNaN;
  LayerFields layer;
  try {
    layer = build_layer_fields(ctx.layer_grid, ctx.geometry, eps);
    base.v_fd_noise = layer.v_fd_noise;
    stage = "potential";
    base.potential_dev = potential_deviation_sup(layer, ctx.geometry);
    base.metric_dev = metric_deviation_sup(layer, ctx.geometry);
    const SandwichReport sw = metric_sandwich_check(layer, ctx.geometry, eps, ctx.bounds.rho_m);
    base.sandwich_lower = sw.lower_margin;
    base.sandwich_upper = sw.upper_margin;
  } catch (const Error& e) {
    r.failures.push_back({eps, stage, e.what()});
    return r;
  }

  auto blank_rows = [&]() {
    for (int n = 1; n <= n_report; ++n) {
      NormRow row = base;
      row.n = n;
      row.l2 = row.h1_surface = row.h1_transverse = row.sup = row.transverse_ratio = row.subspace_angle = kNaN;
      r.norms.push_back(row);
    }
  };
  const bool solve = checks.eigenvalues || checks.norms || checks.nodal || checks.annulus || checks.resolvent;
  if (!solve) {
    blank_rows();
    return r;
  }

  const TransverseModel tm{ctx.layer_grid.transverse_axis().cells};
  const int pairs = pair_count(c, ctx.effective.size());
  OperatorPencil full, h0;
  EigenResult rf, r0;
  Alignment al;
  try {
    stage = "assembly";
    full = renormalize(assemble_full(ctx.layer_grid, ctx.geometry, layer, eps), eps, tm);
    h0 = renormalize(assemble_H0(ctx.effective, tm, eps), eps, tm);
    stage = "solve_full";
    rf = smallest_eigenpairs(full, pairs, solver_options(c));
    stage = "solve_H0";
    r0 = smallest_eigenpairs(h0, pairs, solver_options(c));
    stage = "align";
    al = cluster_and_align(rf, r0, full.mass, n_report);
  } catch (const Error& e) {
    r.failures.push_back({eps, stage, e.what()});
    blank_rows();
    return r;
  }

  if (checks.resolvent) {
    try {
      base.resolvent = resolvent_difference_norm(full, h0, k_shift).norm;
    } catch (const Error& e) {
      r.failures.push_back({eps, "resolvent", e.what()});
    }
  }

  std::vector<double> annulus;
  if (checks.annulus && c.preset == "circle") {
    try {
      annulus = oracle_annulus(preset_radius(c), eps, n_report);
    } catch (const Error& e) {
      r.failures.push_back({eps, "annulus", e.what()});
    }
  }

  for (int n = 1; n <= n_report; ++n) {
    const auto i = static_cast<Eigen::Index>(n - 1);
    EigenRow er;
    er.eps = eps;
    er.n = n;
    er.lambda = rf.values(i);
    er.lambda0 = r0.values(i);
    er.difference = std::abs(er.lambda - er.lambda0);
    er.residual = rf.residuals(i);
    er.residual0 = r0.residuals(i);
    er.cluster = al.cluster[static_cast<std::size_t>(i)];
    er.cluster_size = al.cluster_size[static_cast<std::size_t>(i)];
    er.sigma = ctx.effective_pairs.values(i);
    er.shift = full.shift;
    er.oracle = er.oracle_relative = kNaN;
    if (!annulus.empty()) {
      er.oracle = annulus[static_cast<std::size_t>(i)];
      er.oracle_relative = std::abs(er.lambda + full.shift - er.oracle) / er.oracle;
    }
    r.eigen.push_back(er);

    NormRow nr = base;
    nr.n = n;
    const Eigen::VectorXd diff = al.differences.col(i);
    const DiscreteNorms dn = discrete_norms(diff, ctx.norms);
    nr.l2 = dn.l2;
    nr.h1_surface = dn.h1_surface;
    nr.h1_transverse = dn.h1_transverse;
    nr.sup = dn.sup;
    nr.transverse_ratio = transverse_lipschitz_ratio(diff, ctx.layer_grid);
    nr.subspace_angle = al.subspace_angle[static_cast<std::size_t>(i)];
    r.norms.push_back(nr);
  }

  if (with_nodal && checks.nodal) {
    for (int n = 1; n <= n_report; ++n) {
      const auto i = static_cast<Eigen::Index>(n - 1);
      try {
        const Eigen::VectorXd psi = rf.vectors.col(i);
        const Eigen::VectorXd phi = surface_profile(al.aligned_reference.col(i), ctx.layer_grid);
        NodalRow row;
        row.eps = eps;
        row.n = n;
        row.boundary_distance = row.boundary_cells = row.hausdorff = row.agreement_fraction = row.fitted_A =
            row.symmetric_difference = kNaN;
        row.tube_delta = ctx.tube_delta;
        NodalSet npsi = extract_nodal_set(psi, ctx.layer_grid, chart, eps);
        const NodalSet nphi = extract_nodal_set(phi, ctx.surface_grid, chart, 0.0);
        row.zeros_phi = static_cast<int>(nphi.points.size());
        const NodalDomains dpsi = count_nodal_domains(psi, ctx.layer_grid, full.mass);
        const NodalDomains dphi = count_nodal_domains(phi, ctx.surface_grid, ctx.effective.mass);
        row.domains_psi = dpsi.count;
        row.domains_phi = dphi.count;
        row.symmetric_difference = domain_symmetric_difference(dpsi, dphi, ctx.layer_grid, full.mass);
        if (!npsi.empty()) {
          const BoundaryTouch bt = boundary_touch_distance(npsi, ctx.layer_grid, chart, eps);
          row.boundary_distance = bt.distance;
          row.boundary_cells = bt.in_cells;
        }
        if (!npsi.empty() && !nphi.empty()) {
          row.hausdorff = hausdorff_distance(npsi, extrude_nodal_set(nphi, ctx.layer_grid, chart, eps));
          const TubeReport tube = sign_agreement_tube(psi, phi, ctx.layer_grid, nphi, chart, ctx.tube_delta);
          row.agreement_fraction = tube.agreement_fraction;
          row.tube_all_slices = tube.all_slices_change ? 1 : 0;
          row.fitted_A = tube.fitted_A;
        }
        r.nodal.push_back(row);
        r.nodal_points[n] = std::move(npsi);
      } catch (const Error& e) {
        r.failures.push_back({eps, fmt::format("nodal n={}", n), e.what()});
      }
    }
  }
  return r;
}

bool finite(double v) { return std::isfinite(v); }

}  // namespace

double exact_floor(double solver_tol) { return 100.0 * solver_tol; }

PointResult run_single(const SweepConfig& config, double eps) {
  const Chart chart = preset_chart(config.preset, config.params);
  const GridContext ctx = make_context(config, chart, config.surface_cells, config.transverse_cells);
  const double k_shift = config.k_shift.value_or(1.0 + std::abs(ctx.effective_pairs.values(0)));
  return run_point(config, chart, ctx, eps, k_shift, true);
}

SweepReport run_sweep(const SweepConfig& config) {
  validate_config(config);
  SweepReport rep;
  rep.config = config;
  const Chart chart = preset_chart(config.preset, config.params);
  auto clock = std::chrono::steady_clock::now;
  auto t0 = clock();

  const GridContext ctx = make_context(config, chart, config.surface_cells, config.transverse_cells);
  rep.bounds = ctx.bounds;
  const double rho = rep.bounds.rho_m;
  if (config.eps.empty()) {
    const double scale = std::isinf(rho) ? 1.0 : rho;
    rep.eps = {0.2 * scale, 0.1 * scale, 0.05 * scale, 0.025 * scale};
  } else {
    rep.eps = config.eps;
  }
  for (double e : rep.eps)
    if (!std::isinf(rho) && !(e < kOverlapSafety * rho))
      throw Error(ErrorCode::ConfigError, fmt::format("eps = {} violates eps < {} rho_m = {}", e, kOverlapSafety, kOverlapSafety * rho));

  const Eigen::VectorXd& sigma = ctx.effective_pairs.values;
  rep.sigma.assign(sigma.data(), sigma.data() + sigma.size());
  {
    const double e1 = TransverseModel::continuum_eigenvalue(1);
    const double e2 = TransverseModel::continuum_eigenvalue(2);
    const double eps_max = rep.eps.front();
    const double gap = (e2 - e1) / (eps_max * eps_max);
    const double spread = sigma(config.n_eigen - 1) - sigma(0) + 1.0;
    if (!(gap > spread))
      throw Error(ErrorCode::ConfigError,
                  fmt::format("eps = {}: transverse gap {:.6g} does not exceed sigma_N - sigma_1 + 1 = {:.6g}", eps_max, gap,
                              spread));
  }
  rep.k_shift = config.k_shift.value_or(1.0 + std::abs(sigma(0)));
  rep.log.push_back(fmt::format("setup: {} unknowns per layer, {:.2f} s", ctx.layer_grid.unknown_count(),
                                std::chrono::duration<double>(clock() - t0).count()));

  for (std::size_t i = 0; i < rep.eps.size(); ++i) {
    const auto t1 = clock();
    PointResult p = run_point(config, chart, ctx, rep.eps[i], rep.k_shift, true);
    rep.eigen.insert(rep.eigen.end(), p.eigen.begin(), p.eigen.end());
    rep.norms.insert(rep.norms.end(), p.norms.begin(), p.norms.end());
    rep.nodal.insert(rep.nodal.end(), p.nodal.begin(), p.nodal.end());
    rep.failures.insert(rep.failures.end(), p.failures.begin(), p.failures.end());
    for (auto& [n, set] : p.nodal_points) rep.nodal_points[{i, n}] = std::move(set);
    rep.log.push_back(fmt::format("eps = {}: {:.2f} s", rep.eps[i], std::chrono::duration<double>(clock() - t1).count()));
  }

  if (config.checks.richardson && (config.checks.eigenvalues || config.checks.norms || config.checks.potential)) {
    const auto t1 = clock();
    std::vector<int> cells2 = config.surface_cells;
    for (int& n : cells2) n *= 2;
    const double e = rep.eps.back();
    SweepConfig fine = config;
    fine.checks.nodal = false;
    fine.checks.resolvent = false;
    fine.checks.annulus = false;
    const GridContext ctx2 = make_context(fine, chart, cells2, 2 * config.transverse_cells);
    const PointResult p2 = run_point(fine, chart, ctx2, e, rep.k_shift, false);
    for (const auto& f : p2.failures) rep.failures.push_back({f.eps, "richardson " + f.stage, f.message});
    const double floor = exact_floor(config.solver_tol);
    auto compare = [&](const std::string& metric, int n, double a, double b) {
      if (!finite(a) || !finite(b)) return;
      RichardsonRow row{metric, n, a, b, 0.0, true};
      if (std::abs(a) > floor || std::abs(b) > floor) row.change = std::abs(b - a) / std::max(std::abs(b), floor);
      row.pass = row.change < kRichardsonTol;
      rep.richardson.push_back(row);
    };
    auto coarse_rows = [&](auto& rows) {
      std::vector<std::remove_cvref_t<decltype(rows[0])>> out;
      for (const auto& r : rows)
        if (r.eps == e) out.push_back(r);
      return out;
    };
    const auto ce = coarse_rows(rep.eigen);
    const auto cn = coarse_rows(rep.norms);
    if (config.checks.eigenvalues)
      for (std::size_t k = 0; k < std::min(ce.size(), p2.eigen.size()); ++k)
        compare("eigenvalue_difference", ce[k].n, ce[k].difference, p2.eigen[k].difference);
    if (config.checks.norms)
      for (std::size_t k = 0; k < std::min(cn.size(), p2.norms.size()); ++k) {
        compare("psi_l2", cn[k].n, cn[k].l2, p2.norms[k].l2);
        compare("psi_h1_surface", cn[k].n, cn[k].h1_surface, p2.norms[k].h1_surface);
        compare("psi_h1_transverse", cn[k].n, cn[k].h1_transverse, p2.norms[k].h1_transverse);
        compare("psi_sup", cn[k].n, cn[k].sup, p2.norms[k].sup);
        compare("transverse_ratio", cn[k].n, cn[k].transverse_ratio, p2.norms[k].transverse_ratio);
        compare("subspace_angle", cn[k].n, cn[k].subspace_angle, p2.norms[k].subspace_angle);
      }
    if (config.checks.potential && !cn.empty() && !p2.norms.empty())
      compare("potential_deviation", 0, cn.front().potential_dev, p2.norms.front().potential_dev);
    rep.log.push_back(fmt::format("richardson at eps = {} on {} cells: {:.2f} s", e,
                                  ctx2.layer_grid.unknown_count(), std::chrono::duration<double>(clock() - t1).count()));
  }

  rep.rates = compute_rates(rep.eigen, rep.norms, rep.nodal, config.checks, config.solver_tol);
  rep.checks = evaluate_checks(rep);
  return rep;
}

std::vector<RateRow> compute_rates(const std::vector<EigenRow>& eigen, const std::vector<NormRow>& norms,
                                   const std::vector<NodalRow>& nodal, const CheckSelection& checks,
                                   double solver_tol) {
  std::vector<RateRow> out;
  const double floor = exact_floor(solver_tol);
  auto fit = [&](const std::string& metric, int n, const auto& rows, auto value) {
    std::vector<double> x, y;
    for (const auto& r : rows) {
      if (r.n != (n == 0 ? 1 : n)) continue;
      const double v = value(r);
      if (!finite(v)) continue;
      x.push_back(r.eps);
      y.push_back(v);
    }
    if (x.empty()) return;
    out.push_back({metric, n, fit_rate(x, y, floor)});
  };
  std::set<int> ns;
  for (const auto& r : norms) ns.insert(r.n);
  for (const auto& r : eigen) ns.insert(r.n);
  if (checks.eigenvalues)
    for (int n : ns) fit("eigenvalue_difference", n, eigen, [](const EigenRow& r) { return r.difference; });
  if (checks.norms)
    for (int n : ns) {
      fit("psi_l2", n, norms, [](const NormRow& r) { return r.l2; });
      fit("psi_h1_surface", n, norms, [](const NormRow& r) { return r.h1_surface; });
      fit("psi_h1_transverse", n, norms, [](const NormRow& r) { return r.h1_transverse; });
      fit("psi_sup", n, norms, [](const NormRow& r) { return r.sup; });
      fit("transverse_ratio", n, norms, [](const NormRow& r) { return r.transverse_ratio; });
      fit("subspace_angle", n, norms, [](const NormRow& r) { return r.subspace_angle; });
    }
  if (checks.potential) {
    fit("potential_deviation", 0, norms, [](const NormRow& r) { return r.potential_dev; });
    fit("metric_deviation", 0, norms, [](const NormRow& r) { return r.metric_dev; });
  }
  if (checks.resolvent) fit("resolvent_difference", 0, norms, [](const NormRow& r) { return r.resolvent; });
  if (checks.nodal) {
    std::set<int> nn;
    for (const auto& r : nodal) nn.insert(r.n);
    for (int n : nn)
      if (n >= 2) fit("hausdorff", n, nodal, [](const NodalRow& r) { return r.hausdorff; });
  }
  return out;
}

std::vector<CheckLine> evaluate_checks(const SweepReport& rep) {
  std::vector<CheckLine> out;
  for (const auto& r : rep.rates) {
    const bool pass = r.fit.status == FitStatus::Exact || (r.fit.status == FitStatus::Ok && r.fit.slope >= kMinSlope);
    out.push_back({fmt::format("rate {} n={}", r.metric, r.n), pass,
                   fmt::format("status={} slope={:.4f} r2={:.4f} points={}", to_string(r.fit.status), r.fit.slope, r.fit.r2,
                               r.fit.points)});
  }
  if (rep.config.checks.potential) {
    double worst = std::numeric_limits<double>::infinity();
    for (const auto& r : rep.norms) worst = std::min({worst, r.sandwich_lower, r.sandwich_upper});
    if (!rep.norms.empty()) out.push_back({"metric sandwich", worst >= -kSandwichTol, fmt::format("worst margin {:.6g}", worst)});
  }
  if (rep.config.checks.annulus) {
    double worst = 0.0;
    bool any = false;
    for (const auto& r : rep.eigen)
      if (r.n <= 4 && finite(r.oracle_relative)) {
        worst = std::max(worst, r.oracle_relative);
        any = true;
      }
    if (any) out.push_back({"annulus oracle", worst <= kAnnulusTol, fmt::format("worst relative error {:.3e}", worst)});
  }
  if (rep.config.checks.nodal) {
    bool courant = true;
    bool touch = true;
    for (const auto& r : rep.nodal) {
      courant = courant && r.domains_psi <= r.n && r.domains_phi <= r.n;
      if (r.n >= 2) touch = touch && finite(r.boundary_cells) && r.boundary_cells <= 2.0;
    }
    if (!rep.nodal.empty()) {
      out.push_back({"courant bound", courant, "nodal-domain count <= n for psi_n and phi_n"});
      out.push_back({"boundary touch", touch, "nodal set of psi_n within 2 cells of the layer boundary, n >= 2"});
    }
  }
  if (!rep.richardson.empty()) {
    double worst = 0.0;
    bool pass = true;
    for (const auto& r : rep.richardson) {
      worst = std::max(worst, r.change);
      pass = pass && r.pass;
    }
    out.push_back({"richardson", pass, fmt::format("largest relative change {:.4f}", worst)});
  }
  std::string failed;
  for (const auto& f : rep.failures) failed += fmt::format("{}@{} ", f.stage, f.eps);
  out.push_back({"stages", rep.failures.empty(), rep.failures.empty() ? std::string("all stages completed") : failed});
  return out;
}

}  // namespace thinlayer
