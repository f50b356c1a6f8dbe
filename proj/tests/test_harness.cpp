#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <set>
#include <sstream>
#include <vector>

#include "thinlayer/config.hpp"
#include "thinlayer/errors.hpp"
#include "thinlayer/oracles.hpp"
#include "thinlayer/rates.hpp"
#include "thinlayer/report.hpp"
#include "thinlayer/sweep.hpp"

using namespace thinlayer;
using std::numbers::pi;
namespace fs = std::filesystem;

namespace {

// Dirichlet radial problem f'' + f'/r + (k^2 - m^2/r^2) f = 0 on [a, b],
// integrated by RK4 from f(a) = 0, f'(a) = 1; returns f(b).
double shoot_radial(int m, double k, double a, double b, int steps = 4000) {
  const double h = (b - a) / steps;
  auto rhs = [&](double r, double f, double g) { return -g / r - (k * k - m * m / (r * r)) * f; };
  double r = a, f = 0.0, g = 1.0;
  for (int i = 0; i < steps; ++i) {
    const double k1f = g, k1g = rhs(r, f, g);
    const double k2f = g + 0.5 * h * k1g, k2g = rhs(r + 0.5 * h, f + 0.5 * h * k1f, g + 0.5 * h * k1g);
    const double k3f = g + 0.5 * h * k2g, k3g = rhs(r + 0.5 * h, f + 0.5 * h * k2f, g + 0.5 * h * k2g);
    const double k4f = g + h * k3g, k4g = rhs(r + h, f + h * k3f, g + h * k3g);
    f += h / 6.0 * (k1f + 2 * k2f + 2 * k3f + k4f);
    g += h / 6.0 * (k1g + 2 * k2g + 2 * k3g + k4g);
    r += h;
  }
  return f;
}

double lowest_radial_k(int m, double a, double b) {
  double lo = 0.1, step = 0.05;
  double flo = shoot_radial(m, lo, a, b);
  double hi = lo + step;
  while (shoot_radial(m, hi, a, b) * flo > 0.0) {
    lo = hi;
    hi += step;
  }
  for (int i = 0; i < 80; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (shoot_radial(m, mid, a, b) * flo > 0.0) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path fresh_dir(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("thinlayer_" + name);
  fs::remove_all(dir);
  return dir;
}

SweepConfig small_circle() {
  SweepConfig c;
  c.preset = "circle";
  c.surface_cells = {64};
  c.transverse_cells = 16;
  c.n_eigen = 2;
  c.checks.richardson = false;
  return c;
}

}  // namespace

TEST_SUITE("harness") {

TEST_CASE("rectangle oracle") {
  CHECK(oracle_rectangle(1.0, 0.1, 1, 1) == doctest::Approx(26 * pi * pi).epsilon(1e-14));
  CHECK(oracle_rectangle(1.0, 0.1, 1, 1) == doctest::Approx(256.6096).epsilon(1e-6));
  CHECK(oracle_rectangle(1.0, 0.1, 1, 1, true) == doctest::Approx(pi * pi).epsilon(1e-14));
  CHECK(oracle_rectangle(1.0, 0.1, 2, 1, true) == doctest::Approx(4 * pi * pi).epsilon(1e-14));
}

TEST_CASE("circle effective oracle") {
  const auto v = oracle_circle_heff(1.0, 5);
  REQUIRE(v.size() == 5);
  const std::vector<double> expect{-0.25, 0.75, 0.75, 3.75, 3.75};
  for (int i = 0; i < 5; ++i) CHECK(v[i] == doctest::Approx(expect[i]).epsilon(1e-15));
  CHECK(oracle_circle_heff(2.0, 1)[0] == doctest::Approx(-0.0625));
}

TEST_CASE("Bessel functions vanish at published zeros") {
  CHECK(std::abs(std::cyl_bessel_j(0.0, 2.404825557695773)) < 1e-14);
  CHECK(std::abs(std::cyl_bessel_j(1.0, 3.831705970207512)) < 1e-14);
  CHECK(std::abs(std::cyl_neumann(0.0, 0.8935769662791675)) < 1e-14);
}

TEST_CASE("annulus oracle against radial shooting") {
  const double R = 1.0, eps = 0.1;
  const auto v = oracle_annulus(R, eps, 5);
  REQUIRE(v.size() == 5);
  const double k0 = lowest_radial_k(0, R - eps, R + eps);
  const double k1 = lowest_radial_k(1, R - eps, R + eps);
  CHECK(v[0] == doctest::Approx(k0 * k0).epsilon(1e-9));
  CHECK(v[1] == doctest::Approx(k1 * k1).epsilon(1e-9));
  CHECK(v[1] == v[2]);
  CHECK(v[3] == v[4]);
  for (std::size_t i = 1; i < v.size(); ++i) CHECK(v[i] >= v[i - 1]);
  CHECK(std::abs(annulus_cross_product(0, k0, R - eps, R + eps)) < 1e-10);
  // Thin-layer asymptotics: (pi / 2 eps)^2 + sigma_1 + O(eps).
  CHECK(std::abs(v[0] - (std::pow(pi / (2 * eps), 2) - 0.25)) < 0.5);
  CHECK_THROWS_AS(oracle_annulus(1.0, 1.0, 3), Error);
  try {
    oracle_annulus(1.0, 1.5, 3);
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::InvalidParams);
  }
}

TEST_CASE("rate fits") {
  const std::vector<double> eps{0.2, 0.1, 0.05, 0.025};
  std::vector<double> e1, e2, zero(4, 0.0);
  for (double x : eps) {
    e1.push_back(3.0 * x);
    e2.push_back(0.5 * x * x);
  }
  const RateFit f1 = fit_rate(eps, e1, 1e-12);
  CHECK(f1.status == FitStatus::Ok);
  CHECK(f1.slope == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(f1.intercept == doctest::Approx(std::log(3.0)).epsilon(1e-12));
  CHECK(f1.r2 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(fit_rate(eps, e2, 1e-12).slope == doctest::Approx(2.0).epsilon(1e-12));

  const RateFit fz = fit_rate(eps, zero, 1e-12);
  CHECK(fz.status == FitStatus::Exact);
  CHECK(std::isinf(fz.slope));

  const std::vector<double> two{0.2, 0.1};
  const RateFit ft = fit_rate(two, std::vector<double>{1.0, 0.5}, 1e-12);
  CHECK(ft.status == FitStatus::TooFewPoints);
  CHECK(std::isnan(ft.slope));

  const RateFit fn = fit_rate(eps, std::vector<double>{1.0, -1.0, 0.5, 0.2}, 1e-12);
  CHECK(fn.status == FitStatus::NonPositive);
}

TEST_CASE("config parsing") {
  const SweepConfig c = parse_config(
      "[chart]\npreset = torus\nR = 2\nr = 1\n"
      "[grid]\nsurface = 48x48\ntransverse = 12\n"
      "[sweep]\neps = 0.2, 0.1, 0.05\nn_eigen = 3\n"
      "[solver]\ntol = 1e-9\n"
      "[checks]\nnodal = true\nrichardson = false\n");
  CHECK(c.preset == "torus");
  CHECK(c.params.at("R") == std::vector<double>{2.0});
  CHECK(c.surface_cells == std::vector<int>{48, 48});
  CHECK(c.transverse_cells == 12);
  CHECK(c.eps == std::vector<double>{0.2, 0.1, 0.05});
  CHECK(c.n_eigen == 3);
  CHECK(c.solver_tol == 1e-9);
  CHECK(c.checks.nodal);
  CHECK_FALSE(c.checks.richardson);

  auto code_of = [](const std::string& text) {
    try {
      parse_config(text);
    } catch (const Error& e) {
      return e.code();
    }
    return ErrorCode::IoFailure;
  };
  CHECK(code_of("[chart]\npreset = circle\nbogus = 1\n") == ErrorCode::ConfigError);
  CHECK(code_of("[extra]\nx = 1\n") == ErrorCode::ConfigError);
  CHECK(code_of("[sweep]\neps = 0.1, 0.1, 0.05\n") == ErrorCode::ConfigError);
  CHECK(code_of("[sweep]\neps = 0.1, 0.05\n") == ErrorCode::ConfigError);
  CHECK(code_of("[chart]\npreset = nothing\n") == ErrorCode::UnknownPreset);

  const SweepConfig round = parse_config(config_echo(c));
  CHECK(round.eps == c.eps);
  CHECK(round.surface_cells == c.surface_cells);

  const CheckSelection all = parse_checks("all");
  CHECK((all.eigenvalues && all.norms && all.resolvent && all.nodal && all.potential && all.annulus));
  CHECK_FALSE(parse_checks("none").any());
  const CheckSelection some = parse_checks("eigenvalues,potential");
  CHECK(some.eigenvalues);
  CHECK_FALSE(some.nodal);
  CHECK_THROWS_AS(parse_checks("eigenvalues,sparkle"), Error);

  SweepConfig g;
  parse_grid("48x48x12", g);
  CHECK(g.surface_cells == std::vector<int>{48, 48});
  CHECK(g.transverse_cells == 12);
  CHECK_THROWS_AS(parse_grid("48xz", g), Error);
}

TEST_CASE("flat segment sweep: every difference column vanishes") {
  SweepConfig c;
  c.preset = "segment";
  c.surface_cells = {32};
  c.transverse_cells = 16;
  c.n_eigen = 3;
  c.eps = {0.1, 0.05, 0.025};
  c.checks.resolvent = true;
  c.checks.richardson = false;
  const SweepReport r = run_sweep(c);
  CHECK(r.failures.empty());
  const double bound = 10 * c.solver_tol;
  REQUIRE(r.eigen.size() == 9);
  for (const auto& e : r.eigen) CHECK(std::abs(e.difference) <= bound);
  REQUIRE_FALSE(r.norms.empty());
  for (const auto& n : r.norms) {
    CHECK(n.l2 <= bound);
    CHECK(n.h1_surface <= bound);
    CHECK(n.h1_transverse <= bound);
    CHECK(n.sup <= bound);
    CHECK(n.subspace_angle <= bound);
    CHECK(n.potential_dev <= bound);
    CHECK(n.metric_dev <= bound);
    CHECK(n.resolvent <= bound);
  }
}

TEST_CASE("regime and overlap violations are configuration errors") {
  SweepConfig c = small_circle();
  c.eps = {0.9, 0.5, 0.3};
  c.n_eigen = 20;
  try {
    run_sweep(c);
    FAIL("expected a configuration error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ConfigError);
  }
  c.eps = {1.2, 0.5, 0.3};
  c.n_eigen = 2;
  CHECK_THROWS_AS(run_sweep(c), Error);
}

TEST_CASE("report with no checks has a bare summary") {
  SweepConfig c = small_circle();
  c.checks = parse_checks("none");
  const SweepReport r = run_sweep(c);
  const fs::path dir = fresh_dir("none");
  emit_report(r, dir);
  const std::string summary = slurp(dir / "summary.csv");
  CHECK(summary == "metric,n,points,slope,intercept,r2,status,detail\n");
}

TEST_CASE("failed stage appears as a FAIL row") {
  SweepConfig c;
  c.preset = "generic_closed_curve";
  c.surface_cells = {128};
  c.transverse_cells = 8;
  c.n_eigen = 2;
  c.checks.richardson = false;
  const SweepReport r = run_sweep(c);
  REQUIRE_FALSE(r.failures.empty());
  const fs::path dir = fresh_dir("fail");
  emit_report(r, dir);
  const std::string summary = slurp(dir / "summary.csv");
  CHECK(summary.find(",FAIL,") != std::string::npos);
  CHECK(slurp(dir / "run.log").find("FAIL stages") != std::string::npos);
}

TEST_CASE("circle sweep: files, rates, determinism and reload") {
  SweepConfig c = small_circle();
  c.checks.nodal = true;
  const SweepReport a = run_sweep(c);
  const SweepReport b = run_sweep(c);
  CHECK(a.failures.empty());
  const fs::path da = fresh_dir("det_a"), db = fresh_dir("det_b");
  emit_report(a, da);
  emit_report(b, db);

  std::set<std::string> csv;
  for (const auto& entry : fs::directory_iterator(da))
    if (entry.path().extension() == ".csv") csv.insert(entry.path().filename().string());
  CHECK(csv.size() == 4 + a.eps.size() * static_cast<std::size_t>(c.n_eigen));
  CHECK(fs::exists(da / "run.log"));
  for (const auto& name : csv) {
    INFO(name);
    CHECK(slurp(da / name) == slurp(db / name));
  }

  bool found = false;
  for (const auto& rate : a.rates)
    if (rate.metric == "eigenvalue_difference" && rate.n == 1) {
      found = true;
      CHECK(rate.fit.status == FitStatus::Ok);
      CHECK(rate.fit.slope >= kMinSlope);
    }
  CHECK(found);

  const SweepReport loaded = load_rows(da);
  REQUIRE(loaded.eigen.size() == a.eigen.size());
  for (std::size_t i = 0; i < a.eigen.size(); ++i) {
    CHECK(loaded.eigen[i].eps == a.eigen[i].eps);
    CHECK(loaded.eigen[i].n == a.eigen[i].n);
    CHECK(loaded.eigen[i].lambda == a.eigen[i].lambda);
    CHECK(loaded.eigen[i].difference == a.eigen[i].difference);
  }
  REQUIRE(loaded.norms.size() == a.norms.size());
  for (std::size_t i = 0; i < a.norms.size(); ++i) CHECK(loaded.norms[i].l2 == a.norms[i].l2);
  REQUIRE(loaded.nodal.size() == a.nodal.size());

  SweepReport again = loaded;
  rerender(again, c);
  REQUIRE(again.rates.size() == a.rates.size());
  for (std::size_t i = 0; i < a.rates.size(); ++i) {
    CHECK(again.rates[i].metric == a.rates[i].metric);
    if (a.rates[i].fit.status == FitStatus::Ok) CHECK(again.rates[i].fit.slope == a.rates[i].fit.slope);
  }
}

}  // TEST_SUITE
