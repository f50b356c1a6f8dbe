#include "thinlayer/report.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include <fmt/format.h>

#include "thinlayer/errors.hpp"

namespace thinlayer {

namespace {

std::string num(double v) { return fmt::format("{:.17g}", v); }

std::string quoted(const std::string& s) {
  std::string q = "\"";
  for (char ch : s) {
    if (ch == '"') q += '"';
    q += ch == '\n' ? ' ' : ch;
  }
  return q + "\"";
}

template <class Writer>
void write_atomic(const std::filesystem::path& path, Writer&& writer) {
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::IoFailure, fmt::format("cannot open {}", tmp.string()));
    writer(out);
    out.flush();
    if (!out) throw Error(ErrorCode::IoFailure, fmt::format("write failed for {}", tmp.string()));
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) throw Error(ErrorCode::IoFailure, fmt::format("cannot rename {} to {}: {}", tmp.string(), path.string(), ec.message()));
}

constexpr const char* kEigenHeader =
    "eps,n,lambda,lambda0,difference,residual,residual0,cluster,cluster_size,sigma,shift,oracle,oracle_relative";
constexpr const char* kNormHeader =
    "eps,n,l2,h1_surface,h1_transverse,sup,transverse_ratio,subspace_angle,potential_dev,metric_dev,sandwich_lower,"
    "sandwich_upper,resolvent,v_fd_noise";
constexpr const char* kNodalHeader =
    "eps,n,zeros_phi,domains_psi,domains_phi,boundary_distance,boundary_cells,hausdorff,tube_delta,agreement_fraction,"
    "tube_all_slices,fitted_A,symmetric_difference";
constexpr const char* kSummaryHeader = "metric,n,points,slope,intercept,r2,status,detail";

void write_eigen(std::ostream& out, const std::vector<EigenRow>& rows) {
  out << kEigenHeader << '\n';
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", num(r.eps), r.n, num(r.lambda), num(r.lambda0),
                       num(r.difference), num(r.residual), num(r.residual0), r.cluster, r.cluster_size, num(r.sigma),
                       num(r.shift), num(r.oracle), num(r.oracle_relative));
}

void write_norms(std::ostream& out, const std::vector<NormRow>& rows) {
  out << kNormHeader << '\n';
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{},{}\n", num(r.eps), r.n, num(r.l2), num(r.h1_surface),
                       num(r.h1_transverse), num(r.sup), num(r.transverse_ratio), num(r.subspace_angle),
                       num(r.potential_dev), num(r.metric_dev), num(r.sandwich_lower), num(r.sandwich_upper),
                       num(r.resolvent), num(r.v_fd_noise));
}

void write_nodal(std::ostream& out, const std::vector<NodalRow>& rows) {
  out << kNodalHeader << '\n';
  for (const auto& r : rows)
    out << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{},{}\n", num(r.eps), r.n, r.zeros_phi, r.domains_psi,
                       r.domains_phi, num(r.boundary_distance), num(r.boundary_cells), num(r.hausdorff),
                       num(r.tube_delta), num(r.agreement_fraction), r.tube_all_slices, num(r.fitted_A),
                       num(r.symmetric_difference));
}

void write_summary(std::ostream& out, const SweepReport& rep) {
  out << kSummaryHeader << '\n';
  for (const auto& r : rep.rates)
    out << fmt::format("{},{},{},{},{},{},{},\n", r.metric, r.n, r.fit.points, num(r.fit.slope), num(r.fit.intercept),
                       num(r.fit.r2), to_string(r.fit.status));
  for (const auto& f : rep.failures)
    out << fmt::format("{},0,0,nan,nan,nan,FAIL,{}\n", f.stage, quoted(fmt::format("eps={}: {}", num(f.eps), f.message)));
}

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      cells.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  cells.push_back(cur);
  return cells;
}

template <class Row, class Fill>
std::vector<Row> read_table(const std::filesystem::path& path, const char* header, Fill fill) {
  std::vector<Row> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  if (!std::getline(in, line) || line != header)
    throw Error(ErrorCode::IoFailure, fmt::format("{}: unexpected header", path.string()));
  const std::size_t width = split(header).size();
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto c = split(line);
    if (c.size() != width) throw Error(ErrorCode::IoFailure, fmt::format("{}:{}: expected {} fields", path.string(), lineno, width));
    try {
      Row r;
      fill(r, c);
      rows.push_back(r);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::IoFailure, fmt::format("{}:{}: {}", path.string(), lineno, e.what()));
    }
  }
  return rows;
}

double d(const std::string& s) { return std::stod(s); }
int i(const std::string& s) { return std::stoi(s); }

}  // namespace

std::string run_log_text(const SweepReport& rep) {
  std::string s = "# configuration\n" + config_echo(rep.config) + "\n";
  s += "# geometry\n";
  s += fmt::format("rho_m = {}\n", num(rep.bounds.rho_m));
  s += fmt::format("max |kappa| = {}\nmax |grad kappa| = {}\nmax |laplace kappa| = {}\n", num(rep.bounds.max_abs_curvature),
                   num(rep.bounds.max_grad_curvature), num(rep.bounds.max_laplace_curvature));
  if (!rep.eps.empty()) s += fmt::format("eps = {}\n", fmt::join(rep.eps, ", "));
  if (!rep.sigma.empty()) s += fmt::format("sigma = {}\n", fmt::join(rep.sigma, ", "));
  s += fmt::format("k_shift = {}\n\n", num(rep.k_shift));
  if (!rep.richardson.empty()) {
    s += "# richardson (smallest eps, doubled grid)\n";
    for (const auto& r : rep.richardson)
      s += fmt::format("{} n={}: base {:.6e} refined {:.6e} change {:.4f} {}\n", r.metric, r.n, r.base, r.refined, r.change,
                       r.pass ? "ok" : "too large");
    s += "\n";
  }
  if (!rep.failures.empty()) {
    s += "# failures\n";
    for (const auto& f : rep.failures) s += fmt::format("eps={} stage={}: {}\n", f.eps, f.stage, f.message);
    s += "\n";
  }
  if (!rep.log.empty()) {
    s += "# timing\n";
    for (const auto& l : rep.log) s += l + "\n";
    s += "\n";
  }
  s += "# checks\n";
  for (const auto& c : rep.checks) s += fmt::format("{} {}: {}\n", c.pass ? "PASS" : "FAIL", c.name, c.detail);
  return s;
}

void emit_report(const SweepReport& rep, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, fmt::format("cannot create {}: {}", dir.string(), ec.message()));
  write_atomic(dir / "summary.csv", [&](std::ostream& o) { write_summary(o, rep); });
  write_atomic(dir / "eigenvalues.csv", [&](std::ostream& o) { write_eigen(o, rep.eigen); });
  write_atomic(dir / "norms.csv", [&](std::ostream& o) { write_norms(o, rep.norms); });
  write_atomic(dir / "nodal.csv", [&](std::ostream& o) { write_nodal(o, rep.nodal); });
  for (const auto& [key, set] : rep.nodal_points) {
    const double eps = key.first < rep.eps.size() ? rep.eps[key.first] : 0.0;
    write_atomic(dir / fmt::format("nodal_points_{:g}_{}.csv", eps, key.second),
                 [&](std::ostream& o) { write_nodal_points_csv(set, key.second, o); });
  }
  write_atomic(dir / "run.log", [&](std::ostream& o) { o << run_log_text(rep); });
}

SweepReport load_rows(const std::filesystem::path& dir) {
  SweepReport rep;
  rep.eigen = read_table<EigenRow>(dir / "eigenvalues.csv", kEigenHeader, [](EigenRow& r, const auto& c) {
    r = {d(c[0]), i(c[1]), d(c[2]), d(c[3]), d(c[4]), d(c[5]), d(c[6]), i(c[7]), i(c[8]), d(c[9]), d(c[10]), d(c[11]), d(c[12])};
  });
  rep.norms = read_table<NormRow>(dir / "norms.csv", kNormHeader, [](NormRow& r, const auto& c) {
    r = {d(c[0]), i(c[1]), d(c[2]), d(c[3]), d(c[4]), d(c[5]), d(c[6]), d(c[7]), d(c[8]), d(c[9]), d(c[10]), d(c[11]), d(c[12]), d(c[13])};
  });
  rep.nodal = read_table<NodalRow>(dir / "nodal.csv", kNodalHeader, [](NodalRow& r, const auto& c) {
    r = {d(c[0]), i(c[1]), i(c[2]), i(c[3]), i(c[4]), d(c[5]), d(c[6]), d(c[7]), d(c[8]), d(c[9]), i(c[10]), d(c[11]), d(c[12])};
  });
  std::set<double, std::greater<>> eps;
  for (const auto& r : rep.eigen) eps.insert(r.eps);
  for (const auto& r : rep.norms) eps.insert(r.eps);
  rep.eps.assign(eps.begin(), eps.end());
  return rep;
}

void rerender(SweepReport& rep, const SweepConfig& config) {
  rep.config = config;
  rep.rates = compute_rates(rep.eigen, rep.norms, rep.nodal, config.checks, config.solver_tol);
  rep.checks = evaluate_checks(rep);
}

}  // namespace thinlayer
