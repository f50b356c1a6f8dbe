#include "thinlayer/config.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include <boost/algorithm/string.hpp>
#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <fmt/format.h>
#include <fmt/ranges.h>

#include "thinlayer/errors.hpp"

namespace thinlayer {

namespace {

namespace pt = boost::property_tree;

std::vector<std::string> split_list(const std::string& text, const char* separators = ",") {
  std::vector<std::string> parts;
  boost::split(parts, text, boost::is_any_of(separators));
  for (auto& p : parts) boost::trim(p);
  std::erase_if(parts, [](const std::string& s) { return s.empty(); });
  return parts;
}

double to_double(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: '{}' is not a number", key, v));
  }
}

long to_long(const std::string& key, const std::string& v) {
  try {
    std::size_t used = 0;
    const long d = std::stol(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw Error(ErrorCode::ConfigError, fmt::format("{}: '{}' is not an integer", key, v));
  }
}

bool to_bool(const std::string& key, const std::string& v) {
  const std::string s = boost::to_lower_copy(v);
  if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
  if (s == "false" || s == "no" || s == "off" || s == "0") return false;
  throw Error(ErrorCode::ConfigError, fmt::format("{}: '{}' is not a boolean", key, v));
}

std::vector<double> to_doubles(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const auto& p : split_list(v)) out.push_back(to_double(key, p));
  return out;
}

void check_keys(const pt::ptree& section, const std::string& name, const std::set<std::string>& allowed) {
  for (const auto& [key, value] : section) {
    if (!value.empty()) throw Error(ErrorCode::ConfigError, fmt::format("[{}] {}: nested keys are not allowed", name, key));
    if (!allowed.contains(key)) throw Error(ErrorCode::ConfigError, fmt::format("[{}] unknown key '{}'", name, key));
  }
}

}  // namespace

CheckSelection parse_checks(const std::string& list) {
  CheckSelection c{false, false, false, false, false, false, false};
  for (const auto& name : split_list(list)) {
    if (name == "all") {
      c = CheckSelection{true, true, true, true, true, true, true};
    } else if (name == "none") {
      c = CheckSelection{false, false, false, false, false, false, false};
    } else if (name == "eigenvalues") {
      c.eigenvalues = true;
    } else if (name == "norms") {
      c.norms = true;
    } else if (name == "resolvent") {
      c.resolvent = true;
    } else if (name == "nodal") {
      c.nodal = true;
    } else if (name == "potential") {
      c.potential = true;
    } else if (name == "annulus") {
      c.annulus = true;
    } else if (name == "richardson") {
      c.richardson = true;
    } else {
      throw Error(ErrorCode::ConfigError, fmt::format("unknown check '{}'", name));
    }
  }
  return c;
}

void parse_grid(const std::string& text, SweepConfig& config) {
  const auto parts = split_list(text, "x,");
  if (parts.size() < 2) throw Error(ErrorCode::ConfigError, fmt::format("grid '{}' needs surface and transverse counts", text));
  config.surface_cells.clear();
  for (std::size_t i = 0; i + 1 < parts.size(); ++i)
    config.surface_cells.push_back(static_cast<int>(to_long("grid", parts[i])));
  config.transverse_cells = static_cast<int>(to_long("grid", parts.back()));
}

SweepConfig parse_config(const std::string& text) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw Error(ErrorCode::ConfigError, e.what());
  }
  SweepConfig c;
  const std::set<std::string> sections{"chart", "grid", "sweep", "solver", "checks"};
  for (const auto& [name, section] : tree)
    if (!sections.contains(name)) throw Error(ErrorCode::ConfigError, fmt::format("unknown section [{}]", name));

  if (auto chart = tree.get_child_optional("chart")) {
    c.preset = chart->get<std::string>("preset", c.preset);
    std::set<std::string> allowed{"preset"};
    for (const auto& k : preset_parameter_keys(c.preset)) allowed.insert(k);
    check_keys(*chart, "chart", allowed);
    for (const auto& [key, value] : *chart)
      if (key != "preset") c.params[key] = to_doubles(key, value.data());
  }
  if (auto grid = tree.get_child_optional("grid")) {
    check_keys(*grid, "grid", {"surface", "transverse"});
    if (auto s = grid->get_optional<std::string>("surface")) {
      c.surface_cells.clear();
      for (const auto& p : split_list(*s, "x,")) c.surface_cells.push_back(static_cast<int>(to_long("surface", p)));
    }
    if (auto t = grid->get_optional<std::string>("transverse")) c.transverse_cells = static_cast<int>(to_long("transverse", *t));
  }
  if (auto sweep = tree.get_child_optional("sweep")) {
    check_keys(*sweep, "sweep", {"eps", "n_eigen", "out"});
    if (auto e = sweep->get_optional<std::string>("eps")) c.eps = to_doubles("eps", *e);
    if (auto n = sweep->get_optional<std::string>("n_eigen")) c.n_eigen = static_cast<int>(to_long("n_eigen", *n));
    if (auto o = sweep->get_optional<std::string>("out")) c.out_dir = *o;
  }
  if (auto solver = tree.get_child_optional("solver")) {
    check_keys(*solver, "solver", {"tol", "max_iterations", "dense_cap", "k_shift"});
    if (auto v = solver->get_optional<std::string>("tol")) c.solver_tol = to_double("tol", *v);
    if (auto v = solver->get_optional<std::string>("max_iterations")) c.max_iterations = static_cast<int>(to_long("max_iterations", *v));
    if (auto v = solver->get_optional<std::string>("dense_cap")) c.dense_cap = to_long("dense_cap", *v);
    if (auto v = solver->get_optional<std::string>("k_shift")) c.k_shift = to_double("k_shift", *v);
  }
  if (auto checks = tree.get_child_optional("checks")) {
    check_keys(*checks, "checks",
               {"eigenvalues", "norms", "resolvent", "nodal", "potential", "annulus", "richardson", "tube_radius"});
    auto flag = [&](const char* key, bool& target) {
      if (auto v = checks->get_optional<std::string>(key)) target = to_bool(key, *v);
    };
    flag("eigenvalues", c.checks.eigenvalues);
    flag("norms", c.checks.norms);
    flag("resolvent", c.checks.resolvent);
    flag("nodal", c.checks.nodal);
    flag("potential", c.checks.potential);
    flag("annulus", c.checks.annulus);
    flag("richardson", c.checks.richardson);
    if (auto v = checks->get_optional<std::string>("tube_radius")) c.tube_radius = to_double("tube_radius", *v);
  }
  validate_config(c);
  return c;
}

SweepConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, fmt::format("cannot read config '{}'", path.string()));
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

void validate_config(const SweepConfig& c) {
  const auto names = preset_names();
  if (std::find(names.begin(), names.end(), c.preset) == names.end())
    throw Error(ErrorCode::UnknownPreset, fmt::format("unknown preset '{}'", c.preset));
  const auto keys = preset_parameter_keys(c.preset);
  for (const auto& [k, v] : c.params)
    if (std::find(keys.begin(), keys.end(), k) == keys.end())
      throw Error(ErrorCode::ConfigError, fmt::format("preset '{}' has no parameter '{}'", c.preset, k));
  for (int n : c.surface_cells)
    if (n < 1) throw Error(ErrorCode::ConfigError, "surface cell counts must be positive");
  if (c.transverse_cells < 1) throw Error(ErrorCode::ConfigError, "transverse cell count must be positive");
  if (c.n_eigen < 1) throw Error(ErrorCode::ConfigError, "n_eigen must be at least 1");
  if (!(c.solver_tol > 0.0)) throw Error(ErrorCode::ConfigError, "solver tol must be positive");
  if (!c.eps.empty()) {
    if (c.eps.size() < 3) throw Error(ErrorCode::ConfigError, "the eps list needs at least 3 entries");
    for (std::size_t i = 0; i < c.eps.size(); ++i) {
      if (!(c.eps[i] > 0.0)) throw Error(ErrorCode::ConfigError, "eps values must be positive");
      if (i > 0 && !(c.eps[i] < c.eps[i - 1])) throw Error(ErrorCode::ConfigError, "eps list must be strictly decreasing");
    }
  }
  if (c.tube_radius && !(*c.tube_radius > 0.0)) throw Error(ErrorCode::ConfigError, "tube_radius must be positive");
}

std::string config_echo(const SweepConfig& c) {
  std::string s = fmt::format("[chart]\npreset = {}\n", c.preset);
  for (const auto& [k, v] : c.params) s += fmt::format("{} = {}\n", k, fmt::join(v, ", "));
  s += fmt::format("\n[grid]\nsurface = {}\ntransverse = {}\n", fmt::join(c.surface_cells, "x"), c.transverse_cells);
  s += fmt::format("\n[sweep]\neps = {}\nn_eigen = {}\nout = {}\n", c.eps.empty() ? std::string("default") : fmt::format("{}", fmt::join(c.eps, ", ")),
                   c.n_eigen, c.out_dir.string());
  s += fmt::format("\n[solver]\ntol = {}\nmax_iterations = {}\ndense_cap = {}\n", c.solver_tol, c.max_iterations, c.dense_cap);
  if (c.k_shift) s += fmt::format("k_shift = {}\n", *c.k_shift);
  const auto& k = c.checks;
  s += fmt::format(
      "\n[checks]\neigenvalues = {}\nnorms = {}\nresolvent = {}\nnodal = {}\npotential = {}\nannulus = {}\nrichardson = {}\n",
      k.eigenvalues, k.norms, k.resolvent, k.nodal, k.potential, k.annulus, k.richardson);
  if (c.tube_radius) s += fmt::format("tube_radius = {}\n", *c.tube_radius);
  return s;
}

}  // namespace thinlayer
