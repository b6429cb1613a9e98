#pragma once

#include <algorithm>
#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <functional>
#include <future>
#include <iostream>
#include <map>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <yaml-cpp/yaml.h>

#include "orlicz/orlicz.hpp"

namespace orlicz::cli {

inline constexpr const char* kVersion = "0.1.0";

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// ---------------------------------------------------------------------------
// YAML helpers with line-anchored diagnostics

inline std::string at(const YAML::Node& n) {
  const auto m = n.Mark();
  return m.line >= 0 ? "line " + std::to_string(m.line + 1) : "top level";
}

inline YAML::Node require(const YAML::Node& parent, const std::string& key, const std::string& ctx) {
  if (!parent.IsMap() || !parent[key]) throw ConfigError(at(parent) + ": " + ctx + " is missing field '" + key + "'");
  return parent[key];
}

template <class T>
T as(const YAML::Node& n, const std::string& what) {
  try {
    return n.as<T>();
  } catch (const YAML::Exception&) {
    throw ConfigError(at(n) + ": field '" + what + "' has the wrong type");
  }
}

template <class T>
T get(const YAML::Node& parent, const std::string& key, const std::string& ctx) {
  return as<T>(require(parent, key, ctx), key);
}

template <class T>
T get_or(const YAML::Node& parent, const std::string& key, T fallback) {
  if (!parent.IsMap() || !parent[key]) return fallback;
  return as<T>(parent[key], key);
}

inline std::vector<double> list_or(const YAML::Node& parent, const std::string& key, std::vector<double> fallback) {
  if (!parent.IsMap() || !parent[key]) return fallback;
  const auto n = parent[key];
  if (!n.IsSequence()) throw ConfigError(at(n) + ": field '" + key + "' must be a list");
  std::vector<double> out;
  for (const auto& v : n) out.push_back(as<double>(v, key));
  return out;
}

inline Vec vec_or(const YAML::Node& parent, const std::string& key, Vec fallback) {
  if (!parent.IsMap() || !parent[key]) return fallback;
  const auto v = list_or(parent, key, {});
  if (v.empty() || v.size() > 2) throw ConfigError(at(parent[key]) + ": field '" + key + "' needs 1 or 2 entries");
  return {v[0], v.size() > 1 ? v[1] : 0.0};
}

inline Box parse_box(const YAML::Node& parent, int dim) {
  if (!parent.IsMap() || !parent["domain"]) return Box::unit(dim);
  const auto d = parent["domain"];
  Box b = Box::unit(dim);
  b.lo = vec_or(d, "lo", b.lo);
  b.hi = vec_or(d, "hi", b.hi);
  for (int a = 0; a < dim; ++a)
    if (!(b.hi[a] > b.lo[a])) throw ConfigError(at(d) + ": domain needs hi > lo on every axis");
  return b;
}

inline SpatialFunction parse_spatial(const YAML::Node& n, const std::string& what) {
  if (n.IsScalar()) return SpatialFunction(as<double>(n, what));
  if (!n.IsMap()) throw ConfigError(at(n) + ": field '" + what + "' must be a number or a map");
  const auto kind = get<std::string>(n, "kind", what);
  if (kind == "constant") return SpatialFunction(get<double>(n, "value", what));
  if (kind == "bump")
    return SpatialFunction::bump(get<double>(n, "base", what), get<double>(n, "amp", what),
                                 vec_or(n, "center", {0.5, 0.5}), get<double>(n, "width", what));
  if (kind == "jump")
    return SpatialFunction::jump(get<double>(n, "left", what), get<double>(n, "right", what),
                                 get<double>(n, "position", what), get_or<int>(n, "axis", 0));
  if (kind == "log_holder")
    return SpatialFunction::log_holder(get<double>(n, "base", what), get<double>(n, "amp", what),
                                       get<double>(n, "freq", what), vec_or(n, "center", {0.5, 0.5}));
  if (kind == "linear")
    return SpatialFunction::linear(get<double>(n, "base", what), get<double>(n, "slope", what),
                                   vec_or(n, "center", {0.0, 0.0}), get_or<int>(n, "axis", 0));
  throw ConfigError(at(n) + ": unknown spatial function kind '" + kind + "' in '" + what + "'");
}

inline int parse_dim(const YAML::Node& n, const std::string& ctx) {
  const int d = get_or<int>(n, "dim", 1);
  if (d != 1 && d != 2) throw ConfigError(at(n) + ": " + ctx + " needs dim 1 or 2");
  return d;
}

inline SampleSpec parse_sample(const YAML::Node& n, int dim) {
  SampleSpec s;
  s.domain = parse_box(n, dim);
  if (n["sample"]) {
    const auto m = n["sample"];
    s.x_per_edge = get_or<int>(m, "x_per_edge", s.x_per_edge);
    s.xi_min = get_or<double>(m, "xi_min", s.xi_min);
    s.xi_max = get_or<double>(m, "xi_max", s.xi_max);
    s.per_decade = get_or<int>(m, "per_decade", s.per_decade);
    s.directions = get_or<int>(m, "directions", s.directions);
  }
  return s;
}

struct NamedNFunction {
  std::string name;
  NFunction M;
};

inline NamedNFunction parse_nfunction(const YAML::Node& n, const std::filesystem::path& base) {
  const auto name = get<std::string>(n, "name", "nfunction entry");
  const auto ctx = "nfunction '" + name + "'";
  const auto kind = get<std::string>(n, "kind", ctx);
  const int dim = parse_dim(n, ctx);
  const auto sample = parse_sample(n, dim);
  try {
    if (kind == "power") {
      const double p = get<double>(n, "p", ctx);
      return {name, NFunction::power(dim, p, get_or<double>(n, "coef", 1.0 / p), sample)};
    }
    if (kind == "variable_power")
      return {name, NFunction::variable_power(dim, parse_spatial(require(n, "p", ctx), "p"),
                                              n["weight"] ? parse_spatial(n["weight"], "weight") : SpatialFunction(1.0),
                                              get_or<bool>(n, "divide_by_p", true), sample)};
    if (kind == "anisotropic") {
      const auto p = require(n, "p", ctx);
      if (!p.IsSequence() || p.size() != 2) throw ConfigError(at(p) + ": " + ctx + " needs p as a list of two");
      std::array<SpatialFunction, 2> ps{parse_spatial(p[0], "p"), parse_spatial(p[1], "p")};
      std::array<SpatialFunction, 2> ws{SpatialFunction(1.0), SpatialFunction(1.0)};
      if (n["w"]) ws = {parse_spatial(n["w"][0], "w"), parse_spatial(n["w"][1], "w")};
      return {name, NFunction::anisotropic(dim, ps, ws, get_or<bool>(n, "divide_by_p", true), sample)};
    }
    if (kind == "double_phase")
      return {name, NFunction::double_phase(dim, get<double>(n, "p", ctx), get<double>(n, "q", ctx),
                                            parse_spatial(require(n, "a", ctx), "a"),
                                            get_or<bool>(n, "divide_by_p", true), sample)};
    if (kind == "exponential") return {name, NFunction::exponential(dim, sample)};
    if (kind == "tabulated_radial")
      return {name, load_tabulated_radial((base / get<std::string>(n, "file", ctx)).string(), dim, sample)};
    if (kind == "tabulated_planar")
      return {name, load_tabulated_planar((base / get<std::string>(n, "file", ctx)).string(), sample)};
  } catch (const BadParameters& e) {
    throw ConfigError(at(n) + ": " + ctx + ": " + e.what());
  }
  throw ConfigError(at(n) + ": " + ctx + " has unknown kind '" + kind + "'");
}

struct NamedOperator {
  std::string name;
  VectorField A;
};

inline NamedOperator parse_operator(const YAML::Node& n) {
  const auto name = get<std::string>(n, "name", "operator entry");
  const auto ctx = "operator '" + name + "'";
  const auto kind = get<std::string>(n, "kind", ctx);
  OperatorSpec s;
  s.dim = parse_dim(n, ctx);
  s.sample = parse_sample(n, s.dim);
  using K = OperatorSpec::Kind;
  if (kind == "p_laplacian") {
    s.kind = K::p_laplacian;
    s.p = get<double>(n, "p", ctx);
  } else if (kind == "variable_p") {
    s.kind = K::variable_p;
    s.p_field = parse_spatial(require(n, "p", ctx), "p");
    if (n["weight"]) s.weight = parse_spatial(n["weight"], "weight");
  } else if (kind == "anisotropic") {
    s.kind = K::anisotropic;
    const auto p = require(n, "p", ctx);
    if (!p.IsSequence() || p.size() != 2) throw ConfigError(at(p) + ": " + ctx + " needs p as a list of two");
    s.p_axes = {parse_spatial(p[0], "p"), parse_spatial(p[1], "p")};
    if (n["w"]) s.w_axes = {parse_spatial(n["w"][0], "w"), parse_spatial(n["w"][1], "w")};
  } else if (kind == "double_phase") {
    s.kind = K::double_phase;
    s.p = get<double>(n, "p", ctx);
    s.q = get<double>(n, "q", ctx);
    s.a = parse_spatial(require(n, "a", ctx), "a");
  } else if (kind == "exponential") {
    s.kind = K::exponential;
  } else {
    throw ConfigError(at(n) + ": " + ctx + " has unknown kind '" + kind + "'");
  }
  try {
    return {name, make_model_operator(s)};
  } catch (const BadParameters& e) {
    throw ConfigError(at(n) + ": " + ctx + ": " + e.what());
  }
}

inline DataField parse_data(const YAML::Node& parent, const std::string& key, const Box& box) {
  if (!parent[key]) return DataField::zero();
  const auto n = parent[key];
  if (n.IsScalar()) return DataField::constant(as<double>(n, key));
  const auto kind = get<std::string>(n, "kind", "data '" + key + "'");
  if (kind == "zero") return DataField::zero();
  if (kind == "constant") return DataField::constant(get<double>(n, "value", key));
  if (kind == "sine") return DataField::sine(box, get_or<double>(n, "amp", 1.0));
  if (kind == "spike")
    return DataField::spike(get<double>(n, "height", key), vec_or(n, "center", box.center()),
                            get_or<double>(n, "halfwidth", 1e-9));
  if (kind == "bump")
    return DataField::bump(get<double>(n, "amp", key), vec_or(n, "center", box.center()), get<double>(n, "width", key));
  if (kind == "singular")
    return DataField::singular(get<double>(n, "amp", key), vec_or(n, "center", box.center()),
                               get<double>(n, "beta", key));
  throw ConfigError(at(n) + ": unknown data kind '" + kind + "' in '" + key + "'");
}

struct SolverParams {
  double theta = 0.0;
  double n = 1e6;
  double tol = 1e-10;
  std::vector<double> theta_list{1.0, 0.5, 0.25};
  std::vector<double> n_list{1.0, 10.0};
  std::vector<double> k_list{1.0};
};

struct Experiment {
  YAML::Node root;
  std::filesystem::path base;
  std::uint64_t seed = 0;
  std::string output = "orlicz_out";
  std::vector<NamedNFunction> nfunctions;
  std::vector<NamedOperator> operators;
  std::optional<ProblemSpec> problem;
  SolverParams solver;
  YAML::Node diagnostics;
  YAML::Node checks;
};

inline const VectorField& find_operator(const Experiment& e, const std::string& name, const YAML::Node& where) {
  for (const auto& o : e.operators)
    if (o.name == name) return o.A;
  throw ConfigError(at(where) + ": operator '" + name + "' is not defined");
}

inline Experiment parse_experiment(const std::string& text, const std::filesystem::path& base) {
  Experiment e;
  e.base = base;
  try {
    e.root = YAML::Load(text);
  } catch (const YAML::ParserException& ex) {
    throw ConfigError("line " + std::to_string(ex.mark.line + 1) + ": " + ex.msg);
  }
  const auto& r = e.root;
  if (!r.IsMap()) throw ConfigError("top level: config must be a map");
  e.seed = get_or<std::uint64_t>(r, "seed", 0);
  e.output = get_or<std::string>(r, "output", e.output);
  if (r["nfunctions"]) {
    if (!r["nfunctions"].IsSequence()) throw ConfigError(at(r["nfunctions"]) + ": 'nfunctions' must be a list");
    for (const auto& n : r["nfunctions"]) e.nfunctions.push_back(parse_nfunction(n, base));
  }
  if (r["operators"]) {
    if (!r["operators"].IsSequence()) throw ConfigError(at(r["operators"]) + ": 'operators' must be a list");
    for (const auto& n : r["operators"]) e.operators.push_back(parse_operator(n));
  }
  if (r["problem"]) {
    const auto p = r["problem"];
    const auto opname = get<std::string>(p, "operator", "problem");
    const auto& A = find_operator(e, opname, p["operator"]);
    ProblemSpec s{A};
    s.omega = parse_box(p, A.dim());
    const auto cells = list_or(p, "cells", {64, 64});
    s.cells = {static_cast<int>(cells.at(0)), static_cast<int>(cells.size() > 1 ? cells[1] : cells[0])};
    s.steps = get_or<int>(p, "steps", 64);
    s.T = get_or<double>(p, "T", 1.0);
    if (s.steps < 1 || !(s.T > 0.0)) throw ConfigError(at(p) + ": problem needs steps >= 1 and T > 0");
    if (s.cells[0] < 2 || s.cells[1] < 2) throw ConfigError(at(p) + ": problem needs at least 2 cells per axis");
    s.f = parse_data(p, "f", s.omega);
    s.u0 = parse_data(p, "u0", s.omega);
    e.problem = s;
  }
  if (r["solver"]) {
    const auto s = r["solver"];
    e.solver.theta = get_or<double>(s, "theta", e.solver.theta);
    e.solver.n = get_or<double>(s, "n", e.solver.n);
    e.solver.tol = get_or<double>(s, "tol", e.solver.tol);
    e.solver.theta_list = list_or(s, "theta_list", e.solver.theta_list);
    e.solver.n_list = list_or(s, "n_list", e.solver.n_list);
    e.solver.k_list = list_or(s, "k_list", e.solver.k_list);
    if (!(e.solver.theta >= 0.0 && e.solver.theta <= 1.0)) throw ConfigError(at(s) + ": solver theta must lie in [0, 1]");
    if (!(e.solver.tol > 0.0)) throw ConfigError(at(s) + ": solver tol must be positive");
    if (!(e.solver.n > 0.0)) throw ConfigError(at(s) + ": solver n must be positive");
  }
  e.diagnostics = r["diagnostics"] ? r["diagnostics"] : YAML::Node(YAML::NodeType::Map);
  e.checks = r["checks"] ? r["checks"] : YAML::Node(YAML::NodeType::Map);
  return e;
}

// ---------------------------------------------------------------------------
// Running

struct Flags {
  std::string config;
  std::optional<std::string> out;
  std::optional<std::uint64_t> seed;
  int jobs = 1;
};

struct Output {
  std::string file;
  std::string body;
  std::optional<Verdict> verdict;  // empty for non-report files
};

inline std::string report_csv(const DiagnosticsReport& r) {
  std::ostringstream os;
  write_csv(os, r);
  return os.str();
}

inline Output as_output(const std::string& file, const DiagnosticsReport& r) { return {file, report_csv(r), r.verdict}; }

// Runs tasks with at most `jobs` in flight; results keep task order.
template <class R>
std::vector<R> run_tasks(std::vector<std::function<R()>> tasks, int jobs) {
  std::vector<R> out;
  out.reserve(tasks.size());
  if (jobs <= 1) {
    for (auto& t : tasks) out.push_back(t());
    return out;
  }
  for (std::size_t i = 0; i < tasks.size(); i += static_cast<std::size_t>(jobs)) {
    std::vector<std::future<R>> batch;
    for (std::size_t j = i; j < std::min(tasks.size(), i + static_cast<std::size_t>(jobs)); ++j)
      batch.push_back(std::async(std::launch::async, tasks[j]));
    for (auto& f : batch) out.push_back(f.get());
  }
  return out;
}

inline std::vector<Output> cmd_check_nfunction(const Experiment& e, int jobs) {
  if (e.nfunctions.empty()) throw ConfigError("top level: check-nfunction needs a non-empty 'nfunctions' list");
  const bool delta2 = get_or<bool>(e.checks, "delta2", false);
  const bool log_holder = get_or<bool>(e.checks, "log_holder", false);
  const auto deltas = list_or(e.checks, "condition_m_deltas", {});
  std::vector<std::function<std::vector<Output>()>> tasks;
  for (const auto& nf : e.nfunctions)
    tasks.push_back([&, nf]() {
      std::vector<Output> out;
      AxiomOptions ax;
      ax.seed = e.seed;
      out.push_back(as_output("check_nfunction_" + nf.name + ".csv", check_nfunction(nf.M, ax)));
      if (delta2) out.push_back(as_output("check_delta2_" + nf.name + ".csv", check_delta2(nf.M)));
      if (log_holder)
        out.push_back(as_output("check_log_holder_" + nf.name + ".csv",
                                check_log_holder(nf.M, make_probe_pairs(nf.M.sample().domain))));
      if (!deltas.empty())
        out.push_back(as_output("check_condition_M_" + nf.name + ".csv",
                                check_condition_M(nf.M, nf.M.sample().domain, deltas)));
      return out;
    });
  std::vector<Output> all;
  for (auto& v : run_tasks(std::move(tasks), jobs)) all.insert(all.end(), v.begin(), v.end());
  return all;
}

inline std::vector<Output> cmd_conjugate(const Experiment& e, int jobs) {
  if (e.nfunctions.empty()) throw ConfigError("top level: conjugate needs a non-empty 'nfunctions' list");
  const auto etas = list_or(e.checks, "eta", {0.5, 1.0, 2.0, 5.0});
  const int samples = get_or<int>(e.checks, "fenchel_young_samples", 1000);
  std::vector<std::function<Output()>> tasks;
  for (const auto& nf : e.nfunctions)
    tasks.push_back([&, nf]() {
      const auto& M = nf.M;
      DiagnosticsReport rep;
      rep.name = "conjugate";
      rep.inputs_digest = hex_digest(M.describe());
      ConjugateEvaluator Mstar(M);
      const Vec x = M.sample().domain.center();
      auto& t = rep.add_table("values", {"eta", "M_star"});
      for (double eta : etas) t.add({eta, Mstar(x, Vec{eta, 0.0})});
      std::mt19937_64 rng(e.seed);
      std::uniform_real_distribution<double> u(-1.0, 1.0);
      const double R = std::min(10.0, 0.5 * M.sample().xi_max);
      double worst = std::numeric_limits<double>::infinity();
      for (int i = 0; i < samples; ++i) {
        const Box& b = M.sample().domain;
        const Vec xs{b.lo[0] + b.edge(0) * 0.5 * (u(rng) + 1.0), b.dim == 2 ? b.lo[1] + b.edge(1) * 0.5 * (u(rng) + 1.0) : 0.0};
        const Vec xi{R * u(rng), M.dim() == 2 ? R * u(rng) : 0.0};
        const Vec eta{2.0 * u(rng), M.dim() == 2 ? 2.0 * u(rng) : 0.0};
        const double a = M(xs, xi), b2 = Mstar(xs, eta);
        worst = std::min(worst, (a + b2 - dot(xi, eta)) / (1.0 + a + b2));
      }
      rep.set("fenchel_young_min_gap", worst);
      rep.tolerance("gap_floor", -1e-9);
      rep.check("fenchel_young", worst >= -1e-9);
      rep.finalize();
      return as_output("conjugate_" + nf.name + ".csv", rep);
    });
  return run_tasks(std::move(tasks), jobs);
}

inline std::vector<Output> cmd_check_operator(const Experiment& e, int jobs) {
  if (e.operators.empty()) throw ConfigError("top level: check-operator needs a non-empty 'operators' list");
  std::vector<std::function<std::vector<Output>()>> tasks;
  for (const auto& op : e.operators)
    tasks.push_back([&, op]() {
      MonotonicityOptions mo;
      mo.seed = e.seed;
      mo.pairs = get_or<int>(e.checks, "monotonicity_pairs", mo.pairs);
      return std::vector<Output>{as_output("check_coercivity_" + op.name + ".csv", check_coercivity_A2(op.A)),
                                 as_output("check_monotonicity_" + op.name + ".csv", check_monotonicity_A3(op.A, mo))};
    });
  std::vector<Output> all;
  for (auto& v : run_tasks(std::move(tasks), jobs)) all.insert(all.end(), v.begin(), v.end());
  return all;
}

inline const ProblemSpec& need_problem(const Experiment& e, const char* cmd) {
  if (!e.problem) throw ConfigError(std::string("top level: ") + cmd + " needs a 'problem' section");
  return *e.problem;
}

inline SolveOptions solve_options(const Experiment& e) {
  SolveOptions so;
  so.step.tol = e.solver.tol;
  so.seed = e.seed;
  return so;
}

inline std::vector<Output> cmd_solve(const Experiment& e) {
  const auto& spec = need_problem(e, "solve");
  const auto run = solve_parabolic(spec, e.solver.theta, e.solver.n, solve_options(e));
  std::ostringstream sol;
  run.u.write_csv(sol);
  auto energy = energy_residual(run.u, run.A_theta, run.f_n, run.u0_n);
  energy.tables.push_back(run.report.table());
  return {{"solution.csv", sol.str(), std::nullopt}, as_output("energy_residual.csv", energy)};
}

inline std::vector<Output> cmd_staircase(const Experiment& e) {
  const auto& spec = need_problem(e, "staircase");
  StaircaseOptions o;
  o.thetas = e.solver.theta_list;
  o.ns = e.solver.n_list;
  o.ks = e.solver.k_list;
  o.solve = solve_options(e);
  try {
    return {as_output("staircase.csv", staircase(spec, o).report)};
  } catch (const BadParameters& ex) {
    throw ConfigError(std::string("solver lists: ") + ex.what());
  }
}

inline std::vector<Output> cmd_diagnose(const Experiment& e) {
  const auto& spec = need_problem(e, "diagnose");
  const auto& d = e.diagnostics;
  const auto run = solve_parabolic(spec, e.solver.theta, e.solver.n, solve_options(e));
  std::vector<Output> out;
  if (get_or<bool>(d, "energy", true))
    out.push_back(as_output("energy_residual.csv", energy_residual(run.u, run.A_theta, run.f_n, run.u0_n)));
  if (get_or<bool>(d, "apriori", false)) {
    AprioriOptions ao;
    ao.max_slack = get_or<double>(d, "max_slack", ao.max_slack);
    out.push_back(as_output("apriori_bounds.csv", apriori_bounds(run, spec, e.solver.n, ao)));
  }
  if (d["radiation"]) {
    const int l_max = get<int>(d["radiation"], "l_max", "diagnostics.radiation");
    out.push_back(as_output("radiation_profile.csv", radiation_profile(run.u, spec.A, l_max)));
  }
  if (d["renormalized"]) {
    const double L = get<double>(d["renormalized"], "L", "diagnostics.renormalized");
    out.push_back(
        as_output("renormalized_residual.csv", renormalized_residual_family(run.u, run.A_theta, run.f_n, run.u0_n, L)));
  }
  if (d["measure"]) {
    const auto levels = list_or(d["measure"], "levels", {0.5, 1.0, 2.0});
    out.push_back(as_output("measure_decay.csv", measure_decay(run.u, levels, build_minorant(spec.M(), 2.0))));
  }
  if (d["comparison"]) {
    auto upper = spec;
    upper.f = spec.f.plus(DataField::constant(get_or<double>(d["comparison"], "f_shift", 1.0)));
    out.push_back(as_output("comparison_check.csv",
                            comparison_check(spec, upper, e.solver.theta, e.solver.n, e.solver.tol, solve_options(e))));
  }
  return out;
}

inline std::string manifest(const std::string& command, const Experiment& e, const std::string& text,
                            const std::vector<Output>& outputs, double wall) {
  std::ostringstream os;
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  char stamp[32];
  std::strftime(stamp, sizeof(stamp), "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&now));
  os << "key,value\n";
  os << "command," << command << "\n";
  os << "config_digest," << hex_digest(text) << "\n";
  os << "seed," << e.seed << "\n";
  os << "version," << kVersion << "\n";
  os << "compiler," << __VERSION__ << "\n";
  os << "eigen," << EIGEN_WORLD_VERSION << "." << EIGEN_MAJOR_VERSION << "." << EIGEN_MINOR_VERSION << "\n";
  os << "boost," << BOOST_VERSION / 100000 << "." << BOOST_VERSION / 100 % 1000 << "." << BOOST_VERSION % 100 << "\n";
  os << "started_utc," << stamp << "\n";
  os << "wall_seconds," << format_double(wall) << "\n";
  for (const auto& o : outputs)
    os << "output," << o.file << (o.verdict ? std::string(":") + to_string(*o.verdict) : std::string()) << "\n";
  return os.str();
}

inline const std::vector<std::string>& commands() {
  static const std::vector<std::string> c{"check-nfunction", "conjugate", "check-operator",
                                          "solve",           "staircase", "diagnose"};
  return c;
}

// Exit codes: 0 all checks pass, 1 a check failed or a computation failed,
// 2 configuration error.
inline int run(const std::string& command, const Flags& flags, std::ostream& log = std::cerr) {
  const auto start = std::chrono::steady_clock::now();
  if (std::find(commands().begin(), commands().end(), command) == commands().end()) {
    log << "error: unknown command '" << command << "'\n";
    return 2;
  }
  std::string text;
  Experiment e;
  try {
    std::ifstream in(flags.config);
    if (!in) throw ConfigError("cannot open config file " + flags.config);
    std::stringstream ss;
    ss << in.rdbuf();
    text = ss.str();
    e = parse_experiment(text, std::filesystem::path(flags.config).parent_path());
    if (flags.seed) e.seed = *flags.seed;
    if (flags.out) e.output = *flags.out;
  } catch (const ConfigError& ex) {
    log << "config error: " << flags.config << ": " << ex.what() << "\n";
    return 2;
  } catch (const Error& ex) {
    log << "config error: " << flags.config << ": " << ex.what() << "\n";
    return 2;
  }

  std::vector<Output> outputs;
  int code = 0;
  try {
    if (command == "check-nfunction")
      outputs = cmd_check_nfunction(e, flags.jobs);
    else if (command == "conjugate")
      outputs = cmd_conjugate(e, flags.jobs);
    else if (command == "check-operator")
      outputs = cmd_check_operator(e, flags.jobs);
    else if (command == "solve")
      outputs = cmd_solve(e);
    else if (command == "staircase")
      outputs = cmd_staircase(e);
    else
      outputs = cmd_diagnose(e);
  } catch (const ConfigError& ex) {
    log << "config error: " << flags.config << ": " << ex.what() << "\n";
    return 2;
  } catch (const std::exception& ex) {
    log << "error: " << ex.what() << "\n";
    code = 1;
  }
  for (const auto& o : outputs)
    if (o.verdict == Verdict::fail) code = 1;

  std::error_code ec;
  std::filesystem::create_directories(e.output, ec);
  if (ec) {
    log << "error: cannot create output directory " << e.output << "\n";
    return 1;
  }
  for (const auto& o : outputs) {
    std::ofstream f(std::filesystem::path(e.output) / o.file, std::ios::binary);
    f << o.body;
  }
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  std::ofstream(std::filesystem::path(e.output) / "manifest.csv", std::ios::binary)
      << manifest(command, e, text, outputs, wall);
  for (const auto& o : outputs)
    log << o.file << (o.verdict ? std::string(" ") + to_string(*o.verdict) : std::string()) << "\n";
  return code;
}

}  // namespace orlicz::cli
