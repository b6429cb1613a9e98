#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include "orlicz/core.hpp"
#include "orlicz/grid.hpp"
#include "orlicz/mollify.hpp"
#include "orlicz/operators.hpp"
#include "orlicz/report.hpp"

namespace orlicz {

// Time-independent scalar data (source f or initial value u0).
struct DataField {
  std::function<double(const Vec&)> fn = [](const Vec&) { return 0.0; };
  std::string name = "zero";

  double operator()(const Vec& x) const { return fn(x); }

  static DataField zero() { return {}; }
  static DataField constant(double c) {
    return {[c](const Vec&) { return c; }, "constant(" + format_double(c) + ")"};
  }
  // amp * prod_i sin(pi (x_i - lo_i) / edge_i); the first Dirichlet eigenfunction.
  static DataField sine(const Box& box, double amp = 1.0) {
    return {[box, amp](const Vec& x) {
              double v = amp;
              for (int a = 0; a < box.dim; ++a) v *= std::sin(std::numbers::pi * (x[a] - box.lo[a]) / box.edge(a));
              return v;
            },
            "sine(" + format_double(amp) + ")"};
  }
  // height on the closed max-norm ball of radius halfwidth around center.
  static DataField spike(double height, Vec center, double halfwidth) {
    return {[=](const Vec& x) {
              return std::max(std::abs(x[0] - center[0]), std::abs(x[1] - center[1])) <= halfwidth ? height : 0.0;
            },
            "spike(" + format_double(height) + ";" + format_double(center[0]) + "," + format_double(center[1]) + ";" +
                format_double(halfwidth) + ")"};
  }
  // amp * smooth bump of radius width around center.
  static DataField bump(double amp, Vec center, double width) {
    return {[=](const Vec& x) { return amp * std::exp(1.0) * bump::raw(norm(x - center) / width); },
            "bump(" + format_double(amp) + ";" + format_double(center[0]) + "," + format_double(center[1]) + ";" +
                format_double(width) + ")"};
  }
  // amp * |x - center|^(-beta): integrable for beta < d, unbounded at center.
  static DataField singular(double amp, Vec center, double beta) {
    return {[=](const Vec& x) { return amp * std::pow(norm(x - center), -beta); },
            "singular(" + format_double(amp) + ";" + format_double(center[0]) + "," + format_double(center[1]) + ";" +
                format_double(beta) + ")"};
  }
  DataField plus(const DataField& o) const {
    auto a = fn, b = o.fn;
    return {[a, b](const Vec& x) { return a(x) + b(x); }, name + "+" + o.name};
  }
};

struct ProblemSpec {
  VectorField A;
  Box omega = Box::unit(1);
  std::array<int, 2> cells{64, 64};
  int steps = 64;
  double T = 1.0;
  DataField f{};
  DataField u0{};
  std::optional<ScalarNFunction> regularizer{};  // default_regularizer(M) when empty

  const NFunction& M() const { return A.governing(); }
  SpaceGrid grid() const { return SpaceGrid(omega, cells); }
  double dt() const { return T / steps; }
  std::string describe() const {
    return A.describe() + ";" + grid().describe() + ";T=" + format_double(T) + ";steps=" + std::to_string(steps) +
           ";f=" + f.name + ";u0=" + u0.name;
  }
};

struct StepOptions {
  double tol = 1e-10;  // sup-norm of the nodal residual
  int max_newton = 60;
  int max_picard = 2000;
  double relaxation = 0.5;
  double jacobian_eps = 1e-12;
};

struct StepResult {
  std::vector<double> u;
  int newton_iterations = 0;
  int picard_iterations = 0;
  double residual = 0.0;
};

namespace detail {

// R_i = u_i - uprev_i + dt (K(u)_i / m_i - rhs_i) on interior nodes, 0 on the boundary.
template <class Field>
double step_residual(const Field& A, const SpaceGrid& g, const std::vector<double>& u, const std::vector<double>& uprev,
                     double dt, const std::vector<double>& rhs, std::vector<double>& R) {
  R.assign(g.node_count(), 0.0);
  for (const auto& e : g.elements()) {
    const Vec a = A(e.centroid, g.gradient(e, u));
    for (int k = 0; k < e.count; ++k) R[e.nodes[k]] += e.area * dot(a, e.grad_phi[k]);
  }
  double sup = 0.0;
  for (std::size_t i = 0; i < R.size(); ++i) {
    if (g.is_boundary(i)) {
      R[i] = 0.0;
      continue;
    }
    R[i] = u[i] - uprev[i] + dt * (R[i] / g.mass(i) - rhs[i]);
    sup = std::max(sup, std::abs(R[i]));
  }
  return sup;
}

inline double l2(const std::vector<double>& v) {
  long double s = 0.0L;
  for (double x : v) s += static_cast<long double>(x) * x;
  return std::sqrt(static_cast<double>(s));
}

// I + dt M^{-1} K with per-element 2x2 coefficient matrices.
template <class Coef>
Eigen::SparseMatrix<double> assemble(const SpaceGrid& g, double dt, const std::vector<int>& index, Coef&& coef) {
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(g.elements().size() * 9 + g.interior().size());
  for (int i : g.interior()) trip.emplace_back(index[i], index[i], 1.0);
  for (const auto& e : g.elements()) {
    const Mat J = coef(e);
    for (int k = 0; k < e.count; ++k) {
      const int r = index[e.nodes[k]];
      if (r < 0) continue;
      const double s = dt * e.area / g.mass(e.nodes[k]);
      for (int l = 0; l < e.count; ++l) {
        const int c = index[e.nodes[l]];
        if (c < 0) continue;
        trip.emplace_back(r, c, s * dot(e.grad_phi[k], mul(J, e.grad_phi[l])));
      }
    }
  }
  Eigen::SparseMatrix<double> mat(static_cast<Eigen::Index>(g.interior().size()),
                                  static_cast<Eigen::Index>(g.interior().size()));
  mat.setFromTriplets(trip.begin(), trip.end());
  return mat;
}

inline bool sparse_solve(const Eigen::SparseMatrix<double>& mat, const Eigen::VectorXd& b, Eigen::VectorXd& x) {
  Eigen::SparseLU<Eigen::SparseMatrix<double>> lu;
  lu.analyzePattern(mat);
  lu.factorize(mat);
  if (lu.info() != Eigen::Success) return false;
  x = lu.solve(b);
  return lu.info() == Eigen::Success && x.allFinite();
}

}  // namespace detail

// One implicit Euler step: u - dt div_h A(x, grad_h u) = u_prev + dt rhs with
// zero boundary values. Damped Newton on the residual, then lagged-coefficient
// relaxation if Newton stalls.
template <class Field>
StepResult solve_implicit_step(const Field& A, const SpaceGrid& g, const std::vector<double>& u_prev, double dt,
                               const std::vector<double>& rhs, const StepOptions& opt = {},
                               const std::vector<double>* guess = nullptr, long step_index = 0) {
  if (!(opt.tol > 0.0)) throw BadParameters("solver tolerance must be positive");
  if (!(dt > 0.0)) throw BadParameters("time step must be positive");
  if (u_prev.size() != g.node_count() || rhs.size() != g.node_count())
    throw BadParameters("step data do not match the grid");
  std::vector<int> index(g.node_count(), -1);
  for (std::size_t k = 0; k < g.interior().size(); ++k) index[g.interior()[k]] = static_cast<int>(k);
  const std::size_t n = g.interior().size();

  StepResult res;
  res.u = guess ? *guess : u_prev;
  for (std::size_t i = 0; i < res.u.size(); ++i)
    if (g.is_boundary(i)) res.u[i] = 0.0;
  std::vector<double> R, Rt, trial;
  double r = detail::step_residual(A, g, res.u, u_prev, dt, rhs, R);

  bool stalled = false;
  while (r > opt.tol && res.newton_iterations < opt.max_newton) {
    ++res.newton_iterations;
    const auto J = detail::assemble(g, dt, index, [&](const SpaceGrid::Element& e) {
      return A.jacobian(e.centroid, g.gradient(e, res.u), opt.jacobian_eps);
    });
    Eigen::VectorXd b(static_cast<Eigen::Index>(n)), delta;
    for (std::size_t k = 0; k < n; ++k) b[static_cast<Eigen::Index>(k)] = -R[g.interior()[k]];
    if (!detail::sparse_solve(J, b, delta)) {
      stalled = true;
      break;
    }
    const double merit = detail::l2(R);
    double alpha = 1.0;
    bool accepted = false;
    for (int halving = 0; halving < 40; ++halving, alpha *= 0.5) {
      trial = res.u;
      for (std::size_t k = 0; k < n; ++k) trial[g.interior()[k]] += alpha * delta[static_cast<Eigen::Index>(k)];
      const double rt = detail::step_residual(A, g, trial, u_prev, dt, rhs, Rt);
      if (detail::l2(Rt) <= (1.0 - 1e-4 * alpha) * merit || rt <= opt.tol) {
        res.u.swap(trial);
        R.swap(Rt);
        r = rt;
        accepted = true;
        break;
      }
    }
    if (!accepted) {
      stalled = true;
      break;
    }
  }
  if (r > opt.tol && (stalled || res.newton_iterations >= opt.max_newton)) {
    // Frozen secant coefficients: A(x, xi) ~ diag(A_k / xi_k) xi.
    Eigen::VectorXd b(static_cast<Eigen::Index>(n)), sol;
    for (std::size_t k = 0; k < n; ++k) {
      const int i = g.interior()[k];
      b[static_cast<Eigen::Index>(k)] = u_prev[i] + dt * rhs[i];
    }
    while (r > opt.tol && res.picard_iterations < opt.max_picard) {
      ++res.picard_iterations;
      const auto S = detail::assemble(g, dt, index, [&](const SpaceGrid::Element& e) {
        const Vec xi = g.gradient(e, res.u);
        const Vec a = A(e.centroid, xi);
        const Mat J = A.jacobian(e.centroid, xi, opt.jacobian_eps);
        Mat D{};
        for (int c = 0; c < g.dim(); ++c) D[c][c] = xi[c] != 0.0 ? a[c] / xi[c] : J[c][c];
        return D;
      });
      if (!detail::sparse_solve(S, b, sol)) break;
      for (std::size_t k = 0; k < n; ++k) {
        const int i = g.interior()[k];
        res.u[i] += opt.relaxation * (sol[static_cast<Eigen::Index>(k)] - res.u[i]);
      }
      r = detail::step_residual(A, g, res.u, u_prev, dt, rhs, R);
    }
  }
  res.residual = r;
  if (!(r <= opt.tol)) throw NoConvergence("implicit step did not reach the residual tolerance", step_index, r);
  return res;
}

// Solves one step from two random initial guesses; returns their max distance.
template <class Field>
double step_uniqueness_spot_check(const Field& A, const SpaceGrid& g, const std::vector<double>& u_prev, double dt,
                                  const std::vector<double>& rhs, const StepOptions& opt = {}, std::uint64_t seed = 0) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::vector<double> a(g.node_count()), b(g.node_count());
  for (std::size_t i = 0; i < a.size(); ++i) {
    a[i] = u_prev[i] + nd(rng);
    b[i] = u_prev[i] + nd(rng);
  }
  const auto ua = solve_implicit_step(A, g, u_prev, dt, rhs, opt, &a).u;
  const auto ub = solve_implicit_step(A, g, u_prev, dt, rhs, opt, &b).u;
  double d = 0.0;
  for (std::size_t i = 0; i < ua.size(); ++i) d = std::max(d, std::abs(ua[i] - ub[i]));
  return d;
}

// sum over elements of |e| A(x_e, grad u) . grad u
template <class Field>
double dissipation(const Field& A, const SpaceGrid& g, const std::vector<double>& u) {
  long double s = 0.0L;
  for (const auto& e : g.elements()) {
    const Vec xi = g.gradient(e, u);
    s += e.area * dot(A(e.centroid, xi), xi);
  }
  return static_cast<double>(s);
}

// 1/2 |u(t_k)|^2 - 1/2 |u0|^2 + sum_{j<=k} dt (a(u^j, u^j) - (f, u^j)) for every level k.
template <class Field>
std::vector<double> energy_balance(const GridFunction& u, const Field& A, const std::vector<double>& f_n) {
  const auto& g = u.grid;
  std::vector<double> out(u.values.size(), 0.0);
  const double e0 = 0.5 * g.l2_squared(u.values[0]);
  long double acc = 0.0L;
  for (std::size_t k = 1; k < u.values.size(); ++k) {
    const double dt = u.times[k] - u.times[k - 1];
    acc += dt * (dissipation(A, g, u.values[k]) - g.inner(f_n, u.values[k]));
    out[k] = 0.5 * g.l2_squared(u.values[k]) - e0 + static_cast<double>(acc);
  }
  return out;
}

struct SolveOptions {
  StepOptions step{};
  const GridFunction* warm_start = nullptr;  // per-level initial guesses
  int monotonicity_pairs = 100;              // spot check required for theta = 0
  std::uint64_t seed = 0;
};

struct SolveReport {
  double theta = 0.0;
  double n = 0.0;
  std::vector<int> newton_iterations;
  std::vector<int> picard_iterations;
  std::vector<double> residuals;
  std::vector<double> energy_residuals;

  Table table() const {
    Table t{"steps", {"step", "newton", "picard", "residual", "energy_residual"}, {}};
    for (std::size_t k = 0; k < residuals.size(); ++k)
      t.add({static_cast<double>(k + 1), static_cast<double>(newton_iterations[k]),
             static_cast<double>(picard_iterations[k]), residuals[k], energy_residuals[k + 1]});
    return t;
  }
  double max_energy_residual() const {
    double m = 0.0;
    for (double v : energy_residuals) m = std::max(m, std::abs(v));
    return m;
  }
};

struct SolveResult {
  GridFunction u;
  SolveReport report;
  RegularizedField A_theta;
  std::vector<double> f_n;   // nodal T_n(f)
  std::vector<double> u0_n;  // nodal T_n(u0)
};

// A_theta for a problem; theta = 0 requires a strict-monotonicity spot check of A.
inline RegularizedField make_regularized(const ProblemSpec& spec, double theta, int pairs = 100,
                                         std::uint64_t seed = 0) {
  const auto m = spec.regularizer ? *spec.regularizer : default_regularizer(spec.M());
  if (theta == 0.0) {
    if (!strictly_monotone_spot_check(spec.A, spec.M(), pairs, seed))
      throw BadParameters("theta = 0 needs a strictly monotone operator");
    return RegularizedField(spec.A, m, 0.0);
  }
  return regularize_operator(spec.A, m, theta);
}

inline SolveResult solve_parabolic(const ProblemSpec& spec, double theta, double n, const SolveOptions& opt = {}) {
  if (!(n > 0.0)) throw BadParameters("truncation level n must be positive");
  if (!(spec.T > 0.0) || spec.steps < 1) throw BadParameters("need T > 0 and at least one time step");
  auto A = make_regularized(spec, theta, opt.monotonicity_pairs, opt.seed);
  const SpaceGrid g = spec.grid();
  const double dt = spec.dt();
  auto f_n = g.interpolate([&](const Vec& x) { return truncate(spec.f(x), n); });
  auto u0_n = g.interpolate([&](const Vec& x) { return truncate(spec.u0(x), n); });
  for (std::size_t i = 0; i < g.node_count(); ++i)
    if (!std::isfinite(f_n[i]) || !std::isfinite(u0_n[i])) throw BadParameters("data must be finite on the grid");

  GridFunction u;
  u.grid = g;
  for (int k = 0; k <= spec.steps; ++k) u.times.push_back(spec.T * k / spec.steps);
  u.values.reserve(u.times.size());
  u.values.push_back(u0_n);
  SolveReport rep;
  rep.theta = theta;
  rep.n = n;
  const bool warm = opt.warm_start && opt.warm_start->values.size() == u.times.size() &&
                    opt.warm_start->grid.node_count() == g.node_count();
  for (int k = 1; k <= spec.steps; ++k) {
    const std::vector<double>* guess = warm ? &opt.warm_start->values[k] : nullptr;
    auto s = solve_implicit_step(A, g, u.values.back(), dt, f_n, opt.step, guess, k);
    rep.newton_iterations.push_back(s.newton_iterations);
    rep.picard_iterations.push_back(s.picard_iterations);
    rep.residuals.push_back(s.residual);
    u.values.push_back(std::move(s.u));
  }
  rep.energy_residuals = energy_balance(u, A, f_n);
  return {std::move(u), std::move(rep), std::move(A), std::move(f_n), std::move(u0_n)};
}

// M-modular of the element gradients of a grid function over levels 1..Nt.
inline double space_time_modular(const NFunction& M, const GridFunction& u) {
  long double s = 0.0L;
  const auto& g = u.grid;
  for (std::size_t k = 1; k < u.values.size(); ++k) {
    const double dt = u.times[k] - u.times[k - 1];
    for (const auto& e : g.elements()) s += dt * e.area * M(e.centroid, g.gradient(e, u.values[k]));
  }
  return static_cast<double>(s);
}

struct StaircaseOptions {
  std::vector<double> thetas{1.0, 0.5, 0.25};
  std::vector<double> ns{1.0, 10.0};
  std::vector<double> ks{1.0};
  SolveOptions solve{};
};

struct StaircaseResult {
  DiagnosticsReport report;
  std::vector<GridFunction> final_solutions;  // one per n, at the smallest theta
};

inline StaircaseResult staircase(const ProblemSpec& spec, const StaircaseOptions& opt) {
  if (opt.thetas.empty() || opt.ns.empty() || opt.ks.empty()) throw BadParameters("staircase lists must be nonempty");
  for (std::size_t i = 1; i < opt.thetas.size(); ++i)
    if (!(opt.thetas[i] < opt.thetas[i - 1])) throw BadParameters("theta list must decrease strictly");
  StaircaseResult out;
  auto& rep = out.report;
  rep.name = "staircase";
  rep.inputs_digest = hex_digest(spec.describe());
  auto& th = rep.add_table("theta_cauchy", {"n", "theta_prev", "theta", "l1_distance"});
  auto& nt = rep.add_table("n_cauchy", {"k", "n_prev", "n", "l1_distance"});
  auto& te = rep.add_table("truncation_energy", {"n", "k", "modular", "w2_over_cA", "ratio"});

  const SpaceGrid g = spec.grid();
  const double f_l1 = spec.T * g.l1(g.interpolate(spec.f.fn));
  const double u0_l1 = g.l1(g.interpolate(spec.u0.fn));
  const double cA = spec.A.c_A();
  bool converged = true, theta_monotone = true;
  double worst_ratio = 0.0;
  try {
    for (double n : opt.ns) {
      std::optional<GridFunction> prev;
      double prev_theta = 0.0, prev_dist = std::numeric_limits<double>::infinity();
      for (double theta : opt.thetas) {
        SolveOptions so = opt.solve;
        if (prev) so.warm_start = &*prev;
        auto r = solve_parabolic(spec, theta, n, so);
        if (prev) {
          const double d = r.u.l1_distance(*prev);
          th.add({n, prev_theta, theta, d});
          if (d > prev_dist) theta_monotone = false;
          prev_dist = d;
        }
        prev = std::move(r.u);
        prev_theta = theta;
      }
      for (double k : opt.ks) {
        const auto tk = prev->mapped([k](double v) { return truncate(v, k); });
        const double mod = space_time_modular(spec.M(), tk);
        const double w2 = k * (f_l1 + 0.5 * u0_l1) / cA;
        const double ratio = w2 > 0 ? mod / w2 : (mod > 0 ? std::numeric_limits<double>::infinity() : 0.0);
        te.add({n, k, mod, w2, ratio});
        worst_ratio = std::max(worst_ratio, ratio);
      }
      out.final_solutions.push_back(std::move(*prev));
    }
  } catch (const NoConvergence& e) {
    converged = false;
    rep.notes.push_back(std::string("solve failed: ") + e.what());
  }
  for (double k : opt.ks)
    for (std::size_t i = 1; i < out.final_solutions.size(); ++i) {
      const auto a = out.final_solutions[i - 1].mapped([k](double v) { return truncate(v, k); });
      const auto b = out.final_solutions[i].mapped([k](double v) { return truncate(v, k); });
      nt.add({k, opt.ns[i - 1], opt.ns[i], a.l1_distance(b)});
    }
  rep.set("worst_truncation_ratio", worst_ratio);
  rep.set("discretization_slack", std::max(0.0, worst_ratio - 1.0));
  rep.tolerance("truncation_bound_factor", 2.0);
  rep.check("all_solves_converged", converged);
  rep.check("theta_distances_decreasing", theta_monotone);
  rep.check("truncation_energy_bounded", worst_ratio <= 2.0);
  rep.finalize();
  return out;
}

}  // namespace orlicz
