#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "orlicz/conjugate.hpp"
#include "orlicz/core.hpp"
#include "orlicz/grid.hpp"
#include "orlicz/mollify.hpp"
#include "orlicz/nfunction_checks.hpp"
#include "orlicz/operators.hpp"
#include "orlicz/report.hpp"
#include "orlicz/solver.hpp"

namespace orlicz {

// ---------------------------------------------------------------------------
// Energy equality

// Residual table of the discrete energy equality. With C > 0 the report
// checks max |residual| <= C dt; otherwise it is informational.
template <class Field>
DiagnosticsReport energy_residual(const GridFunction& u, const Field& A_theta, const std::vector<double>& f_n,
                                  const std::vector<double>& u0_n, double C = 0.0) {
  DiagnosticsReport rep;
  rep.name = "energy_residual";
  rep.inputs_digest = hex_digest(A_theta.describe() + ";" + u.grid.describe());
  if (u0_n.size() != u.grid.node_count() || u.values.empty() || u.values[0] != u0_n)
    throw BadParameters("energy_residual: u does not start from u0_n");
  const auto e = energy_balance(u, A_theta, f_n);
  auto& t = rep.add_table("energy", {"t", "residual"});
  double worst = 0.0;
  for (std::size_t k = 0; k < e.size(); ++k) {
    t.add({u.times[k], e[k]});
    worst = std::max(worst, std::abs(e[k]));
  }
  rep.set("max_abs_residual", worst);
  rep.set("dt", u.dt());
  if (C > 0.0) {
    rep.tolerance("C", C);
    rep.check("residual_within_C_dt", worst <= C * u.dt());
  }
  rep.finalize();
  return rep;
}

struct RefinementOptions {
  double ratio_lo = 1.7;
  double ratio_hi = 2.3;
  SolveOptions solve{};
};

// Solves with `steps` and `2 steps` at fixed space grid and compares the
// maximal energy residuals.
inline DiagnosticsReport energy_refinement(const ProblemSpec& spec, double theta, double n,
                                           const RefinementOptions& opt = {}) {
  DiagnosticsReport rep;
  rep.name = "energy_refinement";
  rep.inputs_digest = hex_digest(spec.describe() + ";theta=" + format_double(theta) + ";n=" + format_double(n));
  auto fine = spec;
  fine.steps = 2 * spec.steps;
  const double coarse_r = solve_parabolic(spec, theta, n, opt.solve).report.max_energy_residual();
  const double fine_r = solve_parabolic(fine, theta, n, opt.solve).report.max_energy_residual();
  const double ratio = fine_r > 0 ? coarse_r / fine_r : std::numeric_limits<double>::infinity();
  rep.set("residual_coarse", coarse_r);
  rep.set("residual_fine", fine_r);
  rep.set("ratio", ratio);
  rep.set("C_estimate", coarse_r / spec.dt());
  rep.tolerance("ratio_lo", opt.ratio_lo);
  rep.tolerance("ratio_hi", opt.ratio_hi);
  rep.check("halves_with_dt", ratio >= opt.ratio_lo && ratio <= opt.ratio_hi);
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// A priori bounds

struct AprioriOptions {
  double alpha = 2.0;      // Delta2 exponent cap of the minorant
  double max_slack = 1.5;  // allowed left side / w1(n)
  MinorantOptions minorant{};
};

// Empirical Poincare factor sup int P(|u|) / int P(|grad u|) over the given
// snapshots and the first Dirichlet mode at three amplitudes.
inline double fit_poincare_constant(const ScalarNFunction& P, const SpaceGrid& g,
                                    const std::vector<std::vector<double>>& snapshots) {
  std::vector<std::vector<double>> probes = snapshots;
  for (double amp : {0.1, 1.0, 10.0}) probes.push_back(g.interpolate(DataField::sine(g.box(), amp).fn));
  double c = 0.0;
  for (const auto& u : probes) {
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) num += g.mass(i) * P(std::abs(u[i]));
    for (const auto& e : g.elements()) den += e.area * P(norm(g.gradient(e, u)));
    if (den > 0.0) c = std::max(c, num / den);
  }
  return c;
}

inline DiagnosticsReport apriori_bounds(const SolveResult& run, const ProblemSpec& spec, double n,
                                        const AprioriOptions& opt = {}) {
  DiagnosticsReport rep;
  rep.name = "apriori_bounds";
  rep.inputs_digest = hex_digest(spec.describe() + ";theta=" + format_double(run.A_theta.theta()) +
                                 ";n=" + format_double(n));
  const auto& u = run.u;
  const auto& g = u.grid;
  const NFunction& M = spec.M();
  const double cA = spec.A.c_A();
  const double theta = run.A_theta.theta();
  const double omega = g.box().measure();
  const double T = u.T();

  auto mopt = opt.minorant;
  auto mlow = build_minorant(M, opt.alpha, mopt);
  const double cP = fit_poincare_constant(mlow, g, {u.values.begin() + 1, u.values.end()});
  const double kP = cA / (2.0 * cP);
  // Large n needs slopes beyond the sampled range; widen by decades.
  double Pstar = 0.0;
  for (int widen = 0;; ++widen) {
    try {
      Pstar = kP * mlow.conjugate(n / kP);
      break;
    } catch (const ConjugateRangeExceeded&) {
      if (widen == 12) throw;
      mopt.s_max = 10.0 * (mopt.s_max > 0 ? mopt.s_max : M.sample().xi_max);
      mlow = build_minorant(M, opt.alpha, mopt);
    }
  }
  const double w1 = (Pstar * T + 0.5 * n * n) * omega;

  double sup_l2 = 0.0;
  for (const auto& lvl : u.values) sup_l2 = std::max(sup_l2, g.l2_squared(lvl));
  long double modM = 0.0L, modMstar = 0.0L, modm = 0.0L, modmstar = 0.0L;
  ConjugateEvaluator Mstar(M);
  const auto& m = run.A_theta.m();
  for (std::size_t k = 1; k < u.values.size(); ++k) {
    const double dt = u.times[k] - u.times[k - 1];
    for (const auto& e : g.elements()) {
      const Vec xi = g.gradient(e, u.values[k]);
      const double w = dt * e.area;
      modM += w * M(e.centroid, xi);
      modMstar += w * Mstar(e.centroid, spec.A(e.centroid, xi));
      if (theta > 0.0) {
        const double s = norm(xi);
        modm += w * m(s);
        modmstar += w * (s * m.derivative(s) - m(s));  // m*(m'(s)) by Fenchel equality
      }
    }
  }
  const double lhs_l2 = 0.5 * sup_l2;
  const double lhs_M = 0.5 * cA * static_cast<double>(modM);
  const double lhs_Mstar = cA * static_cast<double>(modMstar);
  const double lhs_mstar = theta * static_cast<double>(modmstar);
  const double combined = lhs_l2 + lhs_M + lhs_Mstar + theta * static_cast<double>(modm) + lhs_mstar;

  rep.set("c_P", cP);
  rep.set("P_scale", kP);
  rep.set("P_star_n", Pstar);
  rep.set("w1", w1);
  rep.set("sup_l2_squared", sup_l2);
  rep.set("raw_l2_ratio", sup_l2 / w1);
  rep.tolerance("max_slack", opt.max_slack);
  const std::pair<const char*, double> bounds[] = {
      {"l2", lhs_l2}, {"modular_M", lhs_M}, {"modular_Mstar", lhs_Mstar}, {"modular_mstar", lhs_mstar}};
  auto& t = rep.add_table("bounds", {"index", "lhs", "w1", "slack"});
  double tightest = -1.0, tightest_slack = -1.0;
  int idx = 0;
  for (const auto& [name, lhs] : bounds) {
    const double slack = lhs / w1;
    rep.set(std::string("slack_") + name, slack);
    rep.check(std::string(name) + "_bound", slack <= opt.max_slack);
    t.add({static_cast<double>(idx), lhs, w1, slack});
    if (slack > tightest_slack) {
      tightest_slack = slack;
      tightest = idx;
    }
    ++idx;
  }
  rep.set("tightest_index", tightest);
  rep.set("combined_slack", combined / w1);
  rep.notes.push_back("bound order: l2 (half the sup of the squared norm), modular_M, modular_Mstar, modular_mstar");
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Radiation control

// E_l = sum over levels and elements with l < |mean u| < l + 1 of dt |e| A . grad u.
template <class Field>
std::vector<double> radiation_levels(const GridFunction& u, const Field& A, int l_max) {
  std::vector<double> E(static_cast<std::size_t>(l_max) + 1, 0.0);
  const auto& g = u.grid;
  for (std::size_t k = 1; k < u.values.size(); ++k) {
    const double dt = u.times[k] - u.times[k - 1];
    for (const auto& e : g.elements()) {
      const double a = std::abs(g.mean(e, u.values[k]));
      const double fl = std::floor(a);
      if (fl == a || fl > l_max) continue;  // band boundaries are open
      const Vec xi = g.gradient(e, u.values[k]);
      E[static_cast<std::size_t>(fl)] += dt * e.area * dot(A(e.centroid, xi), xi);
    }
  }
  return E;
}

template <class Field>
DiagnosticsReport radiation_profile(const GridFunction& u, const Field& A, int l_max) {
  if (l_max < 0) throw BadParameters("l_max must be nonnegative");
  DiagnosticsReport rep;
  rep.name = "radiation_profile";
  rep.inputs_digest = hex_digest(A.describe() + ";" + u.grid.describe() + ";l_max=" + std::to_string(l_max));
  const auto E = radiation_levels(u, A, l_max);
  const double sup = u.sup_abs();
  auto& t = rep.add_table("E_l", {"l", "E_l"});
  bool nonneg = true, zero_beyond = true;
  for (int l = 0; l <= l_max; ++l) {
    t.add({static_cast<double>(l), E[l]});
    if (E[l] < 0.0) nonneg = false;
    if (l >= sup && E[l] != 0.0) zero_beyond = false;
  }
  rep.set("sup_abs_u", sup);
  rep.set("E_0", E[0]);
  rep.set("E_l_max", E[l_max]);
  rep.check("nonnegative", nonneg);
  rep.check("zero_beyond_sup", zero_beyond);
  rep.finalize();
  return rep;
}

// sup over a sweep of solutions of E_l; passes when the tail level is below
// `fraction` of the bottom level.
template <class Field>
DiagnosticsReport radiation_sweep(const std::vector<GridFunction>& runs, const Field& A, int l_max,
                                  double fraction = 1e-2) {
  DiagnosticsReport rep;
  rep.name = "radiation_sweep";
  rep.inputs_digest = hex_digest(A.describe() + ";runs=" + std::to_string(runs.size()) + ";l_max=" +
                                 std::to_string(l_max));
  std::vector<double> sup(static_cast<std::size_t>(l_max) + 1, 0.0);
  bool zero_beyond = true;
  for (const auto& u : runs) {
    const auto E = radiation_levels(u, A, l_max);
    const double s = u.sup_abs();
    for (int l = 0; l <= l_max; ++l) {
      sup[l] = std::max(sup[l], E[l]);
      if (l >= s && E[l] != 0.0) zero_beyond = false;
    }
  }
  auto& t = rep.add_table("sup_E_l", {"l", "sup_E_l"});
  for (int l = 0; l <= l_max; ++l) t.add({static_cast<double>(l), sup[l]});
  const double ratio = sup[0] > 0 ? sup[l_max] / sup[0] : 0.0;
  rep.set("tail_ratio", ratio);
  rep.tolerance("fraction", fraction);
  rep.check("zero_beyond_sup", zero_beyond);
  rep.check("tail_below_fraction", ratio <= fraction);
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Renormalized formulation

struct TestFunction {
  std::function<double(double, const Vec&)> phi;
  std::function<double(double, const Vec&)> dphi_dt;
  std::string name;
};

namespace detail {

// e * exp(1 / (z^2 - 1)): peak 1 at z = 0.
inline double unit_bump(double z) { return std::exp(1.0) * bump::raw(z); }
inline double unit_bump_prime(double z) {
  const double q = z * z - 1.0;
  return q < 0.0 ? unit_bump(z) * (-2.0 * z / (q * q)) : 0.0;
}

// H(s) = integral of psi_L over (0, s).
inline double psi_primitive(double s, double L) {
  const double a = std::abs(s);
  double v;
  if (a <= L)
    v = a;
  else if (a <= L + 1.0)
    v = L + (a - L) - 0.5 * (a - L) * (a - L);
  else
    v = L + 0.5;
  return s < 0 ? -v : v;
}

}  // namespace detail

// Tensor products of 5 interior space bumps and 3 time profiles supported in [0, T).
inline std::vector<TestFunction> default_test_functions(const Box& box, double T) {
  std::vector<Vec> centres;
  std::vector<double> radii;
  const double ex = box.edge(0);
  if (box.dim == 1) {
    for (double c : {0.2, 0.35, 0.5, 0.65, 0.8}) centres.push_back({box.lo[0] + c * ex, 0.0});
    radii.assign(5, 0.15 * ex);
  } else {
    const double ey = box.edge(1);
    for (auto [a, b] : {std::pair{0.5, 0.5}, {0.3, 0.3}, {0.3, 0.7}, {0.7, 0.3}, {0.7, 0.7}})
      centres.push_back({box.lo[0] + a * ex, box.lo[1] + b * ey});
    radii.assign(5, 0.15 * std::min(ex, ey));
  }
  struct TimeProfile {
    std::function<double(double)> f, df;
    std::string name;
  };
  const double r = T / 4.0;
  const CutoffParams cut{CutoffParams::Kind::phi_r, 0.0, 0.0, r, T};
  std::vector<TimeProfile> profiles{
      {[cut](double t) { return cutoff(cut, t); },
       [r, T](double t) { return -bump::density(2.0 * (t - (T - 2.0 * r)) / r - 1.0) * 2.0 / r; }, "phi_r"},
      {[T](double t) { return detail::unit_bump((t - T / 3.0) / (T / 4.0)); },
       [T](double t) { return detail::unit_bump_prime((t - T / 3.0) / (T / 4.0)) / (T / 4.0); }, "early"},
      {[T](double t) { return detail::unit_bump((t - T / 2.0) / (T / 3.0)); },
       [T](double t) { return detail::unit_bump_prime((t - T / 2.0) / (T / 3.0)) / (T / 3.0); }, "middle"}};
  std::vector<TestFunction> out;
  for (std::size_t i = 0; i < centres.size(); ++i)
    for (const auto& p : profiles) {
      const Vec c = centres[i];
      const double rho = radii[i];
      auto f = p.f;
      auto df = p.df;
      out.push_back({[c, rho, f](double t, const Vec& x) { return detail::unit_bump(norm(x - c) / rho) * f(t); },
                     [c, rho, df](double t, const Vec& x) { return detail::unit_bump(norm(x - c) / rho) * df(t); },
                     "space" + std::to_string(i) + "_" + p.name});
    }
  return out;
}

// |-int (int_{u0}^{u} h) d_t phi + int A . grad(h(u) phi) - int f h(u) phi| with h = psi_L,
// time rectangle rule over levels 1..Nt, lumped nodal quadrature and the
// discrete gradient of the nodal interpolant of h(u) phi.
template <class Field>
double renormalized_residual(const GridFunction& u, const Field& A, const std::vector<double>& f_n,
                             const std::vector<double>& u0_n, double L, const TestFunction& test) {
  const auto& g = u.grid;
  const double T = u.T();
  for (std::size_t i = 0; i < g.node_count(); ++i) {
    if (std::abs(test.phi(T, g.node(i))) > 1e-14)
      throw BadTestFunction("test function " + test.name + " does not vanish at t = T");
    if (g.is_boundary(i))
      for (double t : u.times)
        if (std::abs(test.phi(t, g.node(i))) > 1e-14)
          throw BadTestFunction("test function " + test.name + " does not vanish on the boundary");
  }
  const CutoffParams h{CutoffParams::Kind::psi_l, L, 0.0, 1.0, 1.0};
  long double time_term = 0.0L, flux = 0.0L, source = 0.0L;
  std::vector<double> hv(g.node_count());
  for (std::size_t k = 1; k < u.values.size(); ++k) {
    const double t = u.times[k], dt = t - u.times[k - 1];
    const auto& uk = u.values[k];
    for (std::size_t i = 0; i < g.node_count(); ++i) {
      const Vec& x = g.node(i);
      const double phi = test.phi(t, x);
      const double hu = cutoff(h, uk[i]);
      hv[i] = hu * phi;
      time_term -= dt * g.mass(i) *
                   (detail::psi_primitive(uk[i], L) - detail::psi_primitive(u0_n[i], L)) * test.dphi_dt(t, x);
      source += dt * g.mass(i) * f_n[i] * hv[i];
    }
    for (const auto& e : g.elements()) flux += dt * e.area * dot(A(e.centroid, g.gradient(e, uk)), g.gradient(e, hv));
  }
  return std::abs(static_cast<double>(time_term + flux - source));
}

template <class Field>
DiagnosticsReport renormalized_residual_family(const GridFunction& u, const Field& A, const std::vector<double>& f_n,
                                               const std::vector<double>& u0_n, double L) {
  DiagnosticsReport rep;
  rep.name = "renormalized_residual";
  rep.inputs_digest = hex_digest(A.describe() + ";" + u.grid.describe() + ";L=" + format_double(L));
  auto& t = rep.add_table("residuals", {"index", "residual"});
  double worst = 0.0;
  int i = 0;
  for (const auto& test : default_test_functions(u.grid.box(), u.T())) {
    const double r = renormalized_residual(u, A, f_n, u0_n, L, test);
    t.add({static_cast<double>(i++), r});
    worst = std::max(worst, r);
  }
  rep.set("max_residual", worst);
  rep.set("L", L);
  rep.finalize();
  return rep;
}

// Max renormalized residual at (steps, cells) and at doubled resolution in both.
inline DiagnosticsReport renormalized_refinement(const ProblemSpec& spec, double theta, double n, double L,
                                                 const RefinementOptions& opt = {}) {
  DiagnosticsReport rep;
  rep.name = "renormalized_refinement";
  rep.inputs_digest = hex_digest(spec.describe() + ";L=" + format_double(L));
  auto fine = spec;
  fine.steps *= 2;
  fine.cells = {2 * spec.cells[0], 2 * spec.cells[1]};
  double r[2];
  int i = 0;
  for (const ProblemSpec* s : std::array<const ProblemSpec*, 2>{&spec, &fine}) {
    const auto run = solve_parabolic(*s, theta, n, opt.solve);
    r[i++] = renormalized_residual_family(run.u, run.A_theta, run.f_n, run.u0_n, L).metric("max_residual");
  }
  const double ratio = r[1] > 0 ? r[0] / r[1] : std::numeric_limits<double>::infinity();
  rep.set("residual_coarse", r[0]);
  rep.set("residual_fine", r[1]);
  rep.set("ratio", ratio);
  rep.tolerance("ratio_lo", opt.ratio_lo);
  rep.tolerance("ratio_hi", opt.ratio_hi);
  rep.check("halves_under_refinement", ratio >= opt.ratio_lo && ratio <= opt.ratio_hi);
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Comparison principle

inline DiagnosticsReport comparison_check(const ProblemSpec& s1, const ProblemSpec& s2, double theta, double n,
                                          double tol = 1e-10, const SolveOptions& solve = {}) {
  DiagnosticsReport rep;
  rep.name = "comparison_check";
  rep.inputs_digest = hex_digest(s1.describe() + "|" + s2.describe());
  const SpaceGrid g = s1.grid();
  if (g.node_count() != s2.grid().node_count() || s1.steps != s2.steps || s1.T != s2.T)
    throw BadParameters("comparison needs matching grids");
  for (int i : g.interior()) {
    const Vec& x = g.node(i);
    if (s1.f(x) > s2.f(x) || s1.u0(x) > s2.u0(x)) throw BadParameters("comparison data are not ordered");
  }
  SolveOptions so = solve;
  so.step.tol = tol;
  const auto a = solve_parabolic(s1, theta, n, so);
  const auto b = solve_parabolic(s2, theta, n, so);
  double worst = -std::numeric_limits<double>::infinity();
  double margin = std::numeric_limits<double>::infinity();
  for (std::size_t k = 0; k < a.u.values.size(); ++k)
    for (int i : g.interior()) {
      const double d = a.u.values[k][i] - b.u.values[k][i];
      worst = std::max(worst, d);
      if (k > 0) margin = std::min(margin, -d);
    }
  rep.set("max_difference", worst);
  rep.set("min_interior_margin", margin);
  rep.tolerance("tol", tol);
  rep.check("ordered", worst <= 10.0 * tol);
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Measure of superlevel sets

// |{|u| > l}| over levels 1..Nt. With a minorant, also the Chebyshev-type
// bound C l / m(l) with C fitted as the smallest constant covering the table.
inline DiagnosticsReport measure_decay(const GridFunction& u, const std::vector<double>& l_list,
                                       const std::optional<ScalarNFunction>& minorant = std::nullopt) {
  DiagnosticsReport rep;
  rep.name = "measure_decay";
  rep.inputs_digest = hex_digest(u.grid.describe() + ";levels=" + std::to_string(l_list.size()));
  const auto& g = u.grid;
  std::vector<double> meas;
  for (double l : l_list) {
    long double s = 0.0L;
    for (std::size_t k = 1; k < u.values.size(); ++k) {
      const double dt = u.times[k] - u.times[k - 1];
      for (std::size_t i = 0; i < g.node_count(); ++i)
        if (std::abs(u.values[k][i]) > l) s += dt * g.mass(i);
    }
    meas.push_back(static_cast<double>(s));
  }
  double C = 0.0;
  if (minorant)
    for (std::size_t i = 0; i < l_list.size(); ++i)
      if (l_list[i] > 0 && meas[i] > 0) C = std::max(C, meas[i] * (*minorant)(l_list[i]) / l_list[i]);
  auto& t = rep.add_table("measure", {"l", "measure", "chebyshev_bound"});
  for (std::size_t i = 0; i < l_list.size(); ++i) {
    const double l = l_list[i];
    const double bound = minorant && l > 0 ? C * l / (*minorant)(l) : 0.0;
    t.add({l, meas[i], bound});
  }
  rep.set("fitted_C", C);
  rep.finalize();
  return rep;
}

}  // namespace orlicz
