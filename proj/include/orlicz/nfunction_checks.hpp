#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "orlicz/convex_envelope.hpp"
#include "orlicz/core.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/report.hpp"
#include "orlicz/scalar_nfunction.hpp"

namespace orlicz {

// ---------------------------------------------------------------------------
// N-function axioms

struct AxiomOptions {
  int random_pairs = 2000;
  double convexity_tol = 1e-12;
  double trend_factor = 0.99;  // required decay of M/|xi| over the end decades
  std::uint64_t seed = 0;
};

inline DiagnosticsReport check_nfunction(const NFunction& M, const AxiomOptions& opt = {}) {
  DiagnosticsReport rep;
  rep.name = "check_nfunction";
  rep.inputs_digest = hex_digest(M.describe());
  const auto& sp = M.sample();
  const auto xs = sp.x_samples();
  const auto dirs = sp.unit_directions();
  const auto grid = sp.radial_grid();
  rep.set("xi_min", sp.xi_min);
  rep.set("xi_max", sp.xi_max);
  rep.tolerance("convexity_tol", opt.convexity_tol);
  rep.tolerance("trend_factor", opt.trend_factor);

  // Item 1: vanishing at 0, symmetry, positivity away from 0.
  {
    double worst_zero = 0.0, worst_sym = 0.0, min_pos = std::numeric_limits<double>::infinity();
    Vec where{0, 0};
    for (const auto& x : xs) {
      worst_zero = std::max(worst_zero, std::abs(M(x, Vec{0.0, 0.0})));
      for (const auto& e : dirs)
        for (double s : grid) {
          const Vec xi = s * e;
          const double a = M(x, xi), b = M(x, -xi);
          worst_sym = std::max(worst_sym, std::abs(a - b) / (1.0 + std::abs(a)));
          if (std::isnan(a) || a < min_pos) {
            min_pos = std::isnan(a) ? -1.0 : a;
            where = x;
          }
        }
    }
    rep.set("vanishing_max_abs_M0", worst_zero);
    rep.set("symmetry_max_rel_gap", worst_sym);
    rep.set("positivity_min_value", min_pos);
    rep.set("positivity_worst_x1", where[0]);
    rep.check("vanishing_symmetric_positive", worst_zero == 0.0 && worst_sym <= 1e-12 && min_pos > 0.0);
  }

  // Item 2: midpoint convexity on structured and random triples.
  {
    double worst = std::numeric_limits<double>::infinity();
    double worst_a = 0.0, worst_b = 0.0;
    auto test = [&](const Vec& x, const Vec& a, const Vec& b) {
      const double fa = M(x, a), fb = M(x, b);
      const double fm = M(x, 0.5 * (a + b));
      const double margin = (0.5 * (fa + fb) - fm) / (1.0 + fa + fb);
      if (!(margin >= worst)) {
        worst = std::isnan(margin) ? -std::numeric_limits<double>::infinity() : margin;
        worst_a = norm(a);
        worst_b = norm(b);
      }
    };
    for (const auto& x : xs)
      for (const auto& e : dirs)
        for (std::size_t i = 0; i < grid.size(); ++i) {
          for (std::size_t k : {1u, 3u, 9u})
            if (i + k < grid.size()) test(x, grid[i] * e, grid[i + k] * e);
          test(x, grid[i] * e, -grid[i] * e);
        }
    std::mt19937_64 rng(opt.seed);
    std::uniform_real_distribution<double> u01(0.0, 1.0);
    const double lmin = std::log(sp.xi_min), lmax = std::log(sp.xi_max);
    auto random_xi = [&]() {
      const double r = std::exp(lmin + (lmax - lmin) * u01(rng));
      if (M.dim() == 1) return Vec{u01(rng) < 0.5 ? -r : r, 0.0};
      const double a = 2.0 * std::numbers::pi * u01(rng);
      return Vec{r * std::cos(a), r * std::sin(a)};
    };
    for (int n = 0; n < opt.random_pairs; ++n) {
      const Vec& x = xs[static_cast<std::size_t>(u01(rng) * xs.size()) % xs.size()];
      test(x, random_xi(), random_xi());
    }
    rep.set("convexity_min_margin", worst);
    rep.set("convexity_worst_norm_a", worst_a);
    rep.set("convexity_worst_norm_b", worst_b);
    rep.check("convexity", worst >= -opt.convexity_tol);
  }

  // Items 3 and 4: M/|xi| trends over the bottom and top decades.
  auto ratio = [&](double s, bool sup) {
    double v = sup ? 0.0 : std::numeric_limits<double>::infinity();
    for (const auto& x : xs)
      for (const auto& e : dirs) {
        const double r = M(x, s * e) / s;
        v = sup ? std::max(v, r) : std::min(v, r);
      }
    return v;
  };
  {
    const auto low = log_grid(sp.xi_min, 10.0 * sp.xi_min, sp.per_decade);
    bool monotone = true;
    double prev = ratio(low.front(), true);
    for (std::size_t i = 1; i < low.size(); ++i) {
      const double r = ratio(low[i], true);
      if (r < prev * (1.0 - 1e-9)) monotone = false;
      prev = r;
    }
    const double r0 = ratio(low.front(), true), r1 = ratio(low.back(), true);
    rep.set("sublinear_ratio_at_xi_min", r0);
    rep.set("sublinear_ratio_decade_factor", r1 > 0 ? r0 / r1 : 1.0);
    rep.check("sublinear_at_zero", monotone && r0 <= opt.trend_factor * r1);
  }
  {
    const auto high = log_grid(sp.xi_max / 10.0, sp.xi_max, sp.per_decade);
    bool monotone = true;
    double prev = ratio(high.front(), false);
    for (std::size_t i = 1; i < high.size(); ++i) {
      const double r = ratio(high[i], false);
      if (r < prev * (1.0 - 1e-9)) monotone = false;
      prev = r;
    }
    const double r0 = ratio(high.front(), false), r1 = ratio(high.back(), false);
    rep.set("superlinear_ratio_at_xi_max", r1);
    rep.set("superlinear_ratio_decade_factor", r0 > 0 ? r1 / r0 : 0.0);
    rep.check("superlinear_at_infinity", monotone && r1 * opt.trend_factor >= r0);
  }
  rep.notes.push_back("trend tests on the sampled range [xi_min, xi_max]; limits are not machine-checkable");
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Delta_2

struct Delta2Options {
  double threshold = 1024.0;     // bound on M(2 xi)/(1 + M(xi)) over the top two octaves
  double octave_growth = 1.05;   // allowed growth of that sup from one octave to the next
};

inline DiagnosticsReport check_delta2(const NFunction& M, const Delta2Options& opt = {}) {
  DiagnosticsReport rep;
  rep.name = "check_delta2";
  rep.inputs_digest = hex_digest(M.describe());
  const auto& sp = M.sample();
  const auto xs = sp.x_samples();
  const auto dirs = sp.unit_directions();
  const double top = sp.xi_max / 2.0;
  if (!(top > 8.0 * sp.xi_min)) throw BadParameters("check_delta2: sample range shorter than three octaves");
  const auto grid = log_grid(sp.xi_min, top, sp.per_decade);
  auto& tab = rep.add_table("ratio", {"s", "sup_ratio", "sup_homogeneous_ratio"});
  double sup_all = 0.0, sup_hom = 0.0, oct_a = 0.0, oct_b = 0.0;
  for (double s : grid) {
    double r = 0.0, h = 0.0;
    for (const auto& x : xs)
      for (const auto& e : dirs) {
        const double m1 = M(x, s * e), m2 = M(x, 2.0 * s * e);
        r = std::max(r, m2 / (1.0 + m1));
        if (m1 > 0) h = std::max(h, m2 / m1);
      }
    tab.add({s, r, h});
    sup_all = std::max(sup_all, r);
    sup_hom = std::max(sup_hom, h);
    if (s >= top / 4.0 - 1e-12 * top && s <= top / 2.0 + 1e-12 * top) oct_a = std::max(oct_a, r);
    if (s >= top / 2.0 - 1e-12 * top) oct_b = std::max(oct_b, r);
  }
  const double growth = oct_a > 0 ? oct_b / oct_a : 1.0;
  rep.set("sup_ratio", sup_all);
  rep.set("sup_homogeneous_ratio", sup_hom);
  rep.set("sup_ratio_top_octaves", std::max(oct_a, oct_b));
  rep.set("octave_growth", growth);
  rep.set("s_low", grid.front());
  rep.set("s_high", grid.back());
  rep.tolerance("threshold", opt.threshold);
  rep.tolerance("octave_growth", opt.octave_growth);
  rep.check("bounded_top_octaves", std::max(oct_a, oct_b) <= opt.threshold);
  rep.check("no_octave_growth", growth <= opt.octave_growth);
  rep.notes.push_back("trend heuristic over the top two octaves of the sample grid");
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// log-Hoelder continuity in x

using PointPair = std::pair<Vec, Vec>;

// Symmetric pairs around a grid of centres (plus the box centre) at dyadic
// separations 0.75 * 2^{-k}, k = k_min..k_max, along the axes (and the
// diagonal in 2-D). Pairs leaving the box are dropped.
inline std::vector<PointPair> make_probe_pairs(const Box& box, int centres_per_edge = 8, int k_min = 2,
                                               int k_max = 12) {
  std::vector<Vec> centres;
  const auto cx = linspace(box.lo[0], box.hi[0], centres_per_edge + 2);
  const auto cy = box.dim == 2 ? linspace(box.lo[1], box.hi[1], centres_per_edge + 2) : std::vector<double>{0.0};
  for (std::size_t j = box.dim == 2 ? 1 : 0; j < (box.dim == 2 ? cy.size() - 1 : 1); ++j)
    for (std::size_t i = 1; i + 1 < cx.size(); ++i) centres.push_back({cx[i], cy[j]});
  centres.push_back(box.center());
  std::vector<Vec> dirs{{1.0, 0.0}};
  if (box.dim == 2) {
    dirs.push_back({0.0, 1.0});
    dirs.push_back({std::sqrt(0.5), std::sqrt(0.5)});
  }
  std::vector<PointPair> pairs;
  for (const auto& c : centres)
    for (const auto& e : dirs)
      for (int k = k_min; k <= k_max; ++k) {
        const double h = 0.75 * std::ldexp(1.0, -k);
        const Vec x = c - (0.5 * h) * e, y = c + (0.5 * h) * e;
        if (box.contains(x) && box.contains(y)) pairs.emplace_back(x, y);
      }
  return pairs;
}

struct LogHolderOptions {
  double xi_min = 1.0;  // the bound is meaningful for |xi| >= 1
  int per_decade = 16;
  std::vector<double> b1_candidates{1.0, 1.5, 2.0, std::numbers::e, 4.0, 8.0, 16.0, 100.0};
  double finest_growth = 1.05;  // finest band may not exceed the coarser max by more
};

inline DiagnosticsReport check_log_holder(const NFunction& M, const std::vector<PointPair>& pairs,
                                          const LogHolderOptions& opt = {}) {
  DiagnosticsReport rep;
  rep.name = "check_log_holder";
  std::string digest = M.describe();
  for (const auto& [x, y] : pairs) digest += format_double(x[0]) + format_double(x[1]) + format_double(y[0]);
  rep.inputs_digest = hex_digest(digest);
  const auto& sp = M.sample();
  if (!(sp.xi_max > opt.xi_min)) throw BadParameters("check_log_holder: xi_max must exceed xi_min");
  const auto grid = log_grid(opt.xi_min, sp.xi_max, opt.per_decade);
  const auto dirs = sp.unit_directions();

  struct Sample {
    double L, s, log_ratio;
    int band;
  };
  std::vector<Sample> samples;
  for (const auto& [x, y] : pairs) {
    const double d = norm(x - y);
    if (!(d > 0.0) || !(d < 0.5)) throw BadParameters("check_log_holder: pairs need 0 < |x - y| < 1/2");
    const double L = -std::log(d);
    const int band = static_cast<int>(std::floor(-std::log2(d)));
    for (const auto& e : dirs)
      for (double s : grid) {
        const Vec xi = s * e;
        const double mx = M(x, xi), my = M(y, xi);
        if (!(mx > 0.0) || !(my > 0.0))
          throw DegeneratePair("M vanishes at xi != 0 for a sampled point (|xi| = " + format_double(s) + ")");
        for (double lr : {std::log(mx / my), std::log(my / mx)})
          if (lr > 0.0) samples.push_back({L, s, lr, band});
      }
  }

  auto a1_for = [&](double b1, int band) {
    double a1 = 0.0;
    for (const auto& smp : samples) {
      if (band >= 0 && smp.band != band) continue;
      const double den = std::log(std::max(smp.s, b1));
      a1 = std::max(a1, den > 0.0 ? smp.L * smp.log_ratio / den : std::numeric_limits<double>::infinity());
    }
    return a1;
  };
  double best_a1 = std::numeric_limits<double>::infinity(), best_b1 = opt.b1_candidates.front();
  for (double b1 : opt.b1_candidates) {
    const double a1 = a1_for(b1, -1);
    if (a1 < best_a1) {
      best_a1 = a1;
      best_b1 = b1;
    }
  }
  std::map<int, double> per_band;
  for (const auto& [x, y] : pairs) per_band[static_cast<int>(std::floor(-std::log2(norm(x - y))))] = 0.0;
  auto& tab = rep.add_table("bands", {"band", "separation", "a1"});
  for (auto& [band, a1] : per_band) {
    a1 = a1_for(best_b1, band);
    tab.add({static_cast<double>(band), std::ldexp(1.0, -band), a1});
  }
  bool diverging = false;
  if (per_band.size() >= 2) {
    const double finest = per_band.rbegin()->second;
    double coarse = 0.0;
    for (auto it = std::next(per_band.rbegin()); it != per_band.rend(); ++it) coarse = std::max(coarse, it->second);
    diverging = finest > opt.finest_growth * coarse && finest > 1e-12;
    rep.set("a1_finest_band", finest);
    rep.set("a1_coarser_max", coarse);
  }
  rep.set("a1", best_a1);
  rep.set("b1", best_b1);
  rep.set("pairs", static_cast<double>(pairs.size()));
  rep.set("xi_min", opt.xi_min);
  rep.tolerance("finest_growth", opt.finest_growth);
  rep.check("finite_a1", std::isfinite(best_a1));
  rep.check("a1_not_diverging", !diverging);
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Condition (M)

struct CubeCovering {
  double delta = 0.0;
  Box domain;
  std::vector<Box> cubes;     // edge 2 delta, disjoint interiors, union covers the domain
  std::vector<Box> enlarged;  // concentric, edge 4 delta

  static CubeCovering build(const Box& omega, double delta, std::size_t max_cubes = 1u << 22) {
    if (!(delta > 0.0) || !std::isfinite(delta)) throw CoveringFailure("cube half-edge must be positive and finite");
    for (int a = 0; a < omega.dim; ++a)
      if (!(omega.edge(a) > 0.0)) throw CoveringFailure("domain box is degenerate");
    CubeCovering c;
    c.delta = delta;
    c.domain = omega;
    std::array<std::size_t, 2> n{1, 1};
    double count = 1.0;
    for (int a = 0; a < omega.dim; ++a) {
      n[a] = static_cast<std::size_t>(std::ceil(omega.edge(a) / (2.0 * delta) - 1e-12));
      count *= static_cast<double>(n[a]);
    }
    if (count > static_cast<double>(max_cubes)) throw CoveringFailure("too many cubes for delta " + format_double(delta));
    for (std::size_t j = 0; j < n[1]; ++j)
      for (std::size_t i = 0; i < n[0]; ++i) {
        Box q;
        q.dim = omega.dim;
        q.lo = {omega.lo[0] + 2.0 * delta * i, omega.dim == 2 ? omega.lo[1] + 2.0 * delta * j : 0.0};
        q.hi = {q.lo[0] + 2.0 * delta, omega.dim == 2 ? q.lo[1] + 2.0 * delta : 0.0};
        Box e = q;
        for (int a = 0; a < omega.dim; ++a) {
          e.lo[a] -= delta;
          e.hi[a] += delta;
        }
        c.cubes.push_back(q);
        c.enlarged.push_back(e);
      }
    return c;
  }

  static Box intersect(const Box& a, const Box& b) {
    Box r = a;
    for (int k = 0; k < a.dim; ++k) {
      r.lo[k] = std::max(a.lo[k], b.lo[k]);
      r.hi[k] = std::min(a.hi[k], b.hi[k]);
    }
    return r;
  }
};

inline std::vector<Vec> box_samples(const Box& b, int per_edge) {
  SampleSpec s;
  s.domain = b;
  return s.x_samples(per_edge);
}

struct ConditionMOptions {
  double xi_lo = 1.0;        // ratios are fitted on |xi| >= xi_lo
  double xi_floor = 1e-3;    // envelope grid starts here
  double xi_scale = 10.0;    // Xi_delta = min(xi_max, xi_scale * delta^{-d})
  double a_ref = 1.0;        // reference exponent for the per-delta constant c
  double growth_limit = 2.0;  // allowed growth of c per halving of delta
  int x_per_edge = 9;
  int per_decade = 32;
  int planar_per_side = 12;
};

inline DiagnosticsReport check_condition_M(const NFunction& M, const Box& omega, std::vector<double> deltas,
                                           const ConditionMOptions& opt = {}) {
  DiagnosticsReport rep;
  rep.name = "check_condition_M";
  std::string digest = M.describe();
  for (double d : deltas) digest += ";" + format_double(d);
  rep.inputs_digest = hex_digest(digest);
  if (deltas.empty()) throw BadParameters("check_condition_M: empty delta list");
  if (opt.x_per_edge < 8) throw BadParameters("check_condition_M: need at least 8 x samples per edge");
  std::sort(deltas.begin(), deltas.end(), std::greater<>());
  const int N = omega.dim;
  const double delta0 = 1.0 / (3.0 * std::sqrt(static_cast<double>(N)));
  auto& tab = rep.add_table("per_delta", {"delta", "in_regime", "xi_max", "sup_ratio", "c", "a_fit"});
  std::vector<double> cs;
  for (double delta : deltas) {
    const auto cov = CubeCovering::build(omega, delta);
    const double Ld = -std::log(3.0 * delta * std::sqrt(static_cast<double>(N)));
    if (!(Ld > 0.0)) {
      tab.add({delta, 0.0, 0.0, 0.0, 0.0, 0.0});
      rep.notes.push_back("delta " + format_double(delta) + " outside the regime 3 delta sqrt(N) < 1; skipped");
      continue;
    }
    const double Xi = std::min(M.sample().xi_max, opt.xi_scale * std::pow(delta, -N));
    double sup_ratio = 0.0, c = 0.0, a_fit = 0.0, c_low = 1.0;
    std::vector<std::pair<double, double>> pts;  // (|xi|, ratio) with |xi| >= xi_lo
    for (std::size_t j = 0; j < cov.cubes.size(); ++j) {
      const auto xq = box_samples(CubeCovering::intersect(cov.cubes[j], omega), opt.x_per_edge);
      const auto xe = box_samples(CubeCovering::intersect(cov.enlarged[j], omega), opt.x_per_edge);
      if (M.is_radial()) {
        std::vector<double> s{0.0};
        for (double v : log_grid(opt.xi_floor, Xi, opt.per_decade)) s.push_back(v);
        if (opt.xi_lo > opt.xi_floor && opt.xi_lo < Xi) {
          s.push_back(opt.xi_lo);
          std::sort(s.begin(), s.end());
          s.erase(std::unique(s.begin(), s.end(), [](double a, double b) { return std::abs(a - b) <= 1e-12 * b; }),
                  s.end());
        }
        std::vector<double> inf(s.size());
        for (std::size_t i = 0; i < s.size(); ++i) {
          double m = std::numeric_limits<double>::infinity();
          for (const auto& x : xe) m = std::min(m, M.radial(x, s[i]));
          inf[i] = m;
        }
        const auto env = convex_envelope(s, inf);
        for (std::size_t i = 1; i < s.size(); ++i) {
          if (s[i] < opt.xi_lo * (1.0 - 1e-12)) continue;
          double r = 0.0;
          for (const auto& x : xq) r = std::max(r, M.radial(x, s[i]) / env[i]);
          pts.emplace_back(s[i], r);
        }
      } else {
        GridSamples g;
        std::vector<double> half = log_grid(opt.xi_floor, Xi, std::max(1, static_cast<int>(std::ceil(
                                                                               opt.planar_per_side /
                                                                               std::log10(Xi / opt.xi_floor)))));
        std::vector<double> axis;
        for (auto it = half.rbegin(); it != half.rend(); ++it) axis.push_back(-*it);
        axis.push_back(0.0);
        for (double v : half) axis.push_back(v);
        g.axes = {axis, axis};
        const std::size_t n = axis.size();
        g.values.resize(n * n);
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t a = 0; a < n; ++a) {
            double m = std::numeric_limits<double>::infinity();
            for (const auto& x : xe) m = std::min(m, M(x, Vec{axis[a], axis[b]}));
            g.values[a + n * b] = m;
          }
        const auto env = convex_envelope(g);
        for (std::size_t b = 0; b < n; ++b)
          for (std::size_t a = 0; a < n; ++a) {
            const Vec xi{axis[a], axis[b]};
            const double s = norm(xi);
            if (s < opt.xi_lo * (1.0 - 1e-12)) continue;
            double r = 0.0;
            for (const auto& x : xq) r = std::max(r, M(x, xi) / env.values[a + n * b]);
            pts.emplace_back(s, r);
          }
      }
    }
    for (const auto& [s, r] : pts) {
      sup_ratio = std::max(sup_ratio, r);
      c = std::max(c, r / std::max(1.0, std::pow(s, opt.a_ref / Ld)));
      if (s <= std::numbers::e) c_low = std::max(c_low, r);
    }
    // Smallest a making the bound hold with c fixed to the low-|xi| ratio.
    for (const auto& [s, r] : pts)
      if (s > std::numbers::e && r > c_low) a_fit = std::max(a_fit, Ld * std::log(r / c_low) / std::log(s));
    tab.add({delta, 1.0, Xi, sup_ratio, c, a_fit});
    cs.push_back(c);
  }
  double growth_max = 0.0, growth_min = std::numeric_limits<double>::infinity();
  for (std::size_t i = 1; i < cs.size(); ++i) {
    const double g = cs[i] / cs[i - 1];
    growth_max = std::max(growth_max, g);
    growth_min = std::min(growth_min, g);
  }
  if (cs.size() < 2) growth_min = growth_max = 1.0;
  double c_max = 0.0;
  for (double c : cs) c_max = std::max(c_max, c);
  rep.set("c", c_max);
  rep.set("a", opt.a_ref);
  rep.set("c_growth_max", growth_max);
  rep.set("c_growth_min", growth_min);
  rep.set("delta0", delta0);
  rep.tolerance("growth_limit", opt.growth_limit);

  // Finite integrals of M(., z) over the domain for a few z.
  bool integrable = true;
  {
    const auto xs = box_samples(omega, 33);
    const double w = omega.measure() / static_cast<double>(xs.size());
    auto& it = rep.add_table("integrals", {"z_norm", "integral"});
    for (double zn : {0.5, 1.0, 10.0, M.sample().xi_max}) {
      double worst = 0.0;
      for (const auto& e : M.sample().unit_directions()) {
        double total = 0.0;
        for (const auto& x : xs) total += M(x, zn * e) * w;
        worst = std::isfinite(total) ? std::max(worst, total) : total;
        if (!std::isfinite(total)) break;
      }
      it.add({zn, std::isfinite(worst) ? worst : std::numeric_limits<double>::max()});
      integrable = integrable && std::isfinite(worst);
    }
  }
  rep.check("in_regime_deltas_present", !cs.empty());
  rep.check("c_finite", std::isfinite(c_max));
  rep.check("c_stable", growth_max <= opt.growth_limit);
  rep.check("integrable_in_x", integrable);
  rep.notes.push_back("constants are fitted on samples and carry no minimality claim");
  rep.finalize();
  return rep;
}

// ---------------------------------------------------------------------------
// Minorant and growth comparison

struct MinorantOptions {
  double s_min = 0.0;  // 0: sample xi_min
  double s_max = 0.0;  // 0: sample xi_max
  int per_decade = 512;
};

inline ScalarNFunction build_minorant(const NFunction& M, double alpha, const MinorantOptions& opt = {}) {
  if (!(alpha > 1.0)) throw BadParameters("build_minorant needs alpha > 1");
  const auto& sp = M.sample();
  const double lo = opt.s_min > 0 ? opt.s_min : sp.xi_min;
  const double hi = opt.s_max > 0 ? opt.s_max : sp.xi_max;
  std::vector<double> s{0.0};
  for (double v : log_grid(lo, hi, opt.per_decade)) s.push_back(v);
  const auto xs = sp.x_samples();
  const auto dirs = sp.unit_directions();
  std::vector<double> inf(s.size());
  inf[0] = 0.0;
  for (std::size_t i = 1; i < s.size(); ++i) {
    inf[i] = radial_inf(M, s[i], xs, dirs);
    if (!std::isfinite(inf[i])) throw NonIntegrable("inf of M is not finite at s = " + format_double(s[i]));
  }
  const auto mstar = convex_envelope(s, inf);
  for (std::size_t i = 1; i < s.size(); ++i) {
    const double slope = (mstar[i] - mstar[i - 1]) / (s[i] - s[i - 1]);
    if (!std::isfinite(slope)) throw NonIntegrable("derivative of the envelope is not finite");
  }
  std::vector<double> m(s.size());
  m[0] = 0.0;
  m[1] = mstar[1];
  for (std::size_t k = 1; k + 1 < s.size(); ++k) {
    const double secant = mstar[k + 1] - mstar[k];
    const double capped = m[k] * std::expm1(alpha * std::log(s[k + 1] / s[k]));
    m[k + 1] = m[k] + std::min(secant, capped);
  }
  return ScalarNFunction::tabulated(std::move(s), std::move(m));
}

// Wraps a radial profile as an x-independent N-function on a given domain.
inline NFunction as_nfunction(const ScalarNFunction& m, int dim, SampleSpec sample) {
  if (m.is_tabulated()) return NFunction::tabulated_radial(dim, m, std::move(sample));
  return NFunction::from_radial(
      dim, [m](const Vec&, double s) { return m(s); }, std::move(sample), "profile:" + m.describe(), true);
}

struct GrowthOptions {
  double threshold = 1e-2;
};

inline DiagnosticsReport grows_essentially_more_rapidly(const ScalarNFunction& m, const NFunction& M,
                                                        const GrowthOptions& opt = {}) {
  DiagnosticsReport rep;
  rep.name = "grows_essentially_more_rapidly";
  rep.inputs_digest = hex_digest(m.describe() + M.describe());
  const auto& sp = M.sample();
  const double top = std::min(sp.xi_max, m.s_max());
  const auto grid = log_grid(top / 10.0, top, sp.per_decade);
  const auto xs = sp.x_samples();
  const auto dirs = sp.unit_directions();
  auto& tab = rep.add_table("ratio", {"s", "M_sup_over_m"});
  bool decreasing = true;
  double prev = std::numeric_limits<double>::infinity(), last = 0.0;
  for (double s : grid) {
    const double ms = m(s);
    const double r = std::isinf(ms) ? 0.0 : radial_sup(M, s, xs, dirs) / ms;
    tab.add({s, r});
    if (r > prev * (1.0 + 1e-9)) decreasing = false;
    prev = r;
    last = r;
  }
  rep.set("final_ratio", last);
  rep.set("s_low", grid.front());
  rep.set("s_high", grid.back());
  rep.tolerance("threshold", opt.threshold);
  rep.check("ratio_decreasing", decreasing);
  rep.check("ratio_below_threshold", last <= opt.threshold);
  rep.finalize();
  return rep;
}

}  // namespace orlicz
