#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <string>
#include <vector>

#include "orlicz/core.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/report.hpp"

namespace orlicz {

// A vector field known at quadrature nodes (cell midpoints in space-time),
// each with its weight dt * |cell|.
struct SampledField {
  int dim = 1;
  std::vector<Vec> points;
  std::vector<double> weights;
  std::vector<Vec> values;

  std::size_t size() const { return values.size(); }

  // Midpoint samples of f on the uniform cells of a box, one time slice of
  // length `duration`.
  static SampledField cells(const Box& box, std::array<int, 2> n, const std::function<Vec(const Vec&)>& f,
                            double duration = 1.0) {
    return space_time(box, n, 1, duration, [&](double, const Vec& x) { return f(x); });
  }

  // Midpoint samples on `slices` uniform time slices of [0, T].
  static SampledField space_time(const Box& box, std::array<int, 2> n, int slices, double T,
                                 const std::function<Vec(double, const Vec&)>& f) {
    SampledField s;
    s.dim = box.dim;
    const int ny = box.dim == 2 ? n[1] : 1;
    const double hx = box.edge(0) / n[0], hy = box.dim == 2 ? box.edge(1) / n[1] : 1.0;
    const double dt = T / slices;
    for (int k = 0; k < slices; ++k) {
      const double t = (k + 0.5) * dt;
      for (int j = 0; j < ny; ++j)
        for (int i = 0; i < n[0]; ++i) {
          Vec x{box.lo[0] + (i + 0.5) * hx, box.dim == 2 ? box.lo[1] + (j + 0.5) * hy : 0.0};
          s.points.push_back(x);
          s.weights.push_back(dt * hx * hy);
          s.values.push_back(f(t, x));
        }
    }
    return s;
  }

  SampledField with_values(std::vector<Vec> v) const {
    if (v.size() != values.size()) throw BadParameters("SampledField: value count mismatch");
    SampledField s = *this;
    s.values = std::move(v);
    return s;
  }
  SampledField scaled(double c) const {
    SampledField s = *this;
    for (auto& v : s.values) v = c * v;
    return s;
  }
  SampledField minus(const SampledField& o) const {
    require_same_grid(o);
    SampledField s = *this;
    for (std::size_t i = 0; i < values.size(); ++i) s.values[i] = values[i] - o.values[i];
    return s;
  }
  SampledField plus(const SampledField& o) const {
    require_same_grid(o);
    SampledField s = *this;
    for (std::size_t i = 0; i < values.size(); ++i) s.values[i] = values[i] + o.values[i];
    return s;
  }
  bool same_grid(const SampledField& o) const {
    return dim == o.dim && points == o.points && weights == o.weights;
  }
  void require_same_grid(const SampledField& o) const {
    if (!same_grid(o)) throw BadParameters("fields live on different grids");
  }
};

inline double modular(const NFunction& M, const SampledField& xi) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < xi.size(); ++i) total += xi.weights[i] * M(xi.points[i], xi.values[i]);
  return static_cast<double>(total);
}

inline double modular_scaled(const NFunction& M, const SampledField& xi, double inv_lambda) {
  long double total = 0.0L;
  for (std::size_t i = 0; i < xi.size(); ++i)
    total += xi.weights[i] * M(xi.points[i], inv_lambda * xi.values[i]);
  return static_cast<double>(total);
}

// inf{lambda > 0 : modular(M, xi / lambda) <= 1} by bisection in log(lambda).
inline double luxemburg_norm(const NFunction& M, const SampledField& xi, double rel_tol = 1e-10) {
  bool zero = true;
  for (const auto& v : xi.values)
    if (v[0] != 0.0 || v[1] != 0.0) zero = false;
  if (zero) return 0.0;
  auto feasible = [&](double lambda) { return modular_scaled(M, xi, 1.0 / lambda) <= 1.0; };
  double lo = 1e-12, hi = 1e12;
  if (!feasible(hi)) throw Unbounded("modular(xi / lambda) > 1 for lambda up to 1e12");
  if (feasible(lo)) return lo;
  if (feasible(1.0))
    hi = 1.0;
  else
    lo = 1.0;
  while (hi / lo - 1.0 > rel_tol) {
    const double mid = std::sqrt(lo * hi);
    if (feasible(mid))
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

struct FieldSequence {
  std::vector<SampledField> members;

  explicit FieldSequence(std::vector<SampledField> m) : members(std::move(m)) {
    if (members.empty()) throw BadParameters("FieldSequence must be nonempty");
    for (const auto& f : members) members.front().require_same_grid(f);
  }
  std::size_t size() const { return members.size(); }
};

struct ModularConvergenceOptions {
  int lambda_steps = 11;        // lambda = 1, 2, ..., 2^(steps - 1)
  double tail_fraction = 0.25;  // tail = last quarter of the sequence
  double rel_tol = 1e-2;        // tail max relative to the sequence max
  double abs_tol = 1e-14;       // absolute floor (exactly zero sequences)
  double measure_eps = 1e-3;    // threshold for the convergence-in-measure cross-check
};

inline DiagnosticsReport modular_convergence_test(const NFunction& M, const FieldSequence& seq,
                                                  const SampledField& target,
                                                  const ModularConvergenceOptions& opt = {}) {
  DiagnosticsReport rep;
  rep.name = "modular_convergence_test";
  rep.inputs_digest = hex_digest(M.describe() + ";n=" + std::to_string(seq.size()));
  seq.members.front().require_same_grid(target);
  const std::size_t n = seq.size();
  const std::size_t tail_start =
      std::min(n - 1, static_cast<std::size_t>(std::floor((1.0 - opt.tail_fraction) * static_cast<double>(n))));
  std::vector<SampledField> diffs;
  diffs.reserve(n);
  for (const auto& f : seq.members) diffs.push_back(f.minus(target));

  auto& tab = rep.add_table("sweep", {"lambda", "first", "max", "tail_max", "last", "convergent"});
  double found = 0.0;
  for (int k = 0; k < opt.lambda_steps; ++k) {
    const double lambda = std::ldexp(1.0, k);
    std::vector<double> v(n);
    for (std::size_t i = 0; i < n; ++i) v[i] = modular_scaled(M, diffs[i], 1.0 / lambda);
    const double vmax = *std::max_element(v.begin(), v.end());
    const double tail = *std::max_element(v.begin() + static_cast<std::ptrdiff_t>(tail_start), v.end());
    const bool ok = tail <= opt.rel_tol * vmax + opt.abs_tol;
    tab.add({lambda, v.front(), vmax, tail, v.back(), ok ? 1.0 : 0.0});
    if (ok && found == 0.0) found = lambda;
  }
  rep.set("smallest_lambda", found);
  rep.tolerance("rel_tol", opt.rel_tol);
  rep.tolerance("abs_tol", opt.abs_tol);

  // Cross-check via uniform integrability plus convergence in measure
  // (informational; only meaningful for scalarizable sequences).
  {
    const double lambda = found > 0 ? found : 1.0;
    double tail_measure = 0.0, first_measure = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
      double meas = 0.0;
      for (std::size_t q = 0; q < diffs[i].size(); ++q)
        if (norm(diffs[i].values[q]) > opt.measure_eps) meas += diffs[i].weights[q];
      if (i == 0) first_measure = meas;
      if (i >= tail_start) tail_measure = std::max(tail_measure, meas);
    }
    double ui = 0.0;
    const double R = 10.0;
    for (const auto& d : diffs) {
      double s = 0.0;
      for (std::size_t q = 0; q < d.size(); ++q) {
        const double m = M(d.points[q], (1.0 / lambda) * d.values[q]);
        if (m >= R) s += d.weights[q] * m;
      }
      ui = std::max(ui, s);
    }
    rep.set("measure_first", first_measure);
    rep.set("measure_tail_max", tail_measure);
    rep.set("ui_index_R10", ui);
  }
  rep.check("modular_convergent", found > 0.0);
  rep.finalize();
  return rep;
}

// Scalar fields on a shared grid (values with weights).
struct ScalarSamples {
  std::vector<double> values;
  std::vector<double> weights;
};

// For each R: sup_n of the integral of |f_n| over {|f_n| >= R}.
inline Table uniform_integrability_index(const std::vector<ScalarSamples>& seq, const std::vector<double>& R_list) {
  Table t{"ui_index", {"R", "index"}, {}};
  for (double R : R_list) {
    double sup = 0.0;
    for (const auto& f : seq) {
      double s = 0.0;
      for (std::size_t i = 0; i < f.values.size(); ++i)
        if (std::abs(f.values[i]) >= R) s += f.weights[i] * std::abs(f.values[i]);
      sup = std::max(sup, s);
    }
    t.add({R, sup});
  }
  return t;
}

// Modular bounds force uniform integrability: when sup_n modular(M, f_n) is
// finite the index has to decay over R_list.
inline DiagnosticsReport check_modular_uniform_integrability(const NFunction& M, const std::vector<ScalarSamples>& seq,
                                                             const std::vector<double>& R_list,
                                                             const std::vector<Vec>& points, double tol = 1e-2) {
  DiagnosticsReport rep;
  rep.name = "modular_uniform_integrability";
  rep.inputs_digest = hex_digest(M.describe() + ";n=" + std::to_string(seq.size()));
  double sup_mod = 0.0;
  for (const auto& f : seq) {
    double m = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i) m += f.weights[i] * M(points[i], Vec{f.values[i], 0.0});
    sup_mod = std::max(sup_mod, m);
  }
  rep.set("sup_modular", sup_mod);
  auto t = uniform_integrability_index(seq, R_list);
  const double first = t.rows.front()[1], last = t.rows.back()[1];
  rep.tables.push_back(std::move(t));
  rep.set("index_first", first);
  rep.set("index_last", last);
  rep.tolerance("decay_tol", tol);
  if (std::isfinite(sup_mod)) rep.check("index_decays", last <= tol * std::max(first, 1e-300));
  rep.finalize();
  return rep;
}

}  // namespace orlicz
