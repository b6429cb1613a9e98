#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include <boost/math/quadrature/gauss_kronrod.hpp>

#include "orlicz/core.hpp"
#include "orlicz/modular.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/report.hpp"

namespace orlicz {

// ---------------------------------------------------------------------------
// Truncations

inline double truncate(double v, double k) {
  if (!(k > 0.0)) throw BadParameters("truncation level must be positive");
  return std::clamp(v, -k, k);
}

// T^{k,l}: clamp to [-k, l].
inline double truncate(double v, double k, double l) {
  if (!(k > 0.0) || !(l > 0.0)) throw BadParameters("truncation levels must be positive");
  return std::clamp(v, -k, l);
}

inline std::vector<double> truncate(std::span<const double> v, double k) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = truncate(v[i], k);
  return out;
}

inline std::vector<double> truncate(std::span<const double> v, double k, double l) {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = truncate(v[i], k, l);
  return out;
}

// ---------------------------------------------------------------------------
// The C-infinity bump exp(1/(z^2 - 1)) on (-1, 1) and its normalized CDF.

namespace bump {

inline double raw(double z) {
  const double q = z * z;
  return q < 1.0 ? std::exp(1.0 / (q - 1.0)) : 0.0;
}

// Integral of the raw bump over R (d = 1) and over the unit disc (d = 2).
inline double mass(int d) {
  using boost::math::quadrature::gauss_kronrod;
  static const double m1 = gauss_kronrod<double, 61>::integrate(raw, -1.0, 1.0, 6, 1e-14);
  static const double m2 = 2.0 * std::numbers::pi *
                           gauss_kronrod<double, 61>::integrate([](double r) { return r * raw(r); }, 0.0, 1.0, 6,
                                                                1e-15);
  return d == 1 ? m1 : m2;
}

// Unit-mass kernel on (-1, 1).
inline double density(double z) { return raw(z) / mass(1); }

// W(z) = integral of the density over (-1, z).
inline double cdf(double z) {
  if (z <= -1.0) return 0.0;
  if (z >= 1.0) return 1.0;
  using boost::math::quadrature::gauss_kronrod;
  if (z <= 0.0) return gauss_kronrod<double, 61>::integrate(density, -1.0, z, 6, 1e-14);
  return 1.0 - gauss_kronrod<double, 61>::integrate(density, z, 1.0, 6, 1e-14);
}

}  // namespace bump

// ---------------------------------------------------------------------------
// Cutoffs

struct CutoffParams {
  enum class Kind { psi_l, theta_tau_r, phi_r, G_l };
  Kind kind = Kind::psi_l;
  double l = 1.0;
  double tau = 0.5;
  double r = 0.1;
  double T = 1.0;

  void validate() const {
    switch (kind) {
      case Kind::psi_l:
      case Kind::G_l:
        if (!(l >= 0.0)) throw BadParameters("cutoff level l must be nonnegative");
        break;
      case Kind::theta_tau_r:
        if (!(r > 0.0) || !(tau > 0.0)) throw BadParameters("theta cutoff needs tau > 0 and r > 0");
        if (!(tau + r < T)) throw BadSupport("theta cutoff support [-r, tau + r) must end before T");
        break;
      case Kind::phi_r:
        if (!(r > 0.0) || !(2.0 * r <= T)) throw BadParameters("phi cutoff needs 0 < 2r <= T");
        break;
    }
  }
};

inline double cutoff(const CutoffParams& p, double s) {
  p.validate();
  switch (p.kind) {
    case CutoffParams::Kind::psi_l: return std::min(std::max(p.l + 1.0 - std::abs(s), 0.0), 1.0);
    case CutoffParams::Kind::G_l: return std::clamp(s, -(p.l + 1.0), p.l + 1.0) - std::clamp(s, -p.l, p.l);
    case CutoffParams::Kind::theta_tau_r:
      // (omega_r * 1_[0,tau))(t) = W(t / r) - W((t - tau) / r)
      return bump::cdf(s / p.r) - bump::cdf((s - p.tau) / p.r);
    case CutoffParams::Kind::phi_r: {
      // Smooth descent from 1 at T - 2r to 0 at T - r.
      const double z = 2.0 * (s - (p.T - 2.0 * p.r)) / p.r - 1.0;
      return 1.0 - bump::cdf(z);
    }
  }
  return 0.0;
}

// Exact Lipschitz constant of phi_r: the steepest slope of the smooth descent.
inline double phi_r_lipschitz(double r) { return 2.0 * bump::density(0.0) / r; }

// ---------------------------------------------------------------------------
// Exponential time regularization g_mu = mu * int_{-inf}^t e^{mu (s - t)} g(s) ds

// g[k] holds the values on (t_{k-1}, t_k] (g[0] is ignored); history is the
// constant value for t <= 0. Returns g_mu at every t_k.
inline std::vector<std::vector<double>> time_regularize(const std::vector<double>& times,
                                                        const std::vector<std::vector<double>>& g,
                                                        const std::vector<double>& history, double mu) {
  if (!(mu > 0.0)) throw BadParameters("mu must be positive");
  if (times.size() != g.size() || times.empty()) throw BadParameters("time_regularize: times and levels differ");
  std::vector<std::vector<double>> out(times.size());
  out[0] = history;
  for (std::size_t k = 1; k < times.size(); ++k) {
    if (g[k].size() != history.size()) throw BadParameters("time_regularize: level size mismatch");
    const double decay = std::exp(-mu * (times[k] - times[k - 1]));
    out[k].resize(history.size());
    for (std::size_t i = 0; i < history.size(); ++i) out[k][i] = decay * out[k - 1][i] + (1.0 - decay) * g[k][i];
  }
  return out;
}

// Max-norm residual of d/dt g_mu + mu (g_mu - g) with backward differences.
inline double time_regularize_ode_residual(const std::vector<double>& times, const std::vector<std::vector<double>>& g,
                                           const std::vector<std::vector<double>>& gmu, double mu) {
  double worst = 0.0;
  for (std::size_t k = 1; k < times.size(); ++k) {
    const double dt = times[k] - times[k - 1];
    for (std::size_t i = 0; i < gmu[k].size(); ++i)
      worst = std::max(worst, std::abs((gmu[k][i] - gmu[k - 1][i]) / dt + mu * (gmu[k][i] - g[k][i])));
  }
  return worst;
}

// ---------------------------------------------------------------------------
// Spatial mollifier S_delta on boxes

// Piecewise-constant field on the uniform cells of a box.
struct CellField {
  Box box = Box::unit(1);
  std::array<int, 2> cells{1, 1};
  std::vector<Vec> values;

  double h(int axis) const { return box.edge(axis) / cells[axis]; }
  int ny() const { return box.dim == 2 ? cells[1] : 1; }
  std::size_t index(int i, int j) const { return static_cast<std::size_t>(i) + static_cast<std::size_t>(cells[0]) * j; }
  Vec center(int i, int j) const {
    return {box.lo[0] + (i + 0.5) * h(0), box.dim == 2 ? box.lo[1] + (j + 0.5) * h(1) : 0.0};
  }

  static CellField sample(const Box& box, std::array<int, 2> cells, const std::function<Vec(const Vec&)>& f) {
    CellField c;
    c.box = box;
    c.cells = {cells[0], box.dim == 2 ? cells[1] : 1};
    for (int j = 0; j < c.ny(); ++j)
      for (int i = 0; i < c.cells[0]; ++i) c.values.push_back(f(c.center(i, j)));
    return c;
  }

  // Value of the piecewise-constant field at x; zero outside the box.
  Vec at(const Vec& x) const {
    if (!box.contains(x)) return {0.0, 0.0};
    const int i = std::clamp(static_cast<int>(std::floor((x[0] - box.lo[0]) / h(0))), 0, cells[0] - 1);
    const int j = box.dim == 2 ? std::clamp(static_cast<int>(std::floor((x[1] - box.lo[1]) / h(1))), 0, cells[1] - 1) : 0;
    return values[index(i, j)];
  }

  double integral(int component = 0) const {
    double s = 0.0;
    for (const auto& v : values) s += v[component];
    return s * h(0) * (box.dim == 2 ? h(1) : 1.0);
  }

  SampledField to_sampled() const {
    SampledField s;
    s.dim = box.dim;
    const double w = h(0) * (box.dim == 2 ? h(1) : 1.0);
    for (int j = 0; j < ny(); ++j)
      for (int i = 0; i < cells[0]; ++i) {
        s.points.push_back(center(i, j));
        s.weights.push_back(w);
        s.values.push_back(values[index(i, j)]);
      }
    return s;
  }

  // Central-difference gradient of the first component (one-sided at the edges).
  CellField gradient() const {
    CellField g = *this;
    auto v = [&](int i, int j) { return values[index(i, j)][0]; };
    for (int j = 0; j < ny(); ++j)
      for (int i = 0; i < cells[0]; ++i) {
        Vec d{0.0, 0.0};
        const int il = std::max(i - 1, 0), ir = std::min(i + 1, cells[0] - 1);
        d[0] = (v(ir, j) - v(il, j)) / ((ir - il) * h(0));
        if (box.dim == 2) {
          const int jl = std::max(j - 1, 0), jr = std::min(j + 1, cells[1] - 1);
          d[1] = (v(i, jr) - v(i, jl)) / ((jr - jl) * h(1));
        }
        g.values[index(i, j)] = d;
      }
    return g;
  }
};

// S_delta xi(x) = sum over lattice offsets of rho_delta(k h) xi(c + (x + k h - c) / kappa) h^d,
// kappa = 1 - delta / R, c the box centre; the discrete kernel is normalized to unit mass.
inline CellField mollify_space(const CellField& xi, double delta, double R) {
  if (!(R > 0.0) || !(delta > 0.0)) throw BadParameters("mollify_space needs delta > 0 and R > 0");
  if (delta >= R / 4.0) throw DeltaTooLarge("delta must be below R/4");
  const Box& box = xi.box;
  for (int a = 0; a < box.dim; ++a)
    if (R > 0.5 * box.edge(a) * (1.0 + 1e-12)) throw BadParameters("ball B(c, R) must lie inside the box");
  const double kappa = 1.0 - delta / R;
  const Vec c = box.center();
  const int d = box.dim;
  const int kx = static_cast<int>(std::floor(delta / xi.h(0)));
  const int ky = d == 2 ? static_cast<int>(std::floor(delta / xi.h(1))) : 0;
  struct Tap {
    Vec offset;
    double w;
  };
  std::vector<Tap> taps;
  double total = 0.0;
  for (int b = -ky; b <= ky; ++b)
    for (int a = -kx; a <= kx; ++a) {
      const Vec off{a * xi.h(0), d == 2 ? b * xi.h(1) : 0.0};
      const double w = bump::raw(norm(off) / delta);
      if (w > 0.0 || (a == 0 && b == 0)) {
        taps.push_back({off, w > 0.0 ? w : 1.0});
        total += taps.back().w;
      }
    }
  for (auto& t : taps) t.w /= total;
  CellField out = xi;
  for (int j = 0; j < xi.ny(); ++j)
    for (int i = 0; i < xi.cells[0]; ++i) {
      const Vec x = xi.center(i, j);
      Vec acc{0.0, 0.0};
      for (const auto& t : taps) {
        const Vec y = x + t.offset;
        const Vec src = c + (1.0 / kappa) * (y - c);
        acc = acc + t.w * xi.at(src);
      }
      out.values[out.index(i, j)] = acc;
    }
  return out;
}

// Empirical constant C in modular(M, S_delta xi) <= C modular(M, xi).
inline double mollifier_modular_ratio(const NFunction& M, const CellField& xi, double delta, double R) {
  const double base = modular(M, xi.to_sampled());
  if (!(base > 0.0)) return 0.0;
  return modular(M, mollify_space(xi, delta, R).to_sampled()) / base;
}

struct ApproximationOptions {
  std::vector<double> deltas{1.0 / 8, 1.0 / 16, 1.0 / 32};
  std::vector<double> levels{0.5, 1.0, 2.0};
  int lambda_steps = 8;
  double lambda_tol = 1e-2;  // modular level counted as "small"
};

// Trend of modular(M, (grad S_delta T_l phi - grad phi) / lambda) as delta -> 0,
// for each truncation level l. Passes when, at the largest l, the modular at
// lambda = 1 decreases monotonically along the delta list.
inline DiagnosticsReport approximation_trend(const NFunction& M, const std::function<double(const Vec&)>& phi,
                                             const std::function<Vec(const Vec&)>& grad_phi, const Box& box,
                                             std::array<int, 2> cells, double R, ApproximationOptions opt = {}) {
  DiagnosticsReport rep;
  rep.name = "approximation_trend";
  rep.inputs_digest = hex_digest(M.describe() + ";R=" + format_double(R));
  std::sort(opt.deltas.begin(), opt.deltas.end(), std::greater<>());
  std::sort(opt.levels.begin(), opt.levels.end());
  const auto target = CellField::sample(box, cells, grad_phi).to_sampled();
  auto& tab = rep.add_table("trend", {"l", "delta", "modular_lambda1", "smallest_lambda"});
  std::vector<double> last_level;
  for (double l : opt.levels) {
    const auto tl = CellField::sample(box, cells, [&](const Vec& x) { return Vec{truncate(phi(x), l), 0.0}; });
    std::vector<double> row_vals;
    for (double delta : opt.deltas) {
      const auto g = mollify_space(tl, delta, R).gradient().to_sampled();
      const auto diff = g.minus(target);
      const double m1 = modular(M, diff);
      double smallest = 0.0;
      for (int k = 0; k < opt.lambda_steps; ++k) {
        const double lambda = std::ldexp(1.0, k);
        if (modular_scaled(M, diff, 1.0 / lambda) <= opt.lambda_tol) {
          smallest = lambda;
          break;
        }
      }
      tab.add({l, delta, m1, smallest});
      row_vals.push_back(m1);
    }
    last_level = row_vals;
  }
  bool monotone = true;
  for (std::size_t i = 1; i < last_level.size(); ++i)
    if (last_level[i] > last_level[i - 1] * (1.0 + 1e-12)) monotone = false;
  rep.set("final_modular", last_level.empty() ? 0.0 : last_level.back());
  rep.set("first_modular", last_level.empty() ? 0.0 : last_level.front());
  rep.check("decreasing_in_delta", monotone);
  rep.finalize();
  return rep;
}

}  // namespace orlicz
