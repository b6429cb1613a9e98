#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <utility>

#include "orlicz/conjugate.hpp"
#include "orlicz/core.hpp"
#include "orlicz/nfunction.hpp"
#include "orlicz/nfunction_checks.hpp"
#include "orlicz/report.hpp"
#include "orlicz/scalar_nfunction.hpp"
#include "orlicz/spatial_function.hpp"

namespace orlicz {

namespace detail {

// Jacobian of xi -> phi(r) xi / r with r = |xi| regularized by eps:
// (phi(r)/r) (I - e e^T) + phi'(r) e e^T.
inline Mat radial_jacobian(const Vec& xi, double phi_over_r, double dphi, double r) {
  Mat J{};
  const Vec e = r > 0 ? (1.0 / r) * xi : Vec{0.0, 0.0};
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) {
      const double ee = e[i] * e[j];
      J[i][j] = phi_over_r * ((i == j ? 1.0 : 0.0) - ee) + dphi * ee;
    }
  return J;
}

}  // namespace detail

// A(x, xi) paired with its governing N-function and coercivity constant.
class VectorField {
 public:
  using Rule = std::function<Vec(const Vec& x, const Vec& xi)>;
  using JacobianRule = std::function<Mat(const Vec& x, const Vec& xi, double eps)>;

  VectorField(int dim, Rule rule, JacobianRule jacobian, NFunction governing, double c_A, std::string label)
      : dim_(dim),
        rule_(std::move(rule)),
        jac_(std::move(jacobian)),
        M_(std::move(governing)),
        c_A_(c_A),
        label_(std::move(label)) {
    if (dim < 1 || dim > 2) throw DimensionUnsupported("vector fields are supported for d = 1, 2");
    if (M_.dim() != dim) throw BadParameters("vector field and governing N-function differ in dimension");
  }

  // User-defined field; the Jacobian is taken by central differences.
  static VectorField custom(int dim, Rule rule, NFunction governing, double c_A, std::string label) {
    auto r = rule;
    JacobianRule fd = [r, dim](const Vec& x, const Vec& xi, double) {
      Mat J{};
      for (int j = 0; j < dim; ++j) {
        const double h = 1e-6 * std::max(1.0, std::abs(xi[j]));
        Vec a = xi, b = xi;
        a[j] += h;
        b[j] -= h;
        const Vec fa = r(x, a), fb = r(x, b);
        for (int i = 0; i < dim; ++i) J[i][j] = (fa[i] - fb[i]) / (2.0 * h);
      }
      return J;
    };
    return VectorField(dim, std::move(rule), std::move(fd), std::move(governing), c_A, std::move(label));
  }

  int dim() const { return dim_; }
  Vec operator()(const Vec& x, const Vec& xi) const { return rule_(x, xi); }
  Mat jacobian(const Vec& x, const Vec& xi, double eps = 1e-12) const { return jac_(x, xi, eps); }
  const NFunction& governing() const { return M_; }
  double c_A() const { return c_A_; }
  const std::string& label() const { return label_; }
  VectorField with_c_A(double c) const {
    VectorField v = *this;
    v.c_A_ = c;
    return v;
  }
  std::string describe() const { return "field[" + label_ + "];c_A=" + format_double(c_A_) + ";" + M_.describe(); }

 private:
  int dim_;
  Rule rule_;
  JacobianRule jac_;
  NFunction M_;
  double c_A_;
  std::string label_;
};

struct OperatorSpec {
  enum class Kind { p_laplacian, variable_p, anisotropic, double_phase, exponential };
  Kind kind = Kind::p_laplacian;
  int dim = 1;
  double p = 2.0;                      // p_laplacian, double_phase
  double q = 3.0;                      // double_phase
  SpatialFunction p_field = 2.0;       // variable_p
  SpatialFunction weight = 1.0;        // variable_p
  SpatialFunction a = 0.0;             // double_phase weight
  std::array<SpatialFunction, 2> p_axes{SpatialFunction(2.0), SpatialFunction(2.0)};  // anisotropic
  std::array<SpatialFunction, 2> w_axes{SpatialFunction(1.0), SpatialFunction(1.0)};  // anisotropic
  SampleSpec sample{};
};

// Model operators with their matched N-functions. Each pair is a gradient
// A = grad_xi M, so the coercivity constant is 1.
inline VectorField make_model_operator(OperatorSpec spec) {
  const int d = spec.dim;
  if (spec.sample.domain.dim != d) spec.sample.domain = Box::unit(d);
  using K = OperatorSpec::Kind;
  switch (spec.kind) {
    case K::p_laplacian: {
      const double p = spec.p;
      if (!(p > 1.0) || !std::isfinite(p)) throw BadParameters("p-Laplacian needs 1 < p < inf");
      auto M = NFunction::power(d, p, 1.0 / p, spec.sample);
      auto rule = [p](const Vec&, const Vec& xi) {
        const double r = norm(xi);
        return r == 0.0 ? Vec{0.0, 0.0} : std::pow(r, p - 2.0) * xi;
      };
      auto jac = [p](const Vec&, const Vec& xi, double eps) {
        const double r = std::sqrt(dot(xi, xi) + eps * eps);
        const double rp = std::pow(r, p - 2.0);
        return detail::radial_jacobian(xi, rp, (p - 1.0) * rp, r);
      };
      return VectorField(d, rule, jac, M, 1.0, "p_laplacian(p=" + format_double(p) + ")");
    }
    case K::variable_p: {
      auto M = NFunction::variable_power(d, spec.p_field, spec.weight, true, spec.sample);
      const auto pf = spec.p_field;
      const auto w = spec.weight;
      auto rule = [pf, w](const Vec& x, const Vec& xi) {
        const double r = norm(xi);
        return r == 0.0 ? Vec{0.0, 0.0} : (w(x) * std::pow(r, pf(x) - 2.0)) * xi;
      };
      auto jac = [pf, w](const Vec& x, const Vec& xi, double eps) {
        const double r = std::sqrt(dot(xi, xi) + eps * eps);
        const double px = pf(x);
        const double rp = w(x) * std::pow(r, px - 2.0);
        return detail::radial_jacobian(xi, rp, (px - 1.0) * rp, r);
      };
      return VectorField(d, rule, jac, M, 1.0, "variable_p(" + spec.p_field.describe() + ")");
    }
    case K::anisotropic: {
      auto M = NFunction::anisotropic(d, spec.p_axes, spec.w_axes, true, spec.sample);
      const auto P = spec.p_axes;
      const auto W = spec.w_axes;
      auto rule = [P, W, d](const Vec& x, const Vec& xi) {
        Vec a{0.0, 0.0};
        for (int i = 0; i < d; ++i) {
          const double r = std::abs(xi[i]);
          a[i] = r == 0.0 ? 0.0 : W[i](x) * std::pow(r, P[i](x) - 2.0) * xi[i];
        }
        return a;
      };
      auto jac = [P, W, d](const Vec& x, const Vec& xi, double eps) {
        Mat J{};
        for (int i = 0; i < d; ++i) {
          const double pi = P[i](x);
          J[i][i] = W[i](x) * (pi - 1.0) * std::pow(xi[i] * xi[i] + eps * eps, 0.5 * (pi - 2.0));
        }
        return J;
      };
      return VectorField(d, rule, jac, M, 1.0, "anisotropic");
    }
    case K::double_phase: {
      const double p = spec.p, q = spec.q;
      auto M = NFunction::double_phase(d, p, q, spec.a, true, spec.sample);
      const auto a = spec.a;
      auto rule = [p, q, a](const Vec& x, const Vec& xi) {
        const double r = norm(xi);
        return r == 0.0 ? Vec{0.0, 0.0} : (std::pow(r, p - 2.0) + a(x) * std::pow(r, q - 2.0)) * xi;
      };
      auto jac = [p, q, a](const Vec& x, const Vec& xi, double eps) {
        const double r = std::sqrt(dot(xi, xi) + eps * eps);
        const double ax = a(x);
        const double rp = std::pow(r, p - 2.0), rq = ax * std::pow(r, q - 2.0);
        return detail::radial_jacobian(xi, rp + rq, (p - 1.0) * rp + (q - 1.0) * rq, r);
      };
      return VectorField(d, rule, jac, M, 1.0, "double_phase");
    }
    case K::exponential: {
      auto M = NFunction::exponential(d, spec.sample);
      auto rule = [](const Vec&, const Vec& xi) {
        const double r = norm(xi);
        return r == 0.0 ? Vec{0.0, 0.0} : (std::expm1(r) / r) * xi;
      };
      auto jac = [](const Vec&, const Vec& xi, double eps) {
        const double r = std::sqrt(dot(xi, xi) + eps * eps);
        const double phi_r = r < 1e-8 ? 1.0 + 0.5 * r : std::expm1(r) / r;
        return detail::radial_jacobian(xi, phi_r, std::exp(r), r);
      };
      return VectorField(d, rule, jac, M, 1.0, "exponential");
    }
  }
  throw BadParameters("unknown operator kind");
}

// Largest growth exponent of M over its top sampled decade.
inline double top_growth(const NFunction& M) {
  const auto& sp = M.sample();
  const auto xs = sp.x_samples();
  const auto dirs = sp.unit_directions();
  double g = 0.0;
  for (const auto& x : xs)
    for (const auto& e : dirs) {
      const double a = M(x, (sp.xi_max / 10.0) * e), b = M(x, sp.xi_max * e);
      if (a > 0 && b > 0) g = std::max(g, std::log10(b / a));
    }
  return g;
}

// s^q / q with q = top growth + 2; for exponential entries e^{2s} - 2s - 1.
inline ScalarNFunction default_regularizer(const NFunction& M) {
  if (M.catalog() == Catalog::exponential) return ScalarNFunction::exponential(2.0);
  const double q = std::max(2.0, top_growth(M)) + 2.0;
  return ScalarNFunction::power(q, 1.0 / q);
}

// A_theta = A + theta grad m, grad m(xi) = xi m'(|xi|) / |xi|.
class RegularizedField {
 public:
  RegularizedField(VectorField base, ScalarNFunction m, double theta)
      : base_(std::move(base)), m_(std::move(m)), theta_(theta) {
    if (!(theta >= 0.0 && theta <= 1.0)) throw BadParameters("theta must lie in [0, 1]");
  }

  const VectorField& base() const { return base_; }
  const ScalarNFunction& m() const { return m_; }
  double theta() const { return theta_; }
  int dim() const { return base_.dim(); }

  Vec grad_m(const Vec& xi) const {
    const double r = norm(xi);
    if (r == 0.0) return {0.0, 0.0};
    return (m_.derivative(r) / r) * xi;
  }

  Vec operator()(const Vec& x, const Vec& xi) const {
    const Vec a = base_(x, xi);
    if (theta_ == 0.0) return a;
    return a + theta_ * grad_m(xi);
  }

  Mat jacobian(const Vec& x, const Vec& xi, double eps = 1e-12) const {
    Mat J = base_.jacobian(x, xi, eps);
    if (theta_ == 0.0) return J;
    const double r = std::sqrt(dot(xi, xi) + eps * eps);
    const Mat H = detail::radial_jacobian(xi, m_.derivative(r) / r, m_.second_derivative(r), r);
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) J[i][j] += theta_ * H[i][j];
    return J;
  }

  std::string describe() const {
    return base_.describe() + ";m=" + m_.describe() + ";theta=" + format_double(theta_);
  }

 private:
  VectorField base_;
  ScalarNFunction m_;
  double theta_;
};

inline RegularizedField regularize_operator(const VectorField& A, const ScalarNFunction& m, double theta) {
  if (!(theta >= 0.0 && theta <= 1.0)) throw BadParameters("theta must lie in [0, 1]");
  const auto growth = grows_essentially_more_rapidly(m, A.governing());
  if (!growth.passed())
    throw GrowthMismatch("regularizer " + m.describe() + " does not grow essentially more rapidly than " +
                         A.governing().label() + " (final ratio " + format_double(growth.metric("final_ratio")) + ")");
  return RegularizedField(A, m, theta);
}

namespace detail {

struct SweepPoint {
  Vec x, xi;
};

inline std::vector<SweepPoint> coercivity_samples(const NFunction& M, double radius, int per_decade) {
  std::vector<SweepPoint> pts;
  const auto xs = M.sample().x_samples();
  const auto dirs = M.sample().unit_directions();
  for (const auto& x : xs)
    for (const auto& e : dirs)
      for (double s : log_grid(1e-2, radius, per_decade)) pts.push_back({x, s * e});
  return pts;
}

}  // namespace detail

struct CoercivityOptions {
  double radius = 10.0;  // largest sampled |xi|
  int per_decade = 8;
  double rel_tol = 1e-9;
};

// M*(x, eta) on a point set, routed through the fast radial evaluation or a
// per-point planar conjugate.
class ConjugateEvaluator {
 public:
  explicit ConjugateEvaluator(const NFunction& M) : M_(M) {}
  double operator()(const Vec& x, const Vec& eta) {
    if (M_.is_radial()) return conjugate_at(M_, x, eta);
    for (auto& [px, c] : cache_)
      if (px == x) return eval(c, eta);
    cache_.emplace_back(x, conjugate(M_, x));
    return eval(cache_.back().second, eta);
  }

 private:
  static double eval(const ConjugateFunction& c, const Vec& eta) {
    try {
      return c(eta);
    } catch (const GridTooCoarse& e) {
      throw ConjugateRangeExceeded(e.what());
    }
  }
  NFunction M_;
  std::vector<std::pair<Vec, ConjugateFunction>> cache_;
};

inline DiagnosticsReport check_coercivity_A2(const VectorField& A, const CoercivityOptions& opt = {}) {
  DiagnosticsReport rep;
  rep.name = "check_coercivity_A2";
  rep.inputs_digest = hex_digest(A.describe() + ";r=" + format_double(opt.radius));
  const NFunction& M = A.governing();
  ConjugateEvaluator Mstar(M);
  const auto pts = detail::coercivity_samples(M, opt.radius, opt.per_decade);
  double fitted = 1.0, min_margin = std::numeric_limits<double>::infinity(), worst_xi = 0.0;
  std::vector<double> lhs(pts.size()), rhs(pts.size());
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const auto& [x, xi] = pts[i];
    const Vec a = A(x, xi);
    lhs[i] = dot(a, xi);
    rhs[i] = M(x, xi) + Mstar(x, a);
    if (rhs[i] > 0) fitted = std::min(fitted, lhs[i] / rhs[i]);
  }
  fitted = std::max(fitted, 0.0);
  if (fitted > 1.0 - 1e-9) fitted = 1.0;
  for (std::size_t i = 0; i < pts.size(); ++i) {
    const double margin = (lhs[i] - A.c_A() * rhs[i]) / (1.0 + rhs[i]);
    if (margin < min_margin) {
      min_margin = margin;
      worst_xi = norm(pts[i].xi);
    }
  }
  rep.set("fitted_c_A", fitted);
  rep.set("declared_c_A", A.c_A());
  rep.set("min_margin", min_margin);
  rep.set("worst_xi_norm", worst_xi);
  rep.set("samples", static_cast<double>(pts.size()));
  rep.tolerance("rel_tol", opt.rel_tol);

  // Consequence of coercivity: M*(A(eta)) <= (2/c) M((2/c) eta).
  if (fitted > 0.0) {
    double worst = std::numeric_limits<double>::infinity();
    const double k = 2.0 / fitted;
    for (const auto& [x, xi] : pts) {
      if (k * norm(xi) > M.sample().xi_max) continue;
      const double l = Mstar(x, A(x, xi));
      const double r = k * M(x, k * xi);
      worst = std::min(worst, (r - l) / (1.0 + r));
    }
    rep.set("conjugate_bound_min_margin", std::isfinite(worst) ? worst : 0.0);
    rep.check("conjugate_bound", !(worst < -opt.rel_tol));
  }
  rep.check("fitted_c_A_positive", fitted > 0.0);
  rep.check("declared_c_A_holds", min_margin >= -opt.rel_tol);
  rep.finalize();
  return rep;
}

struct MonotonicityOptions {
  int pairs = 10000;
  double radius = 10.0;
  double tol = 1e-12;  // on the pairing normalized by 1 + |A(xi) - A(eta)| |xi - eta|
  std::uint64_t seed = 0;
};

namespace detail {

template <class Field>
double min_pairing(const Field& A, const NFunction& M, int pairs, double radius, std::uint64_t seed, bool normalized,
                   bool distinct_only) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  const Box& box = M.sample().domain;
  auto random_vec = [&]() {
    const double r = radius * std::pow(u01(rng), 1.0 / M.dim());
    if (M.dim() == 1) return Vec{u01(rng) < 0.5 ? -r : r, 0.0};
    const double a = 2.0 * std::numbers::pi * u01(rng);
    return Vec{r * std::cos(a), r * std::sin(a)};
  };
  double worst = std::numeric_limits<double>::infinity();
  for (int n = 0; n < pairs; ++n) {
    Vec x{box.lo[0] + box.edge(0) * u01(rng), box.dim == 2 ? box.lo[1] + box.edge(1) * u01(rng) : 0.0};
    const Vec a = random_vec(), b = random_vec();
    if (distinct_only && a == b) continue;
    const Vec da = A(x, a) - A(x, b), db = a - b;
    const double p = dot(da, db);
    worst = std::min(worst, normalized ? p / (1.0 + norm(da) * norm(db)) : p);
  }
  return worst;
}

}  // namespace detail

inline DiagnosticsReport check_monotonicity_A3(const VectorField& A, const MonotonicityOptions& opt = {}) {
  DiagnosticsReport rep;
  rep.name = "check_monotonicity_A3";
  rep.inputs_digest = hex_digest(A.describe() + ";pairs=" + std::to_string(opt.pairs));
  const double worst = detail::min_pairing(A, A.governing(), opt.pairs, opt.radius, opt.seed, true, false);
  rep.set("min_normalized_pairing", worst);
  rep.set("pairs", opt.pairs);
  rep.tolerance("tol", opt.tol);
  rep.check("monotone", worst >= -opt.tol);
  rep.finalize();
  return rep;
}

// Strictly positive pairing on random distinct pairs.
template <class Field>
bool strictly_monotone_spot_check(const Field& A, const NFunction& M, int pairs = 100, std::uint64_t seed = 0,
                                  double radius = 10.0) {
  return detail::min_pairing(A, M, pairs, radius, seed, false, true) > 0.0;
}

}  // namespace orlicz
