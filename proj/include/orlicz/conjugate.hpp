#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <vector>

#include <boost/math/tools/minima.hpp>

#include "orlicz/core.hpp"
#include "orlicz/nfunction.hpp"

namespace orlicz {

struct ConjugateGrid {
  double xi_max = 0.0;       // 0: use the N-function's sample xi_max
  double xi_min = 1e-8;      // smallest positive radial node
  int per_decade = 200;      // radial nodes per decade
  int planar_per_side = 40;  // d = 2 non-radial: nodes per half axis
  bool polish = true;        // Brent refinement around the grid maximizer
};

namespace detail {

// Maximize a concave-on-the-bracket function with Brent; returns the value.
template <class F>
double brent_max(F&& f, double a, double b) {
  if (!(b > a)) return f(a);
  auto neg = [&](double s) { return -f(s); };
  const auto r = boost::math::tools::brent_find_minima(neg, a, b, std::numeric_limits<double>::digits);
  return -r.second;
}

}  // namespace detail

// The complementary function eta -> M*(x, eta) at a fixed point x, evaluated
// by a sup over a dense grid in xi followed by a local polish.
class ConjugateFunction {
 public:
  ConjugateFunction(const NFunction& M, const Vec& x, const ConjugateGrid& grid) : M_(M), x_(x), grid_(grid) {
    xi_max_ = grid.xi_max > 0 ? grid.xi_max : M.sample().xi_max;
    if (!(xi_max_ > grid.xi_min)) throw BadParameters("conjugate grid: xi_max must exceed xi_min");
    if (M.is_radial()) {
      s_.push_back(0.0);
      for (double s : log_grid(grid.xi_min, xi_max_, grid.per_decade)) s_.push_back(s);
      m_.resize(s_.size());
      for (std::size_t i = 0; i < s_.size(); ++i) m_[i] = M.radial(x, s_[i]);
      const std::size_t n = s_.size();
      valid_ = (m_[n - 1] - m_[n - 2]) / (s_[n - 1] - s_[n - 2]);
    } else {
      if (M.dim() != 2) throw DimensionUnsupported("non-radial conjugates need d = 2");
      const auto half = log_grid(grid.xi_min, xi_max_, std::max(1, static_cast<int>(std::ceil(
                                                                        grid.planar_per_side /
                                                                        std::log10(xi_max_ / grid.xi_min)))));
      for (auto it = half.rbegin(); it != half.rend(); ++it) axis_.push_back(-*it);
      axis_.push_back(0.0);
      for (double s : half) axis_.push_back(s);
      const std::size_t n = axis_.size();
      plane_.resize(n * n);
      for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) plane_[i + n * j] = M(x, Vec{axis_[i], axis_[j]});
      // Outward slope along each axis at the boundary bounds the valid radius.
      valid_ = std::numeric_limits<double>::infinity();
      const std::size_t c = n / 2;
      for (int sgn : {-1, 1})
        for (int axis = 0; axis < 2; ++axis) {
          const std::size_t last = sgn > 0 ? n - 1 : 0, prev = sgn > 0 ? n - 2 : 1;
          const std::size_t a = axis == 0 ? last + n * c : c + n * last;
          const std::size_t b = axis == 0 ? prev + n * c : c + n * prev;
          valid_ = std::min(valid_, (plane_[a] - plane_[b]) / std::abs(axis_[last] - axis_[prev]));
        }
    }
  }

  int dim() const { return M_.dim(); }
  bool is_radial() const { return M_.is_radial(); }
  const Vec& point() const { return x_; }
  // |eta| below this keeps the maximizer strictly inside the grid.
  double valid_radius() const { return valid_; }
  double xi_max() const { return xi_max_; }

  double operator()(const Vec& eta) const {
    if (M_.is_radial()) return radial(norm(eta));
    return planar(eta);
  }

  double radial(double t) const {
    if (!M_.is_radial()) throw BadParameters("radial conjugate requested for a non-radial N-function");
    t = std::abs(t);
    if (t == 0.0) return 0.0;
    std::size_t best = 0;
    double val = 0.0;
    for (std::size_t i = 1; i < s_.size(); ++i) {
      const double v = s_[i] * t - m_[i];
      if (v > val) {
        val = v;
        best = i;
      }
    }
    if (best == s_.size() - 1)
      throw GridTooCoarse("conjugate maximizer at xi_max = " + format_double(xi_max_) + " for |eta| = " +
                          format_double(t) + "; enlarge xi_max");
    if (!grid_.polish) return val;
    const double a = best == 0 ? 0.0 : s_[best - 1];
    const double b = s_[best + 1];
    const double polished =
        detail::brent_max([&](double s) { return s * t - M_.radial(x_, s); }, a, b);
    return std::max(val, polished);
  }

  // Monotone sweep for many radial arguments; same values as radial().
  std::vector<double> tabulate(const std::vector<double>& t) const {
    std::vector<double> out;
    out.reserve(t.size());
    for (double v : t) out.push_back(radial(v));
    return out;
  }

 private:
  double planar(const Vec& eta) const {
    const std::size_t n = axis_.size();
    std::size_t bi = n / 2, bj = n / 2;
    double val = 0.0;
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t i = 0; i < n; ++i) {
        const double v = axis_[i] * eta[0] + axis_[j] * eta[1] - plane_[i + n * j];
        if (v > val) {
          val = v;
          bi = i;
          bj = j;
        }
      }
    if (bi == 0 || bj == 0 || bi == n - 1 || bj == n - 1)
      throw GridTooCoarse("planar conjugate maximizer on the grid boundary for eta = (" + format_double(eta[0]) + ", " +
                          format_double(eta[1]) + "); enlarge xi_max");
    if (!grid_.polish) return val;
    // Coordinate ascent on the concave objective; each line search spans the
    // whole box.
    Vec xi{axis_[bi], axis_[bj]};
    auto obj = [&](const Vec& z) { return dot(z, eta) - M_(x_, z); };
    double cur = obj(xi);
    for (int sweep = 0; sweep < 30; ++sweep) {
      const double before = cur;
      for (int a = 0; a < 2; ++a) {
        auto line = [&](double v) {
          Vec z = xi;
          z[a] = v;
          return obj(z);
        };
        auto neg = [&](double v) { return -line(v); };
        const auto r = boost::math::tools::brent_find_minima(neg, -xi_max_, xi_max_, 50);
        if (-r.second > cur) {
          xi[a] = r.first;
          cur = -r.second;
        }
      }
      if (cur - before <= 1e-15 * (1.0 + std::abs(cur))) break;
    }
    return std::max(val, cur);
  }

  NFunction M_;
  Vec x_;
  ConjugateGrid grid_;
  double xi_max_ = 0.0;
  double valid_ = 0.0;
  std::vector<double> s_, m_;
  std::vector<double> axis_, plane_;
};

inline ConjugateFunction conjugate(const NFunction& M, const Vec& x, const ConjugateGrid& grid = {}) {
  return ConjugateFunction(M, x, grid);
}

// Fast single evaluation for radial M convex in |xi|: bracket the maximizer by
// doubling, then Brent. Falls back to the grid route for non-radial M.
inline double conjugate_at(const NFunction& M, const Vec& x, const Vec& eta) {
  if (!M.is_radial()) return conjugate(M, x)(eta);
  const double t = norm(eta);
  if (t == 0.0) return 0.0;
  const double cap = M.sample().xi_max;
  auto phi = [&](double s) { return s * t - M.radial(x, s); };
  double hi = std::min(1.0, cap);
  while (phi(hi) >= phi(0.5 * hi) && hi < cap) hi = std::min(2.0 * hi, cap);
  if (hi >= cap && phi(cap) > phi(0.999 * cap))
    throw ConjugateRangeExceeded("conjugate argument " + format_double(t) + " exceeds the range validated up to xi_max " +
                                 format_double(cap));
  return std::max(0.0, detail::brent_max(phi, 0.0, hi));
}

}  // namespace orlicz
