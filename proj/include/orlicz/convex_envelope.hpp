#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <span>
#include <unordered_map>
#include <vector>

#include "orlicz/core.hpp"

namespace orlicz {

// Samples of a function on a tensor grid. values are row-major with the last
// axis fastest: index = i1 + n1 * i2 for d = 2 where axes[0] has n1 points.
struct GridSamples {
  std::vector<std::vector<double>> axes;
  std::vector<double> values;

  int dim() const { return static_cast<int>(axes.size()); }
  std::size_t size() const {
    std::size_t n = 1;
    for (const auto& a : axes) n *= a.size();
    return n;
  }
};

namespace detail {

constexpr double kEps = std::numeric_limits<double>::epsilon();

inline double chord(double s0, double f0, double s1, double f1, double s) {
  const double t = (s - s0) / (s1 - s0);
  return f0 + t * (f1 - f0);
}

// Indices of the lower convex hull of (s_i, f_i), s strictly increasing.
// A point within a few ulps of the chord counts as collinear and is dropped.
inline std::vector<std::size_t> lower_hull_indices(std::span<const double> s, std::span<const double> f) {
  std::vector<std::size_t> h;
  h.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    while (h.size() >= 2) {
      const std::size_t a = h[h.size() - 2], b = h.back();
      const double c = chord(s[a], f[a], s[i], f[i], s[b]);
      const double tol = 8.0 * kEps * (std::abs(f[a]) + std::abs(f[b]) + std::abs(f[i]));
      if (f[b] >= c - tol)
        h.pop_back();
      else
        break;
    }
    h.push_back(i);
  }
  return h;
}

struct P3 {
  double x, y, z;
};

inline P3 sub(const P3& a, const P3& b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
inline P3 cross(const P3& a, const P3& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}
inline double dot3(const P3& a, const P3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

// Incremental 3-D convex hull. Faces are stored counter-clockwise seen from
// outside. Throws std::domain_error when all points are coplanar so the
// caller can treat the data as affine.
class Hull3 {
 public:
  struct Face {
    std::array<int, 3> v;
    P3 normal;
    double offset;
    bool alive = true;
  };

  explicit Hull3(const std::vector<P3>& pts) : p_(pts) {
    double scale = 0.0;
    for (const auto& q : p_) scale = std::max({scale, std::abs(q.x), std::abs(q.y), std::abs(q.z)});
    scale_ = scale > 0 ? scale : 1.0;
    build();
  }

  const std::vector<Face>& faces() const { return faces_; }

 private:
  std::vector<P3> p_;
  std::vector<Face> faces_;
  std::unordered_map<std::uint64_t, int> edge_face_;
  double scale_ = 1.0;

  static std::uint64_t key(int a, int b) {
    return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(a)) << 32) | static_cast<std::uint32_t>(b);
  }

  double tol(const Face& f) const {
    const double nn = std::sqrt(dot3(f.normal, f.normal));
    return 64.0 * kEps * nn * scale_;
  }

  double side(const Face& f, const P3& q) const { return dot3(f.normal, q) - f.offset; }

  void add_face(int a, int b, int c) {
    Face f;
    f.v = {a, b, c};
    f.normal = cross(sub(p_[b], p_[a]), sub(p_[c], p_[a]));
    f.offset = dot3(f.normal, p_[a]);
    const int id = static_cast<int>(faces_.size());
    faces_.push_back(f);
    edge_face_[key(a, b)] = id;
    edge_face_[key(b, c)] = id;
    edge_face_[key(c, a)] = id;
  }

  void build() {
    const int n = static_cast<int>(p_.size());
    if (n < 4) throw std::domain_error("hull: fewer than four points");
    auto dist2 = [&](int i, int j) {
      const P3 d = sub(p_[i], p_[j]);
      return dot3(d, d);
    };
    int i0 = 0;
    for (int i = 1; i < n; ++i)
      if (p_[i].x < p_[i0].x || (p_[i].x == p_[i0].x && p_[i].y < p_[i0].y)) i0 = i;
    int i1 = i0;
    for (int i = 0; i < n; ++i)
      if (dist2(i, i0) > dist2(i1, i0)) i1 = i;
    int i2 = -1;
    double best = 0.0;
    for (int i = 0; i < n; ++i) {
      const P3 c = cross(sub(p_[i1], p_[i0]), sub(p_[i], p_[i0]));
      const double a = dot3(c, c);
      if (a > best) {
        best = a;
        i2 = i;
      }
    }
    if (i2 < 0 || best <= std::pow(1e-12 * scale_ * scale_, 2)) throw std::domain_error("hull: collinear points");
    const P3 nrm = cross(sub(p_[i1], p_[i0]), sub(p_[i2], p_[i0]));
    int i3 = -1;
    best = 0.0;
    for (int i = 0; i < n; ++i) {
      const double d = std::abs(dot3(nrm, sub(p_[i], p_[i0])));
      if (d > best) {
        best = d;
        i3 = i;
      }
    }
    if (i3 < 0 || best <= 1e-11 * std::sqrt(dot3(nrm, nrm)) * scale_) throw std::domain_error("hull: coplanar points");

    if (dot3(nrm, sub(p_[i3], p_[i0])) > 0) std::swap(i1, i2);
    add_face(i0, i1, i2);
    add_face(i0, i3, i1);
    add_face(i1, i3, i2);
    add_face(i2, i3, i0);

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::mt19937_64 rng(0x5eed);
    std::shuffle(order.begin(), order.end(), rng);

    std::vector<int> visible;
    std::vector<std::pair<int, int>> horizon;
    for (int idx : order) {
      if (idx == i0 || idx == i1 || idx == i2 || idx == i3) continue;
      const P3& q = p_[idx];
      // Grow the visible region from the farthest visible face through edge
      // neighbours. A connected region keeps the horizon a closed boundary
      // even when rounding makes the visibility test inconsistent.
      int seed = -1;
      double far = 0.0;
      for (int fi = 0; fi < static_cast<int>(faces_.size()); ++fi) {
        const Face& f = faces_[fi];
        if (!f.alive) continue;
        const double d = side(f, q) - tol(f);
        if (d > 0 && d / std::sqrt(dot3(f.normal, f.normal)) > far) {
          far = d / std::sqrt(dot3(f.normal, f.normal));
          seed = fi;
        }
      }
      if (seed < 0) continue;
      visible.assign(1, seed);
      faces_[seed].alive = false;
      horizon.clear();
      for (std::size_t k = 0; k < visible.size(); ++k) {
        const auto v = faces_[visible[k]].v;
        for (int e = 0; e < 3; ++e) {
          const int a = v[e], b = v[(e + 1) % 3];
          const int nb = edge_face_.at(key(b, a));
          if (!faces_[nb].alive) continue;
          if (side(faces_[nb], q) > tol(faces_[nb])) {
            faces_[nb].alive = false;
            visible.push_back(nb);
          }
        }
      }
      for (int fi : visible) {
        const auto& v = faces_[fi].v;
        for (int e = 0; e < 3; ++e) {
          const int a = v[e], b = v[(e + 1) % 3];
          if (faces_[edge_face_.at(key(b, a))].alive) horizon.emplace_back(a, b);
        }
      }
      for (int fi : visible) {
        const auto& v = faces_[fi].v;
        for (int e = 0; e < 3; ++e) edge_face_.erase(key(v[e], v[(e + 1) % 3]));
      }
      for (const auto& [a, b] : horizon) add_face(a, b, idx);
      if (faces_.size() > 4 * edge_face_.size() + 64) compact();
    }
    compact();
  }

  void compact() {
    std::vector<Face> alive;
    alive.reserve(faces_.size());
    for (const auto& f : faces_)
      if (f.alive) alive.push_back(f);
    faces_.swap(alive);
    edge_face_.clear();
    for (int id = 0; id < static_cast<int>(faces_.size()); ++id) {
      const auto& v = faces_[id].v;
      edge_face_[key(v[0], v[1])] = id;
      edge_face_[key(v[1], v[2])] = id;
      edge_face_[key(v[2], v[0])] = id;
    }
  }
};

// Keep a sample when it is within a few ulps of the hull value, otherwise take
// the hull value. Makes convex input an exact fixed point.
inline double snap(double f, double g, double abs_tol = 0.0) {
  const double tol =
      256.0 * kEps * (std::abs(f) + std::abs(g)) + abs_tol + std::numeric_limits<double>::denorm_min();
  return f <= g + tol ? f : g;
}

}  // namespace detail

// Lower convex envelope f** of a 1-D sampled function; s strictly increasing.
inline std::vector<double> convex_envelope(std::span<const double> s, std::span<const double> f) {
  if (s.size() != f.size()) throw BadParameters("convex_envelope: size mismatch");
  for (double v : f)
    if (!std::isfinite(v)) throw BadParameters("convex_envelope: non-finite sample");
  for (std::size_t i = 1; i < s.size(); ++i)
    if (!(s[i] > s[i - 1])) throw BadParameters("convex_envelope: abscissae must increase strictly");
  std::vector<double> out(f.begin(), f.end());
  if (s.size() < 3) return out;
  const auto h = detail::lower_hull_indices(s, f);
  for (std::size_t k = 0; k + 1 < h.size(); ++k) {
    const std::size_t a = h[k], b = h[k + 1];
    for (std::size_t i = a + 1; i < b; ++i) out[i] = detail::snap(f[i], detail::chord(s[a], f[a], s[b], f[b], s[i]));
  }
  return out;
}

// Envelope on a tensor grid of dimension 1 or 2.
inline GridSamples convex_envelope(const GridSamples& g) {
  if (g.dim() < 1 || g.dim() > 2) throw DimensionUnsupported("convex_envelope supports d = 1 and d = 2 only");
  if (g.dim() == 1) return GridSamples{g.axes, convex_envelope(g.axes[0], g.values)};
  const auto& xs = g.axes[0];
  const auto& ys = g.axes[1];
  if (g.values.size() != xs.size() * ys.size()) throw BadParameters("convex_envelope: value count mismatch");
  for (double v : g.values)
    if (!std::isfinite(v)) throw BadParameters("convex_envelope: non-finite sample");

  // The hull works on coordinates mapped affinely to [-1,1]^2 x [0,1].
  auto affine = [](const std::vector<double>& v) {
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    const double c = 0.5 * (*lo + *hi), w = *hi > *lo ? 0.5 * (*hi - *lo) : 1.0;
    return std::pair{c, w};
  };
  const auto [cx, wx] = affine(xs);
  const auto [cy, wy] = affine(ys);
  const auto [zlo_it, zhi_it] = std::minmax_element(g.values.begin(), g.values.end());
  const double zlo = *zlo_it, zr = *zhi_it > *zlo_it ? *zhi_it - *zlo_it : 1.0;

  std::vector<detail::P3> pts;
  pts.reserve(g.values.size());
  for (std::size_t j = 0; j < ys.size(); ++j)
    for (std::size_t i = 0; i < xs.size(); ++i)
      pts.push_back({(xs[i] - cx) / wx, (ys[j] - cy) / wy, (g.values[i + xs.size() * j] - zlo) / zr});

  GridSamples out = g;
  std::vector<detail::Hull3::Face> lower;
  try {
    detail::Hull3 hull(pts);
    // Vertical faces never support the graph from below; skipping them avoids
    // dividing by a rounding-level normal component.
    for (const auto& f : hull.faces())
      if (f.normal.z < -1e-9 * std::sqrt(detail::dot3(f.normal, f.normal))) lower.push_back(f);
  } catch (const std::domain_error&) {
    return out;  // affine (coplanar) data is its own envelope
  }
  // The envelope at a grid point is the largest lower supporting plane.
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const auto& q = pts[k];
    double best = -std::numeric_limits<double>::infinity();
    for (const auto& f : lower) {
      const double z = (f.offset - f.normal.x * q.x - f.normal.y * q.y) / f.normal.z;
      best = std::max(best, z);
    }
    out.values[k] = detail::snap(g.values[k], zlo + best * zr, 64.0 * detail::kEps * zr);
  }
  return out;
}

}  // namespace orlicz
