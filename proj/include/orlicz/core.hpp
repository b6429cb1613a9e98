#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace orlicz {

// Points and gradients live in R^d with d <= 2. For d = 1 the second slot is
// kept at zero so Euclidean helpers work unchanged.
using Vec = std::array<double, 2>;
using Mat = std::array<std::array<double, 2>, 2>;

inline double dot(const Vec& a, const Vec& b) { return a[0] * b[0] + a[1] * b[1]; }
inline double norm(const Vec& a) { return std::hypot(a[0], a[1]); }
inline Vec operator+(const Vec& a, const Vec& b) { return {a[0] + b[0], a[1] + b[1]}; }
inline Vec operator-(const Vec& a, const Vec& b) { return {a[0] - b[0], a[1] - b[1]}; }
inline Vec operator-(const Vec& a) { return {-a[0], -a[1]}; }
inline Vec operator*(double s, const Vec& a) { return {s * a[0], s * a[1]}; }
inline Vec mul(const Mat& m, const Vec& v) {
  return {m[0][0] * v[0] + m[0][1] * v[1], m[1][0] * v[0] + m[1][1] * v[1]};
}

// Axis-aligned box; only the first `dim` axes are meaningful.
struct Box {
  int dim = 1;
  Vec lo{0.0, 0.0};
  Vec hi{1.0, 0.0};

  static Box unit(int d) {
    Box b;
    b.dim = d;
    b.hi = {1.0, d == 2 ? 1.0 : 0.0};
    return b;
  }
  double edge(int axis) const { return hi[axis] - lo[axis]; }
  double measure() const {
    double m = 1.0;
    for (int a = 0; a < dim; ++a) m *= edge(a);
    return m;
  }
  Vec center() const {
    Vec c{0.0, 0.0};
    for (int a = 0; a < dim; ++a) c[a] = 0.5 * (lo[a] + hi[a]);
    return c;
  }
  double diameter() const {
    double s = 0.0;
    for (int a = 0; a < dim; ++a) s += edge(a) * edge(a);
    return std::sqrt(s);
  }
  bool contains(const Vec& x, double tol = 0.0) const {
    for (int a = 0; a < dim; ++a)
      if (x[a] < lo[a] - tol || x[a] > hi[a] + tol) return false;
    return true;
  }
};

// Error taxonomy. Every failure mode named by the library has its own type so
// callers (and the CLI) can react selectively.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

#define ORLICZ_DEFINE_ERROR(Name)                 \
  class Name : public Error {                     \
   public:                                        \
    using Error::Error;                           \
  }

ORLICZ_DEFINE_ERROR(GridTooCoarse);
ORLICZ_DEFINE_ERROR(DimensionUnsupported);
ORLICZ_DEFINE_ERROR(DegeneratePair);
ORLICZ_DEFINE_ERROR(CoveringFailure);
ORLICZ_DEFINE_ERROR(NonIntegrable);
ORLICZ_DEFINE_ERROR(Unbounded);
ORLICZ_DEFINE_ERROR(BadParameters);
ORLICZ_DEFINE_ERROR(GrowthMismatch);
ORLICZ_DEFINE_ERROR(ConjugateRangeExceeded);
ORLICZ_DEFINE_ERROR(BadSupport);
ORLICZ_DEFINE_ERROR(DeltaTooLarge);
ORLICZ_DEFINE_ERROR(BadTestFunction);

#undef ORLICZ_DEFINE_ERROR

class NoConvergence : public Error {
 public:
  NoConvergence(const std::string& what, long step, double last_residual)
      : Error(what + " (step " + std::to_string(step) + ", residual " +
              std::to_string(last_residual) + ")"),
        step_(step),
        residual_(last_residual) {}
  long step() const { return step_; }
  double last_residual() const { return residual_; }

 private:
  long step_;
  double residual_;
};

// Log-spaced points lo, ..., hi with `per_decade` points per decade.
inline std::vector<double> log_grid(double lo, double hi, int per_decade) {
  if (!(lo > 0.0) || !(hi > lo) || per_decade < 1)
    throw BadParameters("log_grid: need 0 < lo < hi and per_decade >= 1");
  const double decades = std::log10(hi / lo);
  const int n = std::max(2, static_cast<int>(std::ceil(decades * per_decade)) + 1);
  std::vector<double> s(n);
  for (int i = 0; i < n; ++i) s[i] = lo * std::pow(hi / lo, static_cast<double>(i) / (n - 1));
  s.front() = lo;
  s.back() = hi;
  return s;
}

inline std::vector<double> linspace(double a, double b, int n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = a;
    return v;
  }
  for (int i = 0; i < n; ++i) v[i] = a + (b - a) * static_cast<double>(i) / (n - 1);
  v.back() = b;
  return v;
}

// FNV-1a, used for input digests in reports and manifests.
inline std::uint64_t fnv1a(std::string_view s, std::uint64_t h = 14695981039346656037ULL) {
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

inline std::string hex_digest(std::string_view s) {
  static const char* digits = "0123456789abcdef";
  std::uint64_t h = fnv1a(s);
  std::string out(16, '0');
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xF];
    h >>= 4;
  }
  return out;
}

}  // namespace orlicz
