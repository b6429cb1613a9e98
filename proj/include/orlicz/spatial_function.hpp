#pragma once

#include <cmath>
#include <numbers>
#include <string>
#include <utility>

#include "orlicz/core.hpp"
#include "orlicz/report.hpp"

namespace orlicz {

// Scalar coefficient field x -> value used for exponents p(x), weights
// alpha(x) and double-phase weights a(x).
class SpatialFunction {
 public:
  enum class Kind { constant, bump, jump, log_holder, linear };

  SpatialFunction() = default;
  SpatialFunction(double c) : base_(c) {}  // NOLINT: implicit constant is convenient

  static SpatialFunction constant(double c) { return SpatialFunction(c); }

  // base + amplitude * exp(1 - 1/(1 - r^2)) with r = |x - center| / width.
  static SpatialFunction bump(double base, double amplitude, Vec center, double width) {
    if (!(width > 0)) throw BadParameters("bump width must be positive");
    SpatialFunction f(base);
    f.kind_ = Kind::bump;
    f.amp_ = amplitude;
    f.center_ = center;
    f.width_ = width;
    return f;
  }

  // left for x[axis] < position, right otherwise.
  static SpatialFunction jump(double left, double right, double position, int axis = 0) {
    SpatialFunction f(left);
    f.kind_ = Kind::jump;
    f.amp_ = right;
    f.center_ = {position, position};
    f.axis_ = axis;
    return f;
  }

  // base + amplitude * sin(frequency r) / log(e + 1/r), r = |x - center|.
  // Continuous with log-Hoelder modulus at the center.
  static SpatialFunction log_holder(double base, double amplitude, double frequency, Vec center) {
    SpatialFunction f(base);
    f.kind_ = Kind::log_holder;
    f.amp_ = amplitude;
    f.freq_ = frequency;
    f.center_ = center;
    return f;
  }

  // base + slope * (x[axis] - center[axis]).
  static SpatialFunction linear(double base, double slope, Vec center, int axis = 0) {
    SpatialFunction f(base);
    f.kind_ = Kind::linear;
    f.amp_ = slope;
    f.center_ = center;
    f.axis_ = axis;
    return f;
  }

  double operator()(const Vec& x) const {
    switch (kind_) {
      case Kind::constant: return base_;
      case Kind::bump: {
        const double r = norm(x - center_) / width_;
        if (r >= 1.0) return base_;
        return base_ + amp_ * std::exp(1.0 - 1.0 / (1.0 - r * r));
      }
      case Kind::jump: return x[axis_] < center_[0] ? base_ : amp_;
      case Kind::log_holder: {
        const double r = norm(x - center_);
        if (r == 0.0) return base_;
        return base_ + amp_ * std::sin(freq_ * r) / std::log(std::numbers::e + 1.0 / r);
      }
      case Kind::linear: return base_ + amp_ * (x[axis_] - center_[axis_]);
    }
    return base_;
  }

  Kind kind() const { return kind_; }
  bool is_constant() const { return kind_ == Kind::constant; }

  // Sampled range over a box (tensor grid of `per_edge` points per axis).
  std::pair<double, double> range(const Box& box, int per_edge = 65) const {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    const int ny = box.dim == 2 ? per_edge : 1;
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < per_edge; ++i) {
        Vec x{box.lo[0] + box.edge(0) * i / (per_edge - 1), 0.0};
        if (box.dim == 2) x[1] = box.lo[1] + box.edge(1) * j / (per_edge - 1);
        const double v = (*this)(x);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
    // Analytic extremes for the kinds where sampling could miss them.
    if (kind_ == Kind::bump && box.contains(center_)) {
      lo = std::min(lo, base_ + amp_);
      hi = std::max(hi, base_ + amp_);
    }
    return {lo, hi};
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::constant: return "constant(" + format_double(base_) + ")";
      case Kind::bump:
        return "bump(" + format_double(base_) + ";" + format_double(amp_) + ";" + format_double(center_[0]) + ";" +
               format_double(center_[1]) + ";" + format_double(width_) + ")";
      case Kind::jump:
        return "jump(" + format_double(base_) + ";" + format_double(amp_) + ";" + format_double(center_[0]) + ";" +
               std::to_string(axis_) + ")";
      case Kind::log_holder:
        return "log_holder(" + format_double(base_) + ";" + format_double(amp_) + ";" + format_double(freq_) + ";" +
               format_double(center_[0]) + ";" + format_double(center_[1]) + ")";
      case Kind::linear:
        return "linear(" + format_double(base_) + ";" + format_double(amp_) + ";" + format_double(center_[0]) + ";" +
               std::to_string(axis_) + ")";
    }
    return "?";
  }

 private:
  Kind kind_ = Kind::constant;
  double base_ = 0.0;
  double amp_ = 0.0;
  double freq_ = 1.0;
  double width_ = 1.0;
  Vec center_{0.0, 0.0};
  int axis_ = 0;
};

}  // namespace orlicz
