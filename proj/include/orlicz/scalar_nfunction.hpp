#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "orlicz/core.hpp"
#include "orlicz/report.hpp"

namespace orlicz {

// Radial profile s -> m(s) on [0, inf). Either a piecewise-linear table with
// linear extrapolation past the last node, or one of two analytic families
// used as regularizers.
class ScalarNFunction {
 public:
  enum class Kind { tabulated, power, exponential };

  // coefficient * s^q
  static ScalarNFunction power(double q, double coefficient = 1.0) {
    if (!(q > 1.0) || !(coefficient > 0.0)) throw BadParameters("ScalarNFunction::power needs q > 1, coefficient > 0");
    ScalarNFunction m;
    m.kind_ = Kind::power;
    m.q_ = q;
    m.c_ = coefficient;
    return m;
  }

  // e^{r s} - r s - 1
  static ScalarNFunction exponential(double rate = 1.0) {
    if (!(rate > 0.0)) throw BadParameters("ScalarNFunction::exponential needs rate > 0");
    ScalarNFunction m;
    m.kind_ = Kind::exponential;
    m.q_ = rate;
    return m;
  }

  // Nodes must start at s = 0 with value 0 and increase strictly.
  static ScalarNFunction tabulated(std::vector<double> s, std::vector<double> v) {
    if (s.size() != v.size() || s.size() < 2) throw BadParameters("tabulated profile needs >= 2 matching nodes");
    if (s.front() != 0.0 || v.front() != 0.0) throw BadParameters("tabulated profile must start at (0, 0)");
    for (std::size_t i = 1; i < s.size(); ++i) {
      if (!(s[i] > s[i - 1])) throw BadParameters("tabulated profile nodes must increase strictly");
      if (!std::isfinite(v[i])) throw BadParameters("tabulated profile values must be finite");
    }
    ScalarNFunction m;
    m.kind_ = Kind::tabulated;
    m.s_ = std::move(s);
    m.v_ = std::move(v);
    return m;
  }

  Kind kind() const { return kind_; }
  bool is_tabulated() const { return kind_ == Kind::tabulated; }
  std::span<const double> nodes() const { return s_; }
  std::span<const double> values() const { return v_; }
  double power_exponent() const { return q_; }

  // Largest abscissa the profile is meant for (tables) or infinity.
  double s_max() const { return is_tabulated() ? s_.back() : std::numeric_limits<double>::infinity(); }

  double operator()(double s) const {
    s = std::abs(s);
    switch (kind_) {
      case Kind::power: return c_ * std::pow(s, q_);
      case Kind::exponential: {
        const double x = q_ * s;
        return x < 1e-5 ? x * x * (0.5 + x / 6.0 + x * x / 24.0) : std::expm1(x) - x;
      }
      case Kind::tabulated: {
        const std::size_t k = segment(s);
        return v_[k] + slope(k) * (s - s_[k]);
      }
    }
    return 0.0;
  }

  double derivative(double s) const {
    s = std::abs(s);
    switch (kind_) {
      case Kind::power: return c_ * q_ * std::pow(s, q_ - 1.0);
      case Kind::exponential: return q_ * std::expm1(q_ * s);
      case Kind::tabulated: return slope(segment(s));
    }
    return 0.0;
  }

  double second_derivative(double s) const {
    s = std::abs(s);
    switch (kind_) {
      case Kind::power: return c_ * q_ * (q_ - 1.0) * std::pow(s, q_ - 2.0);
      case Kind::exponential: return q_ * q_ * std::exp(q_ * s);
      case Kind::tabulated: {
        // Slope jump spread over the neighbouring half-segments.
        const std::size_t k = segment(s);
        if (k == 0 || k + 1 >= s_.size()) return 0.0;
        return (slope(k) - slope(k - 1)) / (0.5 * (s_[k + 1] - s_[k - 1]));
      }
    }
    return 0.0;
  }

  // m*(t) = sup_s (s t - m(s)).
  double conjugate(double t) const {
    t = std::abs(t);
    switch (kind_) {
      case Kind::power: {
        // c s^q with c q s^{q-1} = t
        const double s = std::pow(t / (c_ * q_), 1.0 / (q_ - 1.0));
        return s * t - c_ * std::pow(s, q_);
      }
      case Kind::exponential: {
        const double u = t / q_;
        return (u + 1.0) * std::log1p(u) - u;
      }
      case Kind::tabulated: {
        if (t > slope(s_.size() - 2) * (1.0 + 1e-12))
          throw ConjugateRangeExceeded("tabulated conjugate: t beyond the last slope " + format_double(t));
        double best = 0.0;
        for (std::size_t i = 0; i < s_.size(); ++i) best = std::max(best, s_[i] * t - v_[i]);
        return best;
      }
    }
    return 0.0;
  }

  bool is_convex(double rel_tol = 1e-9) const {
    if (!is_tabulated()) return true;
    for (std::size_t k = 1; k + 1 < s_.size(); ++k)
      if (slope(k) < slope(k - 1) - rel_tol * (1.0 + std::abs(slope(k - 1)))) return false;
    return true;
  }

  std::string describe() const {
    switch (kind_) {
      case Kind::power: return "power(" + format_double(q_) + ";" + format_double(c_) + ")";
      case Kind::exponential: return "exponential(" + format_double(q_) + ")";
      case Kind::tabulated:
        return "tabulated(" + std::to_string(s_.size()) + ";" + format_double(s_.back()) + ";" +
               format_double(v_.back()) + ")";
    }
    return "?";
  }

 private:
  Kind kind_ = Kind::power;
  double q_ = 2.0;
  double c_ = 1.0;
  std::vector<double> s_, v_;

  std::size_t segment(double s) const {
    auto it = std::upper_bound(s_.begin(), s_.end(), s);
    std::size_t k = it == s_.begin() ? 0 : static_cast<std::size_t>(it - s_.begin()) - 1;
    return std::min(k, s_.size() - 2);
  }
  double slope(std::size_t k) const { return (v_[k + 1] - v_[k]) / (s_[k + 1] - s_[k]); }
};

}  // namespace orlicz
