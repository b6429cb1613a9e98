#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <numbers>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "orlicz/core.hpp"
#include "orlicz/scalar_nfunction.hpp"
#include "orlicz/spatial_function.hpp"

namespace orlicz {

enum class Catalog { power_p, variable_power_px, anisotropic_powers, double_phase, exponential, tabulated };

inline const char* to_string(Catalog c) {
  switch (c) {
    case Catalog::power_p: return "power_p";
    case Catalog::variable_power_px: return "variable_power_px";
    case Catalog::anisotropic_powers: return "anisotropic_powers";
    case Catalog::double_phase: return "double_phase";
    case Catalog::exponential: return "exponential";
    case Catalog::tabulated: return "tabulated";
  }
  return "?";
}

// Where an N-function is sampled by the checks: x over a tensor grid of the
// domain, xi along rays on a log grid up to xi_max.
struct SampleSpec {
  Box domain = Box::unit(1);
  int x_per_edge = 9;
  double xi_min = 1e-4;
  double xi_max = 1e3;
  int per_decade = 64;
  int directions = 16;

  std::vector<Vec> x_samples(int per_edge = 0) const {
    const int n = per_edge > 0 ? per_edge : x_per_edge;
    std::vector<Vec> xs;
    const auto ax = linspace(domain.lo[0], domain.hi[0], n);
    if (domain.dim == 1) {
      for (double a : ax) xs.push_back({a, 0.0});
      return xs;
    }
    const auto ay = linspace(domain.lo[1], domain.hi[1], n);
    for (double b : ay)
      for (double a : ax) xs.push_back({a, b});
    return xs;
  }
  std::vector<double> radial_grid() const { return log_grid(xi_min, xi_max, per_decade); }
  std::vector<Vec> unit_directions() const {
    if (domain.dim == 1) return {Vec{1.0, 0.0}};
    std::vector<Vec> d;
    for (int k = 0; k < directions; ++k) {
      const double a = 2.0 * std::numbers::pi * k / directions;
      d.push_back({std::cos(a), std::sin(a)});
    }
    return d;
  }
  std::string describe() const {
    return "sample(" + std::to_string(domain.dim) + ";" + format_double(domain.lo[0]) + ";" +
           format_double(domain.hi[0]) + ";" + format_double(domain.lo[1]) + ";" + format_double(domain.hi[1]) + ";" +
           std::to_string(x_per_edge) + ";" + format_double(xi_min) + ";" + format_double(xi_max) + ";" +
           std::to_string(per_decade) + ";" + std::to_string(directions) + ")";
  }
};

// Values on a tensor grid (xi1, xi2), bilinear in between. Used for the
// three-column tabulated input.
struct PlanarTable {
  std::vector<double> x1, x2;
  std::vector<double> values;  // index i + x1.size() * j

  double operator()(const Vec& xi) const {
    auto locate = [](const std::vector<double>& ax, double v) -> std::pair<std::size_t, double> {
      if (v < ax.front() - 1e-12 * std::abs(ax.front()) || v > ax.back() + 1e-12 * std::abs(ax.back()))
        throw BadParameters("tabulated N-function evaluated outside its table");
      auto it = std::upper_bound(ax.begin(), ax.end(), v);
      std::size_t k = it == ax.begin() ? 0 : static_cast<std::size_t>(it - ax.begin()) - 1;
      k = std::min(k, ax.size() - 2);
      return {k, std::clamp((v - ax[k]) / (ax[k + 1] - ax[k]), 0.0, 1.0)};
    };
    const auto [i, tx] = locate(x1, xi[0]);
    const auto [j, ty] = locate(x2, xi[1]);
    const std::size_t n = x1.size();
    const double a = values[i + n * j], b = values[i + 1 + n * j];
    const double c = values[i + n * (j + 1)], d = values[i + 1 + n * (j + 1)];
    return (1 - tx) * (1 - ty) * a + tx * (1 - ty) * b + (1 - tx) * ty * c + tx * ty * d;
  }
};

class NFunction {
 public:
  using Rule = std::function<double(const Vec& x, const Vec& xi)>;
  using RadialRule = std::function<double(const Vec& x, double s)>;

  int dim() const { return dim_; }
  Catalog catalog() const { return catalog_; }
  const SampleSpec& sample() const { return sample_; }
  const std::string& label() const { return label_; }
  bool is_radial() const { return static_cast<bool>(radial_); }
  bool x_independent() const { return x_independent_; }

  double operator()(const Vec& x, const Vec& xi) const { return rule_(x, xi); }
  double radial(const Vec& x, double s) const {
    if (!radial_) throw BadParameters("N-function " + label_ + " is not radial");
    return radial_(x, std::abs(s));
  }

  const std::map<std::string, double>& parameters() const { return params_; }
  const std::map<std::string, std::string>& function_parameters() const { return fparams_; }
  double parameter(const std::string& key) const {
    auto it = params_.find(key);
    if (it == params_.end()) throw BadParameters("N-function " + label_ + " has no parameter " + key);
    return it->second;
  }

  NFunction with_sample(SampleSpec s) const {
    NFunction m = *this;
    if (s.domain.dim != dim_) throw BadParameters("sample spec dimension differs from N-function dimension");
    m.sample_ = std::move(s);
    return m;
  }

  std::string describe() const {
    std::string d = std::string(to_string(catalog_)) + "[" + label_ + "]{dim=" + std::to_string(dim_);
    for (const auto& [k, v] : params_) d += ";" + k + "=" + format_double(v);
    for (const auto& [k, v] : fparams_) d += ";" + k + "=" + v;
    return d + ";" + sample_.describe() + "}";
  }

  // coefficient * |xi|^p
  static NFunction power(int dim, double p, double coefficient, SampleSpec sample) {
    if (!(p > 1.0) || !std::isfinite(p)) throw BadParameters("power_p needs 1 < p < inf");
    if (!(coefficient > 0.0)) throw BadParameters("power_p needs a positive coefficient");
    NFunction m(dim, Catalog::power_p, std::move(sample), "power_p");
    m.set_radial([p, coefficient](const Vec&, double s) { return coefficient * std::pow(s, p); });
    m.params_ = {{"p", p}, {"coefficient", coefficient}};
    m.x_independent_ = true;
    return m;
  }

  // weight(x) |xi|^{p(x)}, optionally divided by p(x).
  static NFunction variable_power(int dim, SpatialFunction p, SpatialFunction weight, bool divide_by_p,
                                  SampleSpec sample) {
    NFunction m(dim, Catalog::variable_power_px, std::move(sample), "variable_power_px");
    check_exponent(p, m.sample_.domain, "p");
    check_weight(weight, m.sample_.domain, "weight", false);
    m.set_radial([p, weight, divide_by_p](const Vec& x, double s) {
      const double px = p(x);
      const double v = weight(x) * std::pow(s, px);
      return divide_by_p ? v / px : v;
    });
    m.params_ = {{"divide_by_p", divide_by_p ? 1.0 : 0.0}};
    m.fparams_ = {{"p", p.describe()}, {"weight", weight.describe()}};
    m.x_independent_ = p.is_constant() && weight.is_constant();
    return m;
  }

  // sum_i w_i(x) |xi_i|^{p_i(x)} (each optionally divided by p_i(x)).
  static NFunction anisotropic(int dim, std::array<SpatialFunction, 2> p, std::array<SpatialFunction, 2> w,
                               bool divide_by_p, SampleSpec sample) {
    NFunction m(dim, Catalog::anisotropic_powers, std::move(sample), "anisotropic_powers");
    for (int i = 0; i < dim; ++i) {
      check_exponent(p[i], m.sample_.domain, "p" + std::to_string(i + 1));
      check_weight(w[i], m.sample_.domain, "weight" + std::to_string(i + 1), false);
      m.fparams_["p" + std::to_string(i + 1)] = p[i].describe();
      m.fparams_["weight" + std::to_string(i + 1)] = w[i].describe();
    }
    m.params_ = {{"divide_by_p", divide_by_p ? 1.0 : 0.0}};
    if (dim == 1) {
      m.set_radial([p, w, divide_by_p](const Vec& x, double s) {
        const double px = p[0](x);
        const double v = w[0](x) * std::pow(s, px);
        return divide_by_p ? v / px : v;
      });
    } else {
      m.rule_ = [p, w, divide_by_p](const Vec& x, const Vec& xi) {
        double total = 0.0;
        for (int i = 0; i < 2; ++i) {
          const double pi = p[i](x);
          const double v = w[i](x) * std::pow(std::abs(xi[i]), pi);
          total += divide_by_p ? v / pi : v;
        }
        return total;
      };
    }
    m.x_independent_ = p[0].is_constant() && p[1].is_constant() && w[0].is_constant() && w[1].is_constant();
    return m;
  }

  // |xi|^p + a(x) |xi|^q (each optionally divided by its exponent).
  static NFunction double_phase(int dim, double p, double q, SpatialFunction a, bool divide_by_p, SampleSpec sample) {
    if (!(p > 1.0) || !(q >= p) || !std::isfinite(q)) throw BadParameters("double_phase needs 1 < p <= q < inf");
    NFunction m(dim, Catalog::double_phase, std::move(sample), "double_phase");
    check_weight(a, m.sample_.domain, "a", true);
    m.set_radial([p, q, a, divide_by_p](const Vec& x, double s) {
      const double sp = std::pow(s, p), sq = std::pow(s, q);
      return divide_by_p ? sp / p + a(x) * sq / q : sp + a(x) * sq;
    });
    m.params_ = {{"p", p}, {"q", q}, {"divide_by_p", divide_by_p ? 1.0 : 0.0}};
    m.fparams_ = {{"a", a.describe()}};
    m.x_independent_ = a.is_constant();
    return m;
  }

  // e^{|xi|} - |xi| - 1
  static NFunction exponential(int dim, SampleSpec sample) {
    NFunction m(dim, Catalog::exponential, std::move(sample), "exponential");
    const auto profile = ScalarNFunction::exponential(1.0);
    m.set_radial([profile](const Vec&, double s) { return profile(s); });
    m.x_independent_ = true;
    return m;
  }

  // Radial profile given by a table (two-column input).
  static NFunction tabulated_radial(int dim, ScalarNFunction table, SampleSpec sample) {
    if (!table.is_tabulated()) throw BadParameters("tabulated_radial expects a tabulated profile");
    NFunction m(dim, Catalog::tabulated, std::move(sample), "tabulated");
    m.set_radial([table](const Vec&, double s) { return table(s); });
    m.params_ = {{"nodes", static_cast<double>(table.nodes().size())}};
    m.fparams_ = {{"table", table.describe()}};
    m.x_independent_ = true;
    return m;
  }

  // Planar table (three-column input), d = 2.
  static NFunction tabulated_planar(PlanarTable table, SampleSpec sample) {
    NFunction m(2, Catalog::tabulated, std::move(sample), "tabulated");
    auto shared = std::make_shared<const PlanarTable>(std::move(table));
    m.rule_ = [shared](const Vec&, const Vec& xi) { return (*shared)(xi); };
    m.params_ = {{"nodes", static_cast<double>(shared->values.size())}};
    m.x_independent_ = true;
    return m;
  }

  // User-supplied callables. They carry catalog id `tabulated`.
  static NFunction from_radial(int dim, RadialRule rule, SampleSpec sample, std::string label,
                               bool x_independent = false) {
    NFunction m(dim, Catalog::tabulated, std::move(sample), std::move(label));
    m.set_radial(std::move(rule));
    m.x_independent_ = x_independent;
    return m;
  }
  static NFunction from_rule(int dim, Rule rule, SampleSpec sample, std::string label, bool x_independent = false) {
    NFunction m(dim, Catalog::tabulated, std::move(sample), std::move(label));
    m.rule_ = std::move(rule);
    m.x_independent_ = x_independent;
    return m;
  }

 private:
  NFunction(int dim, Catalog c, SampleSpec sample, std::string label)
      : dim_(dim), catalog_(c), sample_(std::move(sample)), label_(std::move(label)) {
    if (dim < 1 || dim > 2) throw DimensionUnsupported("N-functions are supported for d = 1, 2");
    if (sample_.domain.dim != dim) {
      sample_.domain = Box::unit(dim);
    }
    if (c == Catalog::exponential && sample_.xi_max > 100.0) sample_.xi_max = 100.0;
  }

  void set_radial(RadialRule r) {
    radial_ = std::move(r);
    auto rr = radial_;
    rule_ = [rr](const Vec& x, const Vec& xi) { return rr(x, norm(xi)); };
  }

  static void check_exponent(const SpatialFunction& p, const Box& box, const std::string& name) {
    const auto [lo, hi] = p.range(box);
    if (!(lo > 1.0) || !std::isfinite(hi))
      throw BadParameters("exponent " + name + " must satisfy 1 < p_min <= p_max < inf");
  }
  static void check_weight(const SpatialFunction& w, const Box& box, const std::string& name, bool allow_zero) {
    const auto [lo, hi] = w.range(box);
    if (allow_zero ? !(lo >= 0.0) : !(lo > 0.0)) throw BadParameters("weight " + name + " out of range");
    if (!std::isfinite(hi)) throw BadParameters("weight " + name + " must be bounded");
  }

  int dim_ = 1;
  Catalog catalog_ = Catalog::power_p;
  SampleSpec sample_;
  std::string label_;
  Rule rule_;
  RadialRule radial_;
  std::map<std::string, double> params_;
  std::map<std::string, std::string> fparams_;
  bool x_independent_ = false;
};

// sup over sampled x and directions of M(x, s e).
inline double radial_sup(const NFunction& M, double s, const std::vector<Vec>& xs, const std::vector<Vec>& dirs) {
  double best = 0.0;
  for (const auto& x : xs) {
    if (M.is_radial()) {
      best = std::max(best, M.radial(x, s));
      continue;
    }
    for (const auto& e : dirs) best = std::max(best, M(x, s * e));
  }
  return best;
}

// inf over sampled x and directions of M(x, s e).
inline double radial_inf(const NFunction& M, double s, const std::vector<Vec>& xs, const std::vector<Vec>& dirs) {
  double best = std::numeric_limits<double>::infinity();
  for (const auto& x : xs) {
    if (M.is_radial()) {
      best = std::min(best, M.radial(x, s));
      continue;
    }
    for (const auto& e : dirs) best = std::min(best, M(x, s * e));
  }
  return best;
}

namespace detail {

inline std::vector<std::vector<double>> read_numeric_csv(const std::string& path, std::size_t columns) {
  std::ifstream in(path);
  if (!in) throw BadParameters("cannot open tabulated N-function file " + path);
  std::string line;
  std::getline(in, line);  // header
  std::vector<std::vector<double>> rows;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<double> row;
    std::size_t pos = 0;
    while (pos <= line.size()) {
      std::size_t end = line.find(',', pos);
      if (end == std::string::npos) end = line.size();
      std::string cell = line.substr(pos, end - pos);
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      cell = first == std::string::npos ? std::string() : cell.substr(first, last - first + 1);
      double v = 0.0;
      auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw BadParameters(path + ":" + std::to_string(lineno) + ": not a number: '" + cell + "'");
      row.push_back(v);
      pos = end + 1;
    }
    if (row.size() != columns)
      throw BadParameters(path + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) + " columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

}  // namespace detail

// Two-column (s, value) file: radial profile; s = 0 is added when absent.
inline NFunction load_tabulated_radial(const std::string& path, int dim, SampleSpec sample) {
  auto rows = detail::read_numeric_csv(path, 2);
  std::sort(rows.begin(), rows.end());
  std::vector<double> s, v;
  if (rows.empty() || rows.front()[0] != 0.0) {
    s.push_back(0.0);
    v.push_back(0.0);
  }
  for (const auto& r : rows) {
    s.push_back(r[0]);
    v.push_back(r[1]);
  }
  return NFunction::tabulated_radial(dim, ScalarNFunction::tabulated(std::move(s), std::move(v)), std::move(sample));
}

// Three-column (xi1, xi2, value) file on a complete tensor grid.
inline NFunction load_tabulated_planar(const std::string& path, SampleSpec sample) {
  const auto rows = detail::read_numeric_csv(path, 3);
  PlanarTable t;
  for (const auto& r : rows) {
    t.x1.push_back(r[0]);
    t.x2.push_back(r[1]);
  }
  auto uniq = [](std::vector<double>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(t.x1);
  uniq(t.x2);
  if (t.x1.size() < 2 || t.x2.size() < 2 || t.x1.size() * t.x2.size() != rows.size())
    throw BadParameters(path + ": rows do not form a complete tensor grid");
  t.values.assign(rows.size(), std::numeric_limits<double>::quiet_NaN());
  for (const auto& r : rows) {
    const auto i = static_cast<std::size_t>(std::lower_bound(t.x1.begin(), t.x1.end(), r[0]) - t.x1.begin());
    const auto j = static_cast<std::size_t>(std::lower_bound(t.x2.begin(), t.x2.end(), r[1]) - t.x2.begin());
    t.values[i + t.x1.size() * j] = r[2];
  }
  for (double v : t.values)
    if (std::isnan(v)) throw BadParameters(path + ": duplicate or missing grid entries");
  return NFunction::tabulated_planar(std::move(t), std::move(sample));
}

}  // namespace orlicz
