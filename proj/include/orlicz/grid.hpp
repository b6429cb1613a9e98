#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "orlicz/core.hpp"
#include "orlicz/report.hpp"

namespace orlicz {

// Uniform tensor grid on a box with zero Dirichlet data. In d = 1 the
// elements are the cells; in d = 2 each square is split along its
// lower-left / upper-right diagonal into two P1 triangles. Gradients are
// constant per element and the mass matrix is lumped.
class SpaceGrid {
 public:
  struct Element {
    std::array<int, 3> nodes{};
    int count = 0;                 // 2 in d = 1, 3 in d = 2
    std::array<Vec, 3> grad_phi{};  // gradients of the nodal hat functions
    double area = 0.0;
    Vec centroid{};
  };

  SpaceGrid() : SpaceGrid(Box::unit(1), {16, 1}) {}

  SpaceGrid(const Box& box, std::array<int, 2> cells) : box_(box) {
    if (box.dim != 1 && box.dim != 2) throw DimensionUnsupported("grids exist for d = 1 and d = 2 only");
    cells_ = {cells[0], box.dim == 2 ? cells[1] : 1};
    if (cells_[0] < 2 || cells_[1] < 1 || (box.dim == 2 && cells_[1] < 2))
      throw BadParameters("grid needs at least two cells per axis");
    h_ = {box.edge(0) / cells_[0], box.dim == 2 ? box.edge(1) / cells_[1] : 1.0};
    const int nx = cells_[0] + 1, ny = box.dim == 2 ? cells_[1] + 1 : 1;
    nodes_.reserve(static_cast<std::size_t>(nx) * ny);
    for (int j = 0; j < ny; ++j)
      for (int i = 0; i < nx; ++i) {
        nodes_.push_back({box.lo[0] + i * h_[0], box.dim == 2 ? box.lo[1] + j * h_[1] : 0.0});
        const bool edge = i == 0 || i == nx - 1 || (box.dim == 2 && (j == 0 || j == ny - 1));
        boundary_.push_back(edge);
      }
    if (box.dim == 1) {
      for (int i = 0; i < cells_[0]; ++i) {
        Element e;
        e.count = 2;
        e.nodes = {i, i + 1, -1};
        e.grad_phi = {Vec{-1.0 / h_[0], 0.0}, Vec{1.0 / h_[0], 0.0}, Vec{}};
        e.area = h_[0];
        e.centroid = {box.lo[0] + (i + 0.5) * h_[0], 0.0};
        elements_.push_back(e);
      }
    } else {
      const double hx = h_[0], hy = h_[1];
      for (int j = 0; j < cells_[1]; ++j)
        for (int i = 0; i < cells_[0]; ++i) {
          const int a = i + nx * j, b = a + 1, c = a + nx, d = c + 1;
          Element lower;  // a, b, d
          lower.count = 3;
          lower.nodes = {a, b, d};
          lower.grad_phi = {Vec{-1.0 / hx, 0.0}, Vec{1.0 / hx, -1.0 / hy}, Vec{0.0, 1.0 / hy}};
          lower.area = 0.5 * hx * hy;
          lower.centroid = (1.0 / 3.0) * (nodes_[a] + nodes_[b] + nodes_[d]);
          elements_.push_back(lower);
          Element upper;  // a, d, c
          upper.count = 3;
          upper.nodes = {a, d, c};
          upper.grad_phi = {Vec{0.0, -1.0 / hy}, Vec{1.0 / hx, 0.0}, Vec{-1.0 / hx, 1.0 / hy}};
          upper.area = 0.5 * hx * hy;
          upper.centroid = (1.0 / 3.0) * (nodes_[a] + nodes_[d] + nodes_[c]);
          elements_.push_back(upper);
        }
    }
    mass_.assign(nodes_.size(), 0.0);
    for (const auto& e : elements_)
      for (int k = 0; k < e.count; ++k) mass_[e.nodes[k]] += e.area / e.count;
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (!boundary_[i]) interior_.push_back(static_cast<int>(i));
  }

  int dim() const { return box_.dim; }
  const Box& box() const { return box_; }
  std::array<int, 2> cells() const { return cells_; }
  double h(int axis) const { return h_[axis]; }
  std::size_t node_count() const { return nodes_.size(); }
  const Vec& node(std::size_t i) const { return nodes_[i]; }
  bool is_boundary(std::size_t i) const { return boundary_[i]; }
  const std::vector<int>& interior() const { return interior_; }
  const std::vector<Element>& elements() const { return elements_; }
  double mass(std::size_t i) const { return mass_[i]; }
  const std::vector<double>& masses() const { return mass_; }

  Vec gradient(const Element& e, const std::vector<double>& u) const {
    Vec g{0.0, 0.0};
    for (int k = 0; k < e.count; ++k) g = g + u[e.nodes[k]] * e.grad_phi[k];
    return g;
  }
  double mean(const Element& e, const std::vector<double>& u) const {
    double s = 0.0;
    for (int k = 0; k < e.count; ++k) s += u[e.nodes[k]];
    return s / e.count;
  }

  // Nodal interpolant; boundary nodes are forced to zero.
  std::vector<double> interpolate(const std::function<double(const Vec&)>& f) const {
    std::vector<double> v(nodes_.size(), 0.0);
    for (int i : interior_) v[i] = f(nodes_[i]);
    return v;
  }

  double l1(const std::vector<double>& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += mass_[i] * std::abs(u[i]);
    return s;
  }
  double l2_squared(const std::vector<double>& u) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += mass_[i] * u[i] * u[i];
    return s;
  }
  double inner(const std::vector<double>& u, const std::vector<double>& v) const {
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += mass_[i] * u[i] * v[i];
    return s;
  }

  std::string describe() const {
    return "grid(d=" + std::to_string(box_.dim) + ",n=" + std::to_string(cells_[0]) +
           (box_.dim == 2 ? "x" + std::to_string(cells_[1]) : std::string()) + ",box=[" + format_double(box_.lo[0]) +
           "," + format_double(box_.hi[0]) + "]" +
           (box_.dim == 2 ? "x[" + format_double(box_.lo[1]) + "," + format_double(box_.hi[1]) + "]" : std::string()) +
           ")";
  }

 private:
  Box box_;
  std::array<int, 2> cells_{};
  std::array<double, 2> h_{};
  std::vector<Vec> nodes_;
  std::vector<bool> boundary_;
  std::vector<int> interior_;
  std::vector<Element> elements_;
  std::vector<double> mass_;
};

// Nodal values on a space grid at every level of a uniform time grid.
struct GridFunction {
  SpaceGrid grid;
  std::vector<double> times;
  std::vector<std::vector<double>> values;  // values[k][node]

  std::size_t steps() const { return times.empty() ? 0 : times.size() - 1; }
  double dt() const { return times.size() > 1 ? times[1] - times[0] : 0.0; }
  double T() const { return times.empty() ? 0.0 : times.back(); }

  static GridFunction constant(const SpaceGrid& g, double T, int steps, double c) {
    GridFunction u;
    u.grid = g;
    for (int k = 0; k <= steps; ++k) u.times.push_back(T * k / steps);
    u.values.assign(u.times.size(), std::vector<double>(g.node_count(), c));
    return u;
  }

  double sup_abs() const {
    double m = 0.0;
    for (const auto& lvl : values)
      for (double v : lvl) m = std::max(m, std::abs(v));
    return m;
  }

  // Space-time L1 distance over levels 1..Nt (rectangle rule in time).
  double l1_distance(const GridFunction& o) const {
    if (o.values.size() != values.size() || o.grid.node_count() != grid.node_count())
      throw BadParameters("grid functions live on different grids");
    double s = 0.0;
    for (std::size_t k = 1; k < values.size(); ++k) {
      double lvl = 0.0;
      for (std::size_t i = 0; i < values[k].size(); ++i) lvl += grid.mass(i) * std::abs(values[k][i] - o.values[k][i]);
      s += (times[k] - times[k - 1]) * lvl;
    }
    return s;
  }

  GridFunction mapped(const std::function<double(double)>& f) const {
    GridFunction u = *this;
    for (auto& lvl : u.values)
      for (double& v : lvl) v = f(v);
    return u;
  }

  // Columns t, x1[, x2], u; one row per node per time level.
  void write_csv(std::ostream& os) const {
    os << (grid.dim() == 2 ? "t,x1,x2,u\n" : "t,x1,u\n");
    for (std::size_t k = 0; k < values.size(); ++k)
      for (std::size_t i = 0; i < grid.node_count(); ++i) {
        os << format_double(times[k]) << ',' << format_double(grid.node(i)[0]) << ',';
        if (grid.dim() == 2) os << format_double(grid.node(i)[1]) << ',';
        os << format_double(values[k][i]) << '\n';
      }
  }
};

}  // namespace orlicz
