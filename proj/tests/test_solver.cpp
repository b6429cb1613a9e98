#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "orlicz/solver.hpp"

using namespace orlicz;

namespace {

VectorField plap(int dim, double p) {
  OperatorSpec s;
  s.dim = dim;
  s.p = p;
  return make_model_operator(s);
}

ProblemSpec problem(int dim, double p, int cells, int steps, double T) {
  ProblemSpec s{plap(dim, p)};
  s.omega = Box::unit(dim);
  s.cells = {cells, cells};
  s.steps = steps;
  s.T = T;
  return s;
}

// Dense tridiagonal solve for (1 + 2r) u_i - r (u_{i-1} + u_{i+1}) = b_i.
std::vector<double> thomas(double r, std::vector<double> b) {
  const std::size_t n = b.size();
  std::vector<double> c(n, 0.0);
  double denom = 1 + 2 * r;
  c[0] = -r / denom;
  b[0] /= denom;
  for (std::size_t i = 1; i < n; ++i) {
    denom = 1 + 2 * r + r * c[i - 1];
    c[i] = -r / denom;
    b[i] = (b[i] + r * b[i - 1]) / denom;
  }
  for (std::size_t i = n - 1; i-- > 0;) b[i] -= c[i] * b[i + 1];
  return b;
}

}  // namespace

TEST(ImplicitStep, LinearStepMatchesTridiagonalSolve) {
  const SpaceGrid g(Box::unit(1), {40, 1});
  const auto A = plap(1, 2.0);
  const double dt = 0.003, h = 1.0 / 40;
  const auto uprev = g.interpolate([](const Vec& x) { return x[0] * (1 - x[0]) * std::exp(x[0]); });
  const auto rhs = g.interpolate([](const Vec& x) { return std::cos(3 * x[0]); });
  const auto s = solve_implicit_step(A, g, uprev, dt, rhs);
  std::vector<double> b;
  for (int i : g.interior()) b.push_back(uprev[i] + dt * rhs[i]);
  const auto ref = thomas(dt / (h * h), b);
  for (std::size_t k = 0; k < ref.size(); ++k) EXPECT_NEAR(s.u[g.interior()[k]], ref[k], 1e-11);
  EXPECT_EQ(s.u.front(), 0.0);
  EXPECT_EQ(s.u.back(), 0.0);
  EXPECT_LE(s.newton_iterations, 2);
  EXPECT_EQ(s.picard_iterations, 0);
}

TEST(ImplicitStep, ZeroIsFixedPoint) {
  for (int dim : {1, 2})
    for (double p : {1.5, 2.0, 3.0}) {
      const SpaceGrid g(Box::unit(dim), {8, 8});
      const std::vector<double> z(g.node_count(), 0.0);
      const auto s = solve_implicit_step(plap(dim, p), g, z, 0.1, z);
      EXPECT_EQ(s.u, z);
      EXPECT_EQ(s.newton_iterations, 0);
      EXPECT_EQ(s.residual, 0.0);
    }
}

TEST(ImplicitStep, ManufacturedCubicStep) {
  // p = 3 in 1-D: A(g) = |g| g on each cell; build rhs so that ustar solves the step.
  const int N = 32;
  const double h = 1.0 / N, dt = 0.01;
  const SpaceGrid g(Box::unit(1), {N, 1});
  const auto ustar = g.interpolate([](const Vec& x) { return std::sin(std::numbers::pi * x[0]) + x[0] * (1 - x[0]); });
  const auto uprev = g.interpolate([](const Vec& x) { return 0.3 * std::sin(2 * std::numbers::pi * x[0]); });
  auto flux = [&](int i) {  // on cell (i, i+1)
    const double gr = (ustar[i + 1] - ustar[i]) / h;
    return std::abs(gr) * gr;
  };
  std::vector<double> rhs(g.node_count(), 0.0);
  for (int i = 1; i < N; ++i) rhs[i] = (ustar[i] - uprev[i]) / dt + (flux(i - 1) - flux(i)) / h;
  const auto s = solve_implicit_step(plap(1, 3.0), g, uprev, dt, rhs);
  for (int i = 0; i <= N; ++i) EXPECT_NEAR(s.u[i], i == 0 || i == N ? 0.0 : ustar[i], 1e-9) << i;
}

TEST(ImplicitStep, PicardFallbackAgreesWithNewton) {
  const SpaceGrid g(Box::unit(1), {24, 1});
  const auto A = plap(1, 3.0);
  const auto uprev = g.interpolate(DataField::sine(g.box(), 2.0).fn);
  const std::vector<double> rhs(g.node_count(), 1.0);
  const auto newton = solve_implicit_step(A, g, uprev, 0.01, rhs);
  StepOptions o;
  o.max_newton = 0;
  const auto picard = solve_implicit_step(A, g, uprev, 0.01, rhs, o);
  EXPECT_EQ(picard.newton_iterations, 0);
  EXPECT_GT(picard.picard_iterations, 0);
  for (std::size_t i = 0; i < g.node_count(); ++i) EXPECT_NEAR(picard.u[i], newton.u[i], 1e-9);
}

TEST(ImplicitStep, UniquenessSpotCheck) {
  for (double p : {1.5, 3.0}) {
    const SpaceGrid g(Box::unit(2), {10, 10});
    const auto uprev = g.interpolate(DataField::sine(g.box()).fn);
    const std::vector<double> rhs(g.node_count(), 2.0);
    EXPECT_LE(step_uniqueness_spot_check(plap(2, p), g, uprev, 0.02, rhs, {}, 5), 1e-8) << p;
  }
}

TEST(ImplicitStep, Errors) {
  const SpaceGrid g(Box::unit(1), {8, 1});
  const std::vector<double> z(g.node_count(), 0.0), one(g.node_count(), 1.0);
  const auto A = plap(1, 2.0);
  EXPECT_THROW(solve_implicit_step(A, g, z, 0.0, z), BadParameters);
  EXPECT_THROW(solve_implicit_step(A, g, z, 0.1, std::vector<double>(3, 0.0)), BadParameters);
  StepOptions o;
  o.tol = 0.0;
  EXPECT_THROW(solve_implicit_step(A, g, z, 0.1, z, o), BadParameters);
  o = {};
  o.max_newton = 0;
  o.max_picard = 0;
  try {
    solve_implicit_step(A, g, z, 0.1, one, o, nullptr, 7);
    FAIL() << "expected NoConvergence";
  } catch (const NoConvergence& e) {
    EXPECT_EQ(e.step(), 7);
    EXPECT_GT(e.last_residual(), 0.0);
  }
}

TEST(SolveParabolic, HeatMatchesDiscreteEigenmode) {
  // sin(pi x) (and its tensor product) is an eigenvector of the lumped P1 operator.
  for (int dim : {1, 2}) {
    const int N = dim == 1 ? 32 : 12;
    auto spec = problem(dim, 2.0, N, 20, 0.1);
    spec.u0 = DataField::sine(spec.omega);
    const auto r = solve_parabolic(spec, 0.0, 1e6);
    const double h = 1.0 / N;
    const double lam = dim * 4.0 / (h * h) * std::pow(std::sin(std::numbers::pi * h / 2), 2);
    const auto& g = r.u.grid;
    for (std::size_t k = 0; k < r.u.values.size(); ++k) {
      const double decay = std::pow(1.0 + spec.dt() * lam, -static_cast<double>(k));
      for (std::size_t i = 0; i < g.node_count(); ++i)
        EXPECT_NEAR(r.u.values[k][i], decay * r.u0_n[i], 1e-10) << "d=" << dim << " k=" << k;
    }
  }
}

TEST(SolveParabolic, HeatApproachesContinuousSolution) {
  auto spec = problem(1, 2.0, 64, 256, 0.1);
  spec.u0 = DataField::sine(spec.omega);
  const auto r = solve_parabolic(spec, 0.0, 1e6);
  double err = 0.0;
  for (std::size_t k = 0; k < r.u.values.size(); ++k)
    for (std::size_t i = 0; i < r.u.grid.node_count(); ++i) {
      const double x = r.u.grid.node(i)[0];
      err = std::max(err, std::abs(r.u.values[k][i] -
                                   std::exp(-std::numbers::pi * std::numbers::pi * r.u.times[k]) *
                                       std::sin(std::numbers::pi * x)));
    }
  EXPECT_LT(err, 2e-3);
}

TEST(SolveParabolic, TruncatedSpikeStaysBounded) {
  auto spec = problem(2, 2.0, 16, 10, 0.5);
  spec.f = DataField::spike(1e8, {0.5, 0.5}, 0.07);
  const double n = 10.0;
  const auto r = solve_parabolic(spec, 0.25, n);
  for (double v : r.f_n) EXPECT_LE(v, n);
  // Discrete maximum principle: 0 <= u <= n t.
  for (std::size_t k = 0; k < r.u.values.size(); ++k)
    for (double v : r.u.values[k]) {
      EXPECT_TRUE(std::isfinite(v));
      EXPECT_GE(v, -1e-12);
      EXPECT_LE(v, n * r.u.times[k] + 1e-9);
    }
  EXPECT_GT(r.u.sup_abs(), 0.0);
}

TEST(SolveParabolic, OrderedDataGiveOrderedSolutions) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> U(0.0, 1.0);
  for (double p : {1.5, 3.0}) {
    auto a = problem(1, p, 24, 12, 0.2);
    const double c = U(rng), amp = 2 * U(rng);
    a.f = DataField::bump(amp, {c, 0}, 0.3);
    a.u0 = DataField::sine(a.omega, U(rng));
    auto b = a;
    b.f = a.f.plus(DataField::constant(U(rng)));
    b.u0 = a.u0.plus(DataField::bump(0.5, {0.5, 0}, 0.2));
    const auto ra = solve_parabolic(a, 0.5, 100.0), rb = solve_parabolic(b, 0.5, 100.0);
    for (std::size_t k = 0; k < ra.u.values.size(); ++k)
      for (std::size_t i = 0; i < ra.u.grid.node_count(); ++i)
        EXPECT_LE(ra.u.values[k][i], rb.u.values[k][i] + 1e-9) << p;
  }
}

TEST(SolveParabolic, RegularizedRunsConvergeForAllModels) {
  std::vector<OperatorSpec> specs(3);
  specs[0].p = 1.5;
  specs[1].kind = OperatorSpec::Kind::variable_p;
  specs[1].p_field = SpatialFunction::bump(2.0, 0.5, {0.5, 0.0}, 0.3);
  specs[2].kind = OperatorSpec::Kind::exponential;
  for (const auto& os : specs) {
    ProblemSpec s{make_model_operator(os)};
    s.cells = {32, 1};
    s.steps = 16;
    s.T = 0.1;
    s.f = DataField::bump(3.0, {0.5, 0}, 0.3);
    s.u0 = DataField::sine(s.omega, 0.5);
    const auto r = solve_parabolic(s, 0.5, 10.0);
    EXPECT_EQ(r.report.residuals.size(), 16u);
    for (double v : r.report.residuals) EXPECT_LE(v, 1e-10);
    EXPECT_EQ(r.report.table().rows.size(), 16u);
    EXPECT_EQ(r.A_theta.theta(), 0.5);
  }
}

TEST(SolveParabolic, WarmStartGivesSameSolution) {
  auto s = problem(1, 3.0, 24, 8, 0.1);
  s.f = DataField::constant(2.0);
  const auto cold = solve_parabolic(s, 0.25, 10.0);
  SolveOptions o;
  o.warm_start = &cold.u;
  const auto warm = solve_parabolic(s, 0.25, 10.0, o);
  for (std::size_t k = 0; k < cold.u.values.size(); ++k)
    for (std::size_t i = 0; i < cold.u.grid.node_count(); ++i)
      EXPECT_NEAR(warm.u.values[k][i], cold.u.values[k][i], 1e-10);
  int cold_it = 0, warm_it = 0;
  for (int v : cold.report.newton_iterations) cold_it += v;
  for (int v : warm.report.newton_iterations) warm_it += v;
  EXPECT_LT(warm_it, cold_it);
}

TEST(SolveParabolic, RejectsBadParameters) {
  auto s = problem(1, 2.0, 8, 4, 1.0);
  EXPECT_THROW(solve_parabolic(s, 0.5, 0.0), BadParameters);
  auto bad = s;
  bad.steps = 0;
  EXPECT_THROW(solve_parabolic(bad, 0.5, 1.0), BadParameters);
  bad = s;
  bad.T = -1.0;
  EXPECT_THROW(solve_parabolic(bad, 0.5, 1.0), BadParameters);
  // theta = 0 with a monotone but not strictly monotone field.
  ProblemSpec z{VectorField::custom(1, [](const Vec&, const Vec&) { return Vec{0.0, 0.0}; }, s.M(), 1.0, "zero")};
  EXPECT_THROW(solve_parabolic(z, 0.0, 1.0), BadParameters);
  bad = s;
  bad.f = DataField{[](const Vec&) { return std::nan(""); }, "nan"};
  EXPECT_THROW(solve_parabolic(bad, 0.5, 1.0), BadParameters);
}

TEST(SpaceTimeModular, LinearProfile) {
  const SpaceGrid g(Box::unit(1), {10, 1});
  GridFunction u = GridFunction::constant(g, 0.6, 3, 0.0);
  // Tent with slope +-2; interpolation pins the boundary nodes to zero.
  for (auto& lvl : u.values) lvl = g.interpolate([](const Vec& x) { return 2.0 * std::min(x[0], 1.0 - x[0]); });
  EXPECT_NEAR(space_time_modular(plap(1, 2.0).governing(), u), 0.6 * 2.0, 1e-12);
}

TEST(Staircase, HeatTrendsAndExactZeroBeyondDataBound) {
  auto s = problem(1, 2.0, 24, 16, 0.2);
  s.f = DataField::constant(1.0);
  s.u0 = DataField::sine(s.omega);
  StaircaseOptions o;
  o.thetas = {1.0, 0.5, 0.25, 0.125};
  o.ns = {1.0, 2.0, 4.0};
  o.ks = {0.5, 1.0};
  const auto r = staircase(s, o);
  EXPECT_TRUE(r.report.passed());
  EXPECT_EQ(r.final_solutions.size(), 3u);
  const auto& th = r.report.table("theta_cauchy");
  EXPECT_EQ(th.rows.size(), 9u);
  for (const auto& row : r.report.table("n_cauchy").rows) EXPECT_EQ(row[3], 0.0);
  EXPECT_LE(r.report.metric("worst_truncation_ratio"), 2.0);
}

TEST(Staircase, RejectsNonDecreasingThetas) {
  auto s = problem(1, 2.0, 8, 4, 0.1);
  StaircaseOptions o;
  o.thetas = {0.5, 0.5};
  EXPECT_THROW(staircase(s, o), BadParameters);
  o.thetas = {};
  EXPECT_THROW(staircase(s, o), BadParameters);
}
