#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "orlicz/mollify.hpp"

using namespace orlicz;
using Kind = CutoffParams::Kind;

namespace {

CutoffParams params(Kind k, double l = 2.0, double tau = 0.5, double r = 0.1, double T = 1.0) {
  CutoffParams p;
  p.kind = k;
  p.l = l;
  p.tau = tau;
  p.r = r;
  p.T = T;
  return p;
}

// Composite Simpson, used as an oracle independent of the library quadrature.
template <class F>
double simpson(F f, double a, double b, int n = 4000) {
  const double h = (b - a) / n;
  double s = f(a) + f(b);
  for (int i = 1; i < n; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
  return s * h / 3.0;
}

Box box1(double lo, double hi) {
  Box b = Box::unit(1);
  b.lo[0] = lo;
  b.hi[0] = hi;
  return b;
}

}  // namespace

TEST(Truncate, Examples) {
  EXPECT_EQ(truncate(3.0, 2.0), 2.0);
  EXPECT_EQ(truncate(-3.0, 2.0), -2.0);
  EXPECT_EQ(truncate(1.0, 2.0), 1.0);
  EXPECT_EQ(truncate(2.0, 1.0, 3.0), 2.0);
  EXPECT_EQ(truncate(-2.0, 1.0, 3.0), -1.0);
  EXPECT_EQ(truncate(5.0, 1.0, 3.0), 3.0);
  EXPECT_THROW(truncate(1.0, 0.0), BadParameters);
  EXPECT_THROW(truncate(1.0, 1.0, -1.0), BadParameters);
}

TEST(Truncate, IdempotentAndLipschitz) {
  std::mt19937_64 rng(1);
  std::normal_distribution<double> g(0.0, 5.0);
  std::vector<double> v(1000);
  for (double& x : v) x = g(rng);
  const auto t = truncate(v, 2.5);
  EXPECT_EQ(truncate(t, 2.5), t);
  const auto a = truncate(v, 1.0, 4.0);
  EXPECT_EQ(truncate(a, 1.0, 4.0), a);
  for (std::size_t i = 1; i < v.size(); ++i) EXPECT_LE(std::abs(t[i] - t[i - 1]), std::abs(v[i] - v[i - 1]));
}

TEST(Cutoff, PsiAndGExamples) {
  const auto psi = params(Kind::psi_l);
  EXPECT_EQ(cutoff(psi, 2.5), 0.5);
  EXPECT_EQ(cutoff(psi, 1.0), 1.0);
  EXPECT_EQ(cutoff(psi, 4.0), 0.0);
  const auto G = params(Kind::G_l);
  EXPECT_EQ(cutoff(G, 5.0), 1.0);
  EXPECT_EQ(cutoff(G, 1.0), 0.0);
  EXPECT_EQ(cutoff(G, 2.5), 0.5);
  EXPECT_EQ(cutoff(G, -5.0), -1.0);
}

TEST(Cutoff, ThetaMatchesConvolutionOracleAndSupport) {
  const double tau = 0.5, r = 0.1;
  const auto th = params(Kind::theta_tau_r, 0.0, tau, r, 1.0);
  const double mass = simpson([](double z) { return bump::raw(z); }, -1.0, 1.0, 20000);
  auto oracle = [&](double t) {
    // (omega_r * 1_[0, tau))(t)
    return simpson([&](double s) { return bump::raw((t - s) / r) / (mass * r); }, 0.0, tau, 20000);
  };
  for (double t : linspace(-0.15, 0.65, 33)) EXPECT_NEAR(cutoff(th, t), oracle(t), 1e-9) << t;
  for (double t : linspace(r, tau - r, 9)) EXPECT_DOUBLE_EQ(cutoff(th, t), 1.0);
  for (double t : {tau + r, tau + 2 * r, 0.9}) EXPECT_EQ(cutoff(th, t), 0.0);
  EXPECT_EQ(cutoff(th, -r), 0.0);
  EXPECT_GT(cutoff(th, -r + 1e-3), 0.0);
  EXPECT_THROW(cutoff(params(Kind::theta_tau_r, 0.0, 0.9, 0.1, 1.0), 0.2), BadSupport);
}

TEST(Cutoff, PhiProfileAndLipschitz) {
  const double r = 0.1, T = 1.0;
  const auto phi = params(Kind::phi_r, 0.0, 0.5, r, T);
  for (double t : linspace(0.0, T - 2 * r, 11)) EXPECT_EQ(cutoff(phi, t), 1.0);
  for (double t : linspace(T - r, T, 5)) EXPECT_EQ(cutoff(phi, t), 0.0);
  double steepest = 0.0, prev = 1.0;
  const auto ts = linspace(0.0, T, 20001);
  for (std::size_t i = 1; i < ts.size(); ++i) {
    const double v = cutoff(phi, ts[i]);
    EXPECT_LE(v, prev + 1e-15);  // nonincreasing
    steepest = std::max(steepest, (prev - v) / (ts[i] - ts[i - 1]));
    prev = v;
  }
  // A smooth descent from 1 to 0 over length r is steeper than 1/r; the
  // exact constant of this profile is 2 rho(0) / r.
  EXPECT_LE(steepest, phi_r_lipschitz(r) * (1 + 1e-9));
  EXPECT_GT(steepest, 0.999 * phi_r_lipschitz(r));
  EXPECT_GT(phi_r_lipschitz(r), 1.0 / r);
  EXPECT_NEAR(phi_r_lipschitz(r) * r, 2.0 * std::exp(-1.0) / simpson(bump::raw, -1, 1, 20000), 1e-10);
  EXPECT_THROW(cutoff(params(Kind::phi_r, 0.0, 0.5, 0.6, 1.0), 0.1), BadParameters);
}

TEST(Cutoff, RangeAndPsiLipschitz) {
  const std::vector<CutoffParams> all{params(Kind::psi_l), params(Kind::theta_tau_r), params(Kind::phi_r)};
  const auto ts = linspace(-4.0, 4.0, 4001);
  for (const auto& p : all)
    for (double t : ts) {
      const double v = cutoff(p, t);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0);
    }
  const auto psi = params(Kind::psi_l, 1.5);
  for (std::size_t i = 1; i < ts.size(); ++i)
    EXPECT_LE(std::abs(cutoff(psi, ts[i]) - cutoff(psi, ts[i - 1])), (ts[i] - ts[i - 1]) * (1 + 1e-12));
}

TEST(TimeRegularize, ConstantWithZeroHistory) {
  const double mu = 10.0, dt = 1e-4;
  const int n = 10000;
  std::vector<double> t(n + 1);
  for (int k = 0; k <= n; ++k) t[k] = k * dt;
  const std::vector<std::vector<double>> g(n + 1, std::vector<double>{1.0, 3.0});
  const auto gm = time_regularize(t, g, {0.0, 0.0}, mu);
  for (int k = 0; k <= n; k += 37) {
    EXPECT_NEAR(gm[k][0], 1.0 - std::exp(-mu * t[k]), 1e-8);
    EXPECT_NEAR(gm[k][1], 3.0 * (1.0 - std::exp(-mu * t[k])), 3e-8);
  }
}

TEST(TimeRegularize, FixedPointAndPositivity) {
  std::vector<double> t = linspace(0, 1, 101);
  const std::vector<std::vector<double>> c(t.size(), std::vector<double>{2.5});
  for (const auto& lvl : time_regularize(t, c, {2.5}, 7.0)) EXPECT_DOUBLE_EQ(lvl[0], 2.5);
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> u(0.0, 5.0);
  std::vector<std::vector<double>> g(t.size(), std::vector<double>(20));
  double gmax = 0.0;
  for (auto& lvl : g)
    for (double& v : lvl) gmax = std::max(gmax, v = u(rng));
  for (const auto& lvl : time_regularize(t, g, std::vector<double>(20, 0.0), 50.0))
    for (double v : lvl) {
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, gmax);
    }
  EXPECT_THROW(time_regularize(t, g, std::vector<double>(20, 0.0), 0.0), BadParameters);
}

TEST(TimeRegularize, OdeResidualHalvesWithDt) {
  const double mu = 10.0;
  std::vector<double> res;
  for (int n : {1000, 2000, 4000, 8000}) {
    const auto t = linspace(0.0, 1.0, n + 1);
    std::vector<std::vector<double>> g;
    for (double s : t) g.push_back({1.0 + std::sin(3 * s)});
    const auto gm = time_regularize(t, g, {0.0}, mu);
    res.push_back(time_regularize_ode_residual(t, g, gm, mu));
  }
  for (std::size_t i = 1; i < res.size(); ++i) EXPECT_NEAR(res[i - 1] / res[i], 2.0, 0.1) << i;
}

TEST(TimeRegularize, LargeMuApproachesG) {
  const auto t = linspace(0.0, 1.0, 10001);
  std::vector<std::vector<double>> g;
  for (double s : t) g.push_back({2.0 + std::sin(5 * s)});
  double prev = std::numeric_limits<double>::infinity();
  for (double mu : {10.0, 100.0, 1000.0}) {
    const auto gm = time_regularize(t, g, {2.0}, mu);
    double l1 = 0.0;
    for (std::size_t k = 1; k < t.size(); ++k) l1 += (t[k] - t[k - 1]) * std::abs(gm[k][0] - g[k][0]);
    EXPECT_LT(l1, prev);
    prev = l1;
  }
  EXPECT_LT(prev, 1e-2);
}

TEST(MollifySpace, ConstantInteriorIsReproduced) {
  const Box b = box1(-1, 1);
  const auto xi = CellField::sample(b, {400, 1}, [](const Vec&) { return Vec{3.0, 0.0}; });
  const auto s = mollify_space(xi, 0.1, 1.0);
  for (int i = 100; i < 300; ++i) EXPECT_NEAR(s.values[i][0], 3.0, 1e-12);
}

TEST(MollifySpace, JumpWidthBound) {
  const Box b = box1(-1, 1);
  const int n = 800;
  const auto xi = CellField::sample(b, {n, 1}, [](const Vec& x) { return Vec{x[0] < 0.3 ? 0.0 : 1.0, 0.0}; });
  const double delta = 0.05, R = 1.0, kappa = 1 - delta / R;
  const auto s = mollify_space(xi, delta, R);
  double width = 0.0;
  for (int i = 0; i < n; ++i) {
    const double x = s.center(i, 0)[0];
    if (x > 0.9 * kappa) continue;  // the right boundary of the support is a second transition
    const double v = s.values[i][0];
    if (v > 1e-12 && v < 1 - 1e-12) width += s.h(0);
  }
  EXPECT_GT(width, 0.0);
  EXPECT_LE(width, 2 * delta + (1 - kappa) * b.diameter() + 2 * s.h(0));
  // Continuity: no jump larger than the kernel allows across one cell.
  for (int i = 1; i < n; ++i) EXPECT_LT(std::abs(s.values[i][0] - s.values[i - 1][0]), 0.1);
}

TEST(MollifySpace, SupportStrictlyInsideAndMassScaling) {
  const Box b = box1(-1, 1);
  const int n = 1000;
  const auto xi = CellField::sample(b, {n, 1}, [](const Vec& x) { return Vec{std::exp(-8 * x[0] * x[0]), 0.0}; });
  const double delta = 0.05, R = 0.8, kappa = 1 - delta / R;
  const auto s = mollify_space(xi, delta, R);
  // Source sampling covers kappa * box plus a delta rim; the rest is zero.
  for (int i = 0; i < n; ++i) {
    const double x = std::abs(s.center(i, 0)[0]);
    if (x > kappa + delta + s.h(0)) EXPECT_EQ(s.values[i][0], 0.0) << x;
  }
  EXPECT_EQ(s.values.front()[0], 0.0);
  EXPECT_EQ(s.values.back()[0], 0.0);
  // x -> xi(x / kappa) rescales the integral by kappa^d.
  EXPECT_NEAR(s.integral() / (kappa * xi.integral()), 1.0, 5e-3);
}

TEST(MollifySpace, LinearAndPositivityPreserving) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  const Box b = Box::unit(2);
  auto rnd = [&] {
    return CellField::sample(b, {40, 40}, [&](const Vec&) { return Vec{u(rng), 0.0}; });
  };
  const auto a = rnd(), c = rnd();
  CellField sum = a;
  for (std::size_t i = 0; i < sum.values.size(); ++i) sum.values[i] = a.values[i] + 2.0 * c.values[i];
  const auto sa = mollify_space(a, 0.05, 0.5), sc = mollify_space(c, 0.05, 0.5), ss = mollify_space(sum, 0.05, 0.5);
  for (std::size_t i = 0; i < ss.values.size(); ++i) {
    EXPECT_NEAR(ss.values[i][0], sa.values[i][0] + 2.0 * sc.values[i][0], 1e-12);
    EXPECT_GE(sa.values[i][0], 0.0);
  }
}

TEST(MollifySpace, ModularRatioBoundedAsDeltaShrinks) {
  const Box b = box1(-1, 1);
  const auto xi = CellField::sample(b, {2048, 1}, [](const Vec& x) {
    return Vec{x[0] < 0.2 ? std::cos(3 * x[0]) : -1.5, 0.0};
  });
  SampleSpec sp;
  sp.domain = b;
  const auto M = NFunction::power(1, 3.0, 1.0, sp);
  std::vector<double> ratios;
  for (double delta : {1.0 / 8, 1.0 / 16, 1.0 / 32, 1.0 / 64}) ratios.push_back(mollifier_modular_ratio(M, xi, delta, 1.0));
  for (double r : ratios) {
    EXPECT_GT(r, 0.0);
    EXPECT_LE(r, 1.0 + 1e-9);  // Jensen plus the kappa^d mass factor
  }
  EXPECT_LE(std::abs(ratios.back() - ratios[2]), std::abs(ratios[1] - ratios[0]) + 1e-12);
}

TEST(MollifySpace, Errors) {
  const auto xi = CellField::sample(Box::unit(1), {64, 1}, [](const Vec&) { return Vec{1.0, 0.0}; });
  EXPECT_THROW(mollify_space(xi, 0.2, 0.5), DeltaTooLarge);
  EXPECT_THROW(mollify_space(xi, 0.1, 0.8), BadParameters);
  EXPECT_THROW(mollify_space(xi, 0.0, 0.5), BadParameters);
}

TEST(ApproximationTrend, DecreasesAsDeltaShrinks) {
  SampleSpec sp;
  sp.domain = box1(-1, 1);
  const auto M = NFunction::power(1, 2.0, 1.0, sp);
  const auto pi = std::numbers::pi;
  // phi vanishes on the boundary of [-1, 1]; R = 1 admits every default delta.
  const auto r = approximation_trend(
      M, [pi](const Vec& x) { return 1.5 * std::cos(0.5 * pi * x[0]); },
      [pi](const Vec& x) { return Vec{-0.75 * pi * std::sin(0.5 * pi * x[0]), 0.0}; }, box1(-1, 1), {2048, 1}, 1.0);
  EXPECT_TRUE(r.passed());
  EXPECT_LT(r.metric("final_modular"), r.metric("first_modular"));
  // The largest level leaves phi untruncated, so lambda = 1 suffices eventually.
  const auto& t = r.table("trend");
  EXPECT_GT(t.rows.back()[3], 0.0);
}
