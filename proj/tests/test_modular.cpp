#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "catalog.hpp"
#include "orlicz/modular.hpp"

using namespace orlicz;

namespace {

SampleSpec s1() { return testcat::sample(1); }

SampledField constant_field(double c, int n = 16) {
  return SampledField::cells(Box::unit(1), {n, 1}, [c](const Vec&) { return Vec{c, 0.0}; });
}

SampledField random_field(std::mt19937_64& rng, int dim = 1) {
  std::normal_distribution<double> g(0.0, 2.0);
  std::vector<Vec> v;
  auto f = SampledField::cells(Box::unit(dim), {12, 12}, [](const Vec&) { return Vec{0.0, 0.0}; });
  for (std::size_t i = 0; i < f.size(); ++i) v.push_back({g(rng), dim == 2 ? g(rng) : 0.0});
  return f.with_values(v);
}

}  // namespace

TEST(Modular, Examples) {
  const auto M2 = NFunction::power(1, 2.0, 1.0, s1());
  EXPECT_NEAR(modular(M2, constant_field(1.0)), 1.0, 1e-12);
  EXPECT_EQ(modular(M2, constant_field(0.0)), 0.0);
  const auto M3 = NFunction::power(1, 3.0, 1.0, s1());
  for (int n : {32, 64, 128}) {
    const auto f = SampledField::cells(Box::unit(1), {n, 1}, [](const Vec& x) { return Vec{x[0], 0.0}; });
    // Midpoint rule on x^3: error is h^2/8 exactly.
    EXPECT_NEAR(modular(M3, f), 0.25, 1.0 / (8.0 * n * n) * (1 + 1e-9));
    EXPECT_GT(std::abs(modular(M3, f) - 0.25), 0.0);
  }
}

TEST(Modular, SpaceTimeWeightsSumToCylinderMeasure) {
  const auto f = SampledField::space_time(Box::unit(2), {4, 5}, 3, 0.6, [](double, const Vec&) { return Vec{1, 0}; });
  double w = 0.0;
  for (double v : f.weights) w += v;
  EXPECT_NEAR(w, 0.6, 1e-15);
  EXPECT_EQ(f.size(), 60u);
}

TEST(Modular, ConvexOnRandomPairs) {
  std::mt19937_64 rng(3);
  for (const auto& e : testcat::entries(2)) {
    for (int k = 0; k < 10; ++k) {
      const auto a = random_field(rng, 2), b = random_field(rng, 2);
      const double ma = modular(e.M, a), mb = modular(e.M, b);
      const double mid = modular(e.M, a.plus(b).scaled(0.5));
      EXPECT_LE(mid, 0.5 * (ma + mb) + 1e-12 * (1 + ma + mb)) << e.name;
    }
  }
}

TEST(Luxemburg, Examples) {
  const auto M2 = NFunction::power(1, 2.0, 1.0, s1());
  EXPECT_EQ(luxemburg_norm(M2, constant_field(0.0)), 0.0);
  EXPECT_NEAR(luxemburg_norm(M2, constant_field(1.0)), 1.0, 1e-9);
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    const auto M = NFunction::power(1, p, 1.0, s1());
    const auto f = SampledField::cells(Box::unit(1), {50, 1}, [](const Vec& x) { return Vec{std::sin(7 * x[0]), 0}; });
    double lp = 0.0;
    for (std::size_t i = 0; i < f.size(); ++i) lp += f.weights[i] * std::pow(std::abs(f.values[i][0]), p);
    EXPECT_LE(std::abs(luxemburg_norm(M, f) / std::pow(lp, 1.0 / p) - 1.0), 1e-8) << p;
    EXPECT_NEAR(luxemburg_norm(M, f.scaled(-3.0)), 3.0 * luxemburg_norm(M, f), 3e-9 * luxemburg_norm(M, f));
  }
}

TEST(Luxemburg, UnitBallAndTriangle) {
  std::mt19937_64 rng(9);
  for (const auto& e : testcat::entries(1)) {
    for (int k = 0; k < 10; ++k) {
      const auto a = random_field(rng).scaled(0.3 * (k + 1)), b = random_field(rng);
      const double na = luxemburg_norm(e.M, a), nb = luxemburg_norm(e.M, b);
      EXPECT_EQ(na <= 1.0, modular(e.M, a) <= 1.0 + 1e-9) << e.name;
      EXPECT_LE(luxemburg_norm(e.M, a.plus(b)), (na + nb) * (1 + 1e-8)) << e.name;
    }
  }
}

TEST(Luxemburg, UnboundedBracket) {
  SampleSpec s = s1();
  const auto M = NFunction::from_radial(
      1, [](const Vec&, double v) { return v > 0 ? 1e30 + v * v : 0.0; }, s, "huge", true);
  EXPECT_THROW(luxemburg_norm(M, constant_field(1.0)), Unbounded);
}

TEST(ModularConvergence, Examples) {
  const auto M = NFunction::power(1, 2.0, 1.0, s1());
  const auto target = SampledField::cells(Box::unit(1), {32, 1}, [](const Vec& x) { return Vec{x[0] * x[0], 0}; });
  const auto bump = target.with_values([&] {
    std::vector<Vec> v;
    for (const auto& x : target.points) v.push_back({std::exp(-20 * (x[0] - 0.5) * (x[0] - 0.5)), 0});
    return v;
  }());

  std::vector<SampledField> same(8, target), decaying, alternating;
  for (int i = 1; i <= 40; ++i) {
    decaying.push_back(target.plus(bump.scaled(1.0 / i)));
    alternating.push_back(target.plus(bump.scaled(i % 2 ? 1.0 : -1.0)));
  }
  const auto r0 = modular_convergence_test(M, FieldSequence(same), target);
  EXPECT_TRUE(r0.passed());
  EXPECT_EQ(r0.metric("smallest_lambda"), 1.0);
  EXPECT_EQ(r0.table("sweep").rows[0][2], 0.0);

  const auto r1 = modular_convergence_test(M, FieldSequence(decaying), target);
  EXPECT_TRUE(r1.passed());
  EXPECT_EQ(r1.metric("smallest_lambda"), 1.0);
  // i^{-2} scaling of the power modular.
  EXPECT_NEAR(r1.table("sweep").rows[0][4] / r1.table("sweep").rows[0][1], 1.0 / 1600.0, 1e-15);

  const auto r2 = modular_convergence_test(M, FieldSequence(alternating), target);
  EXPECT_TRUE(r2.failed());
  EXPECT_EQ(r2.metric("smallest_lambda"), 0.0);
}

TEST(ModularConvergence, RejectsMixedGrids) {
  const auto a = constant_field(1.0, 8), b = constant_field(1.0, 16);
  EXPECT_THROW(FieldSequence({a, b}), BadParameters);
}

TEST(UniformIntegrability, IndexExamples) {
  ScalarSamples bounded{{0.5, 2.0, 1.0}, {0.3, 0.3, 0.4}};
  const auto t0 = uniform_integrability_index({bounded}, {3.0});
  EXPECT_EQ(t0.rows[0][1], 0.0);

  // n * indicator of measure 1/n^2 (concentrating) and 1/n (not UI).
  auto spike = [](int n, double measure) {
    return ScalarSamples{{static_cast<double>(n), 0.0}, {measure, 1.0 - measure}};
  };
  std::vector<ScalarSamples> ui, not_ui;
  std::vector<double> R;
  for (int n = 2; n <= 64; n *= 2) {
    ui.push_back(spike(n, 1.0 / (n * n)));
    not_ui.push_back(spike(n, 1.0 / n));
    R.push_back(n);
  }
  const auto a = uniform_integrability_index(ui, R);
  const auto b = uniform_integrability_index(not_ui, R);
  for (std::size_t i = 0; i < R.size(); ++i) {
    EXPECT_DOUBLE_EQ(a.rows[i][1], 1.0 / R[i]);
    EXPECT_DOUBLE_EQ(b.rows[i][1], 1.0);
  }
}

TEST(UniformIntegrability, ModularBoundForcesDecay) {
  // sup_n of the L^2 modular of n 1_{|E| = 1/n^2} is 1, so the index decays.
  const auto M = NFunction::power(1, 2.0, 1.0, s1());
  std::vector<ScalarSamples> seq;
  std::vector<double> R;
  for (int n = 2; n <= 512; n *= 2) {
    seq.push_back({{static_cast<double>(n), 0.0}, {1.0 / (n * n), 1.0 - 1.0 / (n * n)}});
    R.push_back(n);
  }
  const std::vector<Vec> pts{{0.25, 0}, {0.75, 0}};
  const auto r = check_modular_uniform_integrability(M, seq, R, pts);
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(r.metric("sup_modular"), 1.0, 1e-12);
}
