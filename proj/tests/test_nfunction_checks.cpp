#include <gtest/gtest.h>

#include <cmath>

#include "catalog.hpp"
#include "orlicz/nfunction_checks.hpp"

using namespace orlicz;

namespace {

SampleSpec s1() { return testcat::sample(1); }

NFunction radial1(std::function<double(double)> f, const std::string& label) {
  return NFunction::from_radial(1, [f](const Vec&, double s) { return f(s); }, s1(), label, true);
}

}  // namespace

TEST(Axioms, CatalogEntriesPass) {
  for (int dim : {1, 2})
    for (const auto& e : testcat::entries(dim)) {
      const auto r = check_nfunction(e.M);
      EXPECT_TRUE(r.passed()) << e.name << " d=" << dim;
    }
}

TEST(Axioms, LinearGrowthFailsSuperlinearity) {
  const auto r = check_nfunction(radial1([](double s) { return s; }, "abs"));
  EXPECT_FALSE(r.check_passed("superlinear_at_infinity"));
  EXPECT_FALSE(r.check_passed("sublinear_at_zero"));
  EXPECT_TRUE(r.check_passed("convexity"));
  EXPECT_TRUE(r.failed());
}

TEST(Axioms, QuarticPerturbationFailsConvexity) {
  SampleSpec s = s1();
  s.xi_max = 2.0;
  const auto M = NFunction::from_radial(
      1, [](const Vec&, double v) { return v * v - 0.1 * v * v * v * v; }, s, "concave_tail", true);
  const auto r = check_nfunction(M);
  EXPECT_FALSE(r.check_passed("convexity"));
  // Second derivative 2 - 1.2 s^2 turns negative past s = 1.29.
  EXPECT_GT(std::max(r.metric("convexity_worst_norm_a"), r.metric("convexity_worst_norm_b")), 1.29);
}

TEST(Axioms, AsymmetricFunctionFailsSymmetry) {
  const auto M = NFunction::from_rule(
      1, [](const Vec&, const Vec& xi) { return xi[0] > 0 ? xi[0] * xi[0] : 2 * xi[0] * xi[0]; }, s1(), "asym", true);
  EXPECT_FALSE(check_nfunction(M).check_passed("vanishing_symmetric_positive"));
}

TEST(Delta2, PowerRatioIsTwoToTheP) {
  const auto r = check_delta2(NFunction::power(1, 3.0, 1.0, s1()));
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(r.metric("sup_homogeneous_ratio"), 8.0, 1e-9);
}

TEST(Delta2, ExponentialFails) {
  const auto r = check_delta2(NFunction::exponential(1, s1()));
  EXPECT_TRUE(r.failed());
  EXPECT_GT(r.metric("octave_growth"), 2.0);
}

TEST(Delta2, DoublePhaseBoundedByTwoToTheQ) {
  const auto M = NFunction::double_phase(2, 2.0, 4.0, SpatialFunction::bump(0.0, 1.0, {0.5, 0.5}, 0.3), false,
                                         testcat::sample(2));
  const auto r = check_delta2(M);
  EXPECT_TRUE(r.passed());
  EXPECT_LE(r.metric("sup_homogeneous_ratio"), 16.0 + 1e-9);
}

TEST(LogHolder, XIndependentHasZeroConstant) {
  const auto pairs = make_probe_pairs(Box::unit(1));
  const auto r = check_log_holder(NFunction::power(1, 2.5, 1.0, s1()), pairs);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.metric("a1"), 0.0);
}

TEST(LogHolder, LogHoelderExponentPasses) {
  const auto p = SpatialFunction::log_holder(2.0, 0.5, 4.0, {0.5, 0.0});
  const auto M = NFunction::variable_power(1, p, 1.0, false, s1());
  const auto r = check_log_holder(M, make_probe_pairs(Box::unit(1)));
  EXPECT_TRUE(r.passed());
  EXPECT_TRUE(std::isfinite(r.metric("a1")));
}

TEST(LogHolder, JumpExponentDiverges) {
  const auto M = NFunction::variable_power(1, SpatialFunction::jump(2.0, 3.0, 0.5), 1.0, false, s1());
  const auto r = check_log_holder(M, make_probe_pairs(Box::unit(1)));
  EXPECT_TRUE(r.failed());
  EXPECT_FALSE(r.check_passed("a1_not_diverging"));
}

TEST(LogHolder, DegenerateAndBadPairs) {
  const auto M = NFunction::from_radial(
      1, [](const Vec& x, double s) { return x[0] < 0.5 ? s * s : 0.0; }, s1(), "degenerate");
  EXPECT_THROW(check_log_holder(M, make_probe_pairs(Box::unit(1))), DegeneratePair);
  std::vector<PointPair> far{{Vec{0.0, 0.0}, Vec{0.9, 0.0}}};
  EXPECT_THROW(check_log_holder(NFunction::power(1, 2.0, 1.0, s1()), far), BadParameters);
}

TEST(CubeCovering, CoversWithDisjointInteriors) {
  const Box omega = Box::unit(2);
  const auto c = CubeCovering::build(omega, 0.1);
  ASSERT_EQ(c.cubes.size(), 25u);
  double area = 0.0;
  for (std::size_t j = 0; j < c.cubes.size(); ++j) {
    const auto& q = c.cubes[j];
    const auto& e = c.enlarged[j];
    EXPECT_NEAR(q.edge(0), 0.2, 1e-15);
    EXPECT_NEAR(e.edge(0), 2 * q.edge(0), 1e-15);
    EXPECT_NEAR(e.center()[0], q.center()[0], 1e-15);
    EXPECT_NEAR(e.center()[1], q.center()[1], 1e-15);
    area += q.measure();
    for (std::size_t k = j + 1; k < c.cubes.size(); ++k) {
      const auto i = CubeCovering::intersect(q, c.cubes[k]);
      EXPECT_TRUE(i.edge(0) <= 1e-15 || i.edge(1) <= 1e-15);
    }
  }
  EXPECT_NEAR(area, 1.0, 1e-12);
  for (double x : linspace(0, 1, 11))
    for (double y : linspace(0, 1, 11)) {
      bool covered = false;
      for (const auto& q : c.cubes) covered = covered || q.contains({x, y}, 1e-12);
      EXPECT_TRUE(covered);
    }
  EXPECT_THROW(CubeCovering::build(omega, 0.0), CoveringFailure);
  EXPECT_THROW(CubeCovering::build(omega, 1e-5), CoveringFailure);
}

TEST(ConditionM, PowerHasConstantOne) {
  const auto r = check_condition_M(NFunction::power(1, 3.0, 1.0, s1()), Box::unit(1), {0.125, 0.0625});
  EXPECT_TRUE(r.passed());
  EXPECT_NEAR(r.metric("c"), 1.0, 1e-9);
}

TEST(ConditionM, LogHoelderStableJumpBlowsUp) {
  const std::vector<double> deltas{0.25, 0.125, 0.0625, 0.03125, 0.015625};
  const auto lh = NFunction::variable_power(1, SpatialFunction::log_holder(2.0, 0.5, 4.0, {0.5, 0.0}), 1.0, false,
                                            s1());
  const auto r1 = check_condition_M(lh, Box::unit(1), deltas);
  EXPECT_TRUE(r1.passed());
  // 3 delta sqrt(N) < 1 holds for every delta here.
  EXPECT_EQ(r1.table("per_delta").rows.size(), deltas.size());

  const auto jump = NFunction::variable_power(1, SpatialFunction::jump(2.0, 4.0, 0.5), 1.0, false, s1());
  const auto r2 = check_condition_M(jump, Box::unit(1), deltas);
  EXPECT_TRUE(r2.failed());
  const auto c = r2.table("per_delta").column("c");
  for (std::size_t i = 1; i < c.size(); ++i) EXPECT_GE(c[i] / c[i - 1], 4.0) << i;
}

TEST(ConditionM, OutOfRegimeDeltaIsSkipped) {
  const auto r = check_condition_M(NFunction::power(2, 2.0, 1.0, testcat::sample(2)), Box::unit(2), {0.3, 0.1});
  EXPECT_EQ(r.table("per_delta").rows[0][1], 0.0);
  EXPECT_EQ(r.notes.size(), 2u);
  EXPECT_TRUE(r.passed());
}

TEST(ConditionM, RejectsSparseSampling) {
  ConditionMOptions o;
  o.x_per_edge = 4;
  EXPECT_THROW(check_condition_M(NFunction::power(1, 2.0, 1.0, s1()), Box::unit(1), {0.1}, o), BadParameters);
}

TEST(Minorant, PowerBelowInfAndDelta2) {
  const auto M = NFunction::power(1, 3.0, 1.0, s1());
  const auto m = build_minorant(M, 4.0);
  EXPECT_TRUE(m.is_convex());
  for (std::size_t i = 0; i < m.nodes().size(); ++i) {
    const double s = m.nodes()[i];
    EXPECT_LE(m.values()[i], s * s * s * (1 + 1e-12) + 1e-300) << s;
  }
  EXPECT_TRUE(check_delta2(as_nfunction(m, 1, s1())).passed());
}

TEST(Minorant, QuadraticInfIsReproducedWhenCapInactive) {
  // inf over x of (1 + x) s^2 on [0, 1] is s^2.
  const auto M = NFunction::variable_power(1, 2.0, SpatialFunction::linear(1.0, 1.0, {0.0, 0.0}), false, s1());
  const auto m = build_minorant(M, 3.0);
  for (std::size_t i = 1; i < m.nodes().size(); i += 97) {
    const double s = m.nodes()[i];
    EXPECT_NEAR(m.values()[i], s * s, 1e-10 * (1 + s * s)) << s;
  }
}

TEST(Minorant, ExponentialIsCappedAndDelta2) {
  const auto M = NFunction::exponential(1, s1());
  const auto m = build_minorant(M, 2.0);
  const auto s = m.nodes();
  const auto v = m.values();
  std::size_t i1 = 0;
  while (s[i1] < 1.0) ++i1;
  // Capped growth: m(s)/m(1) <= s^alpha past s = 1.
  for (std::size_t i = i1; i < s.size(); i += 50) EXPECT_LE(v[i] / v[i1], std::pow(s[i] / s[i1], 2.0) * (1 + 1e-9));
  for (std::size_t i = 1; i < s.size(); ++i) EXPECT_LE(v[i], std::expm1(s[i]) - s[i] + 1e-15);
  EXPECT_TRUE(check_delta2(as_nfunction(m, 1, s1())).passed());
  EXPECT_THROW(build_minorant(M, 1.0), BadParameters);
}

TEST(Growth, Comparisons) {
  const auto M2 = NFunction::power(1, 2.0, 1.0, s1());
  EXPECT_TRUE(grows_essentially_more_rapidly(ScalarNFunction::power(4.0), M2).passed());
  EXPECT_TRUE(grows_essentially_more_rapidly(ScalarNFunction::exponential(), NFunction::power(1, 3.0, 1.0, s1()))
                  .passed());
  EXPECT_TRUE(grows_essentially_more_rapidly(ScalarNFunction::power(2.0), M2).failed());
}
