#include <gtest/gtest.h>

#include <random>

#include "cdkn.hpp"

using namespace cdkn;

TEST(W2, DiracToDirac) {
  const auto s = make_segment(5);
  const auto r = w2(s, ProbMeasure::dirac(5, 0), ProbMeasure::dirac(5, 4));
  EXPECT_DOUBLE_EQ(r.squared, 1.0);
  EXPECT_DOUBLE_EQ(r.distance, 1.0);
}

TEST(W2, MatchesBruteForceOnRandomMeasures) {
  std::mt19937_64 rng(5);
  for (int rep = 0; rep < 20; ++rep) {
    const auto s = make_weighted_tree(2, rep);
    const auto mu = random_measure(s, rng), nu = random_measure(s, rng);
    EXPECT_NEAR(w2(s, mu, nu).squared, w2_squared_exact(s, mu, nu).convert_to<double>(), 1e-12);
  }
  const auto s = make_segment(4);
  for (int rep = 0; rep < 20; ++rep) {
    const auto mu = random_measure(s, rng), nu = random_measure(s, rng);
    EXPECT_NEAR(w2(s, mu, nu).distance, w2_brute_force(s, mu, nu), 1e-12);
  }
}

TEST(W2, ExactHalfShift) {
  // uniform on {s0,s1} to uniform on {s1,s2} of segment(3): cost (1/2)(1/2)^2 * 2 = 1/4
  const auto s = make_segment(3);
  const ProbMeasure mu({0.5, 0.5, 0.0}), nu({0.0, 0.5, 0.5});
  EXPECT_EQ(w2_squared_exact(s, mu, nu), Rational(1, 4));
}

TEST(W2, CouplingMarginals) {
  const auto s = make_grid2d(4);
  std::mt19937_64 rng(9);
  const auto mu = random_measure(s, rng), nu = random_measure(s, rng);
  const auto r = w2(s, mu, nu);
  std::vector<double> a(s.size(), 0.0), b(s.size(), 0.0);
  for (const auto& c : r.coupling.cells) a[c.from] += c.mass, b[c.to] += c.mass;
  for (PointIndex p = 0; p < s.size(); ++p) {
    EXPECT_NEAR(a[p], mu[p], 1e-12);
    EXPECT_NEAR(b[p], nu[p], 1e-12);
  }
}

TEST(Plan, InterpolationEndpointsAndMidpoint) {
  const auto s = make_segment(9);
  const auto plan = optimal_dynamical_plan(s, ProbMeasure::dirac(9, 0), ProbMeasure::dirac(9, 8), 4);
  EXPECT_TRUE(plan.optimal);
  EXPECT_DOUBLE_EQ(interpolate_step(plan, 0)[0], 1.0);
  EXPECT_DOUBLE_EQ(interpolate_step(plan, 2)[4], 1.0);
  EXPECT_DOUBLE_EQ(interpolate_step(plan, 4)[8], 1.0);
  EXPECT_DOUBLE_EQ(interpolate(plan, 0.25)[2], 1.0);
}

TEST(Plan, ProbMeasureRejectsBadWeights) {
  EXPECT_THROW(ProbMeasure({0.5, 0.6}), Error);
  EXPECT_THROW(ProbMeasure({-0.1, 1.1}), Error);
  EXPECT_THROW(ProbMeasure::normalized({0.0, 0.0}), Error);
}
