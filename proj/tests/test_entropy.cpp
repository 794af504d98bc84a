#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "cdkn.hpp"

using namespace cdkn;

TEST(Entropy, ShannonAndRenyiOnTwoPoints) {
  const auto s = make_segment(2);
  const ProbMeasure mu({1.0, 0.0});
  EXPECT_NEAR(evaluate_entropy(EntropySpec::shannon(), mu, s), std::numbers::ln2, 1e-15);
  EXPECT_NEAR(evaluate_entropy(EntropySpec::renyi(2), mu, s), -0.7071067811865476, 1e-15);
  EXPECT_NEAR(evaluate_entropy(EntropySpec::shannon(), ProbMeasure::reference(s), s), 0.0, 1e-15);
  EXPECT_NEAR(evaluate_entropy(EntropySpec::power(2), mu, s), 2.0, 1e-15);
}

TEST(Entropy, DerivativeAtInfinity) {
  EXPECT_EQ(EntropySpec::renyi(3).derivative_at_infinity(), 0.0);
  EXPECT_TRUE(std::isinf(EntropySpec::shannon().derivative_at_infinity()));
  EXPECT_EQ(EntropySpec::power(1).derivative_at_infinity(), 1.0);
}

TEST(Entropy, DcMembership) {
  std::vector<double> grid;
  for (int i = -20; i <= 20; ++i) grid.push_back(std::pow(1.4, i));
  EXPECT_TRUE(check_dc_membership(EntropySpec::renyi(2), 2, grid));
  EXPECT_TRUE(check_dc_membership(EntropySpec::renyi(3), 2, grid));
  EXPECT_TRUE(check_dc_membership(EntropySpec::shannon(), kInfinity, grid));
  // lambda^N F(lambda^-N) = -lambda^(N-1) for Renyi(N); a smaller N' makes it concave in lambda
  EXPECT_FALSE(check_dc_membership(EntropySpec::renyi(2), 4, grid));
}

TEST(Entropy, DomainErrors) {
  EXPECT_THROW(EntropySpec::renyi(0.5), Error);
  EXPECT_THROW(EntropySpec::power(0.5), Error);
}

TEST(Beta, HyperbolicValue) {
  // sinh(1/2) / (1/2 sinh 1)
  EXPECT_NEAR(beta_coefficient(0.5, 1.0, {-1.0, 2.0}), 0.886818883970074, 1e-12);
}

TEST(Beta, SphericalValue) {
  // (sin(pi/4) / (1/2 sin(pi/2)))^1 for K = pi^2/4, N = 2, d = 1
  const double K = std::numbers::pi * std::numbers::pi / 4.0;
  EXPECT_NEAR(beta_coefficient(0.5, 1.0, {K, 2.0}), std::sqrt(2.0), 1e-12);
  EXPECT_TRUE(std::isinf(beta_coefficient(0.5, 3.0, {K, 2.0})));
}

TEST(Beta, InfiniteDimensionAndFlat) {
  EXPECT_NEAR(beta_coefficient(0.5, 1.0, {1.0, kInfinity}), std::exp(0.75 / 6.0), 1e-15);
  EXPECT_EQ(beta_coefficient(0.3, 2.0, {0.0, 3.0}), 1.0);
  EXPECT_EQ(beta_coefficient(1.0, 2.0, {-1.0, 3.0}), 1.0);
  EXPECT_EQ(beta_coefficient(0.3, 2.0, {-1.0, 1.0}), 1.0);
}

TEST(Beta, LargeDistanceNoOverflow) {
  const double b = beta_coefficient(0.5, 2000.0, {-1.0, 3.0});
  EXPECT_TRUE(std::isfinite(b));
  EXPECT_GE(b, beta_lower_bound({-1.0, 3.0}, 2000.0));
}

TEST(Beta, LowerBoundHolds) {
  for (double K : {-0.5, -2.0})
    for (double N : {1.5, 3.0, kInfinity})
      for (double d : {0.1, 1.0, 4.0})
        for (int i = 0; i <= 20; ++i) {
          const double t = i / 20.0;
          EXPECT_GE(beta_coefficient(t, d, {K, N}), beta_lower_bound({K, N}, d) * (1 - 1e-12));
        }
}

TEST(Beta, BadArgumentsThrow) {
  EXPECT_THROW(beta_coefficient(1.5, 1.0, {}), Error);
  EXPECT_THROW(beta_coefficient(0.5, -1.0, {}), Error);
  EXPECT_THROW(beta_lower_bound({1.0, 2.0}, 1.0), Error);
}
