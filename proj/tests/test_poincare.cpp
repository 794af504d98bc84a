#include <gtest/gtest.h>

#include "cdkn.hpp"

using namespace cdkn;

namespace {

ScalarField identity_field(std::size_t n) {
  std::vector<double> v(n);
  for (std::size_t i = 0; i < n; ++i) v[i] = static_cast<double>(i);
  return ScalarField(v);
}

}  // namespace

TEST(Median, OddBallSplitsTheLevelSet) {
  const auto s = make_segment(5);
  const auto b = ball(s, 2, 1.0);
  const auto m = median_split(s, identity_field(5), b);
  EXPECT_DOUBLE_EQ(m.median, 2.0);
  EXPECT_EQ(m.level_fraction, Rational(1, 2));
  EXPECT_EQ(m.plus_mass_exact, m.minus_mass_exact);
  EXPECT_DOUBLE_EQ(m.plus_weight[2], 0.5);
  EXPECT_DOUBLE_EQ(m.plus_weight[4], 1.0);
  EXPECT_DOUBLE_EQ(m.minus_weight[0], 1.0);
}

TEST(Median, EvenBallNeedsNoSplit) {
  const auto s = make_segment(4);
  const auto m = median_split(s, identity_field(4), ball(s, 0, 1.5));
  EXPECT_DOUBLE_EQ(m.median, 1.0);
  EXPECT_NEAR(m.plus_mass, 0.5, 1e-15);
  EXPECT_DOUBLE_EQ(m.plus_weight[1], 0.0);
}

TEST(Gradient, SlopeIsCertified) {
  const auto s = make_grid2d(5);
  const auto suite = default_function_suite(s, 3);
  for (const auto& f : suite) {
    const auto g = slope_gradient(s, f.u, default_slope_radius(s, 4), 4);
    EXPECT_GE(g.scale, 1.0) << f.name;
    EXPECT_TRUE(verify_upper_gradient(s, f.u, g.g, 4, 0.0).ok) << f.name;
  }
}

TEST(Gradient, ZeroIsNotAnUpperGradientOfANonconstantField) {
  const auto s = make_segment(5);
  const std::vector<double> zero(5, 0.0);
  EXPECT_FALSE(verify_upper_gradient(s, identity_field(5), zero, 4, 0.0).ok);
}

TEST(Certificate, WeakOnSegment) {
  const auto s = make_segment(33);
  const auto u = default_function_suite(s, 1).front().u;
  const auto g = slope_gradient(s, u, default_slope_radius(s, 8), 8);
  const auto cert = certify_weak_poincare(s, ball(s, 16, 0.2), {0.0, 1.0}, u, g.g, 8, 0.0);
  EXPECT_TRUE(cert.pass);
  EXPECT_TRUE(cert.steps_hold);
  EXPECT_LE(cert.ratio, cert.constant);
}

TEST(Certificate, StrongOnSegment) {
  const auto s = make_segment(33);
  const auto h = s.min_positive_distance();
  const auto u = default_function_suite(s, 2).front().u;
  const auto g = slope_gradient(s, u, default_slope_radius(s, 16), 16);
  const auto cert = certify_strong_poincare(s, ball(s, 16, 4.5 * h), 1.0, u, g.g, 16, 0.0);
  EXPECT_TRUE(cert.pass);
  ASSERT_EQ(cert.piece_density.size(), 3u);
  for (double d : cert.piece_density) EXPECT_LE(d / cert.density_bound, 1.10);
}

TEST(Certificate, WeakConstantGrowsWithRadius) {
  EXPECT_LE(weak_poincare_constant({-1.0, 2.0}, 0.1), weak_poincare_constant({-1.0, 2.0}, 1.0));
}

TEST(Sweep, SegmentBallsPass) {
  const auto s = make_segment(17);
  const auto h = s.min_positive_distance();
  const std::vector<BallSpec> balls{{4, 2.5 * h}, {8, 3.5 * h}, {12, 1.5 * h}};
  const auto r = poincare_sweep(s, {0.0, 1.0}, balls, default_function_suite(s, 5), 8, 0.0);
  EXPECT_TRUE(r.all_pass);
  EXPECT_EQ(r.worst_ratio_per_ball.size(), 3u);
  EXPECT_LE(r.worst_normalized, 1.0);
}
