#include <gtest/gtest.h>

#include <cmath>

#include "cdkn.hpp"

using namespace cdkn;

namespace {

FiniteMetricMeasureSpace from_matrix(std::vector<double> d, std::size_t n) {
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < n; ++i) ids.push_back("p" + std::to_string(i));
  return FiniteMetricMeasureSpace(ids, std::move(d), std::vector<double>(n, 1.0 / n));
}

}  // namespace

TEST(Metric, SegmentIsValid) {
  const auto s = make_segment(9);
  EXPECT_TRUE(validate_metric(s).ok());
  EXPECT_DOUBLE_EQ(s.diameter(), 1.0);
  EXPECT_DOUBLE_EQ(s.min_positive_distance(), 0.125);
  EXPECT_NEAR(s.total_mass(), 1.0, 1e-15);
}

TEST(Metric, TriangleViolationReported) {
  // d(0,2) = 3 > d(0,1) + d(1,2) = 2
  const auto s = from_matrix({0, 1, 3, 1, 0, 1, 3, 1, 0}, 3);
  const auto rep = validate_metric(s);
  ASSERT_FALSE(rep.ok());
  bool triangle = false;
  for (const auto& v : rep.violations) triangle = triangle || v.kind == MetricViolationKind::Triangle;
  EXPECT_TRUE(triangle);
}

TEST(Metric, AsymmetryReported) {
  const auto s = from_matrix({0, 1, 2, 0}, 2);
  EXPECT_FALSE(validate_metric(s).ok());
}

TEST(Metric, GraphClosureOfFourCycle) {
  const std::vector<std::string> ids{"a", "b", "c", "d"};
  const auto d = graph_metric(ids, {{"a", "b", 1}, {"b", "c", 1}, {"c", "d", 1}, {"d", "a", 1}});
  EXPECT_DOUBLE_EQ(d[0 * 4 + 2], 2.0);
  EXPECT_DOUBLE_EQ(d[1 * 4 + 3], 2.0);
  EXPECT_DOUBLE_EQ(d[0 * 4 + 1], 1.0);
}

TEST(Metric, DisconnectedGraphThrows) {
  try {
    graph_metric({"a", "b", "c"}, {{"a", "b", 1}});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::DisconnectedGraph);
  }
}

TEST(Ball, MembersAndMass) {
  const auto s = make_segment(9);
  const auto b = ball(s, 4, 0.26);
  EXPECT_EQ(b.members, (std::vector<PointIndex>{2, 3, 4, 5, 6}));
  EXPECT_NEAR(b.mass, 5.0 / 9.0, 1e-15);
  EXPECT_TRUE(b.contains(6));
  EXPECT_FALSE(b.contains(7));
}

TEST(Doubling, SegmentBelowTwoPlusBoundary) {
  const auto s = make_segment(65);
  const double c = doubling_constant(s, half_pitch_radii(s));
  EXPECT_GE(c, 1.0);
  EXPECT_LE(c, 3.0);
}

TEST(Spaces, ExampleSizes) {
  EXPECT_EQ(make_grid2d(5).size(), 25u);
  EXPECT_EQ(make_tripod(1.0, 4).size(), 13u);
  EXPECT_EQ(make_theta(1.0, 0.5, 8).size(), 24u);
  EXPECT_EQ(make_weighted_tree(3, 1).size(), 15u);
  for (const auto& s : {make_grid2d(5), make_circle(12), make_tripod(1.0, 4), make_theta(1.0, 0.5, 8), make_weighted_tree(3, 1)})
    EXPECT_TRUE(validate_metric(s).ok()) << s.name();
}

TEST(Spaces, CircleAntipodeDistance) {
  const auto s = make_circle(16);
  EXPECT_DOUBLE_EQ(s.dist(0, 8), 0.5);
  EXPECT_DOUBLE_EQ(s.dist(1, 15), 0.125);
}
