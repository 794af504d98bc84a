#include <gtest/gtest.h>

#include "cdkn.hpp"

using namespace cdkn;

TEST(Interval, Condition) {
  EXPECT_FALSE(interval_condition(0.5, 0.7, 1.0));
  EXPECT_TRUE(interval_condition(0.5, 0.6, 1.0));
  EXPECT_TRUE(interval_condition(0.5, 0.5, 4.0));
  EXPECT_THROW(interval_condition(0.6, 0.5, 1.0), Error);
}

TEST(Interval, AdmissiblePairsRespectTheCondition) {
  const auto pairs = admissible_intervals(16, 1.0);
  EXPECT_FALSE(pairs.empty());
  for (auto [a, b] : pairs) EXPECT_TRUE(interval_condition(a / 16.0, b / 16.0, 1.0));
  EXPECT_GT(minimal_resolution(1.0), 2u);
  EXPECT_FALSE(admissible_intervals(minimal_resolution(1.0), 1.0).empty());
}

TEST(Multiplicity, CircleOnlyAntipodeBranches) {
  const auto s = make_circle(16);
  const auto r = multiplicity_report(s, 0, 16);
  EXPECT_EQ(r.multiplicity[8], 2u);
  for (PointIndex y = 0; y < 16; ++y) {
    if (y == 8) continue;
    EXPECT_EQ(r.multiplicity[y], 1u) << y;
  }
  EXPECT_NEAR(r.fraction, 1.0 / 16.0, 1e-15);
}

TEST(Multiplicity, TreesHaveUniqueGeodesics) {
  for (const auto& s : {make_tripod(1.0, 4), make_weighted_tree(3, 2), make_segment(17)})
    for (PointIndex x = 0; x < s.size(); x += 3) EXPECT_EQ(multiplicity_report(s, x, 8).fraction, 0.0) << s.name();
}

TEST(Multiplicity, ThetaTailBranches) {
  const auto s = make_theta(1.0, 0.5, 8);
  const auto r = multiplicity_report(s, s.index_of("j0"), 16);
  EXPECT_EQ(r.multiplicity[s.index_of("t4")], 2u);
  EXPECT_EQ(r.multiplicity[s.index_of("u3")], 1u);
  EXPECT_GT(r.fraction, 0.0);
}

TEST(Branch, ThetaViolationReplays) {
  const auto s = make_theta(1.0, 0.5, 16);
  const auto r = branch_violation_search(s, s.index_of("j0"), EntropySpec::renyi(1.0), 16, 0.0);
  ASSERT_TRUE(r.found) << r.reason;
  ASSERT_TRUE(r.violation);
  EXPECT_GT(r.violation->defect, 0.0);
  EXPECT_NEAR(replay(s, *r.violation), r.violation->defect, 1e-9);
}

TEST(Branch, SegmentHasNone) {
  const auto s = make_segment(17);
  const auto r = branch_violation_search(s, 0, EntropySpec::renyi(1.0), 16, 0.0);
  EXPECT_FALSE(r.found);
  EXPECT_FALSE(r.reason.empty());
}

TEST(Branch, NeedsRenyi) {
  const auto s = make_segment(5);
  EXPECT_THROW(branch_violation_search(s, 0, EntropySpec::shannon(), 8, 0.0), Error);
}
