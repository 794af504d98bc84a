#include <gtest/gtest.h>

#include "cdkn.hpp"

using namespace cdkn;

TEST(Chains, SegmentHasOneChain) {
  const auto s = make_segment(17);
  const auto set = enumerate_chains(s, 0, 16, 4);
  ASSERT_EQ(set.chains.size(), 1u);
  EXPECT_EQ(set.chains[0].nodes, (std::vector<PointIndex>{0, 4, 8, 12, 16}));
  EXPECT_DOUBLE_EQ(set.chains[0].span, 1.0);
}

TEST(Chains, OddSplitGivesMedianChoices) {
  // s0 -> s3 at k = 2: the midpoint 1.5 h is equidistant from s1 and s2.
  const auto s = make_segment(4);
  const auto set = enumerate_chains(s, 0, 3, 2);
  EXPECT_EQ(set.chains.size(), 2u);
  for (const auto& c : set.chains) EXPECT_TRUE(is_admissible_chain(s, c, 0.0));
}

TEST(Chains, EvaluateAndReverse) {
  const auto s = make_segment(9);
  const auto c = enumerate_chains(s, 0, 8, 4).chains.at(0);
  EXPECT_EQ(evaluate(c, 0.5), 4u);
  EXPECT_EQ(grid_step(0.5, 4), 2u);
  const auto r = reversed(c);
  EXPECT_EQ(r.nodes.front(), 8u);
  EXPECT_EQ(r.nodes.back(), 0u);
  EXPECT_DOUBLE_EQ(relative_geodesic_defect(s, c), 0.0);
}

TEST(Chains, ThetaTailHasTwoDistinctChains) {
  const auto s = make_theta(1.0, 0.5, 8);
  const auto set = enumerate_chains(s, s.index_of("j0"), s.index_of("t8"), 16);
  EXPECT_EQ(distinct_count(s, set.chains, default_delta_sep(s, 16)), 2u);
}

TEST(Chains, CapTruncates) {
  const auto s = make_grid2d(6);
  const auto set = enumerate_chains(s, 0, 35, 8, 0.1, 3);
  EXPECT_TRUE(set.truncated);
  EXPECT_EQ(set.chains.size(), 3u);
}

TEST(Chains, BadResolutionThrows) {
  const auto s = make_segment(4);
  EXPECT_THROW(enumerate_chains(s, 0, 3, 0), Error);
  EXPECT_THROW(enumerate_chains(s, 0, 3, 2, -1.0), Error);
}
