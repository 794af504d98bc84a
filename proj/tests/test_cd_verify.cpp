#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "cdkn.hpp"

using namespace cdkn;

TEST(CdRhs, FlatRhsIsTheChord) {
  const auto s = make_segment(9);
  std::mt19937_64 rng(3);
  const auto mu0 = random_measure(s, rng), mu1 = random_measure(s, rng);
  const auto c = w2(s, mu0, mu1).coupling;
  for (const auto& spec : {EntropySpec::renyi(2), EntropySpec::renyi(4)})
    for (double t : {0.0, 0.25, 0.5, 1.0}) {
      const double chord = (1 - t) * evaluate_entropy(spec, mu0, s) + t * evaluate_entropy(spec, mu1, s);
      EXPECT_NEAR(cd_rhs(spec, {0.0, 3.0}, mu0, mu1, c, t, s), chord, 1e-12);
    }
}

TEST(CdRhs, NegativeCurvatureRaisesTheBound) {
  const auto s = make_segment(9);
  std::mt19937_64 rng(4);
  const auto mu0 = random_measure(s, rng), mu1 = random_measure(s, rng);
  const auto c = w2(s, mu0, mu1).coupling;
  const auto spec = EntropySpec::renyi(2);
  EXPECT_GE(cd_rhs(spec, {-1.0, 2.0}, mu0, mu1, c, 0.5, s), cd_rhs(spec, {0.0, 2.0}, mu0, mu1, c, 0.5, s));
}

TEST(CheckCd, SegmentIsConsistentAndMonotone) {
  const auto s = make_segment(17);
  for (double N : {1.0, 2.0}) {
    const auto flat = check_cd(s, {0.0, N}, 8, 8, 0.0, 42);
    EXPECT_NE(flat.verdict, CdVerdict::Violated) << N;
    if (flat.verdict != CdVerdict::Consistent) continue;
    EXPECT_EQ(check_cd(s, {-1.0, N}, 8, 8, 0.0, 42).verdict, CdVerdict::Consistent) << N;
    EXPECT_EQ(check_cd(s, {0.0, N + 1}, 8, 8, 0.0, 42).verdict, CdVerdict::Consistent) << N;
  }
}

TEST(CheckCd, Reproducible) {
  const auto s = make_segment(9);
  const auto a = check_cd(s, {0.0, 2.0}, 4, 4, 0.0, 7), b = check_cd(s, {0.0, 2.0}, 4, 4, 0.0, 7);
  EXPECT_EQ(a.worst_margin, b.worst_margin);
  ASSERT_EQ(a.records.size(), b.records.size());
}

TEST(CheckCd, TestFamily) {
  const auto fam = cd_test_family(2.0);
  EXPECT_FALSE(fam.empty());
  EXPECT_EQ(fam.front(), EntropySpec::renyi(2.0));
}

TEST(Convexity, DefectReplays) {
  const auto s = make_segment(9);
  const auto plan = optimal_dynamical_plan(s, ProbMeasure::dirac(9, 0), ProbMeasure::reference(s), 4);
  const auto d = convexity_defect(s, EntropySpec::shannon(), plan, 2);
  EXPECT_LE(d.defect, 1e-12);
  EXPECT_THROW(convexity_defect(s, EntropySpec::shannon(), plan, 5), Error);
}

TEST(Convexity, SegmentShannonConsistent) {
  const auto s = make_segment(17);
  std::mt19937_64 rng(11);
  const auto r = check_strong_displacement_convexity(s, EntropySpec::shannon(), random_measure(s, rng),
                                                     random_measure(s, rng), 8, 0.0, {.tol = 0.05});
  EXPECT_TRUE(r.consistent);
  EXPECT_GT(r.plans_examined, 0u);
}

TEST(Density, BoundHoldsOnSegment) {
  const auto s = make_segment(17);
  const auto b = ball(s, 8, 0.25);
  const auto mu = ProbMeasure::uniform_on(s, b.members);
  const auto plan = optimal_dynamical_plan(s, mu, ProbMeasure::reference(s), 8);
  double c = 0.0;
  for (PointIndex p = 0; p < s.size(); ++p) c = std::max(c, mu[p] / s.mass(p));
  const auto r = check_density_bound_cd(s, plan, c, {0.0, 1.0}, 1.0, 1e-9);
  EXPECT_TRUE(r.pass);
  EXPECT_LE(r.worst_density, c * (1 + 1e-9));
}

TEST(Evi, ConstantUniformFlowPasses) {
  const auto s = make_segment(9);
  std::mt19937_64 rng(1);
  const auto flow = FlowTrajectory::constant(ProbMeasure::reference(s), 3, 0.5);
  for (int i = 0; i < 10; ++i) EXPECT_TRUE(evi_check(s, flow, random_measure(s, rng), EntropySpec::shannon()).pass);
}

TEST(Evi, DiracFlowResidualIsLogTwo) {
  const auto two = make_segment(2);
  const auto r = evi_check(two, FlowTrajectory::constant(ProbMeasure::dirac(2, 0), 2, 1.0), ProbMeasure::reference(two),
                           EntropySpec::shannon());
  EXPECT_FALSE(r.pass);
  EXPECT_NEAR(r.worst_residual, std::numbers::ln2, 1e-12);
}

TEST(Evi, PowerTestRejected) {
  const auto s = make_segment(3);
  EXPECT_THROW(evi_check(s, FlowTrajectory::constant(ProbMeasure::reference(s)), ProbMeasure::reference(s),
                         EntropySpec::power(2)),
               Error);
}
