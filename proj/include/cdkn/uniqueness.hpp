#ifndef CDKN_UNIQUENESS_HPP
#define CDKN_UNIQUENESS_HPP

#include <algorithm>
#include <iterator>
#include <cmath>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cdkn/cd_verify.hpp"
#include "cdkn/entropy.hpp"
#include "cdkn/errors.hpp"
#include "cdkn/geodesics.hpp"
#include "cdkn/mms.hpp"
#include "cdkn/parallel.hpp"
#include "cdkn/transport.hpp"

namespace cdkn {

/// max{t2/t1, (1-t1)/(1-t2)} <= 2^{1/(2N)}.
inline bool interval_condition(double t1, double t2, double n) {
  if (!(t1 > 0.0 && t1 <= t2 && t2 < 1.0)) throw Error(ErrorKind::Domain, "interval condition needs 0 < t1 <= t2 < 1");
  if (!(n >= 1.0)) throw Error(ErrorKind::Domain, "interval condition needs N >= 1");
  const double bound = std::pow(2.0, 1.0 / (2.0 * n));
  return std::max(t2 / t1, (1.0 - t1) / (1.0 - t2)) <= bound;
}

/// Grid pairs (j1, j2), 1 <= j1 < j2 <= k-1, whose times satisfy the interval condition.
inline std::vector<std::pair<std::size_t, std::size_t>> admissible_intervals(std::size_t k, double n) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t j1 = 1; j1 + 1 < k; ++j1)
    for (std::size_t j2 = j1 + 1; j2 < k; ++j2)
      if (interval_condition(static_cast<double>(j1) / k, static_cast<double>(j2) / k, n)) out.emplace_back(j1, j2);
  return out;
}

/// Smallest resolution with at least one admissible interval.
inline std::size_t minimal_resolution(double n) {
  for (std::size_t k = 3; k < 1000000; ++k)
    if (!admissible_intervals(k, n).empty()) return k;
  return 0;
}

inline double default_delta_sep(const FiniteMetricMeasureSpace& space, std::size_t k) {
  return 2.0 * space.diameter() / static_cast<double>(k);
}

/// Greedy count of pairwise-distinct chains: a chain is kept when it is
/// distinct from every chain kept before it.
inline std::size_t distinct_count(const FiniteMetricMeasureSpace& space, const std::vector<GeodesicChain>& chains,
                                  double delta_sep) {
  std::vector<const GeodesicChain*> reps;
  for (const auto& c : chains) {
    bool fresh = true;
    for (const auto* r : reps)
      if (!distinct(space, c, *r, delta_sep)) {
        fresh = false;
        break;
      }
    if (fresh) reps.push_back(&c);
  }
  return reps.size();
}

struct MultiplicityReport {
  PointIndex base = 0;
  std::size_t k = 0;
  double eps_geo = 0.0;
  double delta_sep = 0.0;
  std::vector<std::size_t> multiplicity;  // distinct chains from base to each point
  std::vector<std::size_t> chain_count;   // all admissible chains
  double fraction = 0.0;                  // m({y : multiplicity >= 2}) / m(X)
  bool truncated = false;
};

inline MultiplicityReport multiplicity_report(const FiniteMetricMeasureSpace& space, PointIndex x, std::size_t k,
                                              double eps_geo = 0.0, std::optional<double> delta_sep = std::nullopt,
                                              std::size_t cap = 10000) {
  if (x >= space.size()) throw Error(ErrorKind::Domain, "base point out of range");
  MultiplicityReport rep;
  rep.base = x;
  rep.k = k;
  rep.eps_geo = eps_geo;
  rep.delta_sep = delta_sep.value_or(default_delta_sep(space, k));
  rep.multiplicity.assign(space.size(), 1);
  rep.chain_count.assign(space.size(), 1);
  std::vector<char> trunc(space.size(), 0);
  parallel_for(space.size(), [&](std::size_t y) {
    if (y == x) return;
    const auto set = enumerate_chains(space, x, y, k, eps_geo, cap);
    rep.chain_count[y] = set.chains.size();
    rep.multiplicity[y] = distinct_count(space, set.chains, rep.delta_sep);
    trunc[y] = set.truncated ? 1 : 0;
  });
  double multi = 0.0;
  for (PointIndex y = 0; y < space.size(); ++y) {
    if (rep.multiplicity[y] >= 2) multi += space.mass(y);
    rep.truncated = rep.truncated || trunc[y];
  }
  rep.fraction = multi / space.total_mass();
  return rep;
}

/// Chains restricted to the grid window [first, last], reparametrized to
/// resolution last - first.
inline DynamicalPlan plan_window(const FiniteMetricMeasureSpace& space, const DynamicalPlan& plan, std::size_t first,
                                 std::size_t last) {
  if (!(first < last && last <= plan.resolution)) throw Error(ErrorKind::Domain, "invalid time window");
  DynamicalPlan out;
  out.resolution = last - first;
  out.n_points = plan.n_points;
  for (const auto& e : plan.entries) {
    GeodesicChain c;
    c.nodes.assign(e.chain.nodes.begin() + static_cast<std::ptrdiff_t>(first),
                   e.chain.nodes.begin() + static_cast<std::ptrdiff_t>(last) + 1);
    c.span = space.dist(c.nodes.front(), c.nodes.back());
    out.entries.push_back({std::move(c), e.weight});
  }
  return out;
}

struct BranchSearchParams {
  std::size_t chain_cap = 256;
  std::optional<double> delta_sep;  // default 2 diam / k
  std::optional<double> mass_floor;  // default: smallest point mass
  double tol = 1e-9;
};

/// Every stage of the search for the interval that produced the result.
struct BranchSearchState {
  std::vector<PointIndex> A, A1, A2, A3, A4, E;
  std::size_t j1 = 0, j2 = 0;
  double t1 = 0.0, t2 = 0.0;
  double delta = 0.0;
  PointIndex w = 0;
  std::vector<GeodesicChain> G1, G2;
  DynamicalPlan pi1, pi2, pooled;
  bool supports_disjoint = false;
  // Values of int rho^{1-1/N} dm along the contradiction chain.
  double mass_term = 0.0;      // m(E)^{1/N}
  double single_t1 = 0.0;      // pi1 at t1 (equal to pi2 and the pooled plan there)
  double pooled_t2 = 0.0;      // (pi1 + pi2)/2 at t2
  double branch1_t2 = 0.0;     // pi1 at t2
  double branch2_t2 = 0.0;     // pi2 at t2
  double pooled_bound = 0.0;   // ((t2-t1)/t2) m(E)^{1/N} + (t1/t2) pooled_t2
  double factor = 0.0;         // (t1/t2) 2^{1/N} (1-t2)/(1-t1), >= 1 by the interval condition
  std::string violated_link;   // "pooled[0,t2]", "branch1[t1,1]" or "branch2[t1,1]"
};

struct BranchSearchResult {
  bool found = false;
  std::optional<ConvexityViolation> violation;
  std::optional<BranchSearchState> state;
  std::string reason;  // why nothing was found
  std::size_t intervals_scanned = 0;
};

namespace branch_detail {

struct AgreeingPair {
  std::size_t a = 0, b = 0;
};

inline bool agree_until(const GeodesicChain& a, const GeodesicChain& b, std::size_t j) {
  return std::equal(a.nodes.begin(), a.nodes.begin() + static_cast<std::ptrdiff_t>(j) + 1, b.nodes.begin());
}

inline double power_integral(const EntropySpec& spec, const FiniteMetricMeasureSpace& space, const ProbMeasure& mu) {
  return -evaluate_entropy(spec, mu, space);
}

}  // namespace branch_detail

/// Searches for a strong-convexity violation of the Renyi entropy built from
/// branching geodesics ending at x: targets with two distinct chains to x that
/// agree up to t1 and separate by more than delta at t2, a witness ball
/// B(w, delta/2) separating the branches, and the two branch plans pi1, pi2
/// from m|_E / m(E) to delta_x. The pooled plan (pi1 + pi2)/2 on [0, t2] or a
/// branch on [t1, 1] must then fail convexity; the largest failure found over
/// all admissible grid intervals is returned.
inline BranchSearchResult branch_violation_search(const FiniteMetricMeasureSpace& space, PointIndex x,
                                                  const EntropySpec& spec, std::size_t k, double eps_geo,
                                                  const BranchSearchParams& params = {}) {
  using namespace branch_detail;
  if (spec.kind() != EntropySpec::Kind::Renyi)
    throw Error(ErrorKind::PreconditionViolated,
                "the branching argument is available for the Renyi entropy only; it is not known to work for Shannon");
  if (x >= space.size()) throw Error(ErrorKind::Domain, "base point out of range");
  const double n = spec.parameter();
  const auto intervals = admissible_intervals(k, n);
  if (intervals.empty()) {
    std::ostringstream os;
    os << "no grid interval at k = " << k << " satisfies the interval condition for N = " << n
       << "; the smallest resolution that works is k = " << minimal_resolution(n);
    throw Error(ErrorKind::GridTooCoarse, os.str());
  }
  const double delta_sep = params.delta_sep.value_or(default_delta_sep(space, k));
  double floor = params.mass_floor.value_or(0.0);
  if (!params.mass_floor) {
    floor = std::numeric_limits<double>::infinity();
    for (PointIndex p = 0; p < space.size(); ++p) floor = std::min(floor, space.mass(p));
  }

  // Chains from each y to x, and the multi-geodesic set A.
  std::vector<ChainSet> sets(space.size());
  parallel_for(space.size(), [&](std::size_t y) {
    if (y != x) sets[y] = enumerate_chains(space, y, x, k, eps_geo, params.chain_cap);
  });
  std::vector<PointIndex> A;
  for (PointIndex y = 0; y < space.size(); ++y)
    if (y != x && distinct_count(space, sets[y].chains, delta_sep) >= 2) A.push_back(y);

  BranchSearchResult res;
  if (A.empty()) {
    res.reason = std::string(to_string(ErrorKind::NoBranchingFound)) + ": no point has two distinct chains to the base";
    return res;
  }

  // A1: distinct pairs that agree on at least the first step away from y.
  std::vector<std::vector<AgreeingPair>> pairs(space.size());
  std::vector<PointIndex> A1;
  for (auto y : A) {
    const auto& ch = sets[y].chains;
    for (std::size_t a = 0; a < ch.size(); ++a)
      for (std::size_t b = a + 1; b < ch.size(); ++b)
        if (agree_until(ch[a], ch[b], 1) && distinct(space, ch[a], ch[b], delta_sep)) pairs[y].push_back({a, b});
    if (!pairs[y].empty()) A1.push_back(y);
  }

  double best_defect = params.tol;
  for (const auto& [j1, j2] : intervals) {
    ++res.intervals_scanned;
    // A2: pairs agreeing on [0, j1] and differing within (j1, j2]; separation at j2.
    std::vector<PointIndex> A2, A3, A4;
    std::vector<double> sep(space.size(), 0.0), sep_window(space.size(), 0.0);
    for (auto y : A1) {
      const auto& ch = sets[y].chains;
      bool in2 = false;
      for (const auto& pr : pairs[y]) {
        const auto& a = ch[pr.a];
        const auto& b = ch[pr.b];
        if (!agree_until(a, b, j1) || agree_until(a, b, j2)) continue;
        in2 = true;
        sep[y] = std::max(sep[y], space.dist(a.nodes[j2], b.nodes[j2]));
        for (std::size_t j = j1; j <= j2; ++j) sep_window[y] = std::max(sep_window[y], space.dist(a.nodes[j], b.nodes[j]));
      }
      if (in2) A2.push_back(y);
    }
    if (A2.empty()) continue;
    double max_sep = 0.0;
    for (auto y : A2) max_sep = std::max(max_sep, sep_window[y]);
    const double delta = max_sep / 2.0;
    if (!(delta > 0.0)) continue;
    for (auto y : A2)
      if (sep_window[y] > delta) A3.push_back(y);
    for (auto y : A3)
      if (sep[y] > delta) A4.push_back(y);
    if (A4.empty()) continue;

    // Witness w maximizing m(E_w).
    double best_mass = 0.0;
    PointIndex best_w = 0;
    for (PointIndex w = 0; w < space.size(); ++w) {
      double mass = 0.0;
      for (auto y : A4) {
        const auto& ch = sets[y].chains;
        for (const auto& pr : pairs[y]) {
          const auto& a = ch[pr.a];
          const auto& b = ch[pr.b];
          if (!agree_until(a, b, j1) || space.dist(a.nodes[j2], b.nodes[j2]) <= delta) continue;
          const bool a_in = space.dist(w, a.nodes[j2]) < delta / 2.0;
          const bool b_in = space.dist(w, b.nodes[j2]) < delta / 2.0;
          if (a_in != b_in) {
            mass += space.mass(y);
            break;
          }
        }
      }
      if (mass > best_mass) {
        best_mass = mass;
        best_w = w;
      }
    }
    if (best_mass < floor * (1.0 - 1e-12) || !(best_mass > 0.0)) continue;

    BranchSearchState st;
    st.A = A;
    st.A1 = A1;
    st.A2 = A2;
    st.A3 = A3;
    st.A4 = A4;
    st.j1 = j1;
    st.j2 = j2;
    st.t1 = static_cast<double>(j1) / k;
    st.t2 = static_cast<double>(j2) / k;
    st.delta = delta;
    st.w = best_w;
    double mE = 0.0;
    for (auto y : A4) {
      const auto& ch = sets[y].chains;
      for (const auto& pr : pairs[y]) {
        const auto& a = ch[pr.a];
        const auto& b = ch[pr.b];
        if (!agree_until(a, b, j1) || space.dist(a.nodes[j2], b.nodes[j2]) <= delta) continue;
        const bool a_in = space.dist(best_w, a.nodes[j2]) < delta / 2.0;
        const bool b_in = space.dist(best_w, b.nodes[j2]) < delta / 2.0;
        if (a_in == b_in) continue;
        st.E.push_back(y);
        st.G1.push_back(a_in ? a : b);
        st.G2.push_back(a_in ? b : a);
        mE += space.mass(y);
        break;
      }
    }
    for (auto* plan : {&st.pi1, &st.pi2, &st.pooled}) {
      plan->resolution = k;
      plan->n_points = space.size();
    }
    for (std::size_t i = 0; i < st.E.size(); ++i) {
      const double w = space.mass(st.E[i]) / mE;
      st.pi1.entries.push_back({st.G1[i], w});
      st.pi2.entries.push_back({st.G2[i], w});
      st.pooled.entries.push_back({st.G1[i], 0.5 * w});
      st.pooled.entries.push_back({st.G2[i], 0.5 * w});
    }
    const auto s1 = interpolate_step(st.pi1, j2).support();
    const auto s2 = interpolate_step(st.pi2, j2).support();
    std::vector<PointIndex> both;
    std::set_intersection(s1.begin(), s1.end(), s2.begin(), s2.end(), std::back_inserter(both));
    st.supports_disjoint = both.empty();

    st.mass_term = power_integral(spec, space, interpolate_step(st.pi1, 0));
    st.single_t1 = power_integral(spec, space, interpolate_step(st.pi1, j1));
    st.pooled_t2 = power_integral(spec, space, interpolate_step(st.pooled, j2));
    st.branch1_t2 = power_integral(spec, space, interpolate_step(st.pi1, j2));
    st.branch2_t2 = power_integral(spec, space, interpolate_step(st.pi2, j2));
    const double tau = st.t1 / st.t2;
    st.pooled_bound = (1.0 - tau) * st.mass_term + tau * st.pooled_t2;
    st.factor = tau * std::pow(2.0, 1.0 / n) * (1.0 - st.t2) / (1.0 - st.t1);

    // Candidate failures of convexity, each as a violation on a time window.
    struct Candidate {
      std::string link;
      DynamicalPlan plan;
      std::size_t step;
    };
    std::vector<Candidate> cands;
    cands.push_back({"pooled[0,t2]", plan_window(space, st.pooled, 0, j2), j1});
    cands.push_back({"branch1[t1,1]", plan_window(space, st.pi1, j1, k), j2 - j1});
    cands.push_back({"branch2[t1,1]", plan_window(space, st.pi2, j1, k), j2 - j1});
    for (auto& c : cands) {
      const auto d = convexity_defect(space, spec, c.plan, c.step);
      if (d.defect > best_defect && st.supports_disjoint) {
        best_defect = d.defect;
        recheck_optimality(space, c.plan);
        st.violated_link = c.link;
        res.violation = ConvexityViolation{c.plan, c.step, static_cast<double>(c.step) / c.plan.resolution, spec,
                                           d.lhs, d.rhs, d.defect};
        res.state = st;
        res.found = true;
      }
    }
  }
  if (!res.found)
    res.reason = "no admissible interval produced a witness set with a convexity defect";
  return res;
}

}  // namespace cdkn

#endif  // CDKN_UNIQUENESS_HPP
