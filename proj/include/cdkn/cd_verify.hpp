#ifndef CDKN_CD_VERIFY_HPP
#define CDKN_CD_VERIFY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "cdkn/entropy.hpp"
#include "cdkn/errors.hpp"
#include "cdkn/mms.hpp"
#include "cdkn/parallel.hpp"
#include "cdkn/transport.hpp"

namespace cdkn {

/// Right-hand side of the distorted convexity inequality for absolutely
/// continuous endpoints:
///   (1-t) sum sigma (b_{1-t}/rho0) F(rho0/b_{1-t}) + t sum sigma (b_t/rho1) F(rho1/b_t)
/// over the positive cells of the coupling.
inline double cd_rhs(const EntropySpec& spec, const DistortionParams& params, const ProbMeasure& mu0,
                     const ProbMeasure& mu1, const Coupling& coupling, double t,
                     const FiniteMetricMeasureSpace& space) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::Domain, "cd_rhs needs t in [0, 1]");
  double first = 0.0, second = 0.0;
  for (const auto& cell : coupling.cells) {
    if (!(cell.mass > 0.0)) continue;
    const double d = space.dist(cell.from, cell.to);
    if (t < 1.0) {
      const double rho0 = mu0[cell.from] / space.mass(cell.from);
      first += cell.mass * spec.distorted_term(rho0, beta_coefficient(1.0 - t, d, params));
    }
    if (t > 0.0) {
      const double rho1 = mu1[cell.to] / space.mass(cell.to);
      second += cell.mass * spec.distorted_term(rho1, beta_coefficient(t, d, params));
    }
  }
  double rhs = 0.0;
  if (t < 1.0) rhs += (1.0 - t) * first;
  if (t > 0.0) rhs += t * second;
  return rhs;
}

/// Absolute slack for an inequality with values of size `scale`.
inline double scaled_tolerance(double tol, double lhs, double rhs) {
  double scale = 1.0;
  if (std::isfinite(lhs)) scale = std::max(scale, std::abs(lhs));
  if (std::isfinite(rhs)) scale = std::max(scale, std::abs(rhs));
  return tol * scale;
}

/// Discretization budget of a run: eps_geo, but never below 1.5 / k.
inline double discretization_budget(std::size_t k, double eps_geo) {
  return std::max(eps_geo, 1.5 / static_cast<double>(std::max<std::size_t>(k, 1)));
}

/// tol_num + C_slack * eps, with tol_num = 1e-9, C_slack = 1 + |K| D^2 + sqrt((N-1)|K|) D
/// bounding the variation of log beta over distances up to D.
inline double default_cd_tolerance(const DistortionParams& params, double diameter, double eps) {
  double c_slack = 1.0 + std::abs(params.K) * diameter * diameter;
  if (std::isfinite(params.N) && params.N > 1.0) c_slack += std::sqrt((params.N - 1.0) * std::abs(params.K)) * diameter;
  return 1e-9 + c_slack * eps;
}

/// Margin of lhs <= rhs in units of the functional. Power tests r^p are
/// homogeneous of degree p and are compared through p-th roots; the others
/// relative to max(1, |lhs|, |rhs|).
inline double normalized_margin(const EntropySpec& spec, double lhs, double rhs) {
  if (spec.kind() == EntropySpec::Kind::PowerTest && lhs > 0.0 && rhs > 0.0) {
    if (std::isinf(rhs)) return 1.0;
    const double a = std::pow(lhs, 1.0 / spec.parameter()), b = std::pow(rhs, 1.0 / spec.parameter());
    return (b - a) / std::max(a, b);
  }
  return (rhs - lhs) / scaled_tolerance(1.0, lhs, rhs);
}

/// The DC_N test family used by check_cd.
inline std::vector<EntropySpec> cd_test_family(double n) {
  std::vector<EntropySpec> fam;
  if (std::isfinite(n)) fam.push_back(EntropySpec::renyi(n));
  for (double p : {1.0, 2.0, 4.0, 8.0, 16.0}) fam.push_back(EntropySpec::power(p));
  if (std::isinf(n)) fam.push_back(EntropySpec::shannon());
  return fam;
}

struct CdRecord {
  std::size_t sample = 0;
  std::size_t step = 0;
  double t = 0.0;
  EntropySpec spec = EntropySpec::shannon();
  double lhs = 0.0;
  double rhs = 0.0;
  double margin = 0.0;  // rhs - lhs
};

struct CdWitness {
  std::size_t sample = 0;
  ProbMeasure mu0, mu1;
  DynamicalPlan plan;
  double t = 0.0;
  EntropySpec spec = EntropySpec::shannon();
  double lhs = 0.0;
  double rhs = 0.0;
};

enum class CdVerdict { Consistent, Violated, Unresolved };

inline const char* to_string(CdVerdict v) {
  switch (v) {
    case CdVerdict::Consistent: return "consistent";
    case CdVerdict::Violated: return "violated";
    case CdVerdict::Unresolved: return "unresolved";
  }
  return "?";
}

struct CdSampleSummary {
  std::size_t sample = 0;
  bool passed = false;           // some examined plan satisfies every inequality
  bool enumeration_complete = false;
  std::size_t plans_examined = 0;
  std::size_t best_plan = 0;     // index into the examined selections
  double best_margin = 0.0;      // worst scaled margin of the best plan
};

struct CdOptions {
  std::size_t plan_cap = 256;
  std::size_t chain_cap = 64;
  std::optional<double> tol;  // default_cd_tolerance when unset
};

struct CdReport {
  DistortionParams params;
  std::vector<EntropySpec> family;
  std::size_t k = 0;
  double eps_geo = 0.0;
  std::uint64_t seed = 0;
  double tol = 0.0;
  std::vector<CdRecord> records;  // the best plan's inequalities per sample
  std::vector<CdSampleSummary> samples;
  CdVerdict verdict = CdVerdict::Consistent;
  std::optional<CdWitness> witness;
  bool complete = true;  // every sample's plan enumeration was exhaustive
  double worst_margin = std::numeric_limits<double>::infinity();
};

namespace cd_detail {

inline std::mt19937_64 sample_rng(std::uint64_t seed, std::size_t sample) {
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(sample)};
  return std::mt19937_64(seq);
}

struct PlanScore {
  double worst = std::numeric_limits<double>::infinity();  // min over (t, F) of margin / scale
  std::vector<CdRecord> records;
  std::size_t worst_index = 0;
};

inline PlanScore score_plan(const FiniteMetricMeasureSpace& space, const DistortionParams& params,
                            const std::vector<EntropySpec>& family, const ProbMeasure& mu0, const ProbMeasure& mu1,
                            const DynamicalPlan& plan, const Coupling& coupling, std::size_t sample) {
  PlanScore score;
  const std::size_t k = plan.resolution;
  for (std::size_t step = 0; step <= k; ++step) {
    const double t = static_cast<double>(step) / static_cast<double>(k);
    const auto mut = interpolate_step(plan, step);
    for (const auto& spec : family) {
      CdRecord rec{sample, step, t, spec, evaluate_entropy(spec, mut, space), 0.0, 0.0};
      rec.rhs = cd_rhs(spec, params, mu0, mu1, coupling, t, space);
      rec.margin = rec.rhs - rec.lhs;
      const double scaled = normalized_margin(spec, rec.lhs, rec.rhs);
      if (scaled < score.worst) {
        score.worst = scaled;
        score.worst_index = score.records.size();
      }
      score.records.push_back(rec);
    }
  }
  return score;
}

}  // namespace cd_detail

/// Randomized check of CD(K,N): per sample pair, searches the enumerated
/// optimal plans for one along which every test functional satisfies the
/// distorted inequality at every grid time. "violated" needs a complete
/// enumeration with no passing plan; an incomplete one yields "unresolved".
inline CdReport check_cd(const FiniteMetricMeasureSpace& space, const DistortionParams& params,
                         std::size_t sample_count, std::size_t k, double eps_geo, std::uint64_t seed,
                         const CdOptions& options = {}) {
  CdReport rep;
  rep.params = params;
  rep.family = cd_test_family(params.N);
  rep.k = k;
  rep.eps_geo = eps_geo;
  rep.seed = seed;
  rep.tol = options.tol.value_or(default_cd_tolerance(params, space.diameter(), discretization_budget(k, eps_geo)));

  struct Slot {
    CdSampleSummary summary;
    std::vector<CdRecord> records;
    std::optional<CdWitness> witness;
  };
  std::vector<Slot> slots(sample_count);
  parallel_for(sample_count, [&](std::size_t s) {
    auto rng = cd_detail::sample_rng(seed, s);
    const auto mu0 = random_measure(space, rng);
    const auto mu1 = random_measure(space, rng);
    const auto fam = enumerate_optimal_plans(space, mu0, mu1, k, eps_geo, options.chain_cap);
    const auto sel = enumerate_plan_selections(fam, options.plan_cap, seed + s);
    auto& slot = slots[s];
    slot.summary.sample = s;
    slot.summary.enumeration_complete = sel.exhaustive;
    slot.summary.best_margin = -std::numeric_limits<double>::infinity();
    cd_detail::PlanScore best;
    DynamicalPlan best_plan;
    for (std::size_t i = 0; i < sel.selections.size(); ++i) {
      const auto& pick = sel.selections[i];
      auto plan = fam.build(pick.vertex, pick.choice);
      auto score = cd_detail::score_plan(space, params, rep.family, mu0, mu1, plan, fam.vertices[pick.vertex], s);
      ++slot.summary.plans_examined;
      if (score.worst > slot.summary.best_margin) {
        slot.summary.best_margin = score.worst;
        slot.summary.best_plan = i;
        best = std::move(score);
        best_plan = std::move(plan);
      }
      if (slot.summary.best_margin >= -rep.tol) break;
    }
    slot.summary.passed = slot.summary.best_margin >= -rep.tol;
    slot.records = std::move(best.records);
    if (!slot.summary.passed && !slot.records.empty()) {
      const auto& w = slot.records[best.worst_index];
      slot.witness = CdWitness{s, mu0, mu1, best_plan, w.t, w.spec, w.lhs, w.rhs};
    }
  });

  bool any_violation = false, any_unresolved = false;
  for (auto& slot : slots) {
    rep.samples.push_back(slot.summary);
    rep.records.insert(rep.records.end(), slot.records.begin(), slot.records.end());
    rep.complete = rep.complete && slot.summary.enumeration_complete;
    rep.worst_margin = std::min(rep.worst_margin, slot.summary.best_margin);
    if (!slot.summary.passed) {
      if (slot.summary.enumeration_complete) {
        if (!any_violation) rep.witness = slot.witness;
        any_violation = true;
      } else {
        any_unresolved = true;
        if (!rep.witness && !any_violation) rep.witness = slot.witness;
      }
    }
  }
  rep.verdict = any_violation ? CdVerdict::Violated : any_unresolved ? CdVerdict::Unresolved : CdVerdict::Consistent;
  if (rep.verdict == CdVerdict::Consistent) rep.witness.reset();
  return rep;
}

/// A plan and grid time along which E(mu_t) exceeds the chord
/// (1-t) E(mu_0) + t E(mu_1), with mu_0, mu_1 the plan's own endpoints.
struct ConvexityViolation {
  DynamicalPlan plan;
  std::size_t step = 0;
  double t = 0.0;
  EntropySpec spec = EntropySpec::shannon();
  double lhs = 0.0;
  double rhs = 0.0;
  double defect = 0.0;  // lhs - rhs > 0
};

struct ConvexityDefect {
  double lhs = 0.0;
  double rhs = 0.0;
  double defect = 0.0;
};

/// Independent evaluation of E(mu_t) - [(1-t) E(mu_0) + t E(mu_1)] at one grid step.
inline ConvexityDefect convexity_defect(const FiniteMetricMeasureSpace& space, const EntropySpec& spec,
                                        const DynamicalPlan& plan, std::size_t step) {
  if (step > plan.resolution) throw Error(ErrorKind::OffGridTime, "step beyond the plan's resolution");
  const double t = static_cast<double>(step) / static_cast<double>(plan.resolution);
  ConvexityDefect d;
  d.lhs = evaluate_entropy(spec, interpolate_step(plan, step), space);
  d.rhs = (1.0 - t) * evaluate_entropy(spec, interpolate_step(plan, 0), space) +
          t * evaluate_entropy(spec, interpolate_step(plan, plan.resolution), space);
  d.defect = d.lhs - d.rhs;
  return d;
}

/// Recomputes a violation's defect from its plan and time.
inline double replay(const FiniteMetricMeasureSpace& space, const ConvexityViolation& v) {
  return convexity_defect(space, v.spec, v.plan, v.step).defect;
}

struct StrongConvexityResult {
  bool consistent = true;
  std::optional<ConvexityViolation> violation;  // the worst one found
  bool complete = false;
  std::size_t plans_examined = 0;
  double worst_margin = std::numeric_limits<double>::infinity();  // min of chord - E(mu_t)
};

struct StrongConvexityOptions {
  std::size_t chain_cap = 10000;
  std::size_t plan_cap = 4096;
  double tol = 1e-9;
  std::uint64_t seed = 0;
};

/// Checks convexity of E along every enumerated optimal plan: each vertex of
/// the optimal face, each chain choice per cell, and pairwise chain mixtures
/// at lambda in {1/4, 1/2, 3/4}.
inline StrongConvexityResult check_strong_displacement_convexity(const FiniteMetricMeasureSpace& space,
                                                                 const EntropySpec& spec, const ProbMeasure& mu0,
                                                                 const ProbMeasure& mu1, std::size_t k,
                                                                 double eps_geo,
                                                                 const StrongConvexityOptions& options = {}) {
  StrongConvexityResult res;
  const auto fam = enumerate_optimal_plans(space, mu0, mu1, k, eps_geo, options.chain_cap);
  const auto sel = enumerate_plan_selections(fam, options.plan_cap, options.seed);
  res.complete = sel.exhaustive;
  const double e0 = evaluate_entropy(spec, mu0, space);
  const double e1 = evaluate_entropy(spec, mu1, space);
  for (const auto& pick : sel.selections) {
    const auto plan = fam.build(pick.vertex, pick.choice);
    ++res.plans_examined;
    for (std::size_t step = 1; step < k; ++step) {
      const double t = static_cast<double>(step) / static_cast<double>(k);
      const double lhs = evaluate_entropy(spec, interpolate_step(plan, step), space);
      const double rhs = (1.0 - t) * e0 + t * e1;
      res.worst_margin = std::min(res.worst_margin, rhs - lhs);
      if (lhs > rhs + options.tol && (!res.violation || lhs - rhs > res.violation->defect))
        res.violation = ConvexityViolation{plan, step, t, spec, lhs, rhs, lhs - rhs};
    }
  }
  res.consistent = !res.violation.has_value();
  return res;
}

struct DensityBoundReport {
  double bound = 0.0;
  double worst_density = 0.0;
  double worst_ratio = 0.0;  // worst_density / bound
  std::size_t worst_step = 0;
  PointIndex worst_point = 0;
  bool pass = false;
};

namespace cd_detail {

inline void require_endpoint_bound(const FiniteMetricMeasureSpace& space, const DynamicalPlan& plan, double c) {
  if (!(c > 0.0)) throw Error(ErrorKind::Domain, "density bound must be positive");
  for (std::size_t step : {std::size_t{0}, plan.resolution}) {
    const auto mu = interpolate_step(plan, step);
    for (PointIndex p = 0; p < space.size(); ++p)
      if (mu[p] / space.mass(p) > c * (1.0 + 1e-12))
        throw Error(ErrorKind::PreconditionViolated, "endpoint density exceeds the supplied bound c");
  }
}

inline DensityBoundReport sweep_density(const FiniteMetricMeasureSpace& space, const DynamicalPlan& plan,
                                        double bound, double tol) {
  DensityBoundReport rep;
  rep.bound = bound;
  for (std::size_t step = 0; step <= plan.resolution; ++step) {
    const auto mu = interpolate_step(plan, step);
    for (PointIndex p = 0; p < space.size(); ++p) {
      const double rho = mu[p] / space.mass(p);
      if (rho > rep.worst_density) {
        rep.worst_density = rho;
        rep.worst_step = step;
        rep.worst_point = p;
      }
    }
  }
  rep.worst_ratio = rep.worst_density / bound;
  rep.pass = rep.worst_density <= bound * (1.0 + tol);
  return rep;
}

}  // namespace cd_detail

/// Density bound along a plan from CD(K,N) with K <= 0: sup rho_t <= c / L,
/// L the lower bound of beta over distances up to D.
inline DensityBoundReport check_density_bound_cd(const FiniteMetricMeasureSpace& space, const DynamicalPlan& plan,
                                                 double c, const DistortionParams& params, double D,
                                                 double tol = 1e-9) {
  cd_detail::require_endpoint_bound(space, plan, c);
  std::vector<PointIndex> supp;
  for (std::size_t step : {std::size_t{0}, plan.resolution}) {
    const auto s = interpolate_step(plan, step).support();
    supp.insert(supp.end(), s.begin(), s.end());
  }
  if (diameter(space, supp) > D * (1.0 + 1e-12))
    throw Error(ErrorKind::PreconditionViolated, "D is smaller than the diameter of the endpoint supports");
  return cd_detail::sweep_density(space, plan, c / beta_lower_bound(params, D), tol);
}

/// One level of the restriction argument: chains passing through
/// A_a = {rho_t >= a} at time t, renormalized.
struct RestrictionLevel {
  std::size_t step = 0;
  double level = 0.0;            // a
  double plan_mass = 0.0;        // pi(Gamma)
  double entropy_t = 0.0;        // Shannon entropy of the restriction at t
  double convex_bound = 0.0;     // (1-t) E(restricted mu_0) + t E(restricted mu_1)
  double cap = 0.0;              // log(c / pi(Gamma))
  double jensen = 0.0;           // log(a / pi(Gamma))
  bool convex_along_restriction = false;
  bool implies_level_le_c = false;  // the two bounds together force a <= c
};

struct StrongDensityReport {
  DensityBoundReport direct;
  std::vector<RestrictionLevel> levels;
  bool restriction_consistent = true;  // every convex restriction has a <= c
  bool jensen_holds = true;            // entropy_t >= jensen at every level
};

/// Sharp bound sup rho_t <= c, plus the restriction argument replayed level by
/// level: whenever Shannon entropy is convex along the restricted plan, the
/// Jensen lower bound and the convexity upper bound must force a <= c.
inline StrongDensityReport check_density_bound_strong(const FiniteMetricMeasureSpace& space,
                                                      const DynamicalPlan& plan, double c, double tol = 1e-9) {
  cd_detail::require_endpoint_bound(space, plan, c);
  StrongDensityReport rep;
  rep.direct = cd_detail::sweep_density(space, plan, c, tol);
  const auto shannon = EntropySpec::shannon();
  const std::size_t k = plan.resolution;
  for (std::size_t step = 1; step < k; ++step) {
    const double t = static_cast<double>(step) / static_cast<double>(k);
    const auto mu = interpolate_step(plan, step);
    std::vector<double> rho(space.size());
    for (PointIndex p = 0; p < space.size(); ++p) rho[p] = mu[p] / space.mass(p);
    std::vector<double> levels;
    for (double r : rho)
      if (r > 0.0) levels.push_back(r);
    std::sort(levels.begin(), levels.end());
    levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
    for (double a : levels) {
      DynamicalPlan sub;
      sub.resolution = k;
      sub.n_points = plan.n_points;
      double kept = 0.0;
      for (const auto& e : plan.entries)
        if (rho[e.chain.nodes[step]] >= a) {
          sub.entries.push_back(e);
          kept += e.weight;
        }
      if (!(kept > 0.0)) continue;
      for (auto& e : sub.entries) e.weight /= kept;
      RestrictionLevel lv;
      lv.step = step;
      lv.level = a;
      lv.plan_mass = kept;
      lv.entropy_t = evaluate_entropy(shannon, interpolate_step(sub, step), space);
      lv.convex_bound = (1.0 - t) * evaluate_entropy(shannon, interpolate_step(sub, 0), space) +
                        t * evaluate_entropy(shannon, interpolate_step(sub, k), space);
      lv.cap = std::log(c / kept);
      lv.jensen = std::log(a / kept);
      lv.convex_along_restriction = lv.entropy_t <= lv.convex_bound + scaled_tolerance(tol, lv.entropy_t, lv.convex_bound);
      lv.implies_level_le_c = lv.jensen <= lv.cap + tol;
      if (lv.entropy_t < lv.jensen - scaled_tolerance(tol, lv.entropy_t, lv.jensen)) rep.jensen_holds = false;
      if (lv.convex_along_restriction && !(a <= c * (1.0 + tol))) rep.restriction_consistent = false;
      rep.levels.push_back(lv);
    }
  }
  return rep;
}

/// Samples (t_i, mu_i) of a flow, strictly increasing in time.
class FlowTrajectory {
 public:
  struct Sample {
    double time = 0.0;
    ProbMeasure measure;
  };

  explicit FlowTrajectory(std::vector<Sample> samples) : samples_(std::move(samples)) {
    if (samples_.size() < 2) throw Error(ErrorKind::Domain, "a flow trajectory needs at least two samples");
    for (std::size_t i = 0; i < samples_.size(); ++i) {
      if (!(samples_[i].time >= 0.0)) throw Error(ErrorKind::Domain, "flow times must be non-negative");
      if (i > 0 && !(samples_[i].time > samples_[i - 1].time))
        throw Error(ErrorKind::Domain, "flow times must be strictly increasing");
    }
  }

  static FlowTrajectory constant(const ProbMeasure& mu, std::size_t steps = 2, double dt = 1.0) {
    std::vector<Sample> s;
    for (std::size_t i = 0; i < steps; ++i) s.push_back({static_cast<double>(i) * dt, mu});
    return FlowTrajectory(std::move(s));
  }

  const std::vector<Sample>& samples() const noexcept { return samples_; }
  std::size_t size() const noexcept { return samples_.size(); }

 private:
  std::vector<Sample> samples_;
};

struct EviStep {
  double time = 0.0;
  double h = 0.0;
  double lhs = 0.0;       // [W2^2(nu, mu_{t+h}) - W2^2(nu, mu_t)] / (2h)
  double rhs = 0.0;       // E(nu) - E(mu_t)
  double residual = 0.0;  // lhs - rhs
  bool ok = false;
};

struct EviReport {
  std::vector<EviStep> steps;
  bool pass = true;
  double worst_residual = -std::numeric_limits<double>::infinity();
};

/// Forward-difference check of the evolution variational inequality along the
/// supplied samples against a fixed nu.
inline EviReport evi_check(const FiniteMetricMeasureSpace& space, const FlowTrajectory& flow, const ProbMeasure& nu,
                           const EntropySpec& spec, double tol = 1e-9) {
  if (spec.kind() == EntropySpec::Kind::PowerTest)
    throw Error(ErrorKind::PreconditionViolated, "the EVI check applies to the Renyi or Shannon entropy only");
  EviReport rep;
  const double e_nu = evaluate_entropy(spec, nu, space);
  const auto& s = flow.samples();
  std::vector<double> w2sq(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) w2sq[i] = w2(space, nu, s[i].measure).squared;
  for (std::size_t i = 0; i + 1 < s.size(); ++i) {
    EviStep st;
    st.time = s[i].time;
    st.h = s[i + 1].time - s[i].time;
    st.lhs = (w2sq[i + 1] - w2sq[i]) / (2.0 * st.h);
    st.rhs = e_nu - evaluate_entropy(spec, s[i].measure, space);
    st.residual = st.lhs - st.rhs;
    st.ok = st.residual <= tol;
    rep.pass = rep.pass && st.ok;
    rep.worst_residual = std::max(rep.worst_residual, st.residual);
    rep.steps.push_back(st);
  }
  return rep;
}

}  // namespace cdkn

#endif  // CDKN_CD_VERIFY_HPP
