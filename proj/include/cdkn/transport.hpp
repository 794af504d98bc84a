#ifndef CDKN_TRANSPORT_HPP
#define CDKN_TRANSPORT_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <random>
#include <utility>
#include <vector>

#include "cdkn/errors.hpp"
#include "cdkn/geodesics.hpp"
#include "cdkn/mms.hpp"
#include "cdkn/transport_lp.hpp"

namespace cdkn {

/// A probability measure on the points of a space. Ambient masses are
/// strictly positive, so every such measure has a density.
class ProbMeasure {
 public:
  ProbMeasure() = default;

  explicit ProbMeasure(std::vector<double> weights, double tol = 1e-12) : weights_(std::move(weights)) {
    double total = 0.0;
    for (double w : weights_) {
      if (!(w >= 0.0) || !std::isfinite(w)) throw Error(ErrorKind::Domain, "probability weights must be non-negative");
      total += w;
    }
    if (std::abs(total - 1.0) > tol) throw Error(ErrorKind::Domain, "probability weights must sum to 1");
  }

  /// Normalizes arbitrary non-negative mass to a probability measure.
  static ProbMeasure normalized(std::vector<double> mass) {
    double total = 0.0;
    for (double w : mass) total += w;
    if (!(total > 0.0)) throw Error(ErrorKind::Domain, "cannot normalize zero mass");
    for (double& w : mass) w /= total;
    return ProbMeasure(std::move(mass), 1e-9);
  }

  static ProbMeasure dirac(std::size_t n, PointIndex p) {
    std::vector<double> w(n, 0.0);
    w.at(p) = 1.0;
    return ProbMeasure(std::move(w));
  }

  /// m restricted to `subset`, renormalized.
  static ProbMeasure uniform_on(const FiniteMetricMeasureSpace& space, std::span<const PointIndex> subset) {
    std::vector<double> w(space.size(), 0.0);
    for (auto p : subset) w.at(p) = space.mass(p);
    return normalized(std::move(w));
  }

  static ProbMeasure reference(const FiniteMetricMeasureSpace& space) {
    return normalized(std::vector<double>(space.measure().begin(), space.measure().end()));
  }

  std::size_t size() const noexcept { return weights_.size(); }
  double operator[](PointIndex p) const { return weights_[p]; }
  const std::vector<double>& weights() const noexcept { return weights_; }

  std::vector<double> density(const FiniteMetricMeasureSpace& space) const {
    std::vector<double> rho(weights_.size());
    for (std::size_t i = 0; i < rho.size(); ++i) rho[i] = weights_[i] / space.mass(i);
    return rho;
  }

  std::vector<PointIndex> support() const {
    std::vector<PointIndex> s;
    for (std::size_t i = 0; i < weights_.size(); ++i)
      if (weights_[i] > 0.0) s.push_back(i);
    return s;
  }

 private:
  std::vector<double> weights_;
};

struct CouplingCell {
  PointIndex from = 0;
  PointIndex to = 0;
  double mass = 0.0;
};

/// A transport plan sigma between two measures, stored by its positive cells
/// in row-major order.
struct Coupling {
  std::size_t n = 0;
  std::vector<CouplingCell> cells;

  std::vector<double> first_marginal() const {
    std::vector<double> w(n, 0.0);
    for (const auto& c : cells) w[c.from] += c.mass;
    return w;
  }
  std::vector<double> second_marginal() const {
    std::vector<double> w(n, 0.0);
    for (const auto& c : cells) w[c.to] += c.mass;
    return w;
  }
  double cost(const FiniteMetricMeasureSpace& space) const {
    double total = 0.0;
    for (const auto& c : cells) total += c.mass * space.dist(c.from, c.to) * space.dist(c.from, c.to);
    return total;
  }
  double mass_at(PointIndex from, PointIndex to) const {
    for (const auto& c : cells)
      if (c.from == from && c.to == to) return c.mass;
    return 0.0;
  }

  bool has_marginals(const ProbMeasure& mu, const ProbMeasure& nu, double tol = 1e-10) const {
    const auto a = first_marginal(), b = second_marginal();
    for (std::size_t i = 0; i < n; ++i)
      if (std::abs(a[i] - mu[i]) > tol || std::abs(b[i] - nu[i]) > tol) return false;
    return true;
  }
};

struct W2Result {
  double distance = 0.0;
  double squared = 0.0;
  Coupling coupling;
};

namespace transport_detail {

template <typename Scalar>
struct SupportProblem {
  std::vector<PointIndex> rows, cols;
  std::vector<Scalar> supply, demand, cost;
};

template <typename Scalar>
SupportProblem<Scalar> build(const FiniteMetricMeasureSpace& space, const ProbMeasure& mu, const ProbMeasure& nu) {
  if (mu.size() != space.size() || nu.size() != space.size())
    throw Error(ErrorKind::Domain, "measures do not live on this space");
  SupportProblem<Scalar> sp;
  sp.rows = mu.support();
  sp.cols = nu.support();
  for (auto p : sp.rows) sp.supply.push_back(Scalar(mu[p]));
  for (auto p : sp.cols) sp.demand.push_back(Scalar(nu[p]));
  for (auto r : sp.rows)
    for (auto c : sp.cols) {
      const Scalar d(space.dist(r, c));
      sp.cost.push_back(d * d);
    }
  if constexpr (ScalarTraits<Scalar>::exact) {
    // Exact mode: the supplied doubles are read as exact rationals, then the
    // demand is rebalanced so both sides carry identical total mass.
    Scalar ts{}, td{};
    for (const auto& s : sp.supply) ts += s;
    for (const auto& d : sp.demand) td += d;
    for (auto& s : sp.supply) s /= ts;
    for (auto& d : sp.demand) d /= td;
  }
  return sp;
}

inline Coupling to_coupling(std::size_t n, const std::vector<PointIndex>& rows, const std::vector<PointIndex>& cols,
                            const std::vector<double>& flow) {
  Coupling c;
  c.n = n;
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < cols.size(); ++j) {
      const double f = flow[i * cols.size() + j];
      if (f > 0.0) c.cells.push_back({rows[i], cols[j], f});
    }
  std::sort(c.cells.begin(), c.cells.end(),
            [](const CouplingCell& a, const CouplingCell& b) { return std::tie(a.from, a.to) < std::tie(b.from, b.to); });
  return c;
}

}  // namespace transport_detail

/// Exact W2 distance and one optimal coupling, by the transportation simplex
/// on the supports of mu and nu.
inline W2Result w2(const FiniteMetricMeasureSpace& space, const ProbMeasure& mu, const ProbMeasure& nu) {
  auto sp = transport_detail::build<double>(space, mu, nu);
  const auto sol = solve_transport<double>(sp.supply, sp.demand, sp.cost);
  W2Result res;
  res.coupling = transport_detail::to_coupling(space.size(), sp.rows, sp.cols, sol.flow);
  res.squared = std::max(0.0, sol.cost);
  res.distance = std::sqrt(res.squared);
  return res;
}

/// W2 squared in exact rational arithmetic. Every double is a dyadic rational,
/// so the inputs are taken at face value and the answer is exact for them.
inline Rational w2_squared_exact(const FiniteMetricMeasureSpace& space, const ProbMeasure& mu, const ProbMeasure& nu) {
  auto sp = transport_detail::build<Rational>(space, mu, nu);
  return solve_transport<Rational>(sp.supply, sp.demand, sp.cost).cost;
}

/// Oracle: W2 by exhaustive enumeration of the coupling polytope's vertices.
inline double w2_brute_force(const FiniteMetricMeasureSpace& space, const ProbMeasure& mu, const ProbMeasure& nu) {
  auto sp = transport_detail::build<double>(space, mu, nu);
  return std::sqrt(std::max(0.0, transport_brute_force<double>(sp.supply, sp.demand, sp.cost)));
}

/// A finitely supported measure on chains; the chains' endpoint pushforward is
/// a coupling and its evaluations at grid times give the interpolation.
struct PlanEntry {
  GeodesicChain chain;
  double weight = 0.0;
};

struct DynamicalPlan {
  std::size_t resolution = 0;
  std::vector<PlanEntry> entries;
  bool optimal = false;  // set by recheck_optimality

  std::size_t n_points = 0;

  Coupling endpoint_coupling() const {
    std::map<std::pair<PointIndex, PointIndex>, double> agg;
    for (const auto& e : entries) agg[{e.chain.front(), e.chain.back()}] += e.weight;
    Coupling c;
    c.n = n_points;
    for (const auto& [key, w] : agg) c.cells.push_back({key.first, key.second, w});
    return c;
  }

  double total_weight() const {
    double w = 0.0;
    for (const auto& e : entries) w += e.weight;
    return w;
  }
};

/// mu_t = (e_t)_# pi at a grid time.
inline ProbMeasure interpolate(const DynamicalPlan& plan, double t) {
  const std::size_t step = grid_step(t, plan.resolution);
  std::vector<double> w(plan.n_points, 0.0);
  for (const auto& e : plan.entries) w[e.chain.nodes[step]] += e.weight;
  return ProbMeasure(std::move(w), 1e-9);
}

inline ProbMeasure interpolate_step(const DynamicalPlan& plan, std::size_t step) {
  std::vector<double> w(plan.n_points, 0.0);
  for (const auto& e : plan.entries) w[e.chain.nodes.at(step)] += e.weight;
  return ProbMeasure(std::move(w), 1e-9);
}

/// Sets and returns the optimality flag: the endpoint coupling must achieve W2
/// between the plan's own endpoint marginals.
inline bool recheck_optimality(const FiniteMetricMeasureSpace& space, DynamicalPlan& plan, double rel_tol = 1e-9) {
  const auto coupling = plan.endpoint_coupling();
  const ProbMeasure mu(coupling.first_marginal(), 1e-9), nu(coupling.second_marginal(), 1e-9);
  const double best = w2(space, mu, nu).squared;
  const double have = coupling.cost(space);
  plan.optimal = have <= best + rel_tol * std::max(1.0, best) + 1e-15;
  return plan.optimal;
}

/// Cache of chain sets keyed by endpoint pair.
class ChainCache {
 public:
  ChainCache(const FiniteMetricMeasureSpace& space, std::size_t k, double eps_geo, std::size_t cap)
      : space_(&space), k_(k), eps_geo_(eps_geo), cap_(cap) {}

  const ChainSet& get(PointIndex x, PointIndex y) {
    auto key = std::make_pair(x, y);
    auto it = sets_.find(key);
    if (it == sets_.end()) it = sets_.emplace(key, enumerate_chains(*space_, x, y, k_, eps_geo_, cap_)).first;
    return it->second;
  }

  std::size_t resolution() const noexcept { return k_; }
  double eps_geo() const noexcept { return eps_geo_; }
  std::size_t cap() const noexcept { return cap_; }

 private:
  const FiniteMetricMeasureSpace* space_;
  std::size_t k_;
  double eps_geo_;
  std::size_t cap_;
  std::map<std::pair<PointIndex, PointIndex>, ChainSet> sets_;
};

/// Lifts a coupling to a plan. Each cell's mass is spread evenly over its
/// admissible chains (the first `spread` in lexicographic order), so ties in
/// the discretization are not all broken the same way.
inline DynamicalPlan lift_coupling(const FiniteMetricMeasureSpace& space, const Coupling& coupling, std::size_t k,
                                   double eps_geo, std::size_t spread = 64) {
  if (spread < 1) throw Error(ErrorKind::Domain, "spread must be at least 1");
  DynamicalPlan plan;
  plan.resolution = k;
  plan.n_points = space.size();
  for (const auto& cell : coupling.cells) {
    auto set = enumerate_chains(space, cell.from, cell.to, k, eps_geo, spread);
    const double share = cell.mass / static_cast<double>(set.chains.size());
    for (auto& c : set.chains) plan.entries.push_back({std::move(c), share});
  }
  return plan;
}

inline DynamicalPlan optimal_dynamical_plan(const FiniteMetricMeasureSpace& space, const ProbMeasure& mu,
                                            const ProbMeasure& nu, std::size_t k, double eps_geo = 0.0) {
  const auto res = w2(space, mu, nu);
  auto plan = lift_coupling(space, res.coupling, k, eps_geo);
  recheck_optimality(space, plan);
  return plan;
}

/// Renormalized restriction of a plan to the chains selected by `keep`.
inline DynamicalPlan restrict_plan(const FiniteMetricMeasureSpace& space, const DynamicalPlan& plan,
                                   const std::function<bool(const GeodesicChain&)>& keep) {
  DynamicalPlan out;
  out.resolution = plan.resolution;
  out.n_points = plan.n_points;
  double kept = 0.0;
  for (const auto& e : plan.entries)
    if (keep(e.chain)) {
      out.entries.push_back(e);
      kept += e.weight;
    }
  if (!(kept > 0.0)) throw Error(ErrorKind::ZeroMassRestriction, "restriction selects no plan mass");
  for (auto& e : out.entries) e.weight /= kept;
  recheck_optimality(space, out);
  return out;
}

/// Per-cell chain choice: chain `first` with weight lambda and chain `second`
/// with weight 1 - lambda (lambda = 1 means a pure choice).
struct CellChoice {
  std::size_t first = 0;
  std::size_t second = 0;
  double lambda = 1.0;
};

/// The optimal couplings' vertices plus, per supported cell, its full chain set.
/// Plans are generated as {vertex} x {chain choice or two-chain mixture per cell}.
struct PlanFamily {
  std::size_t resolution = 0;
  std::size_t n_points = 0;
  std::vector<Coupling> vertices;
  bool vertices_truncated = false;
  bool chains_truncated = false;
  std::map<std::pair<PointIndex, PointIndex>, ChainSet> chain_sets;

  const ChainSet& chains_for(const CouplingCell& cell) const { return chain_sets.at({cell.from, cell.to}); }

  /// Options per cell: each chain alone, then each pair mixed at lambda in {1/4, 1/2, 3/4}.
  std::vector<CellChoice> options_for(const CouplingCell& cell) const {
    static constexpr double kMixGrid[] = {0.25, 0.5, 0.75};
    const auto& set = chains_for(cell);
    std::vector<CellChoice> opts;
    for (std::size_t a = 0; a < set.chains.size(); ++a) opts.push_back({a, a, 1.0});
    for (std::size_t a = 0; a < set.chains.size(); ++a)
      for (std::size_t b = a + 1; b < set.chains.size(); ++b)
        for (double lam : kMixGrid) opts.push_back({a, b, lam});
    return opts;
  }

  DynamicalPlan build(std::size_t vertex, const std::vector<CellChoice>& choice) const {
    const auto& cpl = vertices.at(vertex);
    DynamicalPlan plan;
    plan.resolution = resolution;
    plan.n_points = n_points;
    for (std::size_t c = 0; c < cpl.cells.size(); ++c) {
      const auto& cell = cpl.cells[c];
      const auto& set = chains_for(cell);
      const auto& ch = choice.at(c);
      if (ch.lambda >= 1.0 || ch.first == ch.second) {
        plan.entries.push_back({set.chains.at(ch.first), cell.mass});
      } else {
        plan.entries.push_back({set.chains.at(ch.first), cell.mass * ch.lambda});
        plan.entries.push_back({set.chains.at(ch.second), cell.mass * (1.0 - ch.lambda)});
      }
    }
    plan.optimal = true;  // every vertex is an optimal coupling
    return plan;
  }

  bool complete() const { return !vertices_truncated && !chains_truncated; }
};

inline PlanFamily enumerate_optimal_plans(const FiniteMetricMeasureSpace& space, const ProbMeasure& mu,
                                          const ProbMeasure& nu, std::size_t k, double eps_geo = 0.0,
                                          std::size_t cap = 10000) {
  auto sp = transport_detail::build<double>(space, mu, nu);
  const auto sol = solve_transport<double>(sp.supply, sp.demand, sp.cost);
  const auto face = optimal_face_vertices<double>(sol, sp.cost, cap);
  PlanFamily fam;
  fam.resolution = k;
  fam.n_points = space.size();
  fam.vertices_truncated = face.truncated;
  for (const auto& flow : face.vertices) {
    fam.vertices.push_back(transport_detail::to_coupling(space.size(), sp.rows, sp.cols, flow));
    for (const auto& cell : fam.vertices.back().cells) {
      auto key = std::make_pair(cell.from, cell.to);
      if (!fam.chain_sets.count(key)) {
        auto set = enumerate_chains(space, cell.from, cell.to, k, eps_geo, cap);
        fam.chains_truncated = fam.chains_truncated || set.truncated;
        fam.chain_sets.emplace(key, std::move(set));
      }
    }
  }
  return fam;
}

struct PlanSelection {
  std::size_t vertex = 0;
  std::vector<CellChoice> choice;
};

struct PlanEnumeration {
  std::vector<PlanSelection> selections;
  bool exhaustive = false;  // every vertex x option combination is listed
};

/// Selections to examine from a family. If the full product of per-cell options
/// fits in `plan_cap` it is listed exhaustively in lexicographic order; otherwise
/// the list holds, per vertex, the all-first and all-last choices, every
/// single-cell deviation from all-first, then seeded random combinations.
inline PlanEnumeration enumerate_plan_selections(const PlanFamily& fam, std::size_t plan_cap = 4096,
                                                 std::uint64_t seed = 0) {
  PlanEnumeration out;
  std::vector<std::vector<std::vector<CellChoice>>> opts(fam.vertices.size());
  double total = 0.0;
  for (std::size_t v = 0; v < fam.vertices.size(); ++v) {
    double prod = 1.0;
    for (const auto& cell : fam.vertices[v].cells) {
      opts[v].push_back(fam.options_for(cell));
      prod *= static_cast<double>(opts[v].back().size());
    }
    total += prod;
  }
  if (total <= static_cast<double>(plan_cap)) {
    for (std::size_t v = 0; v < fam.vertices.size(); ++v) {
      const auto& o = opts[v];
      std::vector<std::size_t> idx(o.size(), 0);
      for (;;) {
        PlanSelection sel{v, {}};
        for (std::size_t c = 0; c < o.size(); ++c) sel.choice.push_back(o[c][idx[c]]);
        out.selections.push_back(std::move(sel));
        std::size_t pos = 0;
        while (pos < o.size()) {
          if (++idx[pos] < o[pos].size()) break;
          idx[pos] = 0;
          ++pos;
        }
        if (pos == o.size()) break;
      }
    }
    out.exhaustive = fam.complete();
    return out;
  }
  std::mt19937_64 rng(seed);
  for (std::size_t v = 0; v < fam.vertices.size() && out.selections.size() < plan_cap; ++v) {
    const auto& o = opts[v];
    PlanSelection first{v, {}}, last{v, {}};
    for (const auto& cell_opts : o) {
      first.choice.push_back(cell_opts.front());
      // last pure chain
      const auto pure = std::count_if(cell_opts.begin(), cell_opts.end(),
                                      [](const CellChoice& c) { return c.lambda >= 1.0; });
      last.choice.push_back(cell_opts[static_cast<std::size_t>(pure) - 1]);
    }
    out.selections.push_back(first);
    out.selections.push_back(last);
    for (std::size_t c = 0; c < o.size() && out.selections.size() < plan_cap; ++c)
      for (std::size_t q = 1; q < o[c].size() && out.selections.size() < plan_cap; ++q) {
        PlanSelection sel = first;
        sel.choice[c] = o[c][q];
        out.selections.push_back(std::move(sel));
      }
  }
  while (out.selections.size() < plan_cap && !fam.vertices.empty()) {
    const std::size_t v = std::uniform_int_distribution<std::size_t>(0, fam.vertices.size() - 1)(rng);
    PlanSelection sel{v, {}};
    for (const auto& cell_opts : opts[v])
      sel.choice.push_back(cell_opts[std::uniform_int_distribution<std::size_t>(0, cell_opts.size() - 1)(rng)]);
    out.selections.push_back(std::move(sel));
  }
  out.exhaustive = false;
  return out;
}

/// Density drawn from a seeded symmetric Dirichlet(1), i.e. rho_i proportional
/// to independent Exp(1) draws, turned into weights rho_i m_i and renormalized.
inline ProbMeasure random_measure(const FiniteMetricMeasureSpace& space, std::mt19937_64& rng) {
  std::exponential_distribution<double> expo(1.0);
  std::vector<double> w(space.size());
  for (std::size_t i = 0; i < w.size(); ++i) w[i] = expo(rng) * space.mass(i);
  return ProbMeasure::normalized(std::move(w));
}

}  // namespace cdkn

#endif  // CDKN_TRANSPORT_HPP
