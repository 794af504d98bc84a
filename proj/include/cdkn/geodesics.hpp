#ifndef CDKN_GEODESICS_HPP
#define CDKN_GEODESICS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "cdkn/errors.hpp"
#include "cdkn/mms.hpp"

namespace cdkn {

/// An equally spaced chain p_0, ..., p_k standing in for a constant-speed geodesic.
struct GeodesicChain {
  std::vector<PointIndex> nodes;
  double span = 0.0;  // d(p_0, p_k)

  std::size_t resolution() const noexcept { return nodes.empty() ? 0 : nodes.size() - 1; }
  PointIndex front() const { return nodes.front(); }
  PointIndex back() const { return nodes.back(); }
  PointIndex at(std::size_t step) const { return nodes.at(step); }

  friend bool operator==(const GeodesicChain&, const GeodesicChain&) = default;
};

struct ChainSet {
  PointIndex from = 0;
  PointIndex to = 0;
  std::size_t resolution = 0;
  double eps_geo = 0.0;
  std::vector<GeodesicChain> chains;  // lexicographic in node indices
  bool truncated = false;
};

/// Converts a grid time t in {0, 1/k, ..., 1} into its step index.
inline std::size_t grid_step(double t, std::size_t k) {
  const double scaled = t * static_cast<double>(k);
  const double rounded = std::round(scaled);
  if (std::abs(scaled - rounded) > 1e-12 || rounded < 0.0 || rounded > static_cast<double>(k))
    throw Error(ErrorKind::OffGridTime, "time is not on the chain grid");
  return static_cast<std::size_t>(rounded);
}

inline PointIndex evaluate(const GeodesicChain& chain, double t) {
  return chain.nodes[grid_step(t, chain.resolution())];
}

/// Constant-speed convention: the length of a chain is its endpoint distance.
inline double chain_length(const GeodesicChain& chain) { return chain.span; }

inline GeodesicChain reversed(GeodesicChain chain) {
  std::reverse(chain.nodes.begin(), chain.nodes.end());
  return chain;
}

/// True iff at some grid time the two chains are more than delta_sep apart.
inline bool distinct(const FiniteMetricMeasureSpace& space, const GeodesicChain& a, const GeodesicChain& b,
                     double delta_sep) {
  if (a.resolution() != b.resolution())
    throw Error(ErrorKind::ResolutionMismatch, "chains have different resolutions");
  for (std::size_t i = 0; i < a.nodes.size(); ++i)
    if (space.dist(a.nodes[i], b.nodes[i]) > delta_sep) return true;
  return false;
}

// Admissibility.
//
// For t = i/k the point p is a t-intermediate point of (x, y) iff
//   g_t(p) = (1-t) d(x,p)^2 + t d(p,y)^2 - t(1-t) d(x,y)^2
// vanishes; the triangle inequality gives g_t >= 0, and in Euclidean space
// sqrt(g_t(p)) is exactly the distance from p to the ideal point on [x, y].
// A discretized space rarely contains the ideal point, so each node i is
// measured by its excess e_i(p) = sqrt(g_t(p)) over the best available
// floor E_i = min_p e_i(p). A chain is admissible when
//   e_i(p_i) <= E_i + eps_geo * span                                 (nodes)
//   |d(p_i,p_j) - (|i-j|/k) span| <= e_i(p_i) + e_j(p_j) + eps_geo * span  (pairs)
// On exactly geodesic discretizations every floor is zero and this is the
// plain eps-geodesic property.
namespace detail {

inline double intermediate_excess_sq(const FiniteMetricMeasureSpace& space, PointIndex x, PointIndex y,
                                     double t, PointIndex p) {
  const double s = space.dist(x, y);
  const double a = space.dist(x, p);
  const double b = space.dist(p, y);
  return (1.0 - t) * a * a + t * b * b - t * (1.0 - t) * s * s;
}

struct LevelCandidates {
  std::vector<PointIndex> points;
  std::vector<double> excess;  // e_i(p) for each candidate
};

inline std::vector<LevelCandidates> admissible_levels(const FiniteMetricMeasureSpace& space, PointIndex x,
                                                      PointIndex y, std::size_t k, double eps_geo) {
  const double s = space.dist(x, y);
  std::vector<LevelCandidates> levels(k + 1);
  levels[0].points = {x};
  levels[0].excess = {0.0};
  levels[k].points = {y};
  levels[k].excess = {0.0};
  std::vector<double> g(space.size());
  for (std::size_t i = 1; i < k; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(k);
    double floor_sq = std::numeric_limits<double>::infinity();
    for (PointIndex p = 0; p < space.size(); ++p) {
      g[p] = intermediate_excess_sq(space, x, y, t, p);
      floor_sq = std::min(floor_sq, g[p]);
    }
    const double floor = std::sqrt(std::max(0.0, floor_sq));
    const double bound = floor + eps_geo * s;
    const double accept_sq = bound * bound + 1e-12 * s * s;
    for (PointIndex p = 0; p < space.size(); ++p) {
      if (g[p] <= accept_sq) {
        levels[i].points.push_back(p);
        levels[i].excess.push_back(std::sqrt(std::max(0.0, g[p])));
      }
    }
  }
  return levels;
}

inline bool pair_ok(const FiniteMetricMeasureSpace& space, PointIndex p, double ep, std::size_t i, PointIndex q,
                    double eq, std::size_t j, std::size_t k, double s, double eps_geo) {
  const double gap = static_cast<double>(i > j ? i - j : j - i) / static_cast<double>(k);
  const double dev = std::abs(space.dist(p, q) - gap * s);
  return dev <= ep + eq + eps_geo * s + 1e-9 * s;
}

}  // namespace detail

/// Every admissible chain from x to y at resolution k, in lexicographic order,
/// up to `cap` chains. Depth-first search; a node is only placed if it is
/// consistent with every node already placed and with the endpoint y.
inline ChainSet enumerate_chains(const FiniteMetricMeasureSpace& space, PointIndex x, PointIndex y, std::size_t k,
                                 double eps_geo = 0.0, std::size_t cap = 10000) {
  if (k < 1) throw Error(ErrorKind::Domain, "chain resolution must be at least 1");
  if (!(eps_geo >= 0.0)) throw Error(ErrorKind::Domain, "eps_geo must be non-negative");
  if (cap < 1) throw Error(ErrorKind::Domain, "chain cap must be at least 1");
  if (x >= space.size() || y >= space.size()) throw Error(ErrorKind::Domain, "chain endpoint out of range");

  ChainSet set;
  set.from = x;
  set.to = y;
  set.resolution = k;
  set.eps_geo = eps_geo;
  const double s = space.dist(x, y);

  if (x == y) {
    set.chains.push_back(GeodesicChain{std::vector<PointIndex>(k + 1, x), 0.0});
    return set;
  }

  const auto levels = detail::admissible_levels(space, x, y, k, eps_geo);
  std::vector<PointIndex> nodes(k + 1);
  std::vector<double> excess(k + 1, 0.0);
  nodes[0] = x;
  nodes[k] = y;

  // Iterative DFS with a cursor per level.
  std::vector<std::size_t> cursor(k + 1, 0);
  std::size_t level = 1;
  if (k == 1) {
    set.chains.push_back(GeodesicChain{{x, y}, s});
    return set;
  }
  while (level >= 1) {
    bool placed = false;
    const auto& cand = levels[level];
    while (cursor[level] < cand.points.size()) {
      const std::size_t c = cursor[level]++;
      const PointIndex p = cand.points[c];
      const double ep = cand.excess[c];
      bool ok = detail::pair_ok(space, p, ep, level, y, 0.0, k, k, s, eps_geo);
      for (std::size_t j = 0; ok && j < level; ++j)
        ok = detail::pair_ok(space, p, ep, level, nodes[j], excess[j], j, k, s, eps_geo);
      if (!ok) continue;
      nodes[level] = p;
      excess[level] = ep;
      placed = true;
      break;
    }
    if (!placed) {
      cursor[level] = 0;
      --level;
      continue;
    }
    if (level + 1 == k) {
      if (set.chains.size() == cap) {
        set.truncated = true;
        return set;
      }
      set.chains.push_back(GeodesicChain{nodes, s});
    } else {
      ++level;
    }
  }
  if (set.chains.empty())
    throw Error(ErrorKind::EmptyChainSet, "no admissible chain between points " + space.id(x) + " and " +
                                              space.id(y) + " at this resolution");
  return set;
}

/// Independent recheck of the admissibility conditions for one chain.
inline bool is_admissible_chain(const FiniteMetricMeasureSpace& space, const GeodesicChain& chain, double eps_geo) {
  const std::size_t k = chain.resolution();
  if (k < 1) return false;
  const PointIndex x = chain.front(), y = chain.back();
  const double s = space.dist(x, y);
  if (std::abs(chain.span - s) > 1e-12 * std::max(1.0, s)) return false;
  if (s == 0.0) {
    return std::all_of(chain.nodes.begin(), chain.nodes.end(), [&](PointIndex p) { return space.dist(p, x) == 0.0; });
  }
  std::vector<double> e(k + 1, 0.0);
  for (std::size_t i = 1; i < k; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(k);
    double floor_sq = std::numeric_limits<double>::infinity();
    for (PointIndex p = 0; p < space.size(); ++p)
      floor_sq = std::min(floor_sq, detail::intermediate_excess_sq(space, x, y, t, p));
    const double g = detail::intermediate_excess_sq(space, x, y, t, chain.nodes[i]);
    const double bound = std::sqrt(std::max(0.0, floor_sq)) + eps_geo * s;
    if (g > bound * bound + 1e-12 * s * s) return false;
    e[i] = std::sqrt(std::max(0.0, g));
  }
  for (std::size_t i = 0; i <= k; ++i)
    for (std::size_t j = i + 1; j <= k; ++j)
      if (!detail::pair_ok(space, chain.nodes[i], e[i], i, chain.nodes[j], e[j], j, k, s, eps_geo)) return false;
  return true;
}

/// Largest pairwise deviation |d(p_i,p_j) - (|i-j|/k) span| relative to the span.
inline double relative_geodesic_defect(const FiniteMetricMeasureSpace& space, const GeodesicChain& chain) {
  const std::size_t k = chain.resolution();
  if (chain.span == 0.0) return 0.0;
  double worst = 0.0;
  for (std::size_t i = 0; i <= k; ++i)
    for (std::size_t j = i + 1; j <= k; ++j) {
      const double ideal = static_cast<double>(j - i) / static_cast<double>(k) * chain.span;
      worst = std::max(worst, std::abs(space.dist(chain.nodes[i], chain.nodes[j]) - ideal));
    }
  return worst / chain.span;
}

}  // namespace cdkn

#endif  // CDKN_GEODESICS_HPP
