#ifndef CDKN_SPACES_HPP
#define CDKN_SPACES_HPP

#include <cmath>
#include <cstdint>
#include <limits>
#include <random>
#include <string>
#include <tuple>
#include <vector>

#include "cdkn/errors.hpp"
#include "cdkn/mms.hpp"

namespace cdkn {

struct WeightedEdge {
  std::string a, b;
  double length = 0.0;
};

/// All-pairs shortest paths (Floyd-Warshall) over an undirected weighted
/// graph, returned as a row-major matrix.
inline std::vector<double> graph_metric(const std::vector<std::string>& ids, const std::vector<WeightedEdge>& edges) {
  const std::size_t n = ids.size();
  const double inf = std::numeric_limits<double>::infinity();
  std::vector<double> d(n * n, inf);
  for (std::size_t i = 0; i < n; ++i) d[i * n + i] = 0.0;
  auto index = [&](const std::string& id) {
    for (std::size_t i = 0; i < n; ++i)
      if (ids[i] == id) return i;
    throw Error(ErrorKind::ParseError, "edge refers to unknown point '" + id + "'");
  };
  for (const auto& e : edges) {
    if (!(e.length > 0.0) || !std::isfinite(e.length))
      throw Error(ErrorKind::ParseError, "edge lengths must be finite and positive");
    const std::size_t i = index(e.a), j = index(e.b);
    if (i == j) throw Error(ErrorKind::ParseError, "self-loop at '" + e.a + "'");
    d[i * n + j] = std::min(d[i * n + j], e.length);
    d[j * n + i] = std::min(d[j * n + i], e.length);
  }
  for (std::size_t m = 0; m < n; ++m)
    for (std::size_t i = 0; i < n; ++i) {
      const double dim = d[i * n + m];
      if (dim == inf) continue;
      for (std::size_t j = 0; j < n; ++j) {
        const double cand = dim + d[m * n + j];
        if (cand < d[i * n + j]) d[i * n + j] = cand;
      }
    }
  for (std::size_t i = 0; i < n * n; ++i)
    if (d[i] == inf) throw Error(ErrorKind::DisconnectedGraph, "points '" + ids[i / n] + "' and '" + ids[i % n] + "' are not connected");
  return d;
}

/// n equally spaced points on [0, 1], mass 1/n each.
inline FiniteMetricMeasureSpace make_segment(std::size_t n) {
  if (n < 2) throw Error(ErrorKind::Domain, "segment needs at least 2 points");
  std::vector<std::string> ids;
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("s" + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j)
      d[i * n + j] = std::abs(static_cast<double>(i) - static_cast<double>(j)) / static_cast<double>(n - 1);
  }
  return FiniteMetricMeasureSpace(ids, d, std::vector<double>(n, 1.0 / static_cast<double>(n)),
                                  "segment(" + std::to_string(n) + ")");
}

/// m x m grid on [0, 1]^2 with the Euclidean metric, mass 1/m^2 each.
/// Point (row r, column c) has index r m + c.
inline FiniteMetricMeasureSpace make_grid2d(std::size_t m) {
  if (m < 2) throw Error(ErrorKind::Domain, "grid needs at least 2 points per side");
  const std::size_t n = m * m;
  const double h = 1.0 / static_cast<double>(m - 1);
  std::vector<std::string> ids;
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("g" + std::to_string(i / m) + "_" + std::to_string(i % m));
    for (std::size_t j = 0; j < n; ++j) {
      const double dr = (static_cast<double>(i / m) - static_cast<double>(j / m)) * h;
      const double dc = (static_cast<double>(i % m) - static_cast<double>(j % m)) * h;
      d[i * n + j] = std::hypot(dr, dc);
    }
  }
  return FiniteMetricMeasureSpace(ids, d, std::vector<double>(n, 1.0 / static_cast<double>(n)),
                                  "grid2d(" + std::to_string(m) + "x" + std::to_string(m) + ")");
}

/// n points on a circle of circumference 1 with the arc metric.
inline FiniteMetricMeasureSpace make_circle(std::size_t n) {
  if (n < 3) throw Error(ErrorKind::Domain, "circle needs at least 3 points");
  std::vector<std::string> ids;
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("c" + std::to_string(i));
    for (std::size_t j = 0; j < n; ++j) {
      const std::size_t gap = i > j ? i - j : j - i;
      d[i * n + j] = static_cast<double>(std::min(gap, n - gap)) / static_cast<double>(n);
    }
  }
  return FiniteMetricMeasureSpace(ids, d, std::vector<double>(n, 1.0 / static_cast<double>(n)),
                                  "circle(" + std::to_string(n) + ")");
}

namespace spaces_detail {

inline FiniteMetricMeasureSpace from_graph(std::vector<std::string> ids, const std::vector<WeightedEdge>& edges,
                                           std::string name) {
  auto d = graph_metric(ids, edges);
  const std::size_t n = ids.size();
  return FiniteMetricMeasureSpace(std::move(ids), std::move(d), std::vector<double>(n, 1.0 / static_cast<double>(n)),
                                  std::move(name));
}

inline std::string fmt(double v) {
  std::string s = std::to_string(v);
  while (!s.empty() && s.back() == '0') s.pop_back();
  if (!s.empty() && s.back() == '.') s.pop_back();
  return s;
}

}  // namespace spaces_detail

/// Three arms of length L, k edges each, joined at a center: 3k + 1 points.
inline FiniteMetricMeasureSpace make_tripod(double L, std::size_t k) {
  if (!(L > 0.0) || k < 1) throw Error(ErrorKind::Domain, "tripod needs L > 0 and k >= 1");
  std::vector<std::string> ids{"c"};
  std::vector<WeightedEdge> edges;
  const double h = L / static_cast<double>(k);
  for (int arm = 0; arm < 3; ++arm)
    for (std::size_t i = 1; i <= k; ++i) {
      const std::string id = "a" + std::to_string(arm) + "_" + std::to_string(i);
      const std::string prev = i == 1 ? std::string("c") : "a" + std::to_string(arm) + "_" + std::to_string(i - 1);
      ids.push_back(id);
      edges.push_back({prev, id, h});
    }
  return spaces_detail::from_graph(std::move(ids), edges,
                                   "tripod(L=" + spaces_detail::fmt(L) + ",k=" + std::to_string(k) + ")");
}

/// Junction j0, two arms of length L with k edges each meeting at junction j1,
/// and a tail of length L (k edges) beyond j1: 3k points, graph metric. Every
/// tail point has two geodesics to j0. Corresponding arm points at distance u
/// from j0 are 2 min(u, L - u) apart, so the midpoints are L apart; the
/// requested arm separation s must not exceed that.
inline FiniteMetricMeasureSpace make_theta(double L, double s, std::size_t k) {
  if (!(L > 0.0) || k < 2) throw Error(ErrorKind::Domain, "theta needs L > 0 and k >= 2");
  if (!(s > 0.0) || s > L) throw Error(ErrorKind::Domain, "arm separation must lie in (0, L]");
  const double h = L / static_cast<double>(k);
  std::vector<std::string> ids{"j0"};
  std::vector<WeightedEdge> edges;
  for (const char* arm : {"u", "l"}) {
    std::string prev = "j0";
    for (std::size_t i = 1; i < k; ++i) {
      const std::string id = std::string(arm) + std::to_string(i);
      ids.push_back(id);
      edges.push_back({prev, id, h});
      prev = id;
    }
  }
  ids.push_back("j1");
  edges.push_back({"u" + std::to_string(k - 1), "j1", h});
  edges.push_back({"l" + std::to_string(k - 1), "j1", h});
  std::string prev = "j1";
  for (std::size_t i = 1; i <= k; ++i) {
    const std::string id = "t" + std::to_string(i);
    ids.push_back(id);
    edges.push_back({prev, id, h});
    prev = id;
  }
  return spaces_detail::from_graph(std::move(ids), edges,
                                   "theta(L=" + spaces_detail::fmt(L) + ",s=" + spaces_detail::fmt(s) +
                                       ",k=" + std::to_string(k) + ")");
}

/// Complete binary tree of the given depth; edge lengths drawn from
/// {0.5, 0.625, ..., 1.5} with a seeded generator.
inline FiniteMetricMeasureSpace make_weighted_tree(std::size_t depth, std::uint64_t seed) {
  if (depth < 1 || depth > 10) throw Error(ErrorKind::Domain, "tree depth must lie in [1, 10]");
  const std::size_t n = (std::size_t{1} << (depth + 1)) - 1;
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> eighths(4, 12);
  std::vector<std::string> ids;
  std::vector<WeightedEdge> edges;
  for (std::size_t i = 0; i < n; ++i) {
    ids.push_back("v" + std::to_string(i));
    if (i > 0) edges.push_back({"v" + std::to_string((i - 1) / 2), ids.back(), eighths(rng) / 8.0});
  }
  return spaces_detail::from_graph(std::move(ids), edges,
                                   "weighted_tree(depth=" + std::to_string(depth) + ",seed=" + std::to_string(seed) + ")");
}

}  // namespace cdkn

#endif  // CDKN_SPACES_HPP
