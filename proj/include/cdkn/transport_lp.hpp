#ifndef CDKN_TRANSPORT_LP_HPP
#define CDKN_TRANSPORT_LP_HPP

// Exact solver for the balanced transportation problem
//   minimize sum_ij c_ij x_ij  s.t.  sum_j x_ij = a_i,  sum_i x_ij = b_j,  x >= 0
// by the transportation (network) simplex method, templated on the scalar so
// the same code runs in double and in exact rational arithmetic.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <numeric>
#include <set>
#include <utility>
#include <vector>

#include <boost/multiprecision/cpp_int.hpp>

#include "cdkn/errors.hpp"

namespace cdkn {

using Rational = boost::multiprecision::cpp_rational;

template <typename Scalar>
struct ScalarTraits {
  static constexpr bool exact = false;
  static Scalar abs(const Scalar& v) { return std::abs(v); }
  static double to_double(const Scalar& v) { return static_cast<double>(v); }
};

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static Rational abs(const Rational& v) { return boost::multiprecision::abs(v); }
  static double to_double(const Rational& v) { return v.convert_to<double>(); }
};

struct Cell {
  std::size_t row = 0;
  std::size_t col = 0;
  friend bool operator==(const Cell&, const Cell&) = default;
  friend auto operator<=>(const Cell&, const Cell&) = default;
};

template <typename Scalar>
struct TransportSolution {
  Scalar cost{};
  std::size_t rows = 0, cols = 0;
  std::vector<Scalar> flow;   // rows * cols, row-major
  std::vector<Cell> basis;    // rows + cols - 1 cells, spanning tree
  std::vector<Scalar> row_potential, col_potential;
  std::size_t pivots = 0;

  const Scalar& at(std::size_t i, std::size_t j) const { return flow[i * cols + j]; }
};

namespace lp_detail {

template <typename Scalar>
struct Problem {
  std::size_t m = 0, n = 0;
  const std::vector<Scalar>* cost = nullptr;
  Scalar tol{};

  const Scalar& c(std::size_t i, std::size_t j) const { return (*cost)[i * n + j]; }
};

// Potentials u_i + v_j = c_ij on the basis tree, rooted at u_0 = 0.
template <typename Scalar>
void potentials(const Problem<Scalar>& pb, const std::vector<Cell>& basis, std::vector<Scalar>& u,
                std::vector<Scalar>& v) {
  const std::size_t m = pb.m, n = pb.n;
  std::vector<std::vector<std::size_t>> adj(m + n);
  for (std::size_t e = 0; e < basis.size(); ++e) {
    adj[basis[e].row].push_back(e);
    adj[m + basis[e].col].push_back(e);
  }
  u.assign(m, Scalar{});
  v.assign(n, Scalar{});
  std::vector<char> seen(m + n, 0);
  std::vector<std::size_t> stack{0};
  seen[0] = 1;
  while (!stack.empty()) {
    const std::size_t node = stack.back();
    stack.pop_back();
    for (std::size_t e : adj[node]) {
      const Cell& cell = basis[e];
      if (node < m) {
        const std::size_t other = m + cell.col;
        if (seen[other]) continue;
        v[cell.col] = pb.c(cell.row, cell.col) - u[cell.row];
        seen[other] = 1;
        stack.push_back(other);
      } else {
        const std::size_t other = cell.row;
        if (seen[other]) continue;
        u[cell.row] = pb.c(cell.row, cell.col) - v[cell.col];
        seen[other] = 1;
        stack.push_back(other);
      }
    }
  }
  for (char s : seen)
    if (!s) throw Error(ErrorKind::SolverFailure, "transport basis is not a spanning tree");
}

// Tree path from row node `row` to column node `col`, as a list of basis indices.
inline std::vector<std::size_t> tree_path(std::size_t m, std::size_t n, const std::vector<Cell>& basis,
                                          std::size_t row, std::size_t col) {
  std::vector<std::vector<std::size_t>> adj(m + n);
  for (std::size_t e = 0; e < basis.size(); ++e) {
    adj[basis[e].row].push_back(e);
    adj[m + basis[e].col].push_back(e);
  }
  const std::size_t target = m + col;
  std::vector<std::size_t> parent_edge(m + n, std::numeric_limits<std::size_t>::max());
  std::vector<char> seen(m + n, 0);
  std::vector<std::size_t> stack{row};
  seen[row] = 1;
  while (!stack.empty()) {
    const std::size_t node = stack.back();
    stack.pop_back();
    if (node == target) break;
    for (std::size_t e : adj[node]) {
      const std::size_t other = node < m ? m + basis[e].col : basis[e].row;
      if (seen[other]) continue;
      seen[other] = 1;
      parent_edge[other] = e;
      stack.push_back(other);
    }
  }
  if (!seen[target]) throw Error(ErrorKind::SolverFailure, "transport basis is disconnected");
  std::vector<std::size_t> path;
  std::size_t node = target;
  while (node != row) {
    const std::size_t e = parent_edge[node];
    path.push_back(e);
    node = node < m ? m + basis[e].col : basis[e].row;
  }
  std::reverse(path.begin(), path.end());  // edges from row ... to col
  return path;
}

struct PivotPlan {
  std::vector<std::size_t> minus_edges;  // basis indices losing theta
  std::vector<std::size_t> plus_edges;   // basis indices gaining theta
};

inline PivotPlan pivot_cycle(std::size_t m, std::size_t n, const std::vector<Cell>& basis, Cell entering) {
  const auto path = tree_path(m, n, basis, entering.row, entering.col);
  PivotPlan plan;
  // Path has odd length; alternating signs starting with "minus" at the row end.
  for (std::size_t idx = 0; idx < path.size(); ++idx) {
    if (idx % 2 == 0)
      plan.minus_edges.push_back(path[idx]);
    else
      plan.plus_edges.push_back(path[idx]);
  }
  return plan;
}

template <typename Scalar>
bool leq(const Scalar& a, const Scalar& b, const Scalar& tol) {
  return a <= b + tol;
}

// Applies a pivot in place. Returns the candidate leaving edges (ties on theta)
// so callers exploring degenerate bases can branch over them.
template <typename Scalar>
std::vector<std::size_t> leaving_candidates(const std::vector<Cell>& basis, const std::vector<Scalar>& flow,
                                            std::size_t n, const PivotPlan& plan, const Scalar& tol, Scalar& theta) {
  bool first = true;
  for (std::size_t e : plan.minus_edges) {
    const Scalar& f = flow[basis[e].row * n + basis[e].col];
    if (first || f < theta) theta = f;
    first = false;
  }
  std::vector<std::size_t> ties;
  for (std::size_t e : plan.minus_edges) {
    const Scalar& f = flow[basis[e].row * n + basis[e].col];
    if (leq(f, theta, tol)) ties.push_back(e);
  }
  std::sort(ties.begin(), ties.end(), [&](std::size_t a, std::size_t b) { return basis[a] < basis[b]; });
  return ties;
}

template <typename Scalar>
void apply_pivot(std::vector<Cell>& basis, std::vector<Scalar>& flow, std::size_t n, const PivotPlan& plan,
                 Cell entering, std::size_t leaving, const Scalar& theta) {
  flow[entering.row * n + entering.col] += theta;
  for (std::size_t e : plan.minus_edges) flow[basis[e].row * n + basis[e].col] -= theta;
  for (std::size_t e : plan.plus_edges) flow[basis[e].row * n + basis[e].col] += theta;
  const Cell gone = basis[leaving];
  flow[gone.row * n + gone.col] = Scalar{};
  basis[leaving] = entering;
}

template <typename Scalar>
Scalar default_tol(const std::vector<Scalar>& supply, const std::vector<Scalar>& cost) {
  if constexpr (ScalarTraits<Scalar>::exact) {
    return Scalar{};
  } else {
    Scalar scale = Scalar{1};
    for (const auto& c : cost) scale = std::max(scale, ScalarTraits<Scalar>::abs(c));
    Scalar mass = Scalar{};
    for (const auto& s : supply) mass += s;
    (void)mass;
    return Scalar{1e-12} * scale;
  }
}

}  // namespace lp_detail

/// Solves the balanced transportation problem. Entering cells follow Bland's
/// rule (first improving cell in row-major order) and leaving cells the
/// smallest tied cell, which makes the pivot sequence deterministic and
/// cycling-free.
template <typename Scalar>
TransportSolution<Scalar> solve_transport(std::vector<Scalar> supply, std::vector<Scalar> demand,
                                          const std::vector<Scalar>& cost) {
  const std::size_t m = supply.size(), n = demand.size();
  if (m == 0 || n == 0) throw Error(ErrorKind::SolverFailure, "empty transport problem");
  if (cost.size() != m * n) throw Error(ErrorKind::SolverFailure, "cost matrix has the wrong shape");
  Scalar total_s{}, total_d{};
  for (const auto& s : supply) {
    if (s < Scalar{}) throw Error(ErrorKind::SolverFailure, "negative supply");
    total_s += s;
  }
  for (const auto& d : demand) {
    if (d < Scalar{}) throw Error(ErrorKind::SolverFailure, "negative demand");
    total_d += d;
  }
  if constexpr (ScalarTraits<Scalar>::exact) {
    if (total_s != total_d) throw Error(ErrorKind::SolverFailure, "unbalanced transport problem");
  } else {
    if (ScalarTraits<Scalar>::abs(total_s - total_d) > Scalar{1e-9} * std::max(Scalar{1}, total_s))
      throw Error(ErrorKind::SolverFailure, "unbalanced transport problem");
    demand.back() += total_s - total_d;
    if (demand.back() < Scalar{}) demand.back() = Scalar{};
  }

  lp_detail::Problem<Scalar> pb{m, n, &cost, lp_detail::default_tol(supply, cost)};
  TransportSolution<Scalar> sol;
  sol.rows = m;
  sol.cols = n;
  sol.flow.assign(m * n, Scalar{});

  // Northwest corner start; keeps exactly m + n - 1 basic cells.
  {
    std::vector<Scalar> s = supply, d = demand;
    std::size_t i = 0, j = 0;
    for (;;) {
      const Scalar q = std::min(s[i], d[j]);
      sol.flow[i * n + j] = q;
      sol.basis.push_back({i, j});
      s[i] -= q;
      d[j] -= q;
      if (i + 1 == m && j + 1 == n) break;
      if (i + 1 == m) {
        ++j;
      } else if (j + 1 == n) {
        ++i;
      } else if (s[i] <= pb.tol) {
        ++i;
      } else {
        ++j;
      }
    }
  }

  const std::size_t max_pivots = 50 * (m + n) * (m + n) + 1000;
  for (;;) {
    lp_detail::potentials(pb, sol.basis, sol.row_potential, sol.col_potential);
    std::set<Cell> in_basis(sol.basis.begin(), sol.basis.end());
    bool found = false;
    Cell entering{};
    for (std::size_t i = 0; i < m && !found; ++i)
      for (std::size_t j = 0; j < n; ++j) {
        if (in_basis.count({i, j})) continue;
        const Scalar reduced = pb.c(i, j) - sol.row_potential[i] - sol.col_potential[j];
        if (reduced < -pb.tol) {
          entering = {i, j};
          found = true;
          break;
        }
      }
    if (!found) break;
    if (++sol.pivots > max_pivots) throw Error(ErrorKind::SolverFailure, "transport simplex did not terminate");
    const auto plan = lp_detail::pivot_cycle(m, n, sol.basis, entering);
    Scalar theta{};
    const auto ties = lp_detail::leaving_candidates(sol.basis, sol.flow, n, plan, pb.tol, theta);
    if (theta < Scalar{}) theta = Scalar{};
    lp_detail::apply_pivot(sol.basis, sol.flow, n, plan, entering, ties.front(), theta);
  }

  if constexpr (!ScalarTraits<Scalar>::exact) {
    for (auto& f : sol.flow)
      if (f < Scalar{}) f = Scalar{};
  }
  sol.cost = Scalar{};
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) sol.cost += sol.flow[i * n + j] * pb.c(i, j);
  return sol;
}

template <typename Scalar>
struct OptimalFace {
  std::vector<std::vector<Scalar>> vertices;  // flows, row-major
  bool truncated = false;
  std::size_t bases_visited = 0;
};

/// Vertices of the optimal face, found by walking every basis reachable from
/// the optimal basis through zero-reduced-cost pivots (branching over tied
/// leaving cells so degenerate vertices are not missed).
template <typename Scalar>
OptimalFace<Scalar> optimal_face_vertices(const TransportSolution<Scalar>& opt, const std::vector<Scalar>& cost,
                                          std::size_t vertex_cap, std::size_t basis_cap = 20000) {
  const std::size_t m = opt.rows, n = opt.cols;
  lp_detail::Problem<Scalar> pb{m, n, &cost, Scalar{}};
  if constexpr (!ScalarTraits<Scalar>::exact) {
    Scalar scale{1};
    for (const auto& c : cost) scale = std::max(scale, ScalarTraits<Scalar>::abs(c));
    pb.tol = Scalar{1e-10} * scale;
  }
  std::vector<Cell> zero_cells;
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j)
      if (ScalarTraits<Scalar>::abs(pb.c(i, j) - opt.row_potential[i] - opt.col_potential[j]) <= pb.tol)
        zero_cells.push_back({i, j});

  auto same_flow = [&](const std::vector<Scalar>& a, const std::vector<Scalar>& b) {
    for (std::size_t q = 0; q < a.size(); ++q)
      if (ScalarTraits<Scalar>::abs(a[q] - b[q]) > (ScalarTraits<Scalar>::exact ? Scalar{} : Scalar{1e-12}))
        return false;
    return true;
  };

  OptimalFace<Scalar> face;
  std::set<std::vector<Cell>> visited;
  struct State {
    std::vector<Cell> basis;
    std::vector<Scalar> flow;
  };
  std::vector<State> queue;
  auto key = [](std::vector<Cell> b) {
    std::sort(b.begin(), b.end());
    return b;
  };
  queue.push_back({opt.basis, opt.flow});
  visited.insert(key(opt.basis));
  face.vertices.push_back(opt.flow);
  std::size_t head = 0;
  while (head < queue.size()) {
    State st = queue[head++];
    ++face.bases_visited;
    std::set<Cell> in_basis(st.basis.begin(), st.basis.end());
    for (const Cell& entering : zero_cells) {
      if (in_basis.count(entering)) continue;
      const auto plan = lp_detail::pivot_cycle(m, n, st.basis, entering);
      Scalar theta{};
      const auto ties = lp_detail::leaving_candidates(st.basis, st.flow, n, plan, pb.tol, theta);
      if (theta < Scalar{}) theta = Scalar{};
      for (std::size_t leaving : ties) {
        State next = st;
        lp_detail::apply_pivot(next.basis, next.flow, n, plan, entering, leaving, theta);
        auto k = key(next.basis);
        if (visited.count(k)) continue;
        if (visited.size() >= basis_cap) {
          face.truncated = true;
          continue;
        }
        visited.insert(std::move(k));
        bool fresh = true;
        for (const auto& v : face.vertices)
          if (same_flow(v, next.flow)) {
            fresh = false;
            break;
          }
        if (fresh) {
          if (face.vertices.size() >= vertex_cap) {
            face.truncated = true;
          } else {
            face.vertices.push_back(next.flow);
          }
        }
        queue.push_back(std::move(next));
      }
    }
  }
  return face;
}

/// Minimum cost over every vertex of the transportation polytope, found by
/// enumerating all (m+n-1)-subsets of cells that form a spanning tree. Test oracle.
template <typename Scalar>
Scalar transport_brute_force(const std::vector<Scalar>& supply, const std::vector<Scalar>& demand,
                             const std::vector<Scalar>& cost, std::size_t max_subsets = 5000000) {
  const std::size_t m = supply.size(), n = demand.size();
  const std::size_t cells = m * n, pick = m + n - 1;
  // Size check on C(cells, pick).
  {
    double combos = 1.0;
    for (std::size_t q = 0; q < pick; ++q) combos = combos * static_cast<double>(cells - q) / static_cast<double>(q + 1);
    if (combos > static_cast<double>(max_subsets))
      throw Error(ErrorKind::SizeLimit, "too many candidate bases for brute-force enumeration");
  }
  Scalar tol{};
  if constexpr (!ScalarTraits<Scalar>::exact) tol = Scalar{1e-12};

  bool have = false;
  Scalar best{};
  std::vector<std::size_t> idx(pick);
  std::iota(idx.begin(), idx.end(), 0);
  for (;;) {
    // Spanning-tree check with union-find.
    std::vector<std::size_t> parent(m + n);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t a) {
      while (parent[a] != a) a = parent[a] = parent[parent[a]];
      return a;
    };
    bool tree = true;
    for (std::size_t q : idx) {
      const std::size_t a = find(q / n), b = find(m + q % n);
      if (a == b) {
        tree = false;
        break;
      }
      parent[a] = b;
    }
    if (tree) {
      // Solve the tree flows by repeatedly peeling leaves.
      std::vector<Scalar> rs = supply, cs = demand;
      std::vector<char> used(pick, 0);
      std::vector<Scalar> flow(pick);
      bool feasible = true;
      for (std::size_t round = 0; round < pick; ++round) {
        std::vector<std::size_t> deg(m + n, 0);
        for (std::size_t q = 0; q < pick; ++q)
          if (!used[q]) {
            ++deg[idx[q] / n];
            ++deg[m + idx[q] % n];
          }
        bool peeled = false;
        for (std::size_t q = 0; q < pick && !peeled; ++q) {
          if (used[q]) continue;
          const std::size_t r = idx[q] / n, c = idx[q] % n;
          if (deg[r] == 1) {
            flow[q] = rs[r];
            rs[r] -= flow[q];
            cs[c] -= flow[q];
          } else if (deg[m + c] == 1) {
            flow[q] = cs[c];
            rs[r] -= flow[q];
            cs[c] -= flow[q];
          } else {
            continue;
          }
          used[q] = 1;
          peeled = true;
          if (flow[q] < -tol) feasible = false;
        }
        if (!peeled || !feasible) {
          feasible = false;
          break;
        }
      }
      if (feasible) {
        Scalar c{};
        for (std::size_t q = 0; q < pick; ++q) c += flow[q] * cost[idx[q]];
        if (!have || c < best) {
          best = c;
          have = true;
        }
      }
    }
    // Next combination.
    std::size_t pos = pick;
    while (pos > 0 && idx[pos - 1] == cells - pick + (pos - 1)) --pos;
    if (pos == 0) break;
    ++idx[pos - 1];
    for (std::size_t q = pos; q < pick; ++q) idx[q] = idx[q - 1] + 1;
  }
  if (!have) throw Error(ErrorKind::SolverFailure, "no feasible vertex found");
  return best;
}

}  // namespace cdkn

#endif  // CDKN_TRANSPORT_LP_HPP
