#ifndef CDKN_POINCARE_HPP
#define CDKN_POINCARE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <map>
#include <mutex>
#include <random>
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
#include "cdkn/transport_lp.hpp"

namespace cdkn {

/// A real function on the points of a space.
class ScalarField {
 public:
  ScalarField() = default;
  explicit ScalarField(std::vector<double> values) : values_(std::move(values)) {
    for (double v : values_)
      if (!std::isfinite(v)) throw Error(ErrorKind::Domain, "scalar field entries must be finite");
  }

  std::size_t size() const noexcept { return values_.size(); }
  double operator[](PointIndex p) const { return values_[p]; }
  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

struct UpperGradient {
  std::vector<double> g;
  std::size_t certified_k = 0;
  double certified_eps_geo = 0.0;
  double scale = 1.0;  // factor applied to the raw slope
  bool exhaustive = false;  // certified on every chain of every pair
};

/// Integral of g along the sub-chain p_first, ..., p_last, read as a
/// constant-speed curve of length d(p_first, p_last): that length times the
/// trapezoid mean of g over the nodes.
inline double chain_gradient_integral(const FiniteMetricMeasureSpace& space, const GeodesicChain& chain,
                                      std::span<const double> g, std::size_t first, std::size_t last) {
  if (last <= first) return 0.0;
  double trap = 0.0;
  for (std::size_t i = first; i < last; ++i) trap += 0.5 * (g[chain.nodes[i]] + g[chain.nodes[i + 1]]);
  return space.dist(chain.nodes[first], chain.nodes[last]) * trap / static_cast<double>(last - first);
}

inline double chain_gradient_integral(const FiniteMetricMeasureSpace& space, const GeodesicChain& chain,
                                      std::span<const double> g) {
  return chain_gradient_integral(space, chain, g, 0, chain.resolution());
}

/// Slope radius covering one chain step: 2h + diam / k.
inline double default_slope_radius(const FiniteMetricMeasureSpace& space, std::size_t k) {
  return 2.0 * space.min_positive_distance() + space.diameter() / static_cast<double>(k);
}

struct UpperGradientCheck {
  bool ok = true;
  double worst_excess = -std::numeric_limits<double>::infinity();  // |du| - l * int g
  GeodesicChain worst_chain;
  double worst_ratio = 0.0;  // max |du| / int g over the checked chains
  std::size_t chains_checked = 0;
  bool exhaustive = true;
};

struct UpperGradientOptions {
  std::size_t chain_cap = 64;   // chains per endpoint pair
  std::size_t pair_limit = 20000;  // beyond this many ordered pairs, a seeded sample is checked
  std::uint64_t seed = 0;
  double tol = 1e-9;
};

/// Checks |u(p_0) - u(p_k)| <= l(gamma) (1/k) sum (g(p_i) + g(p_{i+1}))/2 on
/// the chains of every ordered pair, or of a seeded sample of pairs.
inline UpperGradientCheck verify_upper_gradient(const FiniteMetricMeasureSpace& space, const ScalarField& u,
                                                std::span<const double> g, std::size_t k, double eps_geo,
                                                const UpperGradientOptions& options = {}) {
  const std::size_t n = space.size();
  if (u.size() != n || g.size() != n) throw Error(ErrorKind::Domain, "field sizes do not match the space");
  std::vector<std::pair<PointIndex, PointIndex>> pairs;
  for (PointIndex x = 0; x < n; ++x)
    for (PointIndex y = 0; y < n; ++y)
      if (x != y) pairs.emplace_back(x, y);
  UpperGradientCheck out;
  if (pairs.size() > options.pair_limit) {
    std::mt19937_64 rng(options.seed);
    std::shuffle(pairs.begin(), pairs.end(), rng);
    pairs.resize(options.pair_limit);
    out.exhaustive = false;
  }
  std::mutex mu;
  parallel_for(pairs.size(), [&](std::size_t i) {
    const auto [x, y] = pairs[i];
    const auto set = enumerate_chains(space, x, y, k, eps_geo, options.chain_cap);
    double worst = -std::numeric_limits<double>::infinity(), ratio = 0.0;
    const GeodesicChain* worst_chain = nullptr;
    for (const auto& ch : set.chains) {
      const double du = std::abs(u[ch.front()] - u[ch.back()]);
      const double ig = chain_gradient_integral(space, ch, g);
      const double excess = du - ig;
      if (du > 0.0) ratio = std::max(ratio, ig > 0.0 ? du / ig : std::numeric_limits<double>::infinity());
      if (excess > worst) {
        worst = excess;
        worst_chain = &ch;
      }
    }
    std::lock_guard lock(mu);
    out.chains_checked += set.chains.size();
    out.worst_ratio = std::max(out.worst_ratio, ratio);
    if (set.truncated) out.exhaustive = false;
    if (worst_chain && worst > out.worst_excess) {
      out.worst_excess = worst;
      out.worst_chain = *worst_chain;
    }
  });
  out.ok = !(out.worst_excess > options.tol * std::max(1.0, space.diameter()));
  return out;
}

/// g(p) = c max |u(p) - u(q)| / d(p, q) over q != p with d(p, q) <= neighbor_radius,
/// certified against chains at resolution k. The factor c >= 1 is the least
/// one making the slope an upper gradient on every checked chain; it exceeds 1
/// only where chains are not exactly constant speed (lattice rounding).
inline UpperGradient slope_gradient(const FiniteMetricMeasureSpace& space, const ScalarField& u, double neighbor_radius,
                                    std::size_t k = 8, double eps_geo = 0.0,
                                    const UpperGradientOptions& options = {}) {
  if (!(neighbor_radius > 0.0)) throw Error(ErrorKind::Domain, "neighbor radius must be positive");
  if (u.size() != space.size()) throw Error(ErrorKind::Domain, "field size does not match the space");
  UpperGradient ug;
  ug.g.assign(space.size(), 0.0);
  for (PointIndex p = 0; p < space.size(); ++p)
    for (PointIndex q = 0; q < space.size(); ++q) {
      const double d = space.dist(p, q);
      if (q == p || d > neighbor_radius) continue;
      ug.g[p] = std::max(ug.g[p], std::abs(u[p] - u[q]) / d);
    }
  auto check = verify_upper_gradient(space, u, ug.g, k, eps_geo, options);
  if (!check.ok && std::isfinite(check.worst_ratio)) {
    ug.scale = check.worst_ratio * (1.0 + 1e-12);
    for (double& v : ug.g) v *= ug.scale;
    check = verify_upper_gradient(space, u, ug.g, k, eps_geo, options);
  }
  if (!check.ok) {
    std::ostringstream os;
    os << "slope gradient fails on chain " << check.worst_chain.front() << " -> " << check.worst_chain.back()
       << " by " << check.worst_excess;
    throw Error(ErrorKind::NotAnUpperGradient, os.str());
  }
  ug.certified_k = k;
  ug.certified_eps_geo = eps_geo;
  ug.exhaustive = check.exhaustive;
  return ug;
}

/// Equal-mass split of a ball at the median of u. Points of the level set
/// u = M may be shared between the halves.
struct MedianSplit {
  Ball ball;
  double median = 0.0;
  std::vector<double> plus_weight;   // per point, in [0, 1]; zero outside the ball
  std::vector<double> minus_weight;  // plus + minus = 1 on the ball
  Rational level_fraction;           // share of each level-set point sent to B+
  Rational plus_mass_exact, minus_mass_exact;
  double plus_mass = 0.0;
  double minus_mass = 0.0;

  ProbMeasure plus_measure(const FiniteMetricMeasureSpace& space) const {
    std::vector<double> w(space.size(), 0.0);
    for (auto p : ball.members) w[p] = plus_weight[p] * space.mass(p);
    return ProbMeasure::normalized(std::move(w));
  }
  ProbMeasure minus_measure(const FiniteMetricMeasureSpace& space) const {
    std::vector<double> w(space.size(), 0.0);
    for (auto p : ball.members) w[p] = minus_weight[p] * space.mass(p);
    return ProbMeasure::normalized(std::move(w));
  }
};

/// M = inf{a : m({u > a} n B) <= m(B)/2}, with the level set split so both
/// halves carry exactly m(B)/2 (masses compared in rational arithmetic).
inline MedianSplit median_split(const FiniteMetricMeasureSpace& space, const ScalarField& u, const Ball& b) {
  if (b.members.empty() || !(b.mass > 0.0)) throw Error(ErrorKind::Domain, "median split needs a ball of positive mass");
  if (u.size() != space.size()) throw Error(ErrorKind::Domain, "field size does not match the space");
  MedianSplit ms;
  ms.ball = b;
  Rational total{0};
  for (auto p : b.members) total += Rational(space.mass(p));
  const Rational half = total / 2;

  std::vector<double> values;
  for (auto p : b.members) values.push_back(u[p]);
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  auto mass_above = [&](double a) {
    Rational m{0};
    for (auto p : b.members)
      if (u[p] > a) m += Rational(space.mass(p));
    return m;
  };
  // m(u > a) is a right-continuous step function, so the infimum is a value of u.
  std::size_t lo = 0, hi = values.size() - 1;
  while (lo < hi) {
    const std::size_t mid = (lo + hi) / 2;
    if (mass_above(values[mid]) <= half)
      hi = mid;
    else
      lo = mid + 1;
  }
  ms.median = values[lo];
  const Rational above = mass_above(ms.median);
  Rational level{0};
  for (auto p : b.members)
    if (u[p] == ms.median) level += Rational(space.mass(p));
  ms.level_fraction = (half - above) / level;
  const double frac = ScalarTraits<Rational>::to_double(ms.level_fraction);

  ms.plus_weight.assign(space.size(), 0.0);
  ms.minus_weight.assign(space.size(), 0.0);
  ms.plus_mass_exact = 0;
  ms.minus_mass_exact = 0;
  for (auto p : b.members) {
    const Rational mp(space.mass(p));
    if (u[p] > ms.median) {
      ms.plus_weight[p] = 1.0;
      ms.plus_mass_exact += mp;
    } else if (u[p] < ms.median) {
      ms.minus_weight[p] = 1.0;
      ms.minus_mass_exact += mp;
    } else {
      ms.plus_weight[p] = frac;
      ms.minus_weight[p] = 1.0 - frac;
      ms.plus_mass_exact += mp * ms.level_fraction;
      ms.minus_mass_exact += mp * (1 - ms.level_fraction);
    }
  }
  ms.plus_mass = ScalarTraits<Rational>::to_double(ms.plus_mass_exact);
  ms.minus_mass = ScalarTraits<Rational>::to_double(ms.minus_mass_exact);
  return ms;
}

/// One link of the proof's chain of inequalities, evaluated.
struct InequalityStep {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  bool equality = false;  // the link is an identity rather than an inequality
  bool holds = false;
};

struct PoincareCertificate {
  PointIndex center = 0;
  double radius = 0.0;
  double ball_mass = 0.0;
  double dilation = 2.0;
  double dilated_mass = 0.0;
  double ratio = 0.0;
  double constant = 0.0;
  bool pass = false;
  std::string provenance;
  std::string form;  // "average" (N < inf) or "integral" (N = inf)
  std::vector<InequalityStep> steps;
  bool steps_hold = true;
  double density_bound = 0.0;
  double worst_density = 0.0;
  bool density_ok = false;
  bool chains_inside = true;     // inside B(x, lambda r)
  double max_curve_length = 0.0;  // strong form: longest concatenated curve
  std::vector<double> piece_density;  // strong form: sup density of pi1, pi3, pi2
};

namespace poincare_detail {

inline InequalityStep step(std::string name, double lhs, double rhs, bool equality, double tol) {
  const double slack = tol * std::max({1.0, std::abs(lhs), std::abs(rhs)});
  const bool ok = equality ? std::abs(lhs - rhs) <= slack : lhs <= rhs + slack;
  return {std::move(name), lhs, rhs, equality, ok};
}

inline double ball_integral(const FiniteMetricMeasureSpace& space, const Ball& b, std::span<const double> f) {
  double s = 0.0;
  for (auto p : b.members) s += f[p] * space.mass(p);
  return s;
}

inline double mean_oscillation(const FiniteMetricMeasureSpace& space, const Ball& b, const ScalarField& u) {
  double mean = 0.0;
  for (auto p : b.members) mean += u[p] * space.mass(p);
  mean /= b.mass;
  double osc = 0.0;
  for (auto p : b.members) osc += std::abs(u[p] - mean) * space.mass(p);
  return osc;
}

inline double pair_oscillation(const FiniteMetricMeasureSpace& space, const Ball& b, const ScalarField& u) {
  double s = 0.0;
  for (auto p : b.members)
    for (auto q : b.members) s += std::abs(u[p] - u[q]) * space.mass(p) * space.mass(q);
  return s / b.mass;
}

inline double median_deviation(const FiniteMetricMeasureSpace& space, const Ball& b, const ScalarField& u, double m) {
  double s = 0.0;
  for (auto p : b.members) s += std::abs(u[p] - m) * space.mass(p);
  return s;
}

// Sum over grid steps of trapezoid time weights times g integrated against mu_t.
inline double time_integral(const FiniteMetricMeasureSpace& space, const DynamicalPlan& plan,
                            std::span<const double> g, std::size_t first, std::size_t last) {
  double s = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    const double w = (i == first || i == last) ? 0.5 : 1.0;
    const auto mu = interpolate_step(plan, i);
    double inner = 0.0;
    for (PointIndex p = 0; p < space.size(); ++p) inner += g[p] * mu[p];
    s += w * inner;
  }
  return s / static_cast<double>(plan.resolution);
}

inline DynamicalPlan plan_to_point(const FiniteMetricMeasureSpace& space, const ProbMeasure& mu, PointIndex target,
                                   std::size_t k, double eps_geo) {
  Coupling c;
  c.n = space.size();
  for (auto p : mu.support()) c.cells.push_back({p, target, mu[p]});
  return lift_coupling(space, c, k, eps_geo);
}

inline double max_density(const FiniteMetricMeasureSpace& space, const DynamicalPlan& plan, std::size_t first,
                          std::size_t last) {
  double worst = 0.0;
  for (std::size_t i = first; i <= last; ++i) {
    const auto mu = interpolate_step(plan, i);
    for (PointIndex p = 0; p < space.size(); ++p) worst = std::max(worst, mu[p] / space.mass(p));
  }
  return worst;
}

}  // namespace poincare_detail

/// Weak local Poincare constant: 4 e^{|K| r^2} in
/// integral form for N = inf, 2^{N+2} e^{sqrt((N-1)|K|) 2r} in average form.
inline double weak_poincare_constant(const DistortionParams& params, double r) {
  if (std::isinf(params.N)) return 4.0 * std::exp(std::abs(params.K) * r * r);
  return std::pow(2.0, params.N + 2.0) * std::exp(std::sqrt((params.N - 1.0) * std::abs(params.K)) * 2.0 * r);
}

struct PoincareOptions {
  double tol = 1e-9;           // certificate pass slack: ratio <= constant (1 + tol)
  double step_tol = 1e-9;      // slack for the individual proof steps
  double density_tol = 1e-9;   // slack for the density bounds
};

/// Runs the median-split argument on one ball: split, transport B+ to B- along
/// an optimal plan, bound its densities, and evaluate each link
///   int|u-<u>| <= (1/m(B)) iint|u(x)-u(y)| <= 2 int|u-M| = m(B) int|u(g0)-u(g1)| dpi
///     <= m(B) int l(g) int g dt dpi <= 2r m(B) int int g dt dpi = 2r m(B) int_t int g rho_t
///     <= 2r m(B) sup rho int_{B(x,2r)} g <= (4r / L) int_{B(x,2r)} g.
inline PoincareCertificate certify_weak_poincare(const FiniteMetricMeasureSpace& space, const Ball& b,
                                                 const DistortionParams& params, const ScalarField& u,
                                                 std::span<const double> g, std::size_t k, double eps_geo,
                                                 const PoincareOptions& options = {}) {
  using namespace poincare_detail;
  if (params.K > 0.0) throw Error(ErrorKind::UnsupportedCurvature, "Poincare certificates are stated for K <= 0");
  const double r = b.radius;
  PoincareCertificate cert;
  cert.center = b.center;
  cert.radius = r;
  cert.ball_mass = b.mass;
  cert.dilation = 2.0;
  cert.provenance = "median split, optimal plan B+ -> B-";
  cert.form = std::isinf(params.N) ? "integral" : "average";
  const Ball big = ball(space, b.center, 2.0 * r);
  cert.dilated_mass = big.mass;

  const auto ms = median_split(space, u, b);
  auto plan = optimal_dynamical_plan(space, ms.plus_measure(space), ms.minus_measure(space), k, eps_geo);

  const double i1 = mean_oscillation(space, b, u);
  const double i2 = pair_oscillation(space, b, u);
  const double i3 = 2.0 * median_deviation(space, b, u, ms.median);
  double du = 0.0, lg = 0.0, rg = 0.0;
  for (const auto& e : plan.entries) {
    const double d = std::abs(u[e.chain.front()] - u[e.chain.back()]);
    const double li = chain_gradient_integral(space, e.chain, g);
    if (d > li + options.step_tol * std::max(1.0, d)) {
      std::ostringstream os;
      os << "g fails the upper-gradient bound on plan chain " << e.chain.front() << " -> " << e.chain.back();
      throw Error(ErrorKind::NotAnUpperGradient, os.str());
    }
    du += e.weight * d;
    lg += e.weight * li;
    rg += e.weight * (e.chain.span > 0.0 ? li / e.chain.span : 0.0);
    for (auto p : e.chain.nodes)
      if (!big.contains(p)) cert.chains_inside = false;
  }
  const double i4 = b.mass * du;
  const double i5 = b.mass * lg;
  const double i6 = 2.0 * r * b.mass * rg;
  const double i7 = 2.0 * r * b.mass * time_integral(space, plan, g, 0, k);
  const double g_big = ball_integral(space, big, g);
  const double rho_max = max_density(space, plan, 0, k);
  const double i8 = 2.0 * r * b.mass * rho_max * g_big;
  const double L = beta_lower_bound(params, 2.0 * r);
  const double i9 = 4.0 * r / L * g_big;

  const double tol = options.step_tol;
  cert.steps.push_back(step("mean oscillation <= pair oscillation", i1, i2, false, tol));
  cert.steps.push_back(step("pair oscillation <= 2 median deviation", i2, i3, false, tol));
  cert.steps.push_back(step("2 median deviation = m(B) plan oscillation", i3, i4, true, 1e-9));
  cert.steps.push_back(step("plan oscillation <= upper-gradient integral", i4, i5, false, tol));
  cert.steps.push_back(step("length bound l <= 2r", i5, i6, false, tol));
  cert.steps.push_back(step("chain integral = time integral of densities", i6, i7, true, 1e-9));
  cert.steps.push_back(step("time integral <= sup density times dilated integral", i7, i8, false, tol));
  cert.steps.push_back(step("sup density <= 2 / (m(B) L)", i8, i9, false, options.density_tol));
  for (const auto& s : cert.steps) cert.steps_hold = cert.steps_hold && s.holds;

  cert.density_bound = 2.0 / (b.mass * L);
  cert.worst_density = rho_max;
  cert.density_ok = rho_max <= cert.density_bound * (1.0 + options.density_tol);
  cert.max_curve_length = 0.0;
  for (const auto& e : plan.entries) cert.max_curve_length = std::max(cert.max_curve_length, e.chain.span);

  cert.constant = weak_poincare_constant(params, r);
  const double denom = std::isinf(params.N) ? r * g_big : r * g_big / big.mass;
  const double numer = std::isinf(params.N) ? i1 : i1 / b.mass;
  cert.ratio = denom > 0.0 ? numer / denom : (numer > 0.0 ? kInfinity : 0.0);
  cert.pass = cert.ratio <= cert.constant * (1.0 + options.tol);
  return cert;
}

/// Strong form with lambda = 1: both halves are contracted halfway to the
/// center, the half-time measures are joined by an optimal plan, and the
/// three pieces replace the single plan of the weak argument. Densities of
/// every piece are compared with 2^{N+1} / m(B).
inline PoincareCertificate certify_strong_poincare(const FiniteMetricMeasureSpace& space, const Ball& b, double n,
                                                   const ScalarField& u, std::span<const double> g, std::size_t k,
                                                   double eps_geo, const PoincareOptions& options = {}) {
  using namespace poincare_detail;
  if (b.center >= space.size()) throw Error(ErrorKind::Domain, "ball center is not a point of the space");
  if (k % 2 != 0) throw Error(ErrorKind::OffGridTime, "the strong construction needs an even resolution");
  if (!(n >= 1.0) || std::isinf(n)) throw Error(ErrorKind::Domain, "the strong form needs a finite N >= 1");
  const double r = b.radius;
  const std::size_t h = k / 2;
  PoincareCertificate cert;
  cert.center = b.center;
  cert.radius = r;
  cert.ball_mass = b.mass;
  cert.dilation = 1.0;
  cert.dilated_mass = b.mass;
  cert.provenance = "three-piece curve through the center";
  cert.form = "average";

  const auto ms = median_split(space, u, b);
  const auto plus = ms.plus_measure(space), minus = ms.minus_measure(space);
  const auto p1 = plan_to_point(space, plus, b.center, k, eps_geo);
  const auto p2 = plan_to_point(space, minus, b.center, k, eps_geo);
  const auto mid1 = interpolate_step(p1, h), mid2 = interpolate_step(p2, h);
  const auto p3 = optimal_dynamical_plan(space, mid1, mid2, k, eps_geo);

  for (const auto* plan : {&p1, &p2, &p3}) {
    const std::size_t last = plan == &p3 ? k : h;
    for (const auto& e : plan->entries)
      for (std::size_t i = 0; i <= last; ++i)
        if (!b.contains(e.chain.nodes[i])) {
          std::ostringstream os;
          os << "chain " << e.chain.front() << " -> " << e.chain.back() << " leaves the ball at node " << i;
          throw Error(ErrorKind::InsideBallViolation, os.str());
        }
  }

  // Piecewise oscillation and gradient integrals. A half chain is read as its
  // own constant-speed curve from p_0 to p_{k/2}.
  auto piece = [&](const DynamicalPlan& plan, std::size_t last, double& du, double& ug, double& lmax) {
    for (const auto& e : plan.entries) {
      const double d = std::abs(u[e.chain.front()] - u[e.chain.nodes[last]]);
      const double li = chain_gradient_integral(space, e.chain, g, 0, last);
      if (d > li + options.step_tol * std::max(1.0, d)) {
        std::ostringstream os;
        os << "g fails the upper-gradient bound on piece " << e.chain.front() << " -> " << e.chain.nodes[last];
        throw Error(ErrorKind::NotAnUpperGradient, os.str());
      }
      du += e.weight * d;
      ug += e.weight * li;
      lmax = std::max(lmax, space.dist(e.chain.front(), e.chain.nodes[last]));
    }
  };
  double du1 = 0, du2 = 0, du3 = 0, ug1 = 0, ug2 = 0, ug3 = 0, l1 = 0, l2 = 0, l3 = 0;
  piece(p1, h, du1, ug1, l1);
  piece(p2, h, du2, ug2, l2);
  piece(p3, k, du3, ug3, l3);
  cert.max_curve_length = l1 + l3 + l2;

  const double s1 = mean_oscillation(space, b, u);
  const double s2 = 2.0 * median_deviation(space, b, u, ms.median);
  double split_dev = 0.0;
  for (auto p : plus.support()) split_dev += plus[p] * std::abs(u[p] - ms.median);
  for (auto p : minus.support()) split_dev += minus[p] * std::abs(u[p] - ms.median);
  const double s3 = b.mass * split_dev;
  const double s4 = b.mass * (du1 + du3 + du2);
  const double s5 = b.mass * (ug1 + ug3 + ug2);
  const double s6 = r * b.mass *
                    (time_integral(space, p1, g, 0, h) + time_integral(space, p3, g, 0, k) +
                     time_integral(space, p2, g, 0, h));
  cert.piece_density = {max_density(space, p1, 0, h), max_density(space, p3, 0, k), max_density(space, p2, 0, h)};
  const double rho_max = *std::max_element(cert.piece_density.begin(), cert.piece_density.end());
  const double g_ball = ball_integral(space, b, g);
  const double s7 = r * b.mass * rho_max * 2.0 * g_ball;
  const double bound = std::pow(2.0, n + 1.0) / b.mass;
  const double s8 = std::pow(2.0, n + 2.0) * r * g_ball;

  const double tol = options.step_tol;
  cert.steps.push_back(step("mean oscillation <= 2 median deviation", s1, s2, false, tol));
  cert.steps.push_back(step("2 median deviation = m(B) split deviation", s2, s3, true, 1e-9));
  cert.steps.push_back(step("split deviation <= sum of piece oscillations", s3, s4, false, tol));
  cert.steps.push_back(step("piece oscillations <= upper-gradient integrals", s4, s5, false, tol));
  cert.steps.push_back(step("piece lengths <= r: gradient integrals <= r times density integrals", s5, s6, false, tol));
  cert.steps.push_back(step("density integrals <= sup density times 2 int_B g", s6, s7, false, tol));
  cert.steps.push_back(step("sup density <= 2^{N+1} / m(B)", s7, s8, false, options.density_tol));
  for (const auto& s : cert.steps) cert.steps_hold = cert.steps_hold && s.holds;

  cert.density_bound = bound;
  cert.worst_density = rho_max;
  cert.density_ok = rho_max <= bound * (1.0 + options.density_tol);
  cert.constant = std::pow(2.0, n + 2.0);
  const double denom = r * g_ball / b.mass;
  const double numer = s1 / b.mass;
  cert.ratio = denom > 0.0 ? numer / denom : (numer > 0.0 ? kInfinity : 0.0);
  cert.pass = cert.ratio <= cert.constant * (1.0 + options.tol);
  return cert;
}

struct BallSpec {
  PointIndex center = 0;
  double radius = 0.0;
};

struct NamedField {
  std::string name;
  ScalarField u;
};

/// The documented test suite: distance functions to three anchor points,
/// seeded random 1-Lipschitz fields min_a (v_a + d(., a)) over five random
/// anchors, and smoothed steps clamp((d(., x0) - R) / w, 0, 1).
inline std::vector<NamedField> default_function_suite(const FiniteMetricMeasureSpace& space, std::uint64_t seed,
                                                      std::size_t random_fields = 3) {
  const std::size_t n = space.size();
  const double diam = space.diameter();
  const double h = space.min_positive_distance();
  std::vector<NamedField> suite;
  for (PointIndex a : {PointIndex{0}, n / 2, n - 1}) {
    std::vector<double> v(n);
    for (PointIndex p = 0; p < n; ++p) v[p] = space.dist(p, a);
    suite.push_back({"distance(" + space.id(a) + ")", ScalarField(std::move(v))});
  }
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<PointIndex> pick(0, n - 1);
  std::uniform_real_distribution<double> val(0.0, 1.0);
  for (std::size_t f = 0; f < random_fields; ++f) {
    std::vector<std::pair<PointIndex, double>> anchors;
    for (int a = 0; a < 5; ++a) anchors.emplace_back(pick(rng), val(rng) * diam);
    std::vector<double> v(n);
    for (PointIndex p = 0; p < n; ++p) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& [q, off] : anchors) best = std::min(best, off + space.dist(p, q));
      v[p] = best;
    }
    suite.push_back({"lipschitz#" + std::to_string(f), ScalarField(std::move(v))});
  }
  for (PointIndex a : {PointIndex{0}, n / 2}) {
    const double R = diam / 4.0, w = 2.0 * h;
    std::vector<double> v(n);
    for (PointIndex p = 0; p < n; ++p) v[p] = std::clamp((space.dist(p, a) - R) / w, 0.0, 1.0);
    suite.push_back({"step(" + space.id(a) + ")", ScalarField(std::move(v))});
  }
  return suite;
}

struct SweepOptions {
  double neighbor_radius = 0.0;  // 0: default_slope_radius
  PoincareOptions poincare;
  UpperGradientOptions gradient;
  bool verify_gradients = true;
};

struct SweepEntry {
  std::size_t ball_index = 0;
  std::string function;
  PoincareCertificate certificate;
};

struct SweepResult {
  std::vector<SweepEntry> entries;
  std::vector<double> worst_ratio_per_ball;
  double worst_ratio = 0.0;
  double worst_normalized = 0.0;  // max ratio / constant
  bool all_pass = true;
};

/// certify_weak_poincare over every (ball, function) pair with slope gradients.
inline SweepResult poincare_sweep(const FiniteMetricMeasureSpace& space, const DistortionParams& params,
                                  const std::vector<BallSpec>& balls, const std::vector<NamedField>& suite,
                                  std::size_t k, double eps_geo, const SweepOptions& options = {}) {
  SweepResult res;
  res.worst_ratio_per_ball.assign(balls.size(), 0.0);
  if (balls.empty() || suite.empty()) return res;
  const double radius =
      options.neighbor_radius > 0.0 ? options.neighbor_radius : default_slope_radius(space, k);
  std::vector<UpperGradient> grads(suite.size());
  for (std::size_t f = 0; f < suite.size(); ++f) {
    auto gopt = options.gradient;
    if (!options.verify_gradients) gopt.pair_limit = 0;
    grads[f] = slope_gradient(space, suite[f].u, radius, k, eps_geo, gopt);
  }
  std::vector<SweepEntry> entries(balls.size() * suite.size());
  parallel_for(entries.size(), [&](std::size_t i) {
    const std::size_t bi = i / suite.size(), f = i % suite.size();
    const Ball b = ball(space, balls[bi].center, balls[bi].radius);
    entries[i] = {bi, suite[f].name,
                  certify_weak_poincare(space, b, params, suite[f].u, grads[f].g, k, eps_geo, options.poincare)};
  });
  for (auto& e : entries) {
    const auto& c = e.certificate;
    res.worst_ratio_per_ball[e.ball_index] = std::max(res.worst_ratio_per_ball[e.ball_index], c.ratio);
    res.worst_ratio = std::max(res.worst_ratio, c.ratio);
    res.worst_normalized = std::max(res.worst_normalized, c.ratio / c.constant);
    res.all_pass = res.all_pass && c.pass;
    res.entries.push_back(std::move(e));
  }
  return res;
}

}  // namespace cdkn

#endif  // CDKN_POINCARE_HPP
