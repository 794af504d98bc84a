#ifndef CDKN_ENTROPY_HPP
#define CDKN_ENTROPY_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include "cdkn/errors.hpp"
#include "cdkn/mms.hpp"
#include "cdkn/transport.hpp"

namespace cdkn {

inline constexpr double kInfinity = std::numeric_limits<double>::infinity();

/// Integrand families used as displacement-convexity test functionals:
///   Renyi(N):     F(r) = -r^(1-1/N),  F'(inf) = 0
///   Shannon:      F(r) = r log r,     F'(inf) = inf
///   PowerTest(p): F(r) = r^p,         F'(inf) = inf for p > 1 (1 for p = 1)
/// F(0) = 0 throughout (0 log 0 = 0).
class EntropySpec {
 public:
  enum class Kind { Renyi, Shannon, PowerTest };

  static EntropySpec renyi(double n) {
    if (!(n >= 1.0) || !std::isfinite(n)) throw Error(ErrorKind::Domain, "Renyi entropy needs N in [1, inf)");
    return EntropySpec(Kind::Renyi, n);
  }
  static EntropySpec shannon() { return EntropySpec(Kind::Shannon, kInfinity); }
  static EntropySpec power(double p) {
    if (!(p >= 1.0) || !(p <= 64.0)) throw Error(ErrorKind::Domain, "power test exponent must lie in [1, 64]");
    return EntropySpec(Kind::PowerTest, p);
  }
  /// Renyi(N) for finite N, Shannon for N = inf.
  static EntropySpec critical(double n) { return std::isinf(n) ? shannon() : renyi(n); }

  Kind kind() const noexcept { return kind_; }
  double parameter() const noexcept { return param_; }

  double F(double r) const {
    if (r <= 0.0) return 0.0;
    switch (kind_) {
      case Kind::Renyi: return -std::pow(r, 1.0 - 1.0 / param_);
      case Kind::Shannon: return r * std::log(r);
      case Kind::PowerTest: return std::pow(r, param_);
    }
    return 0.0;
  }

  double derivative_at_infinity() const {
    switch (kind_) {
      case Kind::Renyi: return 0.0;
      case Kind::Shannon: return kInfinity;
      case Kind::PowerTest: return param_ > 1.0 ? kInfinity : 1.0;
    }
    return 0.0;
  }

  /// (beta / rho) F(rho / beta) for rho > 0, the integrand of the distorted
  /// convexity bound. beta = inf is taken as the limit, lim_{s->0} F(s)/s.
  double distorted_term(double rho, double beta) const {
    if (std::isinf(beta)) {
      switch (kind_) {
        case Kind::Renyi: return -kInfinity;
        case Kind::Shannon: return -kInfinity;
        case Kind::PowerTest: return param_ > 1.0 ? 0.0 : 1.0;
      }
    }
    const double s = rho / beta;
    switch (kind_) {
      case Kind::Renyi: return -std::pow(s, -1.0 / param_);
      case Kind::Shannon: return std::log(s);
      case Kind::PowerTest: return std::pow(s, param_ - 1.0);
    }
    return 0.0;
  }

  std::string name() const {
    std::ostringstream os;
    switch (kind_) {
      case Kind::Renyi: os << "renyi(" << param_ << ")"; break;
      case Kind::Shannon: os << "shannon"; break;
      case Kind::PowerTest: os << "power(" << param_ << ")"; break;
    }
    return os.str();
  }

  friend bool operator==(const EntropySpec&, const EntropySpec&) = default;

 private:
  EntropySpec(Kind k, double p) : kind_(k), param_(p) {}
  Kind kind_;
  double param_;
};

/// sum_i F(rho_i) m_i. No singular part exists on a full-support finite space.
inline double evaluate_entropy(const EntropySpec& spec, const ProbMeasure& mu, const FiniteMetricMeasureSpace& space) {
  double total = 0.0;
  for (PointIndex i = 0; i < space.size(); ++i) {
    if (mu[i] <= 0.0) continue;
    total += spec.F(mu[i] / space.mass(i)) * space.mass(i);
  }
  return total;
}

namespace entropy_detail {

// f(b) <= interpolation of f(a), f(c) for every consecutive triple.
inline bool three_point_convex(std::span<const double> xs, std::span<const double> fs, double tol) {
  for (std::size_t i = 0; i + 2 < xs.size(); ++i) {
    const double a = xs[i], b = xs[i + 1], c = xs[i + 2];
    const double chord = ((c - b) * fs[i] + (b - a) * fs[i + 2]) / (c - a);
    const double scale = std::max({1.0, std::abs(fs[i]), std::abs(fs[i + 1]), std::abs(fs[i + 2])});
    if (fs[i + 1] > chord + tol * scale) return false;
  }
  return true;
}

}  // namespace entropy_detail

/// Grid test of F in DC_N: F(0) = 0, F convex on {0} u grid, and the
/// dimensional transform convex on the grid. The transform is
/// lambda -> lambda^N F(lambda^-N) for finite N, with lambda taken from the
/// grid, and lambda -> e^lambda F(e^-lambda) for N = inf, with lambda = log s
/// for each grid sample s.
inline bool check_dc_membership(const EntropySpec& spec, double n, std::span<const double> grid, double tol = 1e-9) {
  if (grid.size() < 3) throw Error(ErrorKind::Domain, "membership grid needs at least 3 samples");
  if (!(n >= 1.0)) throw Error(ErrorKind::Domain, "dimension N must be at least 1");
  std::vector<double> xs(grid.begin(), grid.end());
  std::sort(xs.begin(), xs.end());
  for (double x : xs)
    if (!(x > 0.0)) throw Error(ErrorKind::Domain, "membership grid must be positive");
  if (spec.F(0.0) != 0.0) return false;

  std::vector<double> rs{0.0};
  rs.insert(rs.end(), xs.begin(), xs.end());
  std::vector<double> fr;
  for (double r : rs) fr.push_back(spec.F(r));
  if (!entropy_detail::three_point_convex(rs, fr, tol)) return false;

  std::vector<double> lam, fl;
  for (double s : xs) {
    if (std::isinf(n)) {
      const double l = std::log(s);
      lam.push_back(l);
      fl.push_back(std::exp(l) * spec.F(std::exp(-l)));
    } else {
      lam.push_back(s);
      fl.push_back(std::pow(s, n) * spec.F(std::pow(s, -n)));
    }
  }
  return entropy_detail::three_point_convex(lam, fl, tol);
}

struct DistortionParams {
  double K = 0.0;
  double N = kInfinity;  // in [1, inf]
};

namespace entropy_detail {

// log(sinh(x)) without overflow, x > 0.
inline double log_sinh(double x) {
  if (x < 20.0) return std::log(std::sinh(x));
  return x + std::log1p(-std::exp(-2.0 * x)) - std::numbers::ln2;
}

}  // namespace entropy_detail

/// Distortion coefficient beta_t for points at distance d. t = 0 is the limit
/// t -> 0 of the ratio formulas.
inline double beta_coefficient(double t, double d, const DistortionParams& params) {
  if (!(t >= 0.0 && t <= 1.0)) throw Error(ErrorKind::Domain, "beta needs t in [0, 1]");
  if (!(d >= 0.0)) throw Error(ErrorKind::Domain, "beta needs a non-negative distance");
  if (!(params.N >= 1.0)) throw Error(ErrorKind::Domain, "beta needs N >= 1");
  const double K = params.K, N = params.N;
  if (std::isinf(N)) return std::exp(K * (1.0 - t * t) * d * d / 6.0);
  if (N == 1.0) return K > 0.0 ? kInfinity : 1.0;
  if (K == 0.0) return 1.0;
  const double alpha = std::sqrt(std::abs(K) / (N - 1.0)) * d;
  if (K > 0.0) {
    if (alpha > std::numbers::pi) return kInfinity;
    if (alpha == 0.0 || t == 1.0) return 1.0;
    const double sa = std::sin(alpha);
    if (sa <= 0.0) return kInfinity;  // alpha == pi, t < 1
    const double ratio = (t == 0.0) ? alpha / sa : std::sin(t * alpha) / (t * sa);
    return std::pow(ratio, N - 1.0);
  }
  if (alpha == 0.0 || t == 1.0) return 1.0;
  double log_ratio;
  if (t == 0.0)
    log_ratio = std::log(alpha) - entropy_detail::log_sinh(alpha);
  else
    log_ratio = entropy_detail::log_sinh(t * alpha) - std::log(t) - entropy_detail::log_sinh(alpha);
  return std::exp((N - 1.0) * log_ratio);
}

inline double beta(double t, PointIndex x, PointIndex y, const DistortionParams& params,
                   const FiniteMetricMeasureSpace& space) {
  return beta_coefficient(t, space.dist(x, y), params);
}

/// Closed-form lower bound for beta_t(x0,x1) over t in [0,1], d(x0,x1) <= D, K <= 0.
inline double beta_lower_bound(const DistortionParams& params, double D) {
  if (params.K > 0.0) throw Error(ErrorKind::UnsupportedCurvature, "the lower bound is stated for K <= 0");
  if (!(D >= 0.0)) throw Error(ErrorKind::Domain, "D must be non-negative");
  if (params.K == 0.0 || params.N == 1.0) return 1.0;
  if (std::isinf(params.N)) return std::exp(params.K * D * D / 6.0);
  return std::exp(-std::sqrt((params.N - 1.0) * std::abs(params.K)) * D);
}

}  // namespace cdkn

#endif  // CDKN_ENTROPY_HPP
