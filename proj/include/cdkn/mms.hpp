#ifndef CDKN_MMS_HPP
#define CDKN_MMS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "cdkn/errors.hpp"
#include "cdkn/parallel.hpp"

namespace cdkn {

using PointIndex = std::size_t;

/// A finite metric measure space: n labelled points, a full distance matrix and
/// strictly positive (unnormalized) point masses.
class FiniteMetricMeasureSpace {
 public:
  FiniteMetricMeasureSpace() = default;

  /// `dist` is row-major n*n. Shapes and mass positivity are enforced here;
  /// the metric axioms are checked separately by validate_metric.
  FiniteMetricMeasureSpace(std::vector<std::string> ids, std::vector<double> dist,
                           std::vector<double> measure, std::string name = {})
      : ids_(std::move(ids)), dist_(std::move(dist)), measure_(std::move(measure)),
        name_(std::move(name)) {
    const std::size_t n = ids_.size();
    if (n == 0) throw Error(ErrorKind::Domain, "space must have at least one point");
    if (dist_.size() != n * n) throw Error(ErrorKind::Domain, "distance matrix must be n x n");
    if (measure_.size() != n) throw Error(ErrorKind::Domain, "measure must have n weights");
    for (double w : measure_) {
      if (!(w > 0.0) || !std::isfinite(w))
        throw Error(ErrorKind::Domain, "every measure weight must be finite and strictly positive");
    }
    total_mass_ = 0.0;
    for (double w : measure_) total_mass_ += w;
  }

  std::size_t size() const noexcept { return ids_.size(); }
  double dist(PointIndex i, PointIndex j) const { return dist_[i * size() + j]; }
  double mass(PointIndex i) const { return measure_[i]; }
  std::span<const double> measure() const noexcept { return measure_; }
  std::span<const double> distances() const noexcept { return dist_; }
  double total_mass() const noexcept { return total_mass_; }
  const std::string& id(PointIndex i) const { return ids_[i]; }
  const std::vector<std::string>& ids() const noexcept { return ids_; }
  const std::string& name() const noexcept { return name_; }

  double diameter() const {
    double d = 0.0;
    for (double v : dist_) d = std::max(d, v);
    return d;
  }

  /// Smallest distance between distinct points (0 for a one-point space).
  double min_positive_distance() const {
    double best = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < size(); ++i)
      for (std::size_t j = i + 1; j < size(); ++j) best = std::min(best, dist(i, j));
    return std::isfinite(best) ? best : 0.0;
  }

  double mass_of(std::span<const PointIndex> points) const {
    double m = 0.0;
    for (auto p : points) m += measure_[p];
    return m;
  }

  PointIndex index_of(const std::string& id) const {
    auto it = std::find(ids_.begin(), ids_.end(), id);
    if (it == ids_.end()) throw Error(ErrorKind::Domain, "unknown point id '" + id + "'");
    return static_cast<PointIndex>(it - ids_.begin());
  }

 private:
  std::vector<std::string> ids_;
  std::vector<double> dist_;
  std::vector<double> measure_;
  std::string name_;
  double total_mass_ = 0.0;
};

enum class MetricViolationKind { NonFinite, NonzeroDiagonal, Asymmetric, NonPositive, Triangle };

struct MetricViolation {
  MetricViolationKind kind;
  PointIndex i = 0, j = 0, k = 0;
  double excess = 0.0;  // amount by which the axiom fails

  std::string describe() const {
    std::ostringstream os;
    switch (kind) {
      case MetricViolationKind::NonFinite: os << "non-finite distance at (" << i << "," << j << ")"; break;
      case MetricViolationKind::NonzeroDiagonal: os << "nonzero self-distance at " << i; break;
      case MetricViolationKind::Asymmetric: os << "asymmetric distance at (" << i << "," << j << ")"; break;
      case MetricViolationKind::NonPositive: os << "non-positive distance between distinct points (" << i << "," << j << ")"; break;
      case MetricViolationKind::Triangle:
        os << "triangle inequality violated at (" << i << "," << j << "," << k << ") by " << excess;
        break;
    }
    return os.str();
  }
};

struct ValidationReport {
  std::vector<MetricViolation> violations;

  bool ok() const noexcept { return violations.empty(); }

  std::string summary(std::size_t max_items = 5) const {
    std::ostringstream os;
    os << violations.size() << " metric violation(s)";
    for (std::size_t i = 0; i < violations.size() && i < max_items; ++i)
      os << (i == 0 ? ": " : "; ") << violations[i].describe();
    return os.str();
  }
};

/// Checks every metric axiom. With `exact` the comparisons carry no slack;
/// otherwise the slack is 1e-12 times the largest entry.
inline ValidationReport validate_metric(const FiniteMetricMeasureSpace& space, bool exact = false) {
  ValidationReport report;
  const std::size_t n = space.size();
  const double tol = exact ? 0.0 : 1e-12 * std::max(1e-300, space.diameter());
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < n; ++j) {
      const double d = space.dist(i, j);
      if (!std::isfinite(d)) {
        report.violations.push_back({MetricViolationKind::NonFinite, i, j, 0, 0.0});
        continue;
      }
      if (i == j) {
        if (std::abs(d) > tol) report.violations.push_back({MetricViolationKind::NonzeroDiagonal, i, i, 0, d});
      } else {
        if (j > i && std::abs(d - space.dist(j, i)) > tol)
          report.violations.push_back({MetricViolationKind::Asymmetric, i, j, 0, d - space.dist(j, i)});
        if (j > i && !(d > 0.0)) report.violations.push_back({MetricViolationKind::NonPositive, i, j, 0, d});
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      for (std::size_t k = 0; k < n; ++k) {
        if (i == k || i == j || j == k || i > k) continue;
        const double excess = space.dist(i, k) - space.dist(i, j) - space.dist(j, k);
        if (excess > tol) report.violations.push_back({MetricViolationKind::Triangle, i, j, k, excess});
      }
  return report;
}

/// Open ball B(center, radius) = {p : d(center, p) < radius}.
struct Ball {
  PointIndex center = 0;
  double radius = 0.0;
  std::vector<PointIndex> members;  // ascending
  double mass = 0.0;

  bool contains(PointIndex p) const { return std::binary_search(members.begin(), members.end(), p); }
};

inline Ball ball(const FiniteMetricMeasureSpace& space, PointIndex center, double radius) {
  if (!(radius > 0.0)) throw Error(ErrorKind::Domain, "ball radius must be positive");
  if (center >= space.size()) throw Error(ErrorKind::Domain, "ball center out of range");
  Ball b;
  b.center = center;
  b.radius = radius;
  for (PointIndex p = 0; p < space.size(); ++p) {
    if (space.dist(center, p) < radius) {
      b.members.push_back(p);
      b.mass += space.mass(p);
    }
  }
  return b;
}

inline double diameter(const FiniteMetricMeasureSpace& space, std::span<const PointIndex> subset) {
  if (subset.empty()) throw Error(ErrorKind::Domain, "diameter of an empty subset");
  double d = 0.0;
  for (auto a : subset)
    for (auto b : subset) d = std::max(d, space.dist(a, b));
  return d;
}

/// sup over all centers and the supplied radii of m(B(x,2r)) / m(B(x,r)).
inline double doubling_constant(const FiniteMetricMeasureSpace& space, std::span<const double> radii) {
  if (radii.empty()) throw Error(ErrorKind::Domain, "doubling_constant needs at least one radius");
  if (space.size() == 1) return 1.0;
  const double diam = space.diameter();
  for (double r : radii)
    if (!(r > 0.0) || !(r < diam)) throw Error(ErrorKind::Domain, "doubling radii must lie in (0, diam)");
  std::vector<double> per_center(space.size(), 1.0);
  parallel_for(space.size(), [&](std::size_t x) {
    double worst = 1.0;
    for (double r : radii) {
      double inner = 0.0, outer = 0.0;
      for (PointIndex p = 0; p < space.size(); ++p) {
        const double d = space.dist(x, p);
        if (d < r) inner += space.mass(p);
        if (d < 2.0 * r) outer += space.mass(p);
      }
      worst = std::max(worst, outer / inner);
    }
    per_center[x] = worst;
  });
  return *std::max_element(per_center.begin(), per_center.end());
}

/// Radii (j + 1/2) h for the smallest positive distance h, up to the diameter.
/// Half-pitch radii keep lattice spheres out of the comparison.
inline std::vector<double> half_pitch_radii(const FiniteMetricMeasureSpace& space) {
  std::vector<double> radii;
  const double h = space.min_positive_distance();
  const double diam = space.diameter();
  if (!(h > 0.0)) return radii;
  for (std::size_t j = 0;; ++j) {
    const double r = (static_cast<double>(j) + 0.5) * h;
    if (!(r < diam)) break;
    radii.push_back(r);
  }
  return radii;
}

}  // namespace cdkn

#endif  // CDKN_MMS_HPP
