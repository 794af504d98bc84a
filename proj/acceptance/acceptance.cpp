// Acceptance run: one PASS/FAIL line per criterion. Tolerances are fixed here.
// --known-failure ID (repeatable) still prints FAIL for that criterion but does
// not count it toward the exit status; a known failure that passes is reported.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "cdkn.hpp"

using namespace cdkn;

namespace {

constexpr double kTransportTol = 1e-9;
constexpr double kConvexitySlack = 0.05;
constexpr double kDensityFactor = 1.10;
constexpr double kPoincareFactor = 1.10;
constexpr double kBetaSlack = 1e-12;
constexpr double kReplayTol = 1e-9;
constexpr double kEviTol = 1e-9;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

// Random planar points with random masses.
FiniteMetricMeasureSpace random_small_space(std::mt19937_64& rng, std::size_t n) {
  std::uniform_real_distribution<double> coord(0.0, 1.0), mass(0.2, 1.0);
  std::vector<std::pair<double, double>> pts;
  std::vector<std::string> ids;
  std::vector<double> m;
  for (std::size_t i = 0; i < n; ++i) {
    pts.emplace_back(coord(rng), coord(rng));
    ids.push_back("p" + std::to_string(i));
    m.push_back(mass(rng));
  }
  std::vector<double> d(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j)
      d[i * n + j] = std::hypot(pts[i].first - pts[j].first, pts[i].second - pts[j].second);
  return FiniteMetricMeasureSpace(ids, d, m, "random");
}

Outcome transport_oracle() {
  std::mt19937_64 rng(101);
  double worst = 0.0;
  for (int inst = 0; inst < 200; ++inst) {
    const std::size_t n = 2 + static_cast<std::size_t>(inst % 3);
    const auto space = random_small_space(rng, n);
    const auto mu = random_measure(space, rng), nu = random_measure(space, rng);
    worst = std::max(worst, std::abs(w2(space, mu, nu).distance - w2_brute_force(space, mu, nu)));
  }
  return {worst <= kTransportTol, fmt("200 instances, max |w2 - brute force| = %.3g", worst)};
}

Outcome entropy_convexity() {
  const auto space = make_segment(65);
  const std::size_t k = 16;
  std::vector<EntropySpec> specs{EntropySpec::shannon(), EntropySpec::renyi(1), EntropySpec::renyi(2),
                                 EntropySpec::renyi(4)};
  StrongConvexityOptions opt;
  opt.tol = kConvexitySlack;
  double worst = kInfinity;
  std::size_t plans = 0;
  bool ok = true, complete = true;
  for (std::size_t s = 0; s < 50; ++s) {
    std::mt19937_64 rng(7000 + s);
    const auto mu0 = random_measure(space, rng), mu1 = random_measure(space, rng);
    for (const auto& spec : specs) {
      const auto r = check_strong_displacement_convexity(space, spec, mu0, mu1, k, 0.0, opt);
      ok = ok && r.consistent;
      complete = complete && r.complete;
      worst = std::min(worst, r.worst_margin);
      plans += r.plans_examined;
    }
  }
  return {ok, fmt("min chord margin %.4g over %g plan checks, enumeration ", worst, static_cast<double>(plans)) +
                  (complete ? "complete" : "capped")};
}

std::vector<BallSpec> segment_balls(const FiniteMetricMeasureSpace& space, std::size_t count) {
  std::vector<BallSpec> balls;
  const std::size_t n = space.size();
  const double h = space.min_positive_distance();
  for (std::size_t i = 0; i < count; ++i) {
    const PointIndex c = (i * 37 + 5) % n;
    const double r = (2.5 + static_cast<double>((i * 7) % 12)) * h;
    balls.push_back({c, r});
  }
  return balls;
}

Outcome density_bound() {
  const auto space = make_segment(65);
  const auto suite = default_function_suite(space, 3);
  const auto balls = segment_balls(space, 20);
  SweepOptions opt;
  const auto res = poincare_sweep(space, {0.0, 1.0}, balls, suite, 16, 0.0, opt);
  double worst = 0.0;
  for (const auto& e : res.entries) {
    const double bound = 2.0 / e.certificate.ball_mass;
    worst = std::max(worst, e.certificate.worst_density / bound);
  }
  return {worst <= kDensityFactor, fmt("max sup rho_t / (2/m(B)) = %.4f over %g plans", worst,
                                       static_cast<double>(res.entries.size()))};
}

Outcome weak_poincare() {
  const auto seg = make_segment(65);
  const auto sres = poincare_sweep(seg, {0.0, 1.0}, segment_balls(seg, 20), default_function_suite(seg, 3), 16, 0.0);
  const auto grid = make_grid2d(17);
  std::vector<BallSpec> gb;
  const double h = grid.min_positive_distance();
  for (std::size_t i = 0; i < 8; ++i) gb.push_back({(i * 97 + 40) % grid.size(), (1.5 + static_cast<double>(i % 4)) * h});
  const auto gres = poincare_sweep(grid, {0.0, 2.0}, gb, default_function_suite(grid, 3), 8, 0.0);
  const bool ok = sres.worst_ratio <= 8.0 * kPoincareFactor && gres.worst_ratio <= 16.0 * kPoincareFactor;
  return {ok, fmt("segment worst ratio %.4f (<= 8), grid2d worst ratio %.4f (<= 16)", sres.worst_ratio,
                  gres.worst_ratio)};
}

Outcome strong_poincare() {
  std::string detail;
  bool ok = true;
  auto run = [&](const FiniteMetricMeasureSpace& space, double n, PointIndex center, std::size_t k) {
    const auto suite = default_function_suite(space, 3);
    const double h = space.min_positive_distance();
    std::vector<UpperGradient> grads;
    for (const auto& f : suite) grads.push_back(slope_gradient(space, f.u, default_slope_radius(space, k), k, 0.0));
    double ratio = 0.0, half = 0.0, bridge = 0.0;
    for (std::size_t i = 0; i < 10; ++i) {
      const Ball b = ball(space, center, (1.5 + static_cast<double>(i)) * h);
      for (std::size_t f = 0; f < suite.size(); ++f) {
        const auto c = certify_strong_poincare(space, b, n, suite[f].u, grads[f].g, k, 0.0);
        ratio = std::max(ratio, c.ratio / c.constant);
        half = std::max({half, c.piece_density[0] / c.density_bound, c.piece_density[2] / c.density_bound});
        bridge = std::max(bridge, c.piece_density[1] / c.density_bound);
      }
    }
    ok = ok && ratio <= kPoincareFactor && half <= kDensityFactor && bridge <= kDensityFactor;
    if (!detail.empty()) detail += "; ";
    detail += space.name() + fmt(": ratio/2^{N+2} %.4f, density/(2^{N+1}/m(B)) half pieces %.4f, bridge %.4f", ratio,
                                 half, bridge);
  };
  run(make_segment(65), 1.0, 32, 16);
  run(make_grid2d(17), 2.0, 144, 8);
  return {ok, detail};
}

Outcome doubling() {
  const auto seg = make_segment(65);
  const auto grid = make_grid2d(17);
  const double ds = doubling_constant(seg, half_pitch_radii(seg));
  const double dg = doubling_constant(grid, half_pitch_radii(grid));
  const bool ok = ds <= 2.0 * (1.0 + 8.0 / 65.0) && dg <= 4.0 * (1.0 + 8.0 / 17.0);
  return {ok, fmt("segment %.4f (<= %.4f), grid2d %.4f", ds, 2.0 * (1.0 + 8.0 / 65.0), dg)};
}

Outcome beta_soundness() {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  double worst = kInfinity;
  bool k0 = true;
  for (int i = 0; i < 10000; ++i) {
    const double t = unit(rng), d = 3.0 * unit(rng), K = -5.0 * unit(rng);
    const double N = (i % 10 == 0) ? kInfinity : 1.0 + 9.0 * unit(rng);
    const DistortionParams p{K, N};
    worst = std::min(worst, beta_coefficient(t, d, p) - beta_lower_bound(p, d));
    k0 = k0 && beta_coefficient(t, d, {0.0, N}) == 1.0;
  }
  for (int i = 0; i < 1000; ++i) k0 = k0 && beta_coefficient(unit(rng), unit(rng), {0.0, 1.0 + 9.0 * unit(rng)}) == 1.0;
  return {worst >= -kBetaSlack && k0, fmt("min beta - lower bound = %.3g, K=0 branch exact: %g", worst, k0 ? 1.0 : 0.0)};
}

Outcome branch_search() {
  const auto theta = make_theta(1.0, 0.5, 16);
  const auto spec = EntropySpec::renyi(1.0);
  const auto r = branch_violation_search(theta, theta.index_of("j0"), spec, 16, 0.0);
  bool ok = r.found && r.violation && r.violation->defect > 0.0;
  double replay_err = kInfinity, defect = 0.0;
  if (ok) {
    defect = r.violation->defect;
    replay_err = std::abs(replay(theta, *r.violation) - defect);
    ok = replay_err <= kReplayTol;
  }
  const auto seg = make_segment(17);
  const auto tri = make_tripod(1.0, 8);
  bool none = true;
  for (PointIndex x : {PointIndex{0}, PointIndex{8}}) none = none && !branch_violation_search(seg, x, spec, 16, 0.0).found;
  for (PointIndex x : {PointIndex{0}, PointIndex{4}}) none = none && !branch_violation_search(tri, x, spec, 16, 0.0).found;
  return {ok && none, fmt("theta defect %.4g, replay error %.3g, segment/tripod none_found: %g", defect, replay_err,
                          none ? 1.0 : 0.0)};
}

Outcome uniqueness() {
  const std::size_t k = 16;
  bool ok = true, truncated = false;
  double seg_max = 0.0, tri_max = 0.0, circ_dev = 0.0, theta_frac = 0.0;
  const auto seg = make_segment(65);
  for (PointIndex x = 0; x < seg.size(); ++x) {
    const auto r = multiplicity_report(seg, x, k);
    seg_max = std::max(seg_max, r.fraction);
    truncated = truncated || r.truncated;
  }
  const auto tri = make_tripod(1.0, 8);
  for (PointIndex x = 0; x < tri.size(); ++x) {
    const auto r = multiplicity_report(tri, x, k);
    tri_max = std::max(tri_max, r.fraction);
    truncated = truncated || r.truncated;
  }
  const std::size_t half = 8;
  const auto circ = make_circle(2 * half);
  for (PointIndex x = 0; x < circ.size(); ++x) {
    const auto r = multiplicity_report(circ, x, k);
    circ_dev = std::max(circ_dev, std::abs(r.fraction - 1.0 / (2.0 * half)));
    truncated = truncated || r.truncated;
  }
  const auto theta = make_theta(1.0, 0.5, 16);
  {
    const auto r = multiplicity_report(theta, theta.index_of("j0"), k);
    theta_frac = r.fraction;
    truncated = truncated || r.truncated;
  }
  ok = seg_max == 0.0 && tri_max == 0.0 && circ_dev <= 1e-12 && theta_frac > 0.0 && !truncated;
  return {ok, fmt("segment max %.3g, tripod max %.3g, circle |f - 1/2n| %.3g", seg_max, tri_max, circ_dev) +
                  fmt(", theta %.4f, truncated %g", theta_frac, truncated ? 1.0 : 0.0)};
}

Outcome evi() {
  const auto seg = make_segment(9);
  const auto uniform = ProbMeasure::reference(seg);
  const auto flow = FlowTrajectory::constant(uniform, 4, 0.25);
  bool all = true;
  std::mt19937_64 rng(5);
  for (int i = 0; i < 50; ++i) all = all && evi_check(seg, flow, random_measure(seg, rng), EntropySpec::shannon(), kEviTol).pass;
  const auto two = make_segment(2);
  const auto bad = evi_check(two, FlowTrajectory::constant(ProbMeasure::dirac(2, 0), 2, 1.0),
                             ProbMeasure::reference(two), EntropySpec::shannon(), kEviTol);
  const double err = std::abs(bad.worst_residual - std::log(2.0));
  return {all && !bad.pass && err <= kEviTol,
          fmt("uniform flow passes %g/50, non-minimizer residual %.12f (log 2 = %.12f)", all ? 50.0 : 0.0,
              bad.worst_residual, std::log(2.0))};
}

Outcome monotonicity() {
  const auto seg = make_segment(33);
  const std::size_t samples = 20, k = 8;
  bool ok = true;
  std::size_t base_pass = 0;
  for (double N : {1.0, 2.0, 4.0}) {
    const auto base = check_cd(seg, {0.0, N}, samples, k, 0.0, 42);
    const auto lowerK = check_cd(seg, {-1.0, N}, samples, k, 0.0, 42);
    const auto higherN = check_cd(seg, {0.0, N + 1.0}, samples, k, 0.0, 42);
    for (std::size_t s = 0; s < samples; ++s) {
      if (!base.samples[s].passed) continue;
      ++base_pass;
      ok = ok && lowerK.samples[s].passed && higherN.samples[s].passed;
    }
  }
  return {ok, fmt("%g consistent (0,N) samples, all consistent at (-1,N) and (0,N+1): %g",
                  static_cast<double>(base_pass), ok ? 1.0 : 0.0)};
}

}  // namespace

int main(int argc, char** argv) {
  std::vector<int> known;
  for (int i = 1; i + 1 < argc; i += 2)
    if (std::string(argv[i]) == "--known-failure") known.push_back(std::atoi(argv[i + 1]));
  struct Row {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Row> rows{
      {1, "transport oracle equivalence", transport_oracle},
      {2, "entropy convexity on segment(65)", entropy_convexity},
      {3, "sharp density bound", density_bound},
      {4, "weak Poincare constant at K=0", weak_poincare},
      {5, "strong Poincare inequality", strong_poincare},
      {6, "doubling constant", doubling},
      {7, "beta soundness", beta_soundness},
      {8, "branching violation certificate", branch_search},
      {9, "geodesic multiplicity", uniqueness},
      {10, "EVI checker", evi},
      {11, "CD monotonicity", monotonicity},
  };
  int failures = 0;
  for (const auto& row : rows) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = row.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    std::printf("%s %2d %s: %s [%.1fs]\n", out.pass ? "PASS" : "FAIL", row.id, row.name, out.detail.c_str(), secs);
    std::fflush(stdout);
    const bool expected = std::find(known.begin(), known.end(), row.id) != known.end();
    if (!out.pass && !expected) ++failures;
    if (out.pass && expected) std::printf("note: criterion %d is listed as a known failure but passed\n", row.id);
  }
  return failures == 0 ? 0 : 1;
}
