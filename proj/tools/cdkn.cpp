// cdkn command-line front end. Every command prints a cdkn-report/1 document
// (or a csv table with --format csv) and exits with
//   0 success, 1 usage, 2 input error, 3 negative verification, 4 internal limit.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "cdkn.hpp"

using namespace cdkn;

namespace {

enum Exit { kOk = 0, kUsage = 1, kInput = 2, kNegative = 3, kLimit = 4 };

struct Common {
  std::string space_path;
  std::size_t k = 8;
  std::optional<double> eps_geo;
  double kappa = 0.0;
  std::string dim;
  std::uint64_t seed = 1;
  std::size_t samples = 20;
  std::optional<std::size_t> cap;  // per-command default when unset
  std::optional<double> tol;
  std::string out;
  std::string format = "json";
  std::string plot;
};

struct Outcome {
  json results;
  json table = json::array();
  int code = kOk;
  bool complete = true;
};

struct Plot {
  std::string title, xlabel, ylabel;
  std::vector<std::pair<std::string, std::vector<std::pair<double, double>>>> series;
};

double parse_real(const std::string& s) {
  if (s == "inf" || s == "Inf" || s == "infinity") return kInfinity;
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used != s.size() || s.empty()) throw Error(ErrorKind::ParseError, "'" + s + "' is not a number");
  return v;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string part;
  while (std::getline(ss, part, sep)) out.push_back(part);
  return out;
}

int exit_code_for(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::SizeLimit: return kLimit;
    case ErrorKind::NotAnUpperGradient:
    case ErrorKind::InsideBallViolation:
    case ErrorKind::NoBranchingFound: return kNegative;
    case ErrorKind::SolverFailure: return kLimit;
    default: return kInput;
  }
}

// Measure syntax: uniform | dirac:ID | random:SEED | ball:ID:R | @file.json
// (file: array of weights, or object id -> weight).
ProbMeasure parse_measure(const std::string& text, const FiniteMetricMeasureSpace& space) {
  const auto parts = split(text, ':');
  if (text == "uniform") return ProbMeasure::reference(space);
  if (parts.size() == 2 && parts[0] == "dirac") return ProbMeasure::dirac(space.size(), space.index_of(parts[1]));
  if (parts.size() == 2 && parts[0] == "random") {
    std::mt19937_64 rng(static_cast<std::uint64_t>(parse_real(parts[1])));
    return random_measure(space, rng);
  }
  if (parts.size() == 3 && parts[0] == "ball") {
    const auto b = ball(space, space.index_of(parts[1]), parse_real(parts[2]));
    return ProbMeasure::uniform_on(space, b.members);
  }
  if (!text.empty() && text[0] == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw Error(ErrorKind::ParseError, "cannot open measure file '" + text.substr(1) + "'");
    json j;
    try {
      in >> j;
    } catch (const json::parse_error& e) {
      throw Error(ErrorKind::ParseError, "byte " + std::to_string(e.byte) + ": " + e.what());
    }
    std::vector<double> w(space.size(), 0.0);
    if (j.is_array()) {
      if (j.size() != space.size()) throw Error(ErrorKind::ParseError, "measure file length differs from point count");
      for (std::size_t i = 0; i < w.size(); ++i) w[i] = j[i].get<double>();
    } else if (j.is_object()) {
      for (auto it = j.begin(); it != j.end(); ++it) w[space.index_of(it.key())] = it.value().get<double>();
    } else {
      throw Error(ErrorKind::ParseError, "measure file must hold an array or an object");
    }
    return ProbMeasure::normalized(std::move(w));
  }
  throw Error(ErrorKind::ParseError, "unrecognized measure '" + text + "'");
}

EntropySpec parse_entropy(const std::string& text, double dim) {
  if (text.empty()) return EntropySpec::critical(dim);
  const auto parts = split(text, ':');
  if (parts[0] == "shannon") return EntropySpec::shannon();
  if (parts[0] == "renyi") return EntropySpec::renyi(parts.size() > 1 ? parse_real(parts[1]) : dim);
  if (parts[0] == "power" && parts.size() == 2) return EntropySpec::power(parse_real(parts[1]));
  throw Error(ErrorKind::ParseError, "unrecognized entropy '" + text + "'");
}

// Field syntax: distance:ID | lipschitz:SEED | step:ID:R:W | @file.json (array or id -> value).
ScalarField parse_field(const std::string& text, const FiniteMetricMeasureSpace& space) {
  const auto parts = split(text, ':');
  const std::size_t n = space.size();
  std::vector<double> v(n, 0.0);
  if (parts.size() == 2 && parts[0] == "distance") {
    const auto a = space.index_of(parts[1]);
    for (PointIndex p = 0; p < n; ++p) v[p] = space.dist(p, a);
    return ScalarField(std::move(v));
  }
  if (parts.size() == 2 && parts[0] == "lipschitz") {
    const auto suite = default_function_suite(space, static_cast<std::uint64_t>(parse_real(parts[1])), 1);
    for (const auto& f : suite)
      if (f.name == "lipschitz#0") return f.u;
  }
  if (parts.size() == 4 && parts[0] == "step") {
    const auto a = space.index_of(parts[1]);
    const double R = parse_real(parts[2]), w = parse_real(parts[3]);
    if (!(w > 0.0)) throw Error(ErrorKind::Domain, "step width must be positive");
    for (PointIndex p = 0; p < n; ++p) v[p] = std::clamp((space.dist(p, a) - R) / w, 0.0, 1.0);
    return ScalarField(std::move(v));
  }
  if (!text.empty() && text[0] == '@') {
    std::ifstream in(text.substr(1));
    if (!in) throw Error(ErrorKind::ParseError, "cannot open field file '" + text.substr(1) + "'");
    json j;
    in >> j;
    if (j.is_array()) {
      if (j.size() != n) throw Error(ErrorKind::ParseError, "field file length differs from point count");
      for (std::size_t i = 0; i < n; ++i) v[i] = j[i].get<double>();
    } else {
      for (auto it = j.begin(); it != j.end(); ++it) v[space.index_of(it.key())] = it.value().get<double>();
    }
    return ScalarField(std::move(v));
  }
  throw Error(ErrorKind::ParseError, "unrecognized field '" + text + "'");
}

std::string rational_string(const Rational& r) {
  return boost::multiprecision::numerator(r).str() + "/" + boost::multiprecision::denominator(r).str();
}

json measure_json(const ProbMeasure& mu, const FiniteMetricMeasureSpace& space) {
  json j = json::object();
  for (auto p : mu.support()) j[space.id(p)] = mu[p];
  return j;
}

json coupling_json(const Coupling& c, const FiniteMetricMeasureSpace& space) {
  json j = json::array();
  for (const auto& cell : c.cells) j.push_back({{"from", space.id(cell.from)}, {"to", space.id(cell.to)}, {"mass", cell.mass}});
  return j;
}

json chain_json(const GeodesicChain& c, const FiniteMetricMeasureSpace& space) {
  json nodes = json::array();
  for (auto p : c.nodes) nodes.push_back(space.id(p));
  return nodes;
}

json plan_json(const DynamicalPlan& plan, const FiniteMetricMeasureSpace& space) {
  json entries = json::array();
  for (const auto& e : plan.entries) entries.push_back({{"chain", chain_json(e.chain, space)}, {"weight", e.weight}});
  return {{"resolution", plan.resolution}, {"optimal", plan.optimal}, {"entries", std::move(entries)}};
}

json violation_json(const ConvexityViolation& v, const FiniteMetricMeasureSpace& space) {
  return {{"entropy", v.spec.name()}, {"step", v.step}, {"t", v.t},         {"lhs", v.lhs},
          {"rhs", v.rhs},             {"defect", v.defect}, {"plan", plan_json(v.plan, space)}};
}

json certificate_json(const PoincareCertificate& c, const FiniteMetricMeasureSpace& space) {
  json steps = json::array();
  for (const auto& s : c.steps)
    steps.push_back({{"link", s.name}, {"lhs", s.lhs}, {"rhs", s.rhs}, {"equality", s.equality}, {"holds", s.holds}});
  json j{{"center", space.id(c.center)},
         {"radius", c.radius},
         {"ball_mass", c.ball_mass},
         {"dilation", c.dilation},
         {"dilated_mass", c.dilated_mass},
         {"form", c.form},
         {"ratio", real_to_json(c.ratio)},
         {"constant", c.constant},
         {"pass", c.pass},
         {"provenance", c.provenance},
         {"steps", std::move(steps)},
         {"steps_hold", c.steps_hold},
         {"density_bound", c.density_bound},
         {"worst_density", c.worst_density},
         {"density_ok", c.density_ok},
         {"chains_inside", c.chains_inside},
         {"max_curve_length", c.max_curve_length}};
  if (!c.piece_density.empty()) j["piece_density"] = c.piece_density;
  return j;
}

std::string csv_escape(const json& v) {
  std::string s = v.is_string() ? v.get<std::string>() : v.dump();
  if (s.find_first_of(",\"\n") != std::string::npos) {
    std::string q = "\"";
    for (char ch : s) q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
  }
  return s;
}

std::string to_csv(const json& table) {
  std::vector<std::string> cols;
  for (const auto& row : table)
    for (auto it = row.begin(); it != row.end(); ++it)
      if (std::find(cols.begin(), cols.end(), it.key()) == cols.end()) cols.push_back(it.key());
  std::ostringstream os;
  for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
  os << '\n';
  for (const auto& row : table) {
    for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << (row.contains(cols[i]) ? csv_escape(row[cols[i]]) : "");
    os << '\n';
  }
  return os.str();
}

void write_svg(const std::string& path, const Plot& plot) {
  const double W = 640, H = 400, L = 70, R = 20, T = 40, B = 50;
  double x0 = kInfinity, x1 = -kInfinity, y0 = kInfinity, y1 = -kInfinity;
  for (const auto& [name, pts] : plot.series)
    for (auto [x, y] : pts) {
      if (!std::isfinite(x) || !std::isfinite(y)) continue;
      x0 = std::min(x0, x), x1 = std::max(x1, x), y0 = std::min(y0, y), y1 = std::max(y1, y);
    }
  if (!(x0 <= x1)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
  if (x1 == x0) x1 = x0 + 1;
  if (y1 == y0) y1 = y0 + 1, y0 -= 1;
  auto sx = [&](double x) { return L + (x - x0) / (x1 - x0) * (W - L - R); };
  auto sy = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };
  static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write plot '" + path + "'");
  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\"" << H << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  out << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out << "<text x=\"" << W / 2 << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << plot.title << "</text>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  out << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B << "\" stroke=\"black\"/>\n";
  for (int i = 0; i <= 4; ++i) {
    const double x = x0 + (x1 - x0) * i / 4.0, y = y0 + (y1 - y0) * i / 4.0;
    out << "<text x=\"" << sx(x) << "\" y=\"" << H - B + 16 << "\" text-anchor=\"middle\">" << x << "</text>\n";
    out << "<text x=\"" << L - 6 << "\" y=\"" << sy(y) + 4 << "\" text-anchor=\"end\">" << y << "</text>\n";
  }
  out << "<text x=\"" << (L + W - R) / 2 << "\" y=\"" << H - 12 << "\" text-anchor=\"middle\">" << plot.xlabel << "</text>\n";
  out << "<text x=\"16\" y=\"" << (T + H - B) / 2 << "\" transform=\"rotate(-90 16 " << (T + H - B) / 2
      << ")\" text-anchor=\"middle\">" << plot.ylabel << "</text>\n";
  for (std::size_t s = 0; s < plot.series.size(); ++s) {
    const auto& [name, pts] = plot.series[s];
    const char* color = colors[s % 6];
    out << "<polyline fill=\"none\" stroke=\"" << color << "\" stroke-width=\"1.5\" points=\"";
    for (auto [x, y] : pts)
      if (std::isfinite(x) && std::isfinite(y)) out << sx(x) << "," << sy(y) << " ";
    out << "\"/>\n";
    for (auto [x, y] : pts)
      if (std::isfinite(x) && std::isfinite(y))
        out << "<circle cx=\"" << sx(x) << "\" cy=\"" << sy(y) << "\" r=\"2.5\" fill=\"" << color << "\"/>\n";
    out << "<text x=\"" << W - R - 150 << "\" y=\"" << T + 14 * (s + 1) << "\" fill=\"" << color << "\">" << name << "</text>\n";
  }
  out << "</svg>\n";
}

class Runner {
 public:
  explicit Runner(Common& c) : c_(c) {}

  SpaceFile& space_file(bool validate = true) {
    if (!file_) {
      if (c_.space_path.empty()) throw Error(ErrorKind::ParseError, "--space is required");
      file_ = load_space_file(c_.space_path, validate);
    }
    return *file_;
  }
  const FiniteMetricMeasureSpace& space() { return space_file().space; }

  double dim() {
    if (!c_.dim.empty()) return parse_real(c_.dim);
    if (file_ && file_->intended_N) return *file_->intended_N;
    return kInfinity;
  }
  double eps() const { return c_.eps_geo.value_or(0.0); }
  DistortionParams params() { return {c_.kappa, dim()}; }

  json config() {
    json j{{"k", c_.k}, {"eps_geo", eps()}, {"kappa", c_.kappa}, {"seed", c_.seed},
           {"samples", c_.samples}, };
    j["dim"] = real_to_json(c_.dim.empty() && !file_ ? kInfinity : dim());
    if (c_.cap) j["cap"] = *c_.cap;
    if (c_.tol) j["tol"] = *c_.tol;
    if (!c_.space_path.empty()) j["space"] = c_.space_path;
    if (file_) j["space_name"] = file_->space.name();
    return j;
  }

  Plot* plot() { return c_.plot.empty() ? nullptr : &plot_; }
  const Plot& plot_data() const { return plot_; }

 private:
  Common& c_;
  std::optional<SpaceFile> file_;
  Plot plot_;
};

void emit(const Common& c, const std::string& text) {
  if (c.out.empty()) {
    std::cout << text;
    std::cout.flush();
  } else {
    std::ofstream f(c.out);
    if (!f) throw Error(ErrorKind::ParseError, "cannot write '" + c.out + "'");
    f << text;
  }
}

}  // namespace

int main(int argc, char** argv) {
  Common c;
  CLI::App app{"Curvature-dimension toolkit on finite metric measure spaces"};
  app.require_subcommand(1);

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--space", c.space_path, "space file (cdkn-space/1)");
    sub->add_option("--k", c.k, "chain resolution")->check(CLI::PositiveNumber);
    sub->add_option("--eps-geo", c.eps_geo, "geodesic slack (default 0: nearest-point chains)");
    sub->add_option("--kappa", c.kappa, "curvature K");
    sub->add_option("--dim", c.dim, "dimension N (real or inf)");
    sub->add_option("--seed", c.seed, "random seed");
    sub->add_option("--samples", c.samples, "sample count");
    sub->add_option("--cap", c.cap, "enumeration cap (plans: 256, chains: 10000)");
    sub->add_option("--tol", c.tol, "tolerance");
    sub->add_option("--out", c.out, "write the report here instead of standard output");
    sub->add_option("--format", c.format, "json or csv")->check(CLI::IsMember({"json", "csv"}));
    sub->add_option("--plot", c.plot, "write an SVG plot here");
  };

  std::string mu_s = "uniform", nu_s = "uniform", entropy_s, center_s, field_s, base_s, radii_s, flow_s, example;
  std::vector<std::string> params_s;
  double t = 0.5, dist = 1.0, cbound = 0.0, radius = 0.0;
  bool exact = false, strong = false, all_bases = false;
  std::size_t balls = 10, steps = 4;

  app.add_subcommand("validate", "check the metric axioms");
  auto* w2c = app.add_subcommand("w2", "Wasserstein distance and optimal coupling");
  w2c->add_flag("--exact", exact, "solve in rational arithmetic");
  auto* interp = app.add_subcommand("interpolate", "displacement interpolation on the chain grid");
  auto* entropy = app.add_subcommand("entropy", "evaluate an entropy functional");
  auto* beta = app.add_subcommand("beta", "distortion coefficient");
  beta->add_option("--t", t, "time in [0, 1]");
  beta->add_option("--dist", dist, "distance");
  app.add_subcommand("cd-check", "randomized CD(K,N) check");
  auto* conv = app.add_subcommand("convexity-check", "convexity along every enumerated optimal plan");
  auto* dens = app.add_subcommand("density-check", "density bound along an optimal plan");
  dens->add_option("--c", cbound, "endpoint density bound (default: max endpoint density)");
  dens->add_flag("--strong", strong, "sharp bound with the restriction argument");
  auto* evi = app.add_subcommand("evi-check", "evolution variational inequality along a flow");
  evi->add_option("--flow", flow_s, "flow file: [{\"time\": t, \"measure\": [...] or {id: w}}], or a measure for a constant flow");
  evi->add_option("--steps", steps, "samples of a constant flow");
  auto* pcert = app.add_subcommand("poincare-certify", "local Poincare certificate on one ball");
  pcert->add_option("--center", center_s, "ball center id")->required();
  pcert->add_option("--radius", radius, "ball radius")->required();
  pcert->add_option("--field", field_s, "distance:ID | lipschitz:SEED | step:ID:R:W | @file")->required();
  pcert->add_flag("--strong", strong, "strong form with lambda = 1");
  auto* psweep = app.add_subcommand("poincare-sweep", "weak certificates over balls and the function suite");
  psweep->add_option("--balls", balls, "number of balls");
  auto* uniq = app.add_subcommand("uniqueness", "geodesic multiplicity from a base point");
  uniq->add_flag("--all", all_bases, "every base point");
  auto* branch = app.add_subcommand("branch-search", "search for a branching convexity violation");
  auto* gen = app.add_subcommand("generate", "write a bundled example space");
  gen->add_option("name", example, "segment | grid2d | circle | tripod | theta | weighted_tree")->required();
  gen->add_option("--param", params_s, "size parameter key=value (repeatable)");
  auto* doubling = app.add_subcommand("doubling", "doubling constant over a radius sweep");
  doubling->add_option("--radii", radii_s, "comma-separated radii (default: half-pitch sweep)");

  for (auto* sub : app.get_subcommands({})) add_common(sub);
  for (auto* sub : {w2c, interp, entropy, conv, dens}) {
    sub->add_option("--mu", mu_s, "uniform | dirac:ID | random:SEED | ball:ID:R | @file");
    sub->add_option("--nu", nu_s, "second measure, same syntax");
  }
  evi->add_option("--nu", nu_s, "reference measure");
  for (auto* sub : {entropy, conv, dens, evi, branch}) sub->add_option("--entropy", entropy_s, "shannon | renyi[:N] | power:p");
  for (auto* sub : {uniq, branch}) sub->add_option("--base", base_s, "base point id");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  Runner run(c);
  Outcome o;
  std::string command = app.get_subcommands().front()->get_name();
  const auto start = std::chrono::steady_clock::now();
  try {
    if (command == "validate") {
      const auto& s = run.space_file(false).space;
      const auto rep = validate_metric(s);
      json v = json::array();
      for (const auto& m : rep.violations) {
        v.push_back({{"description", m.describe()}});
        o.table.push_back({{"description", m.describe()}});
      }
      o.results = {{"points", s.size()}, {"ok", rep.ok()}, {"violations", std::move(v)}, {"diameter", s.diameter()}};
      if (!rep.ok()) o.code = kNegative;
    } else if (command == "w2") {
      const auto& s = run.space();
      const auto mu = parse_measure(mu_s, s), nu = parse_measure(nu_s, s);
      const auto r = w2(s, mu, nu);
      o.results = {{"distance", r.distance}, {"squared", r.squared}, {"coupling", coupling_json(r.coupling, s)}};
      if (exact) o.results["squared_exact"] = rational_string(w2_squared_exact(s, mu, nu));
      for (const auto& cell : r.coupling.cells)
        o.table.push_back({{"from", s.id(cell.from)}, {"to", s.id(cell.to)}, {"mass", cell.mass}});
    } else if (command == "interpolate") {
      const auto& s = run.space();
      const auto mu = parse_measure(mu_s, s), nu = parse_measure(nu_s, s);
      const auto plan = optimal_dynamical_plan(s, mu, nu, c.k, run.eps());
      const auto spec = parse_entropy(entropy_s, run.dim());
      json frames = json::array();
      std::vector<std::pair<double, double>> curve;
      for (std::size_t i = 0; i <= c.k; ++i) {
        const auto mt = interpolate_step(plan, i);
        const double tt = static_cast<double>(i) / static_cast<double>(c.k);
        const double e = evaluate_entropy(spec, mt, s);
        frames.push_back({{"step", i}, {"t", tt}, {"entropy", e}, {"measure", measure_json(mt, s)}});
        for (auto p : mt.support()) o.table.push_back({{"step", i}, {"t", tt}, {"point", s.id(p)}, {"mass", mt[p]}});
        curve.emplace_back(tt, e);
      }
      o.results = {{"entropy", spec.name()}, {"optimal", plan.optimal}, {"frames", std::move(frames)}, {"plan", plan_json(plan, s)}};
      if (auto* p = run.plot()) *p = {"entropy along the interpolation", "t", spec.name(), {{spec.name(), curve}}};
    } else if (command == "entropy") {
      const auto& s = run.space();
      const auto spec = parse_entropy(entropy_s, run.dim());
      const double e = evaluate_entropy(spec, parse_measure(mu_s, s), s);
      o.results = {{"entropy", spec.name()}, {"value", real_to_json(e)}, {"derivative_at_infinity", real_to_json(spec.derivative_at_infinity())}};
      o.table.push_back({{"entropy", spec.name()}, {"value", e}});
    } else if (command == "beta") {
      const double b = beta_coefficient(t, dist, run.params());
      o.results = {{"t", t}, {"dist", dist}, {"beta", real_to_json(b)}};
      if (c.kappa <= 0.0) o.results["lower_bound"] = beta_lower_bound(run.params(), dist);
      o.table.push_back({{"t", t}, {"dist", dist}, {"beta", b}});
    } else if (command == "cd-check") {
      const auto& s = run.space();
      CdOptions opt;
      opt.plan_cap = c.cap.value_or(256);
      opt.tol = c.tol;
      const auto rep = check_cd(s, run.params(), c.samples, c.k, run.eps(), c.seed, opt);
      json fam = json::array();
      for (const auto& f : rep.family) fam.push_back(f.name());
      json samples = json::array();
      for (const auto& sm : rep.samples)
        samples.push_back({{"sample", sm.sample}, {"passed", sm.passed}, {"enumeration_complete", sm.enumeration_complete},
                           {"plans_examined", sm.plans_examined}, {"best_margin", sm.best_margin}});
      for (const auto& r : rep.records)
        o.table.push_back({{"sample", r.sample}, {"step", r.step}, {"t", r.t}, {"entropy", r.spec.name()},
                           {"lhs", real_to_json(r.lhs)}, {"rhs", real_to_json(r.rhs)}, {"margin", real_to_json(r.margin)}});
      o.results = {{"verdict", to_string(rep.verdict)}, {"family", fam}, {"tolerance", rep.tol},
                   {"worst_margin", rep.worst_margin}, {"samples", samples}, {"records", o.table}};
      if (rep.witness) {
        const auto& w = *rep.witness;
        o.results["witness"] = {{"sample", w.sample}, {"t", w.t}, {"entropy", w.spec.name()}, {"lhs", w.lhs}, {"rhs", w.rhs},
                                {"mu0", measure_json(w.mu0, s)}, {"mu1", measure_json(w.mu1, s)}, {"plan", plan_json(w.plan, s)}};
      }
      o.complete = rep.complete;
      if (rep.verdict == CdVerdict::Violated) o.code = kNegative;
      if (auto* p = run.plot()) {
        std::vector<std::pair<double, double>> pts;
        for (const auto& sm : rep.samples) pts.emplace_back(static_cast<double>(sm.sample), sm.best_margin);
        *p = {"best normalized margin per sample", "sample", "margin", {{"margin", pts}}};
      }
    } else if (command == "convexity-check") {
      const auto& s = run.space();
      const auto mu = parse_measure(mu_s, s), nu = parse_measure(nu_s, s);
      const auto spec = parse_entropy(entropy_s, run.dim());
      StrongConvexityOptions opt;
      opt.plan_cap = c.cap.value_or(256);
      opt.seed = c.seed;
      if (c.tol) opt.tol = *c.tol;
      const auto r = check_strong_displacement_convexity(s, spec, mu, nu, c.k, run.eps(), opt);
      o.results = {{"entropy", spec.name()}, {"consistent", r.consistent}, {"plans_examined", r.plans_examined},
                   {"worst_margin", r.worst_margin}};
      if (r.violation) o.results["violation"] = violation_json(*r.violation, s);
      o.complete = r.complete;
      if (!r.consistent) o.code = kNegative;
      if (auto* p = run.plot()) {
        const auto plan = r.violation ? r.violation->plan : optimal_dynamical_plan(s, mu, nu, c.k, run.eps());
        std::vector<std::pair<double, double>> curve, chord;
        const double e0 = evaluate_entropy(spec, mu, s), e1 = evaluate_entropy(spec, nu, s);
        for (std::size_t i = 0; i <= c.k; ++i) {
          const double tt = static_cast<double>(i) / static_cast<double>(c.k);
          curve.emplace_back(tt, evaluate_entropy(spec, interpolate_step(plan, i), s));
          chord.emplace_back(tt, (1 - tt) * e0 + tt * e1);
        }
        *p = {"entropy along the plan", "t", spec.name(), {{"E(mu_t)", curve}, {"chord", chord}}};
        o.table = json::array();
        for (std::size_t i = 0; i < curve.size(); ++i)
          o.table.push_back({{"t", curve[i].first}, {"entropy", curve[i].second}, {"chord", chord[i].second}});
      }
    } else if (command == "density-check") {
      const auto& s = run.space();
      const auto mu = parse_measure(mu_s, s), nu = parse_measure(nu_s, s);
      const auto plan = optimal_dynamical_plan(s, mu, nu, c.k, run.eps());
      double cval = cbound;
      if (!(cval > 0.0))
        for (PointIndex p = 0; p < s.size(); ++p) cval = std::max({cval, mu[p] / s.mass(p), nu[p] / s.mass(p)});
      const double tol = c.tol.value_or(1e-9);
      DensityBoundReport d;
      if (strong) {
        const auto r = check_density_bound_strong(s, plan, cval, tol);
        d = r.direct;
        json levels = json::array();
        for (const auto& lv : r.levels)
          levels.push_back({{"step", lv.step}, {"level", lv.level}, {"plan_mass", lv.plan_mass}, {"entropy_t", lv.entropy_t},
                            {"convex_bound", lv.convex_bound}, {"cap", lv.cap}, {"jensen", lv.jensen},
                            {"convex_along_restriction", lv.convex_along_restriction}, {"implies_level_le_c", lv.implies_level_le_c}});
        o.results["levels"] = levels;
        o.results["restriction_consistent"] = r.restriction_consistent;
        o.results["jensen_holds"] = r.jensen_holds;
      } else {
        std::vector<PointIndex> supp = mu.support();
        for (auto p : nu.support()) supp.push_back(p);
        d = check_density_bound_cd(s, plan, cval, run.params(), diameter(s, supp), tol);
      }
      o.results["c"] = cval;
      o.results["bound"] = d.bound;
      o.results["worst_density"] = d.worst_density;
      o.results["worst_ratio"] = d.worst_ratio;
      o.results["worst_step"] = d.worst_step;
      o.results["worst_point"] = s.id(d.worst_point);
      o.results["pass"] = d.pass;
      o.table.push_back({{"bound", d.bound}, {"worst_density", d.worst_density}, {"worst_ratio", d.worst_ratio}, {"pass", d.pass}});
      if (!d.pass) o.code = kNegative;
    } else if (command == "evi-check") {
      const auto& s = run.space();
      const auto spec = parse_entropy(entropy_s, run.dim());
      std::vector<FlowTrajectory::Sample> samples;
      if (!flow_s.empty() && flow_s[0] == '@') {
        std::ifstream in(flow_s.substr(1));
        if (!in) throw Error(ErrorKind::ParseError, "cannot open flow file");
        json j;
        in >> j;
        for (const auto& e : j) {
          const auto& m = e.at("measure");
          std::vector<double> w(s.size(), 0.0);
          if (m.is_array())
            for (std::size_t i = 0; i < m.size() && i < w.size(); ++i) w[i] = m[i].get<double>();
          else
            for (auto it = m.begin(); it != m.end(); ++it) w[s.index_of(it.key())] = it.value().get<double>();
          samples.push_back({e.at("time").get<double>(), ProbMeasure::normalized(w)});
        }
      }
      const auto flow = samples.empty() ? FlowTrajectory::constant(parse_measure(flow_s.empty() ? "uniform" : flow_s, s), steps, 1.0)
                                        : FlowTrajectory(std::move(samples));
      const auto r = evi_check(s, flow, parse_measure(nu_s, s), spec, c.tol.value_or(1e-9));
      for (const auto& st : r.steps)
        o.table.push_back({{"time", st.time}, {"h", st.h}, {"lhs", st.lhs}, {"rhs", st.rhs}, {"residual", st.residual}, {"ok", st.ok}});
      o.results = {{"entropy", spec.name()}, {"pass", r.pass}, {"worst_residual", r.worst_residual}, {"steps", o.table}};
      if (!r.pass) o.code = kNegative;
    } else if (command == "poincare-certify") {
      const auto& s = run.space();
      const auto u = parse_field(field_s, s);
      const Ball b = ball(s, s.index_of(center_s), radius);
      UpperGradientOptions gopt;
      gopt.seed = c.seed;
      const auto g = slope_gradient(s, u, default_slope_radius(s, c.k), c.k, run.eps(), gopt);
      PoincareOptions popt;
      if (c.tol) popt.tol = *c.tol;
      const auto cert = strong ? certify_strong_poincare(s, b, run.dim(), u, g.g, c.k, run.eps(), popt)
                               : certify_weak_poincare(s, b, run.params(), u, g.g, c.k, run.eps(), popt);
      o.results = certificate_json(cert, s);
      o.results["gradient"] = {{"scale", g.scale}, {"certified_k", g.certified_k}, {"exhaustive", g.exhaustive}};
      for (const auto& st : cert.steps) o.table.push_back({{"link", st.name}, {"lhs", st.lhs}, {"rhs", st.rhs}, {"holds", st.holds}});
      o.complete = g.exhaustive;
      if (!cert.pass) o.code = kNegative;
    } else if (command == "poincare-sweep") {
      const auto& s = run.space();
      const auto suite = default_function_suite(s, c.seed);
      std::vector<BallSpec> bs;
      const double h = s.min_positive_distance();
      std::mt19937_64 rng(c.seed);
      std::uniform_int_distribution<PointIndex> pick(0, s.size() - 1);
      for (std::size_t i = 0; i < balls; ++i) bs.push_back({pick(rng), (1.5 + static_cast<double>(i % 8)) * h});
      SweepOptions sopt;
      sopt.gradient.seed = c.seed;
      if (c.tol) sopt.poincare.tol = *c.tol;
      const auto r = poincare_sweep(s, run.params(), bs, suite, c.k, run.eps(), sopt);
      json entries = json::array();
      std::vector<std::pair<double, double>> pts;
      for (const auto& e : r.entries) {
        entries.push_back({{"ball", e.ball_index}, {"function", e.function}, {"certificate", certificate_json(e.certificate, s)}});
        o.table.push_back({{"ball", e.ball_index}, {"center", s.id(e.certificate.center)}, {"radius", e.certificate.radius},
                           {"function", e.function}, {"ratio", e.certificate.ratio}, {"constant", e.certificate.constant},
                           {"pass", e.certificate.pass}});
      }
      for (std::size_t i = 0; i < r.worst_ratio_per_ball.size(); ++i) pts.emplace_back(bs[i].radius, r.worst_ratio_per_ball[i]);
      std::sort(pts.begin(), pts.end());
      o.results = {{"worst_ratio", r.worst_ratio}, {"worst_normalized", r.worst_normalized}, {"all_pass", r.all_pass},
                   {"worst_ratio_per_ball", r.worst_ratio_per_ball}, {"entries", entries}};
      if (!r.all_pass) o.code = kNegative;
      if (auto* p = run.plot()) *p = {"worst certificate ratio per ball", "radius", "ratio", {{"ratio", pts}}};
    } else if (command == "uniqueness") {
      const auto& s = run.space();
      std::vector<PointIndex> bases;
      if (all_bases)
        for (PointIndex x = 0; x < s.size(); ++x) bases.push_back(x);
      else
        bases.push_back(base_s.empty() ? 0 : s.index_of(base_s));
      json reports = json::array();
      bool truncated = false;
      for (auto x : bases) {
        const auto r = multiplicity_report(s, x, c.k, run.eps(), std::nullopt, c.cap.value_or(10000));
        json mult = json::object();
        for (PointIndex y = 0; y < s.size(); ++y)
          if (r.multiplicity[y] >= 2) mult[s.id(y)] = r.multiplicity[y];
        reports.push_back({{"base", s.id(x)}, {"fraction", r.fraction}, {"delta_sep", r.delta_sep}, {"truncated", r.truncated},
                           {"multiple", mult}});
        o.table.push_back({{"base", s.id(x)}, {"fraction", r.fraction}, {"truncated", r.truncated}});
        truncated = truncated || r.truncated;
      }
      o.results = {{"reports", reports}};
      o.complete = !truncated;
      if (truncated) o.code = kLimit;
    } else if (command == "branch-search") {
      const auto& s = run.space();
      const double n = run.dim();
      const auto spec = entropy_s.empty() ? EntropySpec::renyi(std::isinf(n) ? 1.0 : n) : parse_entropy(entropy_s, n);
      PointIndex x = 0;
      if (!base_s.empty())
        x = s.index_of(base_s);
      else
        for (PointIndex p = 0; p < s.size(); ++p)
          if (s.id(p) == "j0") x = p;
      BranchSearchParams bp;
      if (c.cap) bp.chain_cap = *c.cap;
      if (c.tol) bp.tol = *c.tol;
      const auto r = branch_violation_search(s, x, spec, c.k, run.eps(), bp);
      o.results = {{"base", s.id(x)}, {"entropy", spec.name()}, {"found", r.found}, {"intervals_scanned", r.intervals_scanned}};
      if (!r.found) o.results["reason"] = r.reason;
      if (r.violation) {
        o.results["violation"] = violation_json(*r.violation, s);
        o.results["replayed_defect"] = replay(s, *r.violation);
      }
      if (r.state) {
        const auto& st = *r.state;
        auto ids = [&](const std::vector<PointIndex>& v) {
          json a = json::array();
          for (auto p : v) a.push_back(s.id(p));
          return a;
        };
        o.results["state"] = {{"A", ids(st.A)}, {"A1", ids(st.A1)}, {"A2", ids(st.A2)}, {"A3", ids(st.A3)}, {"A4", ids(st.A4)},
                              {"E", ids(st.E)}, {"t1", st.t1}, {"t2", st.t2}, {"delta", st.delta}, {"w", s.id(st.w)},
                              {"supports_disjoint", st.supports_disjoint}, {"mass_term", st.mass_term},
                              {"single_t1", st.single_t1}, {"pooled_t2", st.pooled_t2}, {"branch1_t2", st.branch1_t2},
                              {"branch2_t2", st.branch2_t2}, {"pooled_bound", st.pooled_bound}, {"factor", st.factor},
                              {"violated_link", st.violated_link}};
      }
      o.table.push_back({{"base", s.id(x)}, {"found", r.found}, {"defect", r.violation ? r.violation->defect : 0.0}});
      if (!r.found) o.code = kNegative;
    } else if (command == "generate") {
      SizeParams sp;
      for (const auto& kv : params_s) {
        const auto eq = kv.find('=');
        if (eq == std::string::npos) throw Error(ErrorKind::ParseError, "--param expects key=value");
        sp[kv.substr(0, eq)] = parse_real(kv.substr(eq + 1));
      }
      const auto file = generate_example(example, sp);
      const auto rep = validate_metric(file.space);
      if (!rep.ok()) throw Error(ErrorKind::MetricError, rep.summary());
      if (c.out.empty()) {
        std::cout << space_to_json(file).dump(1) << '\n';
      } else {
        save_space(c.out, file);
        std::cout << json{{"format", kReportFormat}, {"command", command}, {"results", {{"written", c.out}, {"points", file.space.size()}, {"name", file.space.name()}}}}.dump(1) << '\n';
      }
      return kOk;
    } else if (command == "doubling") {
      const auto& s = run.space();
      std::vector<double> radii;
      if (radii_s.empty())
        radii = half_pitch_radii(s);
      else
        for (const auto& r : split(radii_s, ',')) radii.push_back(parse_real(r));
      const double d = doubling_constant(s, radii);
      std::vector<std::pair<double, double>> pts;
      for (double r : radii) {
        const double one = doubling_constant(s, std::vector<double>{r});
        o.table.push_back({{"radius", r}, {"doubling", one}});
        pts.emplace_back(r, one);
      }
      o.results = {{"doubling_constant", d}, {"radii", radii}};
      if (std::isfinite(run.dim())) o.results["bishop_gromov"] = std::pow(2.0, run.dim());
      if (auto* p = run.plot()) *p = {"doubling ratio per radius", "radius", "m(B(x,2r))/m(B(x,r))", {{"sup over x", pts}}};
    }
  } catch (const Error& e) {
    json err{{"format", kReportFormat}, {"command", command}, {"error", {{"kind", to_string(e.kind())}, {"message", e.what()}}}};
    std::cout << err.dump(1) << '\n';
    std::cerr << e.what() << '\n';
    return exit_code_for(e.kind());
  } catch (const std::exception& e) {
    json err{{"format", kReportFormat}, {"command", command}, {"error", {{"kind", "InputError"}, {"message", e.what()}}}};
    std::cout << err.dump(1) << '\n';
    std::cerr << e.what() << '\n';
    return kInput;
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  try {
    if (!c.plot.empty() && !run.plot_data().series.empty()) write_svg(c.plot, run.plot_data());
    if (c.format == "csv") {
      emit(c, to_csv(o.table));
    } else {
      json report{{"format", kReportFormat}, {"command", command}, {"config", run.config()}, {"results", o.results},
                  {"complete", o.complete}, {"wall_time_s", secs}};
      emit(c, report.dump(1) + "\n");
    }
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kInput;
  }
  return o.code;
}
