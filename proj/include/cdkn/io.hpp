#ifndef CDKN_IO_HPP
#define CDKN_IO_HPP

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "json.hpp"

#include "cdkn/errors.hpp"
#include "cdkn/mms.hpp"
#include "cdkn/spaces.hpp"

namespace cdkn {

using json = nlohmann::json;

inline constexpr const char* kSpaceFormat = "cdkn-space/1";
inline constexpr const char* kReportFormat = "cdkn-report/1";

/// A space plus the optional metadata carried by a space file.
struct SpaceFile {
  FiniteMetricMeasureSpace space;
  std::optional<double> intended_K;
  std::optional<double> intended_N;
  std::string targets;
};

/// Reals that may be infinite are written as the string "inf".
inline json real_to_json(double v) {
  if (std::isinf(v)) return v > 0 ? json("inf") : json("-inf");
  if (std::isnan(v)) return json("nan");
  return json(v);
}

inline double real_from_json(const json& j, const std::string& what) {
  if (j.is_number()) return j.get<double>();
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf") return std::numeric_limits<double>::infinity();
    if (s == "-inf") return -std::numeric_limits<double>::infinity();
  }
  throw Error(ErrorKind::ParseError, what + " must be a number or \"inf\"");
}

/// Matrix form always; the file carries the closed metric.
inline json space_to_json(const SpaceFile& file) {
  const auto& s = file.space;
  json j;
  j["format"] = kSpaceFormat;
  j["name"] = s.name();
  j["points"] = s.ids();
  json matrix = json::array();
  for (PointIndex i = 0; i < s.size(); ++i) {
    json row = json::array();
    for (PointIndex k = 0; k < s.size(); ++k) row.push_back(s.dist(i, k));
    matrix.push_back(std::move(row));
  }
  j["metric"] = {{"matrix", std::move(matrix)}};
  j["measure"] = std::vector<double>(s.measure().begin(), s.measure().end());
  json meta = json::object();
  if (file.intended_K) meta["K"] = real_to_json(*file.intended_K);
  if (file.intended_N) meta["N"] = real_to_json(*file.intended_N);
  if (!file.targets.empty()) meta["targets"] = file.targets;
  if (!meta.empty()) j["metadata"] = std::move(meta);
  return j;
}

namespace io_detail {

inline const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorKind::ParseError, std::string("missing field '") + key + "'");
  return j.at(key);
}

}  // namespace io_detail

/// Parses either metric form. Edge lists are closed by all-pairs shortest
/// paths; unless `validate` is false the result must pass validate_metric.
inline SpaceFile space_from_json(const json& j, bool validate = true) {
  using io_detail::field;
  try {
    if (field(j, "format") != kSpaceFormat)
      throw Error(ErrorKind::ParseError, "unsupported format '" + field(j, "format").dump() + "'");
    const auto ids = field(j, "points").get<std::vector<std::string>>();
    const std::size_t n = ids.size();
    if (n == 0) throw Error(ErrorKind::ParseError, "no points");
    std::vector<double> measure(n, 1.0 / static_cast<double>(n));
    if (j.contains("measure")) {
      measure = j.at("measure").get<std::vector<double>>();
      if (measure.size() != n) throw Error(ErrorKind::ParseError, "measure length differs from point count");
    }
    const auto& metric = field(j, "metric");
    std::vector<double> dist;
    if (metric.contains("matrix")) {
      const auto rows = metric.at("matrix").get<std::vector<std::vector<double>>>();
      if (rows.size() != n) throw Error(ErrorKind::ParseError, "matrix must have one row per point");
      for (const auto& row : rows) {
        if (row.size() != n) throw Error(ErrorKind::ParseError, "matrix must be square");
        dist.insert(dist.end(), row.begin(), row.end());
      }
    } else if (metric.contains("edges")) {
      std::vector<WeightedEdge> edges;
      for (const auto& e : metric.at("edges")) {
        if (!e.is_array() || e.size() != 3) throw Error(ErrorKind::ParseError, "edges are [from, to, length] triples");
        edges.push_back({e[0].get<std::string>(), e[1].get<std::string>(), e[2].get<double>()});
      }
      dist = graph_metric(ids, edges);
    } else {
      throw Error(ErrorKind::ParseError, "metric needs 'matrix' or 'edges'");
    }
    SpaceFile out{FiniteMetricMeasureSpace(ids, std::move(dist), std::move(measure), j.value("name", std::string{})),
                  std::nullopt, std::nullopt, {}};
    if (j.contains("metadata")) {
      const auto& meta = j.at("metadata");
      if (meta.contains("K")) out.intended_K = real_from_json(meta.at("K"), "metadata.K");
      if (meta.contains("N")) out.intended_N = real_from_json(meta.at("N"), "metadata.N");
      out.targets = meta.value("targets", std::string{});
    }
    const auto report = validate ? validate_metric(out.space) : ValidationReport{};
    if (!report.ok()) throw Error(ErrorKind::MetricError, report.summary());
    return out;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::ParseError, e.what());
  }
}

inline SpaceFile parse_space(const std::string& text, bool validate = true) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw Error(ErrorKind::ParseError, "byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return space_from_json(j, validate);
}

inline SpaceFile load_space_file(const std::string& path, bool validate = true) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorKind::ParseError, "cannot open '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_space(buf.str(), validate);
}

inline FiniteMetricMeasureSpace load_space(const std::string& path) { return load_space_file(path).space; }

inline void save_space(const std::string& path, const SpaceFile& file) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorKind::ParseError, "cannot write '" + path + "'");
  out << space_to_json(file).dump(1) << '\n';
}

using SizeParams = std::map<std::string, double>;

/// Named example spaces. Size parameters, with defaults:
///   segment n=65 | grid2d m=17 | circle n=16 | tripod L=1 k=8
///   theta L=1 s=0.5 k=16 | weighted_tree depth=3 seed=1
inline SpaceFile generate_example(const std::string& name, const SizeParams& params = {}) {
  auto get = [&](const char* key, double fallback) {
    auto it = params.find(key);
    return it == params.end() ? fallback : it->second;
  };
  auto count = [&](const char* key, double fallback) {
    const double v = get(key, fallback);
    if (!(v >= 0.0) || v != std::floor(v)) throw Error(ErrorKind::Domain, std::string(key) + " must be a non-negative integer");
    return static_cast<std::size_t>(v);
  };
  if (name == "segment")
    return {make_segment(count("n", 65)), 0.0, 1.0, "model space: curvature-dimension, convexity, Poincare"};
  if (name == "grid2d")
    return {make_grid2d(count("m", 17)), 0.0, 2.0, "model space: curvature-dimension, convexity, Poincare"};
  if (name == "circle")
    return {make_circle(count("n", 16)), 0.0, 1.0, "uniqueness negative: only antipodes branch"};
  if (name == "tripod")
    return {make_tripod(get("L", 1.0), count("k", 8)), std::nullopt, std::nullopt, "uniqueness negative: tree, unique geodesics"};
  if (name == "theta")
    return {make_theta(get("L", 1.0), get("s", 0.5), count("k", 16)), std::nullopt, std::nullopt,
            "branching positive: every tail point has two geodesics to j0"};
  if (name == "weighted_tree")
    return {make_weighted_tree(count("depth", 3), static_cast<std::uint64_t>(get("seed", 1))), std::nullopt, std::nullopt,
            "uniqueness negative: tree, unique geodesics"};
  throw Error(ErrorKind::UnknownExample, "no example named '" + name + "'");
}

}  // namespace cdkn

#endif  // CDKN_IO_HPP
