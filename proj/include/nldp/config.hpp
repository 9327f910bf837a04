#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "nldp/pathsim.hpp"
#include "nldp/problem.hpp"

namespace nldp {

/// Optional experiment parameters carried by a config under "run".
struct RunSection {
  std::vector<Point> points;
  std::vector<Point> probes;
  std::optional<ScalarField> f;
  std::optional<double> alpha;
  std::vector<double> alphas;
  std::vector<double> radii;
  std::optional<Point> center;
  std::optional<double> horizon;
  std::optional<std::int64_t> paths;
  std::optional<std::int64_t> inner_paths;
  std::optional<double> h;
  std::optional<double> threshold;
  std::optional<std::uint64_t> seed;
  SimConfig sim;
};

struct LoadedConfig {
  std::string text;
  nlohmann::json json;
  ProblemSpec spec;
  RunSection run;
};

/// Parses a problem config. Unknown keys, missing keys and type mismatches
/// throw Error(ErrorKind::config) naming the offending path.
LoadedConfig parse_config(const std::string& text);
LoadedConfig load_config(const std::string& path);

/// Scalar field kinds: constant, coordinate, expr, abs_coordinate,
/// inverse_quadratic, indicator_box.
ScalarField parse_scalar_field(const nlohmann::json& j, int dim, const std::string& where);

/// "x1,y1;x2,y2" -> points of dimension dim.
std::vector<Point> parse_points(const std::string& text, int dim);

}  // namespace nldp
