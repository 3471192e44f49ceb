#pragma once

// Run configuration: a builtin scene or a custom chart with labeled boundary
// arcs, plus numerical settings.
//
// File format (INI style, '#' starts a comment, ';' also at line start):
//
//   [run]            scene, h, schedule, tol, geo_tol, nu_thresh,
//                    output_dir, seed, max_polygons
//   [chart]          region, lambda, mu, tau, a, b
//   [domain]         interior
//   [boundary.arc]   loop, label, value, name, closed, samples and exactly
//                    one of points, segment, geodesic   (repeatable)
//
// region is "rectangle xmin, xmax, ymin, ymax", "disk cx, cy, r" or
// "strip x0, period, ymin, ymax". Point lists separate points with ';' and
// coordinates with ','. Every number and field is an expression.

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "jsg/chart.hpp"
#include "jsg/domain.hpp"

namespace jsg {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct RunConfig {
  std::string source;  // file path, or "<flags>"
  std::string scene;   // builtin name; empty for a custom chart
  std::shared_ptr<const SubmersionChart> chart;
  std::shared_ptr<const JSDomain> domain;  // null for chart-only scenes
  double h = 0;
  std::vector<double> schedule{1, 2, 4, 8};
  double tol = 1e-9;
  double geo_tol = 1e-5;
  double nu_thresh = 0.1;
  std::string output_dir = "jsg_out";
  std::uint32_t seed = 20240601;
  int max_polygons = 10000;
};

// Values given on the command line; they win over the file and over
// JSG_OUTPUT_DIR.
struct ConfigOverrides {
  std::optional<std::string> scene;
  std::optional<double> h;
  std::optional<std::string> schedule;
  std::optional<double> tol, geo_tol, nu_thresh;
  std::optional<std::string> output_dir;
  std::optional<std::uint32_t> seed;
};

RunConfig load_config(const std::string& path, const ConfigOverrides& over = {});
RunConfig parse_config(std::string_view text, const std::string& source, const ConfigOverrides& over = {});
// Config from overrides alone; a scene is required.
RunConfig config_from_overrides(const ConfigOverrides& over);

// "1,2,4,8" -> {1, 2, 4, 8}; strictly increasing positive values.
std::vector<double> parse_schedule(std::string_view text);

}  // namespace jsg
