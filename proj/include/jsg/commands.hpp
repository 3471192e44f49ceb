#pragma once

// Subcommands of the jsg tool and their file outputs.

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "jsg/config.hpp"
#include "jsg/mesh.hpp"
#include "jsg/mugeo.hpp"

namespace jsg {

// 0: success, including a decided "unsolvable". 1: rejected input or
// domain. 2: numerical failure.
enum ExitStatus : int { kExitOk = 0, kExitRejected = 1, kExitNumerical = 2 };

struct CommandArgs {
  // geodesic: --from with either --to or --angle and --length
  std::optional<Vec2> from, to;
  std::optional<double> angle, length;
  // flux and export
  std::string solution;  // heightfield CSV written by solve
  std::string mesh;      // defaults to mesh.txt beside the solution
  std::string curve;     // polyline CSV, columns x,y
  NormalSide side = NormalSide::Left;
  bool closed = false;
  std::string out;  // explicit output file
};

// cfg may lack a chart for scene-list and export.
int run_command(const std::string& cmd, const RunConfig& cfg, const CommandArgs& args, std::ostream& out,
                std::ostream& err);

// Full command line, argv[0] included.
int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

// Exit status and "module: message" text for an exception from any module.
int report_exception(std::exception_ptr e, std::ostream& err);

// Heightfield CSV (x, y, u, nu, W) reader; returns nodes and heights.
struct HeightField {
  std::vector<Vec2> nodes;
  std::vector<double> u;
};
HeightField read_heightfield_csv(const std::string& path);

}  // namespace jsg
