#include <doctest.h>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <unistd.h>

#include "jsg/commands.hpp"
#include "jsg/config.hpp"
#include "jsg/scenes.hpp"

using namespace jsg;
namespace fs = std::filesystem;

namespace {

constexpr double kPi = std::numbers::pi;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("jsg_test_cli_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct Run {
  int code = 0;
  std::string out, err;
};

Run cli(std::vector<std::string> args) {
  args.insert(args.begin(), "jsg");
  std::ostringstream out, err;
  Run r;
  r.code = run_cli(args, out, err);
  r.out = out.str();
  r.err = err.str();
  return r;
}

// Same quadrilateral as the builtin rotational scene, with the catenary
// sides produced by geodesic connection in a hand-written chart.
std::string rotational_config() {
  std::ostringstream os;
  os.precision(17);
  const double y0 = -0.5, y1 = 0.5;
  const Vec2 a{std::cosh(y0), y0}, b{2 * std::cosh(y0 / 2), y0}, c{2 * std::cosh(y1 / 2), y1}, d{std::cosh(y1), y1};
  auto pt = [&os](Vec2 p) -> std::ostream& { return os << p.x << ", " << p.y; };
  os << "[chart]\nregion = rectangle 0, 10, -10, 10\nmu = x\n\n";
  os << "[boundary.arc]\nname = bottom line\nlabel = finite\nsegment = ";
  pt(a) << "; ";
  pt(b) << "\nsamples = 201\n\n";
  os << "[boundary.arc]\nname = outer catenary\nlabel = -inf\ngeodesic = ";
  pt(b) << "; ";
  pt(c) << "\n\n";
  os << "[boundary.arc]\nname = top line\nlabel = finite\nsegment = ";
  pt(c) << "; ";
  pt(d) << "\nsamples = 201\n\n";
  os << "[boundary.arc]\nname = inner catenary\nlabel = +inf\ngeodesic = ";
  pt(d) << "; ";
  pt(a) << "\n";
  return os.str();
}

const char* kAdjacentSquare = R"(
[chart]
region = rectangle -1, 2, -1, 2
[boundary.arc]
label = +inf
segment = 0, 0; 1, 0
[boundary.arc]
label = +inf
segment = 1, 0; 1, 1
[boundary.arc]
label = finite
value = x
segment = 1, 1; 0, 1
[boundary.arc]
label = finite
segment = 0, 1; 0, 0
)";

}  // namespace

TEST_CASE("load_config: a scene alone gets the defaults") {
  ::unsetenv("JSG_OUTPUT_DIR");
  const RunConfig c = parse_config("[run]\nscene = flat-scherk\n", "t.ini");
  REQUIRE(c.domain);
  CHECK(c.scene == "flat-scherk");
  CHECK(c.h == doctest::Approx(0.05 * c.domain->diameter()));
  CHECK(c.schedule == std::vector<double>{1, 2, 4, 8});
  CHECK(c.tol == 1e-9);
  CHECK(c.geo_tol == 1e-5);
  CHECK(c.nu_thresh == 0.1);
  CHECK(c.output_dir == "jsg_out");
}

TEST_CASE("load_config: schedule must increase") {
  try {
    parse_config("[run]\nscene = flat-scherk\nschedule = 4,2\n", "t.ini");
    FAIL("no error");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("schedule") != std::string::npos);
    CHECK(std::string(e.what()).find("t.ini:3") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_schedule("1,1"), ConfigError);
  CHECK_THROWS_AS(parse_schedule("0,1"), ConfigError);
  CHECK(parse_schedule("1, 2.5, 2^3") == std::vector<double>{1, 2.5, 8});
}

TEST_CASE("load_config: parse errors carry a location, validation errors name the field") {
  auto msg = [](const std::string& text) {
    try {
      parse_config(text, "t.ini");
    } catch (const ConfigError& e) {
      return std::string(e.what());
    }
    return std::string("no error");
  };
  CHECK(msg("[run]\nscene flat-scherk\n").find("t.ini:2") != std::string::npos);
  CHECK(msg("[run]\nscene = flat-scherk\nbogus = 1\n").find("bogus") != std::string::npos);
  CHECK(msg("[run]\nscene = flat-scherk\ntol = -1\n").find("tol") != std::string::npos);
  CHECK(msg("[run]\nscene = flat-scherk\nh = x\n").find("h") != std::string::npos);
  CHECK(msg("[run]\nscene = nowhere\n").find("scene") != std::string::npos);
  CHECK(msg("[chart]\nregion = blob 1\n").find("chart.region") != std::string::npos);
  CHECK(msg("[run]\nh = 0.1\n").find("chart") != std::string::npos);
  CHECK(msg("[run]\nscene = flat-scherk\n[chart]\nregion = disk 0, 0, 1\n").find("t.ini:3") != std::string::npos);
  CHECK(msg("[other]\n").find("unknown section") != std::string::npos);
}

TEST_CASE("load_config: numbers are expressions and flags override the file") {
  ::unsetenv("JSG_OUTPUT_DIR");
  ConfigOverrides o;
  o.tol = 1e-11;
  const RunConfig c = parse_config("[run]\nscene = flat-scherk\nh = pi/64\ntol = 1e-8\noutput_dir = a\n", "t", o);
  CHECK(c.h == kPi / 64);
  CHECK(c.tol == 1e-11);
  CHECK(c.output_dir == "a");
  ::setenv("JSG_OUTPUT_DIR", "from-env", 1);
  CHECK(parse_config("[run]\nscene = nil3\noutput_dir = a\n", "t").output_dir == "from-env");
  o.output_dir = "from-flag";
  CHECK(parse_config("[run]\nscene = nil3\noutput_dir = a\n", "t", o).output_dir == "from-flag");
  ::unsetenv("JSG_OUTPUT_DIR");
}

TEST_CASE("load_config: hand-written rotational quadrilateral matches the builtin domain") {
  const RunConfig c = parse_config(rotational_config(), "rot.ini");
  REQUIRE(c.domain);
  const Scene ref = builtin_scene("rotational-r3");
  REQUIRE(c.domain->arcs.size() == ref.domain->arcs.size());
  for (std::size_t k = 0; k < c.domain->arcs.size(); ++k) {
    CAPTURE(k);
    const auto& a = c.domain->arcs[k];
    const auto& b = ref.domain->arcs[k];
    CHECK(a.label.kind == b.label.kind);
    CHECK(a.length == doctest::Approx(b.length).epsilon(1e-6));
    CHECK(hausdorff_distance(a.polyline(), b.polyline()) < 1e-6);
  }
  // Catenary x = c cosh(y / c) through the end points: c = 1 inside, c = 2 outside.
  for (const Vec2& p : c.domain->arcs[3].polyline()) CHECK(std::fabs(p.x - std::cosh(p.y)) < 1e-7);
  for (const Vec2& p : c.domain->arcs[1].polyline()) CHECK(std::fabs(p.x - 2 * std::cosh(p.y / 2)) < 1e-7);
  CHECK(check_js_conditions(*c.domain).status == check_js_conditions(*ref.domain).status);
}

TEST_CASE("load_config: a non-geodesic infinite arc is rejected by domain validation") {
  const std::string text = "[chart]\nregion = rectangle -2, 2, -2, 2\n"
                           "[boundary.arc]\nlabel = +inf\npoints = 0, 0; 0.5, 0.2; 1, 0\n"
                           "[boundary.arc]\nlabel = finite\nsegment = 1, 0; 0, 1\n"
                           "[boundary.arc]\nlabel = finite\nsegment = 0, 1; 0, 0\n";
  CHECK_THROWS_AS(parse_config(text, "t"), DomainRejected);
}

TEST_CASE("check: flat-scherk is solvable with five polygons") {
  const Run r = cli({"--scene", "flat-scherk", "check"});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["solvable"] == true);
  CHECK(j["status"] == "solvable");
  CHECK(j["polygons"].size() == 5);
  CHECK(j["violations"].empty());
}

TEST_CASE("check: adjacent +inf sides are inadmissible with a witness corner") {
  const fs::path dir = scratch("adjacent");
  std::ofstream(dir / "sq.ini") << kAdjacentSquare;
  const Run r = cli({"--config", (dir / "sq.ini").string(), "check"});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["admissible"] == false);
  CHECK(j["solvable"] == false);
  REQUIRE(j["admissibility"].contains("witness"));
  CHECK(j["admissibility"]["witness"][0].get<double>() == doctest::Approx(1));
  CHECK(j["admissibility"]["witness"][1].get<double>() == doctest::Approx(0));
  // solving an inadmissible problem is a rejection
  CHECK(cli({"--config", (dir / "sq.ini").string(), "-o", (dir / "o").string(), "solve"}).code == kExitRejected);
}

TEST_CASE("check: flat-cylinder decides unsolvable with exit 0") {
  const Run r = cli({"--scene", "flat-cylinder", "check"});
  CHECK(r.code == kExitOk);
  const auto j = nlohmann::json::parse(r.out);
  CHECK(j["solvable"] == false);
  CHECK(j["status"] == "unsolvable");
  CHECK_FALSE(j["violations"].empty());
  CHECK_FALSE(j["closed_geodesics"].empty());
}

TEST_CASE("solve: flat-scherk writes level CSVs and a byte-identical report") {
  const fs::path a = scratch("solve_a"), b = scratch("solve_b");
  const Run ra = cli({"--scene", "flat-scherk", "--h", "pi/16", "-o", a.string(), "solve"});
  const Run rb = cli({"--scene", "flat-scherk", "--h", "pi/16", "-o", b.string(), "solve"});
  CHECK(ra.code == kExitOk);
  CHECK(rb.code == kExitOk);
  for (int k = 0; k < 4; ++k) {
    const fs::path f = a / ("level_" + std::to_string(k) + ".csv");
    REQUIRE(fs::exists(f));
    CHECK(slurp(f).rfind("x,y,u,nu,W\n", 0) == 0);
  }
  CHECK(fs::exists(a / "mesh.txt"));
  const std::string rep = slurp(a / "report.json");
  CHECK(rep == slurp(b / "report.json"));
  const auto j = nlohmann::json::parse(rep);
  CHECK(j["levels"].size() == 4);
  CHECK(j["converged"] == true);
  for (const auto& f : j["flux"]) CHECK(f["flux"]["cauchy_schwarz_ok"] == true);
  CHECK(j["divergence"]["lines"].empty());

  // flux of the stored solution across a straight cut, and the OBJ export
  std::ofstream(a / "cut.csv") << "x,y\n-1,0\n1,0\n";
  const Run rf = cli({"--scene", "flat-scherk", "flux", "--solution", (a / "level_3.csv").string(), "--curve",
                      (a / "cut.csv").string()});
  CHECK(rf.code == kExitOk);
  const auto fj = nlohmann::json::parse(rf.out);
  CHECK(fj["length_mu"].get<double>() == doctest::Approx(2.0));
  CHECK(std::fabs(fj["value"].get<double>()) <= fj["length_mu"].get<double>());
  CHECK(fj["solution_residual_norm"].get<double>() <= 1e-9);

  const Run re = cli({"export", "--solution", (a / "level_3.csv").string(), "--out", (a / "g.obj").string()});
  CHECK(re.code == kExitOk);
  const auto side = nlohmann::json::parse(slurp(a / "g.json"));
  CHECK(side["embedding"] == "chart-coordinate");
  CHECK(side["isometric"] == false);
  const std::string obj = slurp(a / "g.obj");
  CHECK(obj.find("\nv ") != std::string::npos);
  CHECK(obj.find("\nf ") != std::string::npos);
}

TEST_CASE("solve: JSG_OUTPUT_DIR redirects output") {
  const fs::path d = scratch("env");
  ::setenv("JSG_OUTPUT_DIR", d.string().c_str(), 1);
  const Run r = cli({"--scene", "nil3", "--h", "0.1", "--schedule", "1,2", "solve"});
  ::unsetenv("JSG_OUTPUT_DIR");
  CHECK(r.code == kExitOk);
  CHECK(fs::exists(d / "report.json"));
  CHECK(fs::exists(d / "level_1.csv"));
}

TEST_CASE("geodesic: straight line in the flat chart as CSV x,y,s") {
  const Run r = cli({"--scene", "flat-scherk", "geodesic", "--from", "0,0", "--angle", "0", "--length", "1"});
  CHECK(r.code == kExitOk);
  std::istringstream in(r.out);
  std::string line;
  std::getline(in, line);
  CHECK(line == "x,y,s");
  int rows = 0;
  double x = 0, y = 0, s = 0;
  char c1 = 0, c2 = 0;
  while (in >> x >> c1 >> y >> c2 >> s) {
    ++rows;
    CHECK(std::fabs(y) < 1e-14);
    CHECK(x == doctest::Approx(s));
  }
  CHECK(rows > 2);
  CHECK(s == doctest::Approx(1.0));
}

TEST_CASE("exit codes") {
  CHECK(cli({}).code == kExitRejected);
  CHECK(cli({"--scene", "nowhere", "check"}).code == kExitRejected);
  CHECK(cli({"--scene", "flat-scherk", "--schedule", "4,2", "solve"}).code == kExitRejected);
  CHECK(cli({"--scene", "flat-scherk", "--h", "3", "solve"}).code == kExitRejected);
  CHECK(cli({"--scene", "s2xr-cap", "check"}).code == kExitRejected);
  CHECK(cli({"check"}).code == kExitRejected);
  CHECK(cli({"--help"}).code == kExitOk);
  // connecting to a point outside the chart is a failure to compute, not a bad config
  const Run g = cli({"--scene", "flat-scherk", "geodesic", "--from", "0,0", "--to", "5,0"});
  CHECK(g.code == kExitNumerical);
  CHECK(g.err.rfind("mugeo: ", 0) == 0);
  const Run s = cli({"scene-list"});
  CHECK(s.code == kExitOk);
  CHECK(nlohmann::json::parse(s.out).size() == builtin_scene_names().size());
}
