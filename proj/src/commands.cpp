#include "jsg/commands.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "jsg/scenes.hpp"
#include "jsg/solver.hpp"

namespace jsg {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

Json vec(const Vec2& p) { return Json::array({p.x, p.y}); }

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

void write_text(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream f(p, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + p.string());
  f << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

const JSDomain& need_domain(const RunConfig& cfg) {
  if (!cfg.chart) throw ConfigError("this command needs a scene or a [chart] section");
  if (!cfg.domain) throw ConfigError("scene '" + cfg.scene + "' has no boundary domain");
  return *cfg.domain;
}

std::string region_text(const Region& r) {
  std::ostringstream os;
  if (r.periodic())
    os << "strip x0=" << r.xmin << " period=" << *r.period << " y in (" << r.ymin << ", " << r.ymax << ")";
  else if (r.shape == Region::Shape::Disk)
    os << "disk center=(" << r.center.x << ", " << r.center.y << ") r=" << r.radius;
  else
    os << "rectangle (" << r.xmin << ", " << r.xmax << ") x (" << r.ymin << ", " << r.ymax << ")";
  return os.str();
}

Json chart_json(const SubmersionChart& c) {
  return Json{{"region", region_text(c.region())},
              {"lambda", to_string(c.lambda_expr())},
              {"mu", to_string(c.mu_expr())},
              {"tau", to_string(c.tau_expr())},
              {"a", to_string(c.a_expr())},
              {"b", to_string(c.b_expr())}};
}

Json arcs_json(const JSDomain& d) {
  Json a = Json::array();
  for (const BoundaryArc& arc : d.arcs) {
    Json j{{"name", arc.name}, {"label", label_name(arc.label.kind)}, {"loop", arc.loop},
           {"closed", arc.closed()}, {"mu_length", arc.length}};
    if (!arc.label.infinite()) j["value"] = to_string(arc.label.value);
    a.push_back(j);
  }
  return a;
}

// ---- scene-list

int cmd_scene_list(std::ostream& out) {
  Json list = Json::array();
  for (const auto& name : builtin_scene_names()) {
    const Scene s = builtin_scene(name);
    Json j{{"name", name}, {"description", s.description}, {"chart", chart_json(s.chart)},
           {"periodic", s.chart.region().periodic()}, {"has_domain", s.domain.has_value()}};
    if (s.domain) {
      j["arcs"] = arcs_json(*s.domain);
      j["diameter"] = s.domain->diameter();
    }
    list.push_back(j);
  }
  out << dump(list);
  return kExitOk;
}

// ---- check

Json polygon_json(const InscribedPolygon& p) {
  Json v = Json::array();
  for (const Vec2& q : p.vertices) v.push_back(vec(q));
  Json e = Json::array();
  for (const PolygonEdge& ed : p.edges) {
    const char* k = ed.kind == EdgeKind::Boundary ? "boundary" : ed.kind == EdgeKind::Chord ? "chord" : "closed-geodesic";
    e.push_back(Json{{"kind", k}, {"index", ed.index}});
  }
  return Json{{"vertices", v}, {"vertex_ids", p.vertex_ids}, {"edges", e}, {"alpha", p.alpha},
              {"beta", p.beta}, {"gamma", p.gamma}, {"is_boundary", p.is_boundary}};
}

Json check_json(const RunConfig& cfg, const JSReport& r) {
  Json adm{{"admissible", r.admissibility.admissible}};
  if (r.admissibility.witness_vertex) adm["witness_vertex"] = *r.admissibility.witness_vertex;
  if (r.admissibility.witness) {
    adm["witness"] = vec(*r.admissibility.witness);
    adm["witness_angle"] = r.admissibility.witness_angle;
  }
  Json polys = Json::array();
  for (const auto& p : r.polygons.polygons) polys.push_back(polygon_json(p));
  Json viol = Json::array();
  for (const Violation& v : r.violations) {
    Json j{{"polygon", v.polygon}, {"condition", v.which}, {"lhs", v.lhs}, {"rhs", v.rhs}, {"marginal", v.marginal}};
    if (v.polygon >= 0 && static_cast<std::size_t>(v.polygon) < r.polygons.polygons.size()) {
      const auto& p = r.polygons.polygons[static_cast<std::size_t>(v.polygon)];
      Json pv = Json::array();
      for (const Vec2& q : p.vertices) pv.push_back(vec(q));
      j["vertices"] = pv;
      j["alpha"] = p.alpha;
      j["beta"] = p.beta;
      j["gamma"] = p.gamma;
    }
    viol.push_back(j);
  }
  Json closed = Json::array();
  for (std::size_t k = 0; k < r.polygons.closed_geodesics.size(); ++k) {
    const GeodesicArc& g = r.polygons.closed_geodesics[k];
    closed.push_back(Json{{"start", vec(g.start())}, {"mu_length", r.polygons.closed_lengths[k]}});
  }
  return Json{{"command", "check"},
              {"scene", cfg.scene},
              {"status", r.status},
              {"admissible", r.admissible},
              {"solvable", r.solvable},
              {"no_finite_arcs", r.no_finite_arcs},
              {"boundary_balanced", r.boundary_balanced},
              {"admissibility", adm},
              {"arcs", arcs_json(*cfg.domain)},
              {"chords", r.polygons.chords.size()},
              {"closed_geodesics", closed},
              {"polygon_count", r.polygons.polygons.size()},
              {"overflow", r.polygons.overflow},
              {"polygons", polys},
              {"violations", viol},
              {"log", r.polygons.log}};
}

int cmd_check(const RunConfig& cfg, std::ostream& out) {
  const JSDomain& d = need_domain(cfg);
  const JSReport r = check_js_conditions(d, cfg.max_polygons);
  out << dump(check_json(cfg, r));
  return kExitOk;
}

// ---- geodesic

int cmd_geodesic(const RunConfig& cfg, const CommandArgs& a, std::ostream& out) {
  if (!cfg.chart) throw ConfigError("geodesic needs a scene or a [chart] section");
  if (!a.from) throw ConfigError("geodesic needs --from");
  GeodesicArc g;
  if (a.to) {
    if (a.angle || a.length) throw ConfigError("give either --to or --angle with --length");
    g = mu_geodesic_connect(*cfg.chart, *a.from, *a.to, std::min(1e-10, cfg.geo_tol));
  } else {
    if (!a.angle || !a.length) throw ConfigError("geodesic needs --to, or --angle with --length");
    if (!(*a.length > 0)) throw ConfigError("field 'length': must be positive");
    g = mu_geodesic_shoot(*cfg.chart, *a.from, *a.angle, *a.length, ShootOptions{});
  }
  std::ostringstream os;
  os << "x,y,s\n";
  for (std::size_t i = 0; i < g.points.size(); ++i)
    os << num(g.points[i].x) << ',' << num(g.points[i].y) << ',' << num(g.s[i]) << '\n';
  if (a.out.empty()) {
    out << os.str();
  } else {
    write_text(a.out, os.str());
    out << a.out << '\n';
  }
  return kExitOk;
}

// ---- solve

// Area-weighted node averages of a per-triangle field, merged across periodic copies.
std::vector<double> node_average(const TriMesh& m, const std::vector<double>& f) {
  const auto rep = m.representatives();
  std::vector<double> sum(m.nodes.size(), 0.0), wt(m.nodes.size(), 0.0);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const double A = m.area(t);
    for (int v : m.triangles[t]) {
      const auto r = static_cast<std::size_t>(rep[static_cast<std::size_t>(v)]);
      sum[r] += A * f[t];
      wt[r] += A;
    }
  }
  std::vector<double> out(m.nodes.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const auto r = static_cast<std::size_t>(rep[i]);
    out[i] = wt[r] > 0 ? sum[r] / wt[r] : 0.0;
  }
  return out;
}

std::string heightfield_csv(const GraphSolution& s) {
  const TriMesh& m = *s.mesh;
  const auto nu = node_average(m, s.nu), w = node_average(m, s.w);
  std::ostringstream os;
  os << "x,y,u,nu,W\n";
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    os << num(m.nodes[i].x) << ',' << num(m.nodes[i].y) << ',' << num(s.u[i]) << ',' << num(nu[i]) << ','
       << num(w[i]) << '\n';
  return os.str();
}

Json flux_json(const FluxReport& f) {
  return Json{{"value", f.value},
              {"length_mu", f.length_mu},
              {"ratio", f.ratio},
              {"segments", f.segments},
              {"cauchy_schwarz_ok", std::fabs(f.value) <= f.length_mu * (1 + 1e-6)}};
}

int cmd_solve(const RunConfig& cfg, std::ostream& out) {
  const JSDomain& d = need_domain(cfg);
  const AdmissibilityResult adm = check_admissibility(d);
  if (!adm.admissible)
    throw DomainRejected("inadmissible domain: a corner between two infinite arcs of the same sign is convex");
  Json js;
  try {
    const JSReport r = check_js_conditions(d, cfg.max_polygons);
    js = Json{{"status", r.status}, {"solvable", r.solvable}, {"violations", r.violations.size()}};
  } catch (const std::exception& e) {
    js = Json{{"status", "error"}, {"error", e.what()}};
  }

  const auto mesh = std::make_shared<const TriMesh>(triangulate(d, cfg.h, cfg.seed));
  SequenceOptions so;
  so.tol = cfg.tol;
  so.seed = cfg.seed;
  const SequenceResult seq = solve_truncated_sequence(d, mesh, cfg.schedule, so);

  const fs::path dir(cfg.output_dir);
  fs::create_directories(dir);
  {
    std::ostringstream ms;
    write_mesh(ms, *mesh);
    write_text(dir / "mesh.txt", ms.str());
  }
  const MeshQuality q = mesh_quality(*mesh);
  bool all_converged = true;
  Json levels = Json::array();
  for (std::size_t k = 0; k < seq.levels.size(); ++k) {
    const SequenceLevel& L = seq.levels[k];
    const std::string file = "level_" + std::to_string(k) + ".csv";
    write_text(dir / file, heightfield_csv(L.solution));
    const NuSummary nus = angle_function_field(L.solution);
    all_converged = all_converged && L.solution.converged;
    levels.push_back(Json{{"n", L.n},
                          {"csv", file},
                          {"converged", L.solution.converged},
                          {"regularized", L.solution.regularized},
                          {"iterations", L.solution.iterations},
                          {"residual_norm", L.solution.residual_norm},
                          {"energy", L.solution.energy},
                          {"u_at_p0", L.u_at_p0},
                          {"interior_change", L.interior_change},
                          {"nu_min", nus.min},
                          {"nu_max", nus.max}});
  }

  Json fluxes = Json::array();
  if (!seq.levels.empty()) {
    const GraphSolution& last = seq.levels.back().solution;
    for (const BoundaryArc& arc : d.arcs) {
      CurveSample c = arc.curve;
      c.side = NormalSide::Right;  // outward
      Json j{{"arc", arc.name}, {"label", label_name(arc.label.kind)}};
      try {
        j["flux"] = flux_json(flux(last, c));
      } catch (const SolverError& e) {
        j["error"] = e.what();
      }
      if (arc.label.kind == LabelKind::PlusInfinity) j["expected_ratio"] = 1;
      if (arc.label.kind == LabelKind::MinusInfinity) j["expected_ratio"] = -1;
      fluxes.push_back(j);
    }
  }

  Json div;
  if (seq.levels.size() >= 2) {
    const DivergenceReport dr = detect_divergence_lines(seq, cfg.nu_thresh);
    Json lines = Json::array();
    for (const DivergenceLine& l : dr.lines)
      lines.push_back(Json{{"seed", vec(l.seed)},
                           {"triangles", l.triangles.size()},
                           {"area", l.area},
                           {"closed", l.line.closed},
                           {"mu_length", l.line.length()},
                           {"max_curvature", l.max_curvature}});
    div = Json{{"lines", lines},
               {"flagged_triangles", dr.flagged.size()},
               {"flagged_area", dr.flagged_area},
               {"total_area", dr.total_area},
               {"min_nu_per_level", dr.min_nu_per_level},
               {"note", dr.note}};
  } else {
    div = Json{{"note", "needs at least two levels"}};
  }

  const Json report{{"command", "solve"},
                    {"scene", cfg.scene},
                    {"h", cfg.h},
                    {"schedule", cfg.schedule},
                    {"tol", cfg.tol},
                    {"nu_thresh", cfg.nu_thresh},
                    {"seed", cfg.seed},
                    {"js", js},
                    {"mesh", Json{{"file", "mesh.txt"},
                                  {"nodes", mesh->node_count()},
                                  {"triangles", mesh->triangle_count()},
                                  {"min_angle_deg", q.min_angle_deg},
                                  {"max_edge", q.max_edge}}},
                    {"p0", vec(seq.p0)},
                    {"levels", levels},
                    {"flux", fluxes},
                    {"divergence", div},
                    {"converged", all_converged}};
  write_text(dir / "report.json", dump(report));
  out << (dir / "report.json").string() << '\n';
  return all_converged ? kExitOk : kExitNumerical;
}

// ---- flux and export

std::vector<std::vector<double>> read_csv(const std::string& path, const std::vector<std::string>& header) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open");
  std::string line;
  if (!std::getline(in, line)) throw ConfigError(path + ": empty file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(c);
  }
  if (cols.size() < header.size() || !std::equal(header.begin(), header.end(), cols.begin())) {
    std::string want;
    for (const auto& h : header) want += (want.empty() ? "" : ",") + h;
    throw ConfigError(path + ":1: expected header starting with '" + want + "'");
  }
  std::vector<std::vector<double>> rows;
  int ln = 1;
  while (std::getline(in, line)) {
    ++ln;
    if (line.empty() || line == "\r") continue;
    std::stringstream ss(line);
    std::string c;
    std::vector<double> row;
    while (std::getline(ss, c, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(c, &used));
        while (used < c.size() && std::isspace(static_cast<unsigned char>(c[used]))) ++used;
        if (used != c.size()) throw std::invalid_argument(c);
      } catch (const std::exception&) {
        throw ConfigError(path + ":" + std::to_string(ln) + ": bad number '" + c + "'");
      }
    }
    if (row.size() < header.size()) throw ConfigError(path + ":" + std::to_string(ln) + ": too few columns");
    rows.push_back(std::move(row));
  }
  return rows;
}

std::shared_ptr<const TriMesh> load_solution_mesh(const CommandArgs& a, const HeightField& hf) {
  const fs::path mp = a.mesh.empty() ? fs::path(a.solution).parent_path() / "mesh.txt" : fs::path(a.mesh);
  std::ifstream in(mp);
  if (!in) throw ConfigError(mp.string() + ": cannot open mesh file");
  auto m = std::make_shared<const TriMesh>(read_mesh(in));
  if (m->nodes.size() != hf.nodes.size()) throw ConfigError(a.solution + ": node count does not match the mesh");
  for (std::size_t i = 0; i < hf.nodes.size(); ++i)
    if (dist(hf.nodes[i], m->nodes[i]) > 1e-12 * (1 + norm(m->nodes[i])))
      throw ConfigError(a.solution + ": node " + std::to_string(i) + " does not match the mesh");
  return m;
}

int cmd_flux(const RunConfig& cfg, const CommandArgs& a, std::ostream& out) {
  if (!cfg.chart) throw ConfigError("flux needs a scene or a [chart] section");
  if (a.solution.empty() || a.curve.empty()) throw ConfigError("flux needs --solution and --curve");
  const HeightField hf = read_heightfield_csv(a.solution);
  const auto mesh = load_solution_mesh(a, hf);
  const GraphSolution s = evaluate_graph(mesh, *cfg.chart, hf.u, cfg.tol);
  std::vector<Vec2> pts;
  for (const auto& r : read_csv(a.curve, {"x", "y"})) pts.push_back({r[0], r[1]});
  if (pts.size() < 2) throw ConfigError(a.curve + ": curve needs at least two points");
  Vec2 shift{};
  if (a.closed) {
    const Vec2 gap = pts.back() - pts.front();
    const auto& P = cfg.chart->region().period;
    const bool repeat = norm(gap) < 1e-12 || (P && std::fabs(std::fabs(gap.x) - *P) < 1e-9 * *P && std::fabs(gap.y) < 1e-12);
    if (repeat) {
      shift = gap;
      pts.pop_back();
    }
  }
  const CurveSample c = make_curve(*cfg.chart, pts, a.side, a.closed, shift);
  Json j = flux_json(flux(s, c));
  j["solution_residual_norm"] = s.residual_norm;
  const std::string text = dump(j);
  if (a.out.empty()) {
    out << text;
  } else {
    write_text(a.out, text);
    out << a.out << '\n';
  }
  return kExitOk;
}

int cmd_export(const RunConfig& cfg, const CommandArgs& a, std::ostream& out) {
  if (a.solution.empty()) throw ConfigError("export needs --solution");
  const HeightField hf = read_heightfield_csv(a.solution);
  const auto mesh = load_solution_mesh(a, hf);
  const fs::path obj = a.out.empty() ? fs::path(cfg.output_dir) / "surface.obj" : fs::path(a.out);
  std::ostringstream os;
  os << "# graph surface, positions (x, y, u) in chart coordinates\n";
  for (std::size_t i = 0; i < mesh->nodes.size(); ++i)
    os << "v " << num(mesh->nodes[i].x) << ' ' << num(mesh->nodes[i].y) << ' ' << num(hf.u[i]) << '\n';
  for (const auto& t : mesh->triangles) os << "f " << t[0] + 1 << ' ' << t[1] + 1 << ' ' << t[2] + 1 << '\n';
  write_text(obj, os.str());
  fs::path side = obj;
  side.replace_extension(".json");
  const Json meta{{"command", "export"},
                  {"obj", obj.filename().string()},
                  {"source", a.solution},
                  {"scene", cfg.scene},
                  {"vertices", mesh->node_count()},
                  {"faces", mesh->triangle_count()},
                  {"embedding", "chart-coordinate"},
                  {"isometric", false},
                  {"note", "vertex positions are (x, y, u) in chart coordinates; the ambient metric is not the "
                           "Euclidean metric of these coordinates"}};
  write_text(side, dump(meta));
  out << obj.string() << '\n';
  return kExitOk;
}

Vec2 parse_point_flag(const std::string& s, const char* name) {
  const auto k = s.find(',');
  if (k == std::string::npos) throw ConfigError(std::string("--") + name + ": expected 'x,y'");
  return {std::stod(s.substr(0, k)), std::stod(s.substr(k + 1))};
}

double parse_constant(const std::string& s, const char* name) {
  try {
    const Expr e = parse_expr(s);
    if (!e.is_constant()) throw ConfigError(std::string("--") + name + ": not a constant");
    return eval_expr(e, 0, 0);
  } catch (const ParseError& e) {
    throw ConfigError(std::string("--") + name + ": " + e.what());
  }
}

}  // namespace

HeightField read_heightfield_csv(const std::string& path) {
  HeightField hf;
  for (const auto& r : read_csv(path, {"x", "y", "u"})) {
    hf.nodes.push_back({r[0], r[1]});
    hf.u.push_back(r[2]);
  }
  if (hf.nodes.empty()) throw ConfigError(path + ": no rows");
  return hf;
}

int report_exception(std::exception_ptr e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& x) {
    err << "config: " << x.what() << '\n';
    return kExitRejected;
  } catch (const DomainRejected& x) {
    err << "domain: " << x.what() << '\n';
    return kExitRejected;
  } catch (const MeshSizeError& x) {
    err << "mesh: " << x.what() << '\n';
    return kExitRejected;
  } catch (const ChartError& x) {
    err << "chart: " << x.what() << '\n';
    return kExitRejected;
  } catch (const ParseError& x) {
    err << "expr: " << x.what() << '\n';
    return kExitRejected;
  } catch (const MeshError& x) {
    err << "mesh: " << x.what() << '\n';
    return kExitNumerical;
  } catch (const SolverError& x) {
    err << "solver: " << x.what() << '\n';
    return kExitNumerical;
  } catch (const GeodesicError& x) {
    err << "mugeo: " << x.what() << '\n';
    return kExitNumerical;
  } catch (const DomainError& x) {
    err << "expr: " << x.what() << '\n';
    return kExitNumerical;
  } catch (const std::invalid_argument& x) {
    err << "input: " << x.what() << '\n';
    return kExitRejected;
  } catch (const std::exception& x) {
    err << "error: " << x.what() << '\n';
    return kExitNumerical;
  }
}

int run_command(const std::string& cmd, const RunConfig& cfg, const CommandArgs& args, std::ostream& out,
                std::ostream& err) {
  try {
    if (cmd == "scene-list") return cmd_scene_list(out);
    if (cmd == "check") return cmd_check(cfg, out);
    if (cmd == "geodesic") return cmd_geodesic(cfg, args, out);
    if (cmd == "solve") return cmd_solve(cfg, out);
    if (cmd == "flux") return cmd_flux(cfg, args, out);
    if (cmd == "export") return cmd_export(cfg, args, out);
    err << "cli: unknown command '" << cmd << "'\n";
    return kExitRejected;
  } catch (...) {
    return report_exception(std::current_exception(), err);
  }
}

int run_cli(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"minimal Killing graphs with infinite boundary values"};
  app.name(argv.empty() ? "jsg" : argv[0]);
  app.set_help_flag("--help", "print help");
  app.require_subcommand(1);
  app.fallthrough();

  std::string config, scene, h, schedule, tol, geo_tol, nu_thresh, outdir;
  std::uint32_t seed = 0;
  app.add_option("-c,--config", config, "config file");
  app.add_option("--scene", scene, "builtin scene name");
  app.add_option("--h", h, "mesh size (expression)");
  app.add_option("--schedule", schedule, "truncation levels, e.g. 1,2,4,8");
  app.add_option("--tol", tol, "Newton residual tolerance");
  app.add_option("--geo-tol", geo_tol, "geodesic and convexity tolerance");
  app.add_option("--nu-thresh", nu_thresh, "divergence threshold on nu");
  app.add_option("-o,--output-dir", outdir, "output directory (overrides JSG_OUTPUT_DIR)");
  auto* seed_opt = app.add_option("--seed", seed, "mesh seed");

  CommandArgs a;
  std::string from, to, side = "left", angle, length;
  app.add_subcommand("scene-list", "print builtin scene metadata as JSON");
  app.add_subcommand("check", "decide solvability and print the report as JSON");
  auto* geo = app.add_subcommand("geodesic", "shoot or connect a mu-geodesic; CSV x,y,s");
  geo->add_option("--from", from, "start point x,y")->required();
  geo->add_option("--to", to, "end point x,y");
  geo->add_option("--angle", angle, "initial angle (radians)");
  geo->add_option("--length", length, "mu-length to shoot");
  geo->add_option("--out", a.out, "output CSV file (default stdout)");
  app.add_subcommand("solve", "truncated sequence; level CSVs and report.json in the output directory");
  auto* fl = app.add_subcommand("flux", "flux of a solution across a curve; JSON");
  fl->add_option("--solution", a.solution, "heightfield CSV")->required();
  fl->add_option("--mesh", a.mesh, "mesh file (default mesh.txt beside the solution)");
  fl->add_option("--curve", a.curve, "curve CSV with columns x,y")->required();
  fl->add_option("--side", side, "normal side, left or right")->check(CLI::IsMember({"left", "right"}));
  fl->add_flag("--closed", a.closed, "curve is closed");
  fl->add_option("--out", a.out, "output JSON file (default stdout)");
  auto* ex = app.add_subcommand("export", "write the graph as an OBJ surface plus a JSON sidecar");
  ex->add_option("--solution", a.solution, "heightfield CSV")->required();
  ex->add_option("--mesh", a.mesh, "mesh file (default mesh.txt beside the solution)");
  ex->add_option("--out", a.out, "output OBJ file (default <output-dir>/surface.obj)");

  std::vector<std::string> args(argv.size() > 1 ? argv.begin() + 1 : argv.end(), argv.end());
  std::reverse(args.begin(), args.end());
  try {
    app.parse(args);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "cli: " << e.what() << '\n';
    return kExitRejected;
  }
  const std::string cmd = app.get_subcommands().front()->get_name();

  try {
    ConfigOverrides over;
    if (!scene.empty()) over.scene = scene;
    if (!h.empty()) over.h = parse_constant(h, "h");
    if (!schedule.empty()) over.schedule = schedule;
    if (!tol.empty()) over.tol = parse_constant(tol, "tol");
    if (!geo_tol.empty()) over.geo_tol = parse_constant(geo_tol, "geo-tol");
    if (!nu_thresh.empty()) over.nu_thresh = parse_constant(nu_thresh, "nu-thresh");
    if (!outdir.empty()) over.output_dir = outdir;
    if (seed_opt->count() > 0) over.seed = seed;

    if (!from.empty()) a.from = parse_point_flag(from, "from");
    if (!to.empty()) a.to = parse_point_flag(to, "to");
    if (!angle.empty()) a.angle = parse_constant(angle, "angle");
    if (!length.empty()) a.length = parse_constant(length, "length");
    a.side = side == "right" ? NormalSide::Right : NormalSide::Left;

    RunConfig cfg;
    if (!config.empty()) {
      cfg = load_config(config, over);
    } else if (over.scene) {
      cfg = config_from_overrides(over);
    } else if (cmd != "scene-list" && cmd != "export") {
      throw ConfigError("either --config or --scene is required");
    } else {
      if (const char* env = std::getenv("JSG_OUTPUT_DIR"); env && *env) cfg.output_dir = env;
      if (over.output_dir) cfg.output_dir = *over.output_dir;
    }
    return run_command(cmd, cfg, a, out, err);
  } catch (...) {
    return report_exception(std::current_exception(), err);
  }
}

}  // namespace jsg
