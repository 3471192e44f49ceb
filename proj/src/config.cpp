#include "jsg/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

#include "jsg/mugeo.hpp"
#include "jsg/scenes.hpp"

namespace jsg {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(std::string_view s, char sep) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto k = s.find(sep, start);
    out.push_back(trim(s.substr(start, k == std::string_view::npos ? std::string_view::npos : k - start)));
    if (k == std::string_view::npos) break;
    start = k + 1;
  }
  return out;
}

struct Entry {
  std::string value;
  int line = 0;
};

struct Section {
  std::string name;
  int line = 0;
  std::map<std::string, Entry> keys;
};

class Reader {
 public:
  Reader(std::string source) : source_(std::move(source)) {}

  [[noreturn]] void fail(int line, const std::string& msg) const {
    throw ConfigError(source_ + ":" + std::to_string(line) + ": " + msg);
  }
  [[noreturn]] void fail(const Section& s, const std::string& key, const std::string& msg) const {
    const auto it = s.keys.find(key);
    fail(it == s.keys.end() ? s.line : it->second.line, "field '" + s.name + "." + key + "': " + msg);
  }

  std::vector<Section> parse(std::string_view text) const {
    std::vector<Section> out;
    std::istringstream is{std::string(text)};
    std::string raw;
    int line = 0;
    while (std::getline(is, raw)) {
      ++line;
      std::string s = trim(raw);
      if (s.empty() || s[0] == ';' || s[0] == '#') continue;
      if (const auto h = s.find('#'); h != std::string::npos) s = trim(s.substr(0, h));
      if (s.front() == '[') {
        if (s.back() != ']') fail(line, "unterminated section header");
        out.push_back({trim(std::string_view(s).substr(1, s.size() - 2)), line, {}});
        continue;
      }
      const auto eq = s.find('=');
      if (eq == std::string::npos) fail(line, "expected 'key = value'");
      if (out.empty()) fail(line, "key outside any section");
      const std::string key = trim(std::string_view(s).substr(0, eq));
      if (key.empty()) fail(line, "empty key");
      if (!out.back().keys.emplace(key, Entry{trim(std::string_view(s).substr(eq + 1)), line}).second)
        fail(line, "duplicate key '" + key + "'");
    }
    return out;
  }

  void allow(const Section& s, std::initializer_list<std::string_view> keys) const {
    for (const auto& [k, e] : s.keys) {
      bool ok = false;
      for (auto a : keys) ok = ok || a == k;
      if (!ok) fail(e.line, "unknown key '" + k + "' in [" + s.name + "]");
    }
  }

  const Entry* get(const Section& s, const std::string& key) const {
    const auto it = s.keys.find(key);
    return it == s.keys.end() ? nullptr : &it->second;
  }

  double constant(const Section& s, const std::string& key, std::string_view text) const {
    try {
      const Expr e = parse_expr(text);
      if (!e.is_constant()) fail(s, key, "'" + std::string(text) + "' is not a constant");
      const double v = eval_expr(e, 0, 0);
      return v;
    } catch (const ParseError& e) {
      fail(s, key, std::string(e.what()) + " at offset " + std::to_string(e.offset()));
    } catch (const DomainError& e) {
      fail(s, key, e.what());
    }
  }

  double number(const Section& s, const std::string& key) const { return constant(s, key, get(s, key)->value); }

  long integer(const Section& s, const std::string& key) const {
    const std::string& v = get(s, key)->value;
    long out = 0;
    const auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size()) fail(s, key, "expected an integer, got '" + v + "'");
    return out;
  }

  bool boolean(const Section& s, const std::string& key) const {
    const std::string& v = get(s, key)->value;
    if (v == "true" || v == "yes" || v == "1") return true;
    if (v == "false" || v == "no" || v == "0") return false;
    fail(s, key, "expected true or false, got '" + v + "'");
  }

  Expr field(const Section& s, const std::string& key, double fallback) const {
    const Entry* e = get(s, key);
    if (!e) return Expr::number(fallback);
    try {
      return parse_expr(e->value);
    } catch (const ParseError& err) {
      fail(s, key, std::string(err.what()) + " at offset " + std::to_string(err.offset()));
    }
  }

  std::vector<double> numbers(const Section& s, const std::string& key, std::string_view text) const {
    std::vector<double> out;
    for (const auto& t : split(text, ',')) {
      if (t.empty()) fail(s, key, "empty entry in list");
      out.push_back(constant(s, key, t));
    }
    return out;
  }

  Vec2 point(const Section& s, const std::string& key, std::string_view text) const {
    const auto v = numbers(s, key, text);
    if (v.size() != 2) fail(s, key, "a point needs two coordinates 'x, y'");
    return {v[0], v[1]};
  }

  std::vector<Vec2> points(const Section& s, const std::string& key) const {
    std::vector<Vec2> out;
    for (const auto& t : split(get(s, key)->value, ';'))
      if (!t.empty()) out.push_back(point(s, key, t));
    return out;
  }

 private:
  std::string source_;
};

bool positive(double v) { return v > 0 && std::isfinite(v); }

Region parse_region(const Reader& rd, const Section& s) {
  const Entry* e = rd.get(s, "region");
  if (!e) rd.fail(s.line, "field 'chart.region' is required");
  const auto sp = e->value.find_first_of(" \t");
  const std::string shape = e->value.substr(0, sp);
  const auto v = rd.numbers(s, "region", sp == std::string::npos ? "" : std::string_view(e->value).substr(sp));
  auto need = [&](std::size_t n) {
    if (v.size() != n) rd.fail(s, "region", shape + " takes " + std::to_string(n) + " numbers");
  };
  if (shape == "rectangle") {
    need(4);
    if (!(v[0] < v[1] && v[2] < v[3])) rd.fail(s, "region", "empty rectangle");
    return Region::rectangle(v[0], v[1], v[2], v[3]);
  }
  if (shape == "disk") {
    need(3);
    if (!positive(v[2])) rd.fail(s, "region", "radius must be positive");
    return Region::disk({v[0], v[1]}, v[2]);
  }
  if (shape == "strip") {
    need(4);
    if (!positive(v[1]) || !(v[2] < v[3])) rd.fail(s, "region", "strip needs a positive period and ymin < ymax");
    return Region::periodic_strip(v[0], v[1], v[2], v[3]);
  }
  rd.fail(s, "region", "unknown shape '" + shape + "' (rectangle, disk or strip)");
}

ArcLabel parse_label(const Reader& rd, const Section& s) {
  const Entry* e = rd.get(s, "label");
  if (!e) rd.fail(s.line, "field 'boundary.arc.label' is required");
  const std::string& v = e->value;
  const bool has_value = rd.get(s, "value") != nullptr;
  if (v == "+inf" || v == "plus") {
    if (has_value) rd.fail(s, "value", "only finite arcs take a value");
    return ArcLabel::plus();
  }
  if (v == "-inf" || v == "minus") {
    if (has_value) rd.fail(s, "value", "only finite arcs take a value");
    return ArcLabel::minus();
  }
  if (v == "finite") return ArcLabel::finite(rd.field(s, "value", 0));
  rd.fail(s, "label", "expected +inf, -inf or finite, got '" + v + "'");
}

ArcInput parse_arc(const Reader& rd, const Section& s, const SubmersionChart& chart, double geo_tol, int index) {
  rd.allow(s, {"loop", "label", "value", "name", "closed", "samples", "points", "segment", "geodesic"});
  ArcInput a;
  a.label = parse_label(rd, s);
  a.name = rd.get(s, "name") ? rd.get(s, "name")->value : "arc " + std::to_string(index);
  a.closed = rd.get(s, "closed") && rd.boolean(s, "closed");
  const int shapes = (rd.get(s, "points") != nullptr) + (rd.get(s, "segment") != nullptr) +
                     (rd.get(s, "geodesic") != nullptr);
  if (shapes != 1) rd.fail(s.line, "[boundary.arc] needs exactly one of points, segment, geodesic");
  if (rd.get(s, "samples") && !rd.get(s, "segment")) rd.fail(s, "samples", "only segment arcs take samples");
  if (rd.get(s, "points")) {
    a.points = rd.points(s, "points");
  } else {
    const std::string key = rd.get(s, "segment") ? "segment" : "geodesic";
    const auto ends = rd.points(s, key);
    if (ends.size() != 2) rd.fail(s, key, "expected two end points 'x0, y0; x1, y1'");
    if (key == "segment") {
      const long n = rd.get(s, "samples") ? rd.integer(s, "samples") : 65;
      if (n < 2) rd.fail(s, "samples", "need at least 2");
      a.points = sample_segment(ends[0], ends[1], static_cast<int>(n));
    } else {
      try {
        a.points = mu_geodesic_connect(chart, ends[0], ends[1], std::min(1e-10, geo_tol * 1e-3)).points;
      } catch (const GeodesicError& e) {
        rd.fail(s, key, std::string("no mu-geodesic between the end points: ") + e.what());
      }
    }
  }
  if (a.points.size() < 2) rd.fail(s.line, "arc '" + a.name + "' needs at least two points");
  return a;
}

void apply_run(const Reader& rd, const Section& s, RunConfig& cfg, std::optional<double>& h,
               std::optional<std::string>& scene, std::optional<std::string>& outdir) {
  rd.allow(s, {"scene", "h", "schedule", "tol", "geo_tol", "nu_thresh", "output_dir", "seed", "max_polygons"});
  if (auto e = rd.get(s, "scene")) scene = e->value;
  if (rd.get(s, "h")) h = rd.number(s, "h");
  if (auto e = rd.get(s, "schedule")) {
    try {
      cfg.schedule = parse_schedule(e->value);
    } catch (const ConfigError& err) {
      rd.fail(s, "schedule", err.what());
    }
  }
  if (rd.get(s, "tol")) cfg.tol = rd.number(s, "tol");
  if (rd.get(s, "geo_tol")) cfg.geo_tol = rd.number(s, "geo_tol");
  if (rd.get(s, "nu_thresh")) cfg.nu_thresh = rd.number(s, "nu_thresh");
  if (auto e = rd.get(s, "output_dir")) outdir = e->value;
  if (rd.get(s, "seed")) {
    const long v = rd.integer(s, "seed");
    if (v < 0 || v > 0xffffffffL) rd.fail(s, "seed", "out of range");
    cfg.seed = static_cast<std::uint32_t>(v);
  }
  if (rd.get(s, "max_polygons")) {
    const long v = rd.integer(s, "max_polygons");
    if (v < 1 || v > 10000000) rd.fail(s, "max_polygons", "out of range");
    cfg.max_polygons = static_cast<int>(v);
  }
}

void validate(RunConfig& cfg) {
  auto check = [](double v, const char* name) {
    if (!positive(v)) throw ConfigError(std::string("field '") + name + "': must be positive");
  };
  check(cfg.tol, "tol");
  check(cfg.geo_tol, "geo_tol");
  check(cfg.nu_thresh, "nu_thresh");
  if (cfg.h != 0) check(cfg.h, "h");
  if (cfg.output_dir.empty()) throw ConfigError("field 'output_dir': must not be empty");
}

RunConfig finish(RunConfig cfg, const ConfigOverrides& over, std::optional<double> h, std::optional<std::string> outdir) {
  if (over.h) h = over.h;
  if (over.schedule) {
    try {
      cfg.schedule = parse_schedule(*over.schedule);
    } catch (const ConfigError& e) {
      throw ConfigError(std::string("field 'schedule': ") + e.what());
    }
  }
  if (over.tol) cfg.tol = *over.tol;
  if (over.geo_tol) cfg.geo_tol = *over.geo_tol;
  if (over.nu_thresh) cfg.nu_thresh = *over.nu_thresh;
  if (over.seed) cfg.seed = *over.seed;
  if (const char* env = std::getenv("JSG_OUTPUT_DIR"); env && *env) outdir = env;
  if (over.output_dir) outdir = over.output_dir;
  if (outdir) cfg.output_dir = *outdir;
  if (h) {
    if (!positive(*h)) throw ConfigError("field 'h': must be positive");
    cfg.h = *h;
  } else {
    cfg.h = 0.05 * (cfg.domain ? cfg.domain->diameter() : cfg.chart->region().diameter());
  }
  validate(cfg);
  return cfg;
}

void load_scene(RunConfig& cfg, const std::string& name, bool with_domain) {
  const auto names = builtin_scene_names();
  if (std::find(names.begin(), names.end(), name) == names.end())
    throw ConfigError("field 'scene': unknown scene '" + name + "'");
  Scene sc = builtin_scene(name);
  cfg.scene = name;
  cfg.chart = std::make_shared<const SubmersionChart>(sc.chart);
  if (with_domain && sc.domain) cfg.domain = std::make_shared<const JSDomain>(std::move(*sc.domain));
}

}  // namespace

std::vector<double> parse_schedule(std::string_view text) {
  std::vector<double> out;
  for (const auto& t : split(text, ',')) {
    double v = 0;
    try {
      const Expr e = parse_expr(t);
      if (!e.is_constant()) throw ConfigError("schedule entries must be constants");
      v = eval_expr(e, 0, 0);
    } catch (const ParseError& e) {
      throw ConfigError("schedule entry '" + t + "': " + e.what());
    }
    if (!positive(v)) throw ConfigError("schedule entries must be positive");
    if (!out.empty() && !(v > out.back())) throw ConfigError("schedule must be strictly increasing");
    out.push_back(v);
  }
  return out;
}

RunConfig parse_config(std::string_view text, const std::string& source, const ConfigOverrides& over) {
  const Reader rd(source);
  const auto sections = rd.parse(text);
  RunConfig cfg;
  cfg.source = source;
  std::optional<double> h;
  std::optional<std::string> scene, outdir;
  const Section* chart_sec = nullptr;
  const Section* domain_sec = nullptr;
  std::vector<const Section*> arcs;
  bool have_run = false;
  for (const Section& s : sections) {
    if (s.name == "run") {
      if (have_run) rd.fail(s.line, "duplicate section [run]");
      have_run = true;
      apply_run(rd, s, cfg, h, scene, outdir);
    } else if (s.name == "chart") {
      if (chart_sec) rd.fail(s.line, "duplicate section [chart]");
      chart_sec = &s;
    } else if (s.name == "domain") {
      if (domain_sec) rd.fail(s.line, "duplicate section [domain]");
      domain_sec = &s;
    } else if (s.name == "boundary.arc") {
      arcs.push_back(&s);
    } else {
      rd.fail(s.line, "unknown section [" + s.name + "]");
    }
  }
  if (over.scene) scene = over.scene;

  if (scene && chart_sec) rd.fail(chart_sec->line, "a builtin scene and a [chart] section cannot both be given");
  if (scene) {
    load_scene(cfg, *scene, arcs.empty());
  } else if (chart_sec) {
    const Section& s = *chart_sec;
    rd.allow(s, {"region", "lambda", "mu", "tau", "a", "b"});
    const Region reg = parse_region(rd, s);
    cfg.chart = std::make_shared<const SubmersionChart>(reg, rd.field(s, "lambda", 1), rd.field(s, "mu", 1),
                                                        rd.field(s, "tau", 0), rd.field(s, "a", 0),
                                                        rd.field(s, "b", 0));
  } else {
    throw ConfigError(source + ": either field 'run.scene' or a [chart] section is required");
  }

  std::optional<Vec2> interior;
  if (domain_sec) {
    rd.allow(*domain_sec, {"interior"});
    if (arcs.empty()) rd.fail(domain_sec->line, "[domain] given without any [boundary.arc]");
    if (auto e = rd.get(*domain_sec, "interior")) interior = rd.point(*domain_sec, "interior", e->value);
  }
  if (!arcs.empty()) {
    if (!positive(cfg.geo_tol)) throw ConfigError("field 'geo_tol': must be positive");
    std::map<long, std::vector<ArcInput>> loops;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const Section& s = *arcs[k];
      const long loop = rd.get(s, "loop") ? rd.integer(s, "loop") : 0;
      if (loop < 0) rd.fail(s, "loop", "must be non-negative");
      loops[loop].push_back(parse_arc(rd, s, *cfg.chart, over.geo_tol.value_or(cfg.geo_tol), static_cast<int>(k)));
    }
    std::vector<std::vector<ArcInput>> ordered;
    for (auto& [idx, lp] : loops) {
      if (idx != static_cast<long>(ordered.size()))
        throw ConfigError(source + ": field 'boundary.arc.loop': loop indices must be 0, 1, ... without gaps");
      ordered.push_back(std::move(lp));
    }
    cfg.domain = std::make_shared<const JSDomain>(
        build_domain(*cfg.chart, ordered, over.geo_tol.value_or(cfg.geo_tol), interior));
  }
  return finish(std::move(cfg), over, h, outdir);
}

RunConfig load_config(const std::string& path, const ConfigOverrides& over) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path, over);
}

RunConfig config_from_overrides(const ConfigOverrides& over) {
  if (!over.scene) throw ConfigError("either a config file or --scene is required");
  RunConfig cfg;
  cfg.source = "<flags>";
  load_scene(cfg, *over.scene, true);
  return finish(std::move(cfg), over, std::nullopt, std::nullopt);
}

}  // namespace jsg
