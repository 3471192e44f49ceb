#include "jsg/scenes.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace jsg {

namespace {

constexpr double kPi = std::numbers::pi;

struct SceneInfo {
  const char* name;
  const char* description;
};

constexpr SceneInfo kScenes[] = {
    {"flat-scherk", "Euclidean R^3; square (-pi/2, pi/2)^2 with +inf on y = +-pi/2 and -inf on x = +-pi/2"},
    {"rotational-r3", "R^3 rotating about an axis, lambda = 1, mu = x; catenary-bounded quadrilateral"},
    {"nil3", "Heisenberg group, tau = 0.5, a = -tau y, b = tau x; unit square with alternating +-inf"},
    {"h2xr", "H^2 x R on the Poincare disk; regular geodesic quadrilateral with alternating +-inf"},
    {"s2xr-cap", "S^2 x R on a stereographic cap of radius 2; chart only"},
    {"flat-cylinder", "flat cylinder, period 2 pi; strip -1 < y < 1 with +inf on y = 1 and -inf on y = -1"},
};

Expr ex(const char* s) { return parse_expr(s); }

std::vector<Vec2> catenary(double a, double y0, double y1, int n) {
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    const double y = y0 + (y1 - y0) * i / (n - 1);
    pts.push_back({a * std::cosh(y / a), y});
  }
  return pts;
}

}  // namespace

std::vector<Vec2> sample_segment(Vec2 a, Vec2 b, int n) {
  if (n < 2) throw std::invalid_argument("sample_segment needs at least two samples");
  std::vector<Vec2> pts;
  pts.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pts.push_back(a + (b - a) * (static_cast<double>(i) / (n - 1)));
  pts.back() = b;
  return pts;
}

std::vector<ArcInput> polygon_loop(const std::vector<Vec2>& corners, const std::vector<ArcLabel>& labels,
                                   int samples_per_side) {
  if (corners.size() != labels.size()) throw std::invalid_argument("polygon_loop: one label per side");
  std::vector<ArcInput> loop;
  for (std::size_t k = 0; k < corners.size(); ++k) {
    ArcInput a;
    a.points = sample_segment(corners[k], corners[(k + 1) % corners.size()], samples_per_side);
    a.label = labels[k];
    a.name = "side " + std::to_string(k);
    loop.push_back(std::move(a));
  }
  return loop;
}

std::vector<Vec2> poincare_geodesic(Vec2 p, Vec2 q, int n) {
  const double det = cross(p, q);
  if (std::fabs(det) < 1e-14) return sample_segment(p, q, n);
  // Centre c with c.p = (|p|^2 + 1)/2 and c.q = (|q|^2 + 1)/2.
  const double rp = 0.5 * (dot(p, p) + 1), rq = 0.5 * (dot(q, q) + 1);
  const Vec2 c{(rp * q.y - rq * p.y) / det, (p.x * rq - q.x * rp) / det};
  const double r = dist(c, p);
  const double t0 = std::atan2(p.y - c.y, p.x - c.x);
  double dt = std::atan2(q.y - c.y, q.x - c.x) - t0;
  while (dt > kPi) dt -= 2 * kPi;
  while (dt < -kPi) dt += 2 * kPi;
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + dt * i / (n - 1);
    pts.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
  }
  pts.front() = p;
  pts.back() = q;
  return pts;
}

std::vector<std::string> builtin_scene_names() {
  std::vector<std::string> out;
  for (const auto& s : kScenes) out.emplace_back(s.name);
  return out;
}

std::string builtin_scene_description(const std::string& name) {
  for (const auto& s : kScenes)
    if (name == s.name) return s.description;
  throw std::invalid_argument("unknown scene '" + name + "'");
}

SubmersionChart builtin_chart(const std::string& name) {
  const Expr zero = Expr::number(0), one = Expr::number(1);
  if (name == "flat-scherk") return {Region::rectangle(-2, 2, -2, 2), one, one, zero, zero, zero};
  if (name == "rotational-r3") return {Region::rectangle(0, 10, -10, 10), one, ex("x"), zero, zero, zero};
  if (name == "nil3") {
    const Expr t = Expr::number(kNil3Tau);
    return {Region::rectangle(-1, 1, -1, 1), one, one, t, -t * Expr::variable(Var::Y), t * Expr::variable(Var::X)};
  }
  if (name == "h2xr") return {Region::disk({0, 0}, 1), ex("2/(1-x^2-y^2)"), one, zero, zero, zero};
  if (name == "s2xr-cap") return {Region::disk({0, 0}, 2), ex("2/(1+x^2+y^2)"), one, zero, zero, zero};
  if (name == "flat-cylinder") return {Region::periodic_strip(0, 2 * kPi, -2, 2), one, one, zero, zero, zero};
  throw std::invalid_argument("unknown scene '" + name + "'");
}

Scene builtin_scene(const std::string& name) {
  Scene sc{name, builtin_scene_description(name), builtin_chart(name), std::nullopt};
  const SubmersionChart& c = sc.chart;
  constexpr double geo_tol = 1e-5;
  const ArcLabel P = ArcLabel::plus(), M = ArcLabel::minus();
  if (name == "flat-scherk") {
    const double h = kPi / 2;
    sc.domain = build_domain(c, {polygon_loop({{-h, -h}, {h, -h}, {h, h}, {-h, h}}, {P, M, P, M})}, geo_tol);
  } else if (name == "nil3") {
    sc.domain = build_domain(c, {polygon_loop({{-0.5, -0.5}, {0.5, -0.5}, {0.5, 0.5}, {-0.5, 0.5}}, {P, M, P, M})},
                             geo_tol);
  } else if (name == "rotational-r3") {
    constexpr int n = 2001;
    const double y0 = -0.5, y1 = 0.5;
    const Vec2 a{std::cosh(y0), y0}, b{2 * std::cosh(y0 / 2), y0};
    const Vec2 cc{2 * std::cosh(y1 / 2), y1}, dd{std::cosh(y1), y1};
    std::vector<ArcInput> loop(4);
    loop[0] = {sample_segment(a, b, 201), ArcLabel::finite(Expr::number(0)), false, "bottom line"};
    loop[1] = {catenary(2, y0, y1, n), M, false, "outer catenary"};
    loop[2] = {sample_segment(cc, dd, 201), ArcLabel::finite(Expr::number(0)), false, "top line"};
    auto inner = catenary(1, y0, y1, n);
    std::reverse(inner.begin(), inner.end());
    loop[3] = {inner, P, false, "inner catenary"};
    sc.domain = build_domain(c, {loop}, geo_tol);
  } else if (name == "h2xr") {
    constexpr int n = 401;
    std::vector<Vec2> v;
    for (int k = 0; k < 4; ++k) {
      const double t = kPi / 4 + k * kPi / 2;
      v.push_back({0.6 * std::cos(t), 0.6 * std::sin(t)});
    }
    std::vector<ArcInput> loop;
    for (int k = 0; k < 4; ++k)
      loop.push_back({poincare_geodesic(v[static_cast<std::size_t>(k)], v[static_cast<std::size_t>((k + 1) % 4)], n),
                      k % 2 == 0 ? P : M, false, "side " + std::to_string(k)});
    sc.domain = build_domain(c, {loop}, geo_tol);
  } else if (name == "flat-cylinder") {
    ArcInput bottom{sample_segment({0, -1}, {2 * kPi, -1}, 129), M, true, "bottom circle"};
    ArcInput top{sample_segment({2 * kPi, 1}, {0, 1}, 129), P, true, "top circle"};
    sc.domain = build_domain(c, {{bottom}, {top}}, geo_tol, Vec2{kPi, 0});
  }
  return sc;
}

}  // namespace jsg
