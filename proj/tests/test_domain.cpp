#include <doctest.h>

#include <cmath>
#include <numbers>

#include "jsg/domain.hpp"
#include "jsg/scenes.hpp"

using namespace jsg;

namespace {

constexpr double kPi = std::numbers::pi;

SubmersionChart flat_chart(double lo = -1, double hi = 4) {
  const Expr z = Expr::number(0), o = Expr::number(1);
  return {Region::rectangle(lo, hi, lo, hi), o, o, z, z, z};
}

const ArcLabel P = ArcLabel::plus();
const ArcLabel M = ArcLabel::minus();
const ArcLabel F = ArcLabel::finite(Expr::number(0));

JSDomain rectangle_domain(double a, double b) {
  return build_domain(flat_chart(), {polygon_loop({{0, 0}, {a, 0}, {a, b}, {0, b}}, {P, F, P, F})}, 1e-5);
}

int count_edges(const InscribedPolygon& p, EdgeKind k) {
  int n = 0;
  for (const auto& e : p.edges) n += e.kind == k;
  return n;
}

}  // namespace

TEST_CASE("build_domain: flat-scherk square is accepted and oriented") {
  const Scene s = builtin_scene("flat-scherk");
  REQUIRE(s.domain);
  const JSDomain& d = *s.domain;
  CHECK(d.arcs.size() == 4);
  for (const auto& a : d.arcs) CHECK(a.length == doctest::Approx(kPi).epsilon(1e-14));
  CHECK(d.contains({0, 0}));
  CHECK_FALSE(d.contains({1.7, 0}));
}

TEST_CASE("build_domain: clockwise input is reoriented") {
  auto loop = polygon_loop({{0, 0}, {0, 1}, {1, 1}, {1, 0}}, {F, F, F, F});
  const JSDomain d = build_domain(flat_chart(), {loop}, 1e-5);
  auto poly = d.loop_polylines()[0];
  poly.pop_back();
  CHECK(polygon_signed_area(poly) > 0);
}

TEST_CASE("build_domain: concave finite arc is rejected") {
  // Top side bulges down into the unit square.
  std::vector<Vec2> top;
  for (int i = 0; i <= 64; ++i) {
    const double x = 1 - i / 64.0;
    top.push_back({x, 1 - 0.3 * std::sin(kPi * x)});
  }
  std::vector<ArcInput> loop{{sample_segment({0, 0}, {1, 0}, 17), F, false, "bottom"},
                             {sample_segment({1, 0}, {1, 1}, 17), F, false, "right"},
                             {top, F, false, "dent"},
                             {sample_segment({0, 1}, {0, 0}, 17), F, false, "left"}};
  CHECK_THROWS_WITH_AS(build_domain(flat_chart(), {loop}, 1e-5), doctest::Contains("dent"), DomainRejected);
  // Bulging outward is fine.
  for (auto& p : loop[2].points) p.y = 2 - p.y;
  loop[1].points = sample_segment({1, 0}, {1, 1}, 17);
  CHECK_NOTHROW(build_domain(flat_chart(), {loop}, 1e-5));
}

TEST_CASE("build_domain: curved infinite arc is rejected") {
  std::vector<Vec2> top;
  for (int i = 0; i <= 64; ++i) {
    const double x = 1 - i / 64.0;
    top.push_back({x, 1 + 0.3 * std::sin(kPi * x)});
  }
  std::vector<ArcInput> loop{{sample_segment({0, 0}, {1, 0}, 17), F, false, "bottom"},
                             {sample_segment({1, 0}, {1, 1}, 17), F, false, "right"},
                             {top, P, false, "bulge"},
                             {sample_segment({0, 1}, {0, 0}, 17), F, false, "left"}};
  CHECK_THROWS_WITH_AS(build_domain(flat_chart(), {loop}, 1e-5), doctest::Contains("not a mu-geodesic"),
                       DomainRejected);
}

TEST_CASE("build_domain: self-intersecting loop and open loop") {
  auto bowtie = polygon_loop({{0, 0}, {1, 1}, {1, 0}, {0, 1}}, {F, F, F, F});
  CHECK_THROWS_AS(build_domain(flat_chart(), {bowtie}, 1e-5), DomainRejected);
  auto open = polygon_loop({{0, 0}, {1, 0}, {1, 1}}, {F, F, F});
  open.pop_back();
  CHECK_THROWS_AS(build_domain(flat_chart(), {open}, 1e-5), DomainRejected);
}

TEST_CASE("build_domain: rotational quadrilateral of catenaries and lines") {
  const Scene s = builtin_scene("rotational-r3");
  REQUIRE(s.domain);
  // Lengths: inner catenary Y/2 + sinh(2Y)/4 over [-1/2, 1/2], outer 1 + 2 sinh(1/2).
  double inner = 0, outer = 0;
  for (const auto& a : s.domain->arcs) {
    if (a.label.kind == LabelKind::PlusInfinity) inner = a.length;
    if (a.label.kind == LabelKind::MinusInfinity) outer = a.length;
  }
  CHECK(inner == doctest::Approx(0.5 + std::sinh(1.0) / 2).epsilon(1e-6));
  CHECK(outer == doctest::Approx(1 + 2 * std::sinh(0.5)).epsilon(1e-6));
}

TEST_CASE("admissibility: alternating square, adjacent infinite sides, reentrant corner") {
  CHECK(check_admissibility(*builtin_scene("flat-scherk").domain).admissible);

  const JSDomain adj = build_domain(flat_chart(), {polygon_loop({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {P, P, F, F})}, 1e-5);
  const auto r = check_admissibility(adj);
  CHECK_FALSE(r.admissible);
  REQUIRE(r.witness);
  CHECK(dist(*r.witness, {1, 0}) < 1e-12);
  CHECK(r.witness_angle == doctest::Approx(kPi / 2));

  // L-shape: the two +inf sides meet at the reflex corner (1,1).
  const JSDomain ell = build_domain(
      flat_chart(), {polygon_loop({{0, 0}, {2, 0}, {2, 1}, {1, 1}, {1, 2}, {0, 2}}, {F, F, P, P, F, F})}, 1e-5);
  CHECK(check_admissibility(ell).admissible);
}

TEST_CASE("enumeration: triangle has only its boundary") {
  const JSDomain tri = build_domain(flat_chart(), {polygon_loop({{0, 0}, {1, 0}, {0, 1}}, {F, P, F})}, 1e-5);
  const PolygonSet s = enumerate_inscribed_polygons(tri);
  REQUIRE(s.polygons.size() == 1);
  CHECK(s.polygons[0].is_boundary);
  CHECK(s.chords.empty());
}

TEST_CASE("enumeration: flat-scherk square gives the boundary and four triangles") {
  const Scene sc = builtin_scene("flat-scherk");
  const JSDomain& d = *sc.domain;
  const PolygonSet s = enumerate_inscribed_polygons(d);
  CHECK(s.chords.size() == 2);
  REQUIRE(s.polygons.size() == 5);
  int boundary = 0, triangles = 0;
  for (const auto& p : s.polygons) {
    if (p.is_boundary) {
      ++boundary;
      CHECK(p.alpha == doctest::Approx(2 * kPi));
      CHECK(p.beta == doctest::Approx(2 * kPi));
    } else {
      ++triangles;
      CHECK(p.edges.size() == 3);
      CHECK(count_edges(p, EdgeKind::Chord) == 1);
      CHECK(p.gamma == doctest::Approx(2 * kPi + kPi * std::sqrt(2.0)).epsilon(1e-9));
      CHECK(p.alpha + p.beta == doctest::Approx(2 * kPi));
    }
  }
  CHECK(boundary == 1);
  CHECK(triangles == 4);
}

TEST_CASE("js conditions: flat-scherk is solvable") {
  const JSReport r = check_js_conditions(*builtin_scene("flat-scherk").domain);
  CHECK(r.admissible);
  CHECK(r.no_finite_arcs);
  CHECK(r.boundary_balanced);
  CHECK(r.violations.empty());
  CHECK(r.solvable);
  CHECK(r.status == "solvable");
}

TEST_CASE("js conditions: rectangle decision table") {
  // +inf on the two sides of length a: the boundary polygon gives 4a < 2a + 2b.
  const JSReport lt = check_js_conditions(rectangle_domain(1.0, 1.5));
  CHECK(lt.solvable);
  const JSReport eq = check_js_conditions(rectangle_domain(1.5, 1.5));
  CHECK_FALSE(eq.solvable);
  REQUIRE_FALSE(eq.violations.empty());
  CHECK(eq.violations[0].marginal);
  CHECK(eq.polygons.polygons[static_cast<std::size_t>(eq.violations[0].polygon)].is_boundary);
  const JSReport gt = check_js_conditions(rectangle_domain(2.0, 1.0));
  CHECK_FALSE(gt.solvable);
  REQUIRE_FALSE(gt.violations.empty());
  CHECK_FALSE(gt.violations[0].marginal);
  CHECK(gt.violations[0].lhs == doctest::Approx(8.0));
  CHECK(gt.violations[0].rhs == doctest::Approx(6.0));
}

TEST_CASE("js conditions: adjacent infinite sides are inadmissible") {
  const JSDomain adj = build_domain(flat_chart(), {polygon_loop({{0, 0}, {1, 0}, {1, 1}, {0, 1}}, {P, P, F, F})}, 1e-5);
  const JSReport r = check_js_conditions(adj);
  CHECK_FALSE(r.admissible);
  CHECK_FALSE(r.solvable);
  CHECK(r.status == "inadmissible");
}

TEST_CASE("js conditions: flat cylinder fails on a closed geodesic") {
  const JSReport r = check_js_conditions(*builtin_scene("flat-cylinder").domain);
  CHECK_FALSE(r.solvable);
  CHECK(r.status == "unsolvable");
  CHECK(r.boundary_balanced);
  REQUIRE(r.polygons.closed_geodesics.size() == 3);
  for (const auto& g : r.polygons.closed_geodesics) {
    CHECK(g.closed);
    for (const Vec2& p : g.points) CHECK(std::fabs(p.y - g.points[0].y) < 1e-9);
  }
  bool witness = false;
  for (const auto& v : r.violations) {
    const auto& p = r.polygons.polygons[static_cast<std::size_t>(v.polygon)];
    if (count_edges(p, EdgeKind::ClosedGeodesic) > 0) {
      witness = true;
      CHECK(p.gamma == doctest::Approx(4 * kPi));
      CHECK(v.lhs == doctest::Approx(4 * kPi));
    }
  }
  CHECK(witness);
}

TEST_CASE("js conditions: other builtin domains are solvable") {
  for (const char* name : {"nil3", "rotational-r3", "h2xr"}) {
    CAPTURE(name);
    const JSReport r = check_js_conditions(*builtin_scene(name).domain);
    CHECK(r.admissible);
    CHECK(r.solvable);
  }
}

TEST_CASE("property: length bookkeeping and deterministic enumeration") {
  for (const char* name : {"flat-scherk", "rotational-r3", "h2xr", "flat-cylinder"}) {
    CAPTURE(name);
    const Scene sc = builtin_scene(name);
    const JSDomain& d = *sc.domain;
    const PolygonSet a = enumerate_inscribed_polygons(d);
    const PolygonSet b = enumerate_inscribed_polygons(d);
    REQUIRE(a.polygons.size() == b.polygons.size());
    for (std::size_t i = 0; i < a.polygons.size(); ++i) {
      const auto& p = a.polygons[i];
      CHECK(p.alpha + p.beta <= p.gamma * (1 + 1e-12));
      CHECK(p.vertex_ids == b.polygons[i].vertex_ids);
      CHECK(p.gamma == b.polygons[i].gamma);
    }
  }
}

TEST_CASE("property: violating polygons are closed chains") {
  for (const JSDomain& d : {rectangle_domain(2.0, 1.0), *builtin_scene("flat-cylinder").domain}) {
    const JSReport r = check_js_conditions(d);
    for (const auto& v : r.violations) {
      const auto& p = r.polygons.polygons[static_cast<std::size_t>(v.polygon)];
      const auto edges = polygon_edge_polylines(d, r.polygons, p);
      if (d.periodic_annulus) {
        for (const auto& e : edges) CHECK(std::fabs(std::fabs(e.back().x - e.front().x) - 2 * kPi) < 1e-9);
        continue;
      }
      // Every vertex of the cycle is an endpoint of exactly two of its edges.
      for (const Vec2& v0 : p.vertices) {
        int touching = 0;
        for (const auto& e : edges) touching += (dist(e.front(), v0) < 1e-12) + (dist(e.back(), v0) < 1e-12);
        CHECK(touching == 2);
      }
    }
  }
}

TEST_CASE("enumeration: overflow is reported") {
  const JSReport r = check_js_conditions(*builtin_scene("flat-scherk").domain, 2);
  CHECK(r.polygons.overflow);
  CHECK(r.status == "inconclusive-solvable");
  CHECK_FALSE(r.solvable);
}
