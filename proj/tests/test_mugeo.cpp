#include <doctest.h>

#include <array>
#include <cmath>
#include <numbers>
#include <random>

#include "jsg/mugeo.hpp"
#include "jsg/scenes.hpp"

using namespace jsg;

namespace {

constexpr double kPi = std::numbers::pi;

SubmersionChart flat() { return builtin_chart("flat-scherk"); }
SubmersionChart rotational() { return builtin_chart("rotational-r3"); }

std::vector<Vec2> circle_points(Vec2 c, double r, int n, double t0 = 0, double t1 = 2 * kPi) {
  std::vector<Vec2> pts;
  for (int i = 0; i < n; ++i) {
    const double t = t0 + (t1 - t0) * i / (n - 1);
    pts.push_back({c.x + r * std::cos(t), c.y + r * std::sin(t)});
  }
  return pts;
}

// Larger root a of a cosh(h / a) = x0 by bisection on the decreasing branch.
double catenary_parameter(double h, double x0) {
  double lo = 0.5, hi = x0;  // a cosh(h/a) - x0 changes sign here for h = 0.3, x0 = 1
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (mid * std::cosh(h / mid) - x0 > 0)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

Vec2 scene_center(const std::string& name) {
  if (name == "rotational-r3") return {3, 0};
  if (name == "flat-cylinder") return {1, 0};
  return {0, 0};
}

}  // namespace

TEST_CASE("mu_length: closed-form integrals") {
  const std::array<Vec2, 2> unit{Vec2{0, 0}, Vec2{1, 0}};
  CHECK(mu_length(flat(), std::span<const Vec2>(unit)) == doctest::Approx(1.0).epsilon(1e-15));

  const std::array<Vec2, 2> seg{Vec2{1, 0}, Vec2{2, 0}};
  CHECK(mu_length(rotational(), std::span<const Vec2>(seg)) == doctest::Approx(1.5).epsilon(1e-14));

  const std::array<Vec2, 2> radial{Vec2{0, 0}, Vec2{0.5, 0}};
  CHECK(mu_length(builtin_chart("h2xr"), std::span<const Vec2>(radial)) ==
        doctest::Approx(std::log(3.0)).epsilon(1e-13));
}

TEST_CASE("mu_length: curve leaving the region is an error") {
  const std::array<Vec2, 2> seg{Vec2{0, 0}, Vec2{3, 0}};
  CHECK_THROWS_AS(mu_length(flat(), std::span<const Vec2>(seg)), GeodesicError);
}

TEST_CASE("mu_length: invariant under midpoint resampling") {
  const SubmersionChart c = builtin_chart("h2xr");
  const auto pts = circle_points({0.1, 0.0}, 0.5, 60, 0, 2.5);
  std::vector<Vec2> fine;
  for (std::size_t i = 0; i + 1 < pts.size(); ++i) {
    fine.push_back(pts[i]);
    fine.push_back((pts[i] + pts[i + 1]) * 0.5);
  }
  fine.push_back(pts.back());
  const double a = mu_length(c, std::span<const Vec2>(pts));
  const double b = mu_length(c, std::span<const Vec2>(fine));
  CHECK(std::fabs(a - b) <= 1e-8 * a);
}

TEST_CASE("shoot: flat straight segment") {
  const GeodesicArc g = mu_geodesic_shoot(flat(), {0, 0}, 0, 1, 0.01);
  CHECK(g.end().x == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::fabs(g.end().y) < 1e-14);
  CHECK(g.length() == 1.0);
  CHECK_FALSE(g.truncated);
  for (std::size_t i = 1; i < g.s.size(); ++i) CHECK(g.s[i] > g.s[i - 1]);
  CHECK(g.max_step_error <= 1e-8);
}

TEST_CASE("shoot: rotational chart traces the catenary x = cosh(y)") {
  const GeodesicArc g = mu_geodesic_shoot(rotational(), {1, 0}, kPi / 2, 2.0, 0.01);
  REQUIRE_FALSE(g.truncated);
  double worst = 0;
  for (const Vec2& p : g.points) worst = std::max(worst, std::fabs(p.x - std::cosh(p.y)));
  CHECK(worst < 1e-8);
  // The mu-length of x = cosh(y) from 0 to Y is Y/2 + sinh(2Y)/4.
  const double Y = g.end().y;
  CHECK(Y / 2 + std::sinh(2 * Y) / 4 == doctest::Approx(2.0).epsilon(1e-9));
}

TEST_CASE("shoot: rotational chart horizontal ray stays on y = 0") {
  const GeodesicArc g = mu_geodesic_shoot(rotational(), {1, 0}, 0, 3.0, 0.01);
  for (const Vec2& p : g.points) CHECK(std::fabs(p.y) < 1e-14);
  // mu-length of [1, X] is (X^2 - 1)/2.
  CHECK(g.end().x == doctest::Approx(std::sqrt(7.0)).epsilon(1e-10));
}

TEST_CASE("shoot: truncation at the region boundary") {
  const GeodesicArc g = mu_geodesic_shoot(flat(), {0, 0}, 0, 5, 0.05);
  CHECK(g.truncated);
  CHECK(g.end().x > 2 - 1e-6);
  CHECK(g.end().x < 2);
}

TEST_CASE("shoot: start outside the region is an immediate exit") {
  CHECK_THROWS_AS(mu_geodesic_shoot(flat(), {3, 0}, 0, 1, 0.01), GeodesicError);
}

TEST_CASE("shoot: stop predicate ends the arc") {
  ShootOptions o;
  o.max_step = 0.01;
  o.keep_going = [](const Vec2& p) { return p.x < 0.5; };
  const GeodesicArc g = mu_geodesic_shoot(flat(), {0, 0}, 0, 1.5, o);
  CHECK(g.stopped);
  CHECK(g.end().x < 0.5);
  CHECK(g.end().x > 0.48);
}

TEST_CASE("connect: flat diagonal") {
  const GeodesicArc g = mu_geodesic_connect(flat(), {0, 0}, {1, 1});
  CHECK(g.length() == doctest::Approx(std::sqrt(2.0)).epsilon(1e-10));
  CHECK(dist(g.end(), {1, 1}) == 0.0);
}

TEST_CASE("connect: rotational symmetric catenary") {
  const double a = catenary_parameter(0.3, 1.0);
  CHECK(a == doctest::Approx(0.95).epsilon(0.01));
  const GeodesicArc g = mu_geodesic_connect(rotational(), {1, -0.3}, {1, 0.3});
  double worst = 0;
  for (const Vec2& p : g.points) worst = std::max(worst, std::fabs(p.x - a * std::cosh(p.y / a)));
  CHECK(worst < 1e-7);
  // Length of a cosh(y/a) over [-h, h]: a (h + a sinh(2h/a)/2).
  CHECK(g.length() == doctest::Approx(a * (0.3 + a * std::sinh(0.6 / a) / 2)).epsilon(1e-8));
}

TEST_CASE("connect: rotational pair with no catenary") {
  // min over a of a cosh(1/a) exceeds 1, so no catenary joins (1,-1) and (1,1).
  double m = 1e300;
  for (double a = 0.05; a < 5; a += 1e-4) m = std::min(m, a * std::cosh(1 / a));
  REQUIRE(m > 1.0);
  CHECK_THROWS_AS(mu_geodesic_connect(rotational(), {1, -1}, {1, 1}), NoConnection);
}

TEST_CASE("connect: reported length, quadrature length and reversal agree") {
  const SubmersionChart c = builtin_chart("h2xr");
  const Vec2 p{-0.3, 0.2}, q{0.4, 0.35};
  const GeodesicArc g = mu_geodesic_connect(c, p, q);
  const GeodesicArc r = mu_geodesic_connect(c, q, p);
  CHECK(std::fabs(g.length() - r.length()) <= 1e-8);
  const double quad = mu_length(c, std::span<const Vec2>(g.points));
  CHECK(std::fabs(quad - g.length()) <= 1e-7 * g.length());
  // Poincare-disk distance as an independent oracle.
  const double num = 2 * dot(p - q, p - q);
  const double den = (1 - dot(p, p)) * (1 - dot(q, q));
  CHECK(g.length() == doctest::Approx(std::acosh(1 + num / den)).epsilon(1e-9));
}

TEST_CASE("connect: multiple chords are sorted and distinct") {
  // Two catenaries join (2.0628, -0.5) and (2.0628, 0.5): a = 2 and a small one.
  const Vec2 p{2 * std::cosh(0.25), -0.5}, q{2 * std::cosh(0.25), 0.5};
  ConnectOptions o;
  o.fan = 64;  // the deep catenary leaves p almost horizontally
  const auto all = mu_geodesic_connect_all(rotational(), p, q, o);
  REQUIRE(all.size() >= 2);
  for (std::size_t i = 1; i < all.size(); ++i) CHECK(all[i].length() >= all[i - 1].length());
  CHECK(all[0].length() == doctest::Approx(2 * (0.5 + 2 * std::sinh(0.5) / 2)).epsilon(1e-8));
}

TEST_CASE("curvature: flat circle with inner and outer normal") {
  const auto pts = circle_points({0, 0}, 1.0, 400, 0, kPi);
  const CurveSample in = make_curve(flat(), pts, NormalSide::Left);
  const CurveSample out = make_curve(flat(), pts, NormalSide::Right);
  for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
    CHECK(mu_geodesic_curvature(flat(), in, i) == doctest::Approx(1.0).epsilon(1e-4));
    CHECK(cylinder_mean_curvature(flat(), in, i) == doctest::Approx(0.5).epsilon(1e-4));
  }
  CHECK(is_mu_convex(flat(), in, 1e-9));
  CHECK_FALSE(is_mu_convex(flat(), out, 1e-9));
}

TEST_CASE("curvature: straight line is exactly zero") {
  const auto pts = std::vector<Vec2>{{-1, -1}, {-0.5, -0.5}, {0, 0}, {0.5, 0.5}};
  const CurveSample c = make_curve(flat(), pts, NormalSide::Left);
  CHECK(mu_geodesic_curvature(flat(), c, 1) == 0.0);
  CHECK(mu_geodesic_curvature(flat(), c, 2) == 0.0);
}

TEST_CASE("curvature: end samples and repeated samples are rejected") {
  const CurveSample c = make_curve(flat(), {{0, 0}, {0.5, 0}, {1, 0}}, NormalSide::Left);
  CHECK_THROWS_AS(mu_geodesic_curvature(flat(), c, 0), GeodesicError);
  CurveSample bad = c;
  bad.points[1] = bad.points[0];
  CHECK_THROWS_AS(mu_geodesic_curvature(flat(), bad, 1), GeodesicError);
}

TEST_CASE("curvature: catenary samples are mu-geodesic") {
  std::vector<Vec2> pts;
  for (int i = 0; i <= 2000; ++i) {
    const double y = -1 + 2.0 * i / 2000;
    pts.push_back({std::cosh(y), y});
  }
  const CurveSample c = make_curve(rotational(), pts, NormalSide::Left);
  CHECK(max_abs_mu_curvature(rotational(), c) < 1e-6);
  CHECK(is_mu_convex(rotational(), c, 1e-6));
  CHECK(is_mu_convex(rotational(), make_curve(rotational(), pts, NormalSide::Right), 1e-6));
}

TEST_CASE("cylinder mean curvature: rotational chart examples") {
  const SubmersionChart c = rotational();
  const CurveSample line = make_curve(c, sample_segment({0.5, 0}, {1.5, 0}, 11), NormalSide::Left);
  CHECK(std::fabs(cylinder_mean_curvature(c, line, 5)) < 1e-15);
  // Travelling up x = 1, the left normal points to the axis.
  const CurveSample vert = make_curve(c, sample_segment({1, -0.5}, {1, 0.5}, 11), NormalSide::Left);
  CHECK(2 * cylinder_mean_curvature(c, vert, 5) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(c.mu({1, 0}) * mu_geodesic_curvature(c, vert, 5) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("closed curves wrap through the period translation") {
  const SubmersionChart c = builtin_chart("flat-cylinder");
  const auto pts = sample_segment({0, 0.3}, {2 * kPi, 0.3}, 65);
  std::vector<Vec2> open(pts.begin(), pts.end() - 1);
  const CurveSample cl = make_curve(c, open, NormalSide::Left, true, {2 * kPi, 0});
  CHECK(cl.is_interior(0));
  CHECK(std::fabs(mu_geodesic_curvature(c, cl, 0)) < 1e-12);
  CHECK(mu_length(c, cl) == doctest::Approx(2 * kPi).epsilon(1e-14));
}

TEST_CASE("property: two curvature formulas agree on random curves in every scene") {
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0, 1);
  for (const auto& name : builtin_scene_names()) {
    CAPTURE(name);
    const SubmersionChart c = builtin_chart(name);
    double worst = 0;
    for (int k = 0; k < 10; ++k) {
      const Vec2 ctr = scene_center(name) + Vec2{0.2 * (u(rng) - 0.5), 0.2 * (u(rng) - 0.5)};
      const double r = 0.2 + 0.2 * u(rng), amp = 0.3 * u(rng), ph = 6 * u(rng);
      std::vector<Vec2> pts;
      for (int i = 0; i < 300; ++i) {
        const double t = 4.0 * i / 299;
        const double rr = r * (1 + amp * std::sin(3 * t + ph));
        pts.push_back(ctr + Vec2{rr * std::cos(t), rr * std::sin(t)});
      }
      const NormalSide side = u(rng) < 0.5 ? NormalSide::Left : NormalSide::Right;
      const CurveSample cs = make_curve(c, pts, side);
      for (std::size_t i = 1; i + 1 < pts.size(); ++i) {
        const double h2 = 2 * cylinder_mean_curvature(c, cs, i);
        const double mk = c.mu(pts[i]) * mu_geodesic_curvature(c, cs, i);
        worst = std::max(worst, std::fabs(h2 - mk));
      }
    }
    CHECK(worst < 1e-5);
  }
}

TEST_CASE("property: shot geodesics have vanishing mu-curvature") {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(0, 1);
  for (const auto& name : builtin_scene_names()) {
    CAPTURE(name);
    const SubmersionChart c = builtin_chart(name);
    for (int k = 0; k < 3; ++k) {
      const double th = 2 * kPi * u(rng);
      const double L = 0.5 * c.rho(scene_center(name)).rho;
      const GeodesicArc g = mu_geodesic_shoot(c, scene_center(name), th, L, L / 1000);
      CHECK(max_abs_mu_curvature(c, g.curve(c)) < 1e-6);
    }
  }
}
