#include "jsg/domain.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <numbers>
#include <set>
#include <sstream>

namespace jsg {

namespace {

constexpr double kPi = std::numbers::pi;

struct Box {
  double x0, x1, y0, y1;
};

bool overlap(const Box& a, const Box& b) { return a.x0 <= b.x1 && b.x0 <= a.x1 && a.y0 <= b.y1 && b.y0 <= a.y1; }

constexpr std::size_t kChunk = 16;

std::vector<Box> chunk_boxes(const std::vector<Vec2>& pts) {
  std::vector<Box> boxes;
  for (std::size_t s = 0; s + 1 < pts.size(); s += kChunk) {
    Box b{pts[s].x, pts[s].x, pts[s].y, pts[s].y};
    for (std::size_t i = s + 1; i <= std::min(s + kChunk, pts.size() - 1); ++i) {
      b.x0 = std::min(b.x0, pts[i].x);
      b.x1 = std::max(b.x1, pts[i].x);
      b.y0 = std::min(b.y0, pts[i].y);
      b.y1 = std::max(b.y1, pts[i].y);
    }
    boxes.push_back(b);
  }
  return boxes;
}

// True when some segment of a meets some segment of b, ignoring pairs for
// which skip(i, j) holds (segment i of a, segment j of b).
bool polylines_cross(const std::vector<Vec2>& a, const std::vector<Vec2>& b,
                     const std::function<bool(std::size_t, std::size_t)>& skip) {
  if (a.size() < 2 || b.size() < 2) return false;
  const auto ba = chunk_boxes(a), bb = chunk_boxes(b);
  for (std::size_t ca = 0; ca < ba.size(); ++ca) {
    for (std::size_t cb = 0; cb < bb.size(); ++cb) {
      if (!overlap(ba[ca], bb[cb])) continue;
      const std::size_t ia_end = std::min((ca + 1) * kChunk, a.size() - 1);
      const std::size_t ib_end = std::min((cb + 1) * kChunk, b.size() - 1);
      for (std::size_t i = ca * kChunk; i < ia_end; ++i) {
        for (std::size_t j = cb * kChunk; j < ib_end; ++j) {
          if (skip && skip(i, j)) continue;
          if (segments_intersect(a[i], a[i + 1], b[j], b[j + 1])) return true;
        }
      }
    }
  }
  return false;
}

bool closed_polyline_self_intersects(const std::vector<Vec2>& closed) {
  const std::size_t m = closed.size() - 1;  // segment count; closed.back() repeats the start
  return polylines_cross(closed, closed, [m](std::size_t i, std::size_t j) {
    if (j <= i + 1) return true;
    return i == 0 && j == m - 1;
  });
}

bool open_polyline_self_intersects(const std::vector<Vec2>& pts) {
  return polylines_cross(pts, pts, [](std::size_t i, std::size_t j) { return j <= i + 1; });
}

std::vector<Vec2> shifted(const std::vector<Vec2>& pts, Vec2 s) {
  std::vector<Vec2> out(pts);
  for (Vec2& p : out) p += s;
  return out;
}

std::vector<double> crossing_ys(const std::vector<Vec2>& poly, double x, double period) {
  std::vector<double> ys;
  for (int k = -2; k <= 2; ++k) {
    const double xx = x + k * period;
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
      const Vec2& a = poly[i];
      const Vec2& b = poly[i + 1];
      if (a.x == b.x) continue;
      if ((a.x - xx) * (b.x - xx) > 0) continue;
      const double t = (xx - a.x) / (b.x - a.x);
      if (t < 0 || t > 1) continue;
      ys.push_back(a.y + t * (b.y - a.y));
    }
  }
  return ys;
}

double mean_y(const std::vector<Vec2>& pts) {
  double s = 0;
  for (const Vec2& p : pts) s += p.y;
  return s / static_cast<double>(pts.size());
}

std::string fmt_point(const Vec2& p) {
  std::ostringstream os;
  os.precision(6);
  os << "(" << p.x << ", " << p.y << ")";
  return os.str();
}

struct RawArc {
  std::vector<Vec2> points;  // closed arcs: first point not repeated
  Vec2 shift{};              // closed arcs: translation carrying the last sample to the first
  ArcLabel label;
  std::string name;
  bool closed = false;
};

void reverse_loop(std::vector<RawArc>& loop) {
  std::reverse(loop.begin(), loop.end());
  for (RawArc& a : loop) {
    if (a.closed) {
      std::vector<Vec2> rp{a.points[0]};
      for (std::size_t i = a.points.size() - 1; i >= 1; --i) rp.push_back(a.points[i] - a.shift);
      a.points = std::move(rp);
      a.shift = -a.shift;
    } else {
      std::reverse(a.points.begin(), a.points.end());
    }
  }
}

std::vector<Vec2> loop_points(const std::vector<RawArc>& loop) {
  std::vector<Vec2> pts;
  for (const RawArc& a : loop) {
    const std::size_t n = a.closed ? a.points.size() : a.points.size() - 1;
    pts.insert(pts.end(), a.points.begin(), a.points.begin() + static_cast<std::ptrdiff_t>(n));
  }
  return pts;
}

Vec2 loop_shift(const std::vector<RawArc>& loop) {
  if (loop.size() == 1 && loop[0].closed) return loop[0].shift;
  return loop.back().points.back() - loop.front().points.front();
}

}  // namespace

std::string label_name(LabelKind k) {
  switch (k) {
    case LabelKind::PlusInfinity: return "+inf";
    case LabelKind::MinusInfinity: return "-inf";
    case LabelKind::Finite: return "finite";
  }
  return "?";
}

std::vector<Vec2> BoundaryArc::polyline() const {
  std::vector<Vec2> p = curve.points;
  if (curve.closed) p.push_back(curve.points.front() + curve.closure_shift);
  return p;
}

bool JSDomain::has_finite_arcs() const {
  return std::any_of(arcs.begin(), arcs.end(), [](const BoundaryArc& a) { return !a.label.infinite(); });
}

namespace {

std::vector<std::vector<Vec2>> compute_loop_polylines(const std::vector<BoundaryArc>& arcs,
                                                      const std::vector<std::vector<int>>& loops) {
  std::vector<std::vector<Vec2>> out;
  for (const auto& loop : loops) {
    std::vector<Vec2> pts;
    for (int ai : loop) {
      const auto& c = arcs[static_cast<std::size_t>(ai)].curve;
      pts.insert(pts.end(), c.points.begin(), c.points.end());
    }
    const auto& first = arcs[static_cast<std::size_t>(loop.front())].curve;
    if (first.closed) {
      pts.push_back(first.points.front() + first.closure_shift);
    } else {
      // Open arcs repeat junction points; drop the duplicates.
      std::vector<Vec2> dedup;
      for (const Vec2& p : pts)
        if (dedup.empty() || dist(dedup.back(), p) > 0) dedup.push_back(p);
      pts = std::move(dedup);
    }
    out.push_back(std::move(pts));
  }
  return out;
}

}  // namespace

double JSDomain::boundary_distance(const Vec2& p) const {
  double best = std::numeric_limits<double>::infinity();
  const Region& reg = chart.region();
  for (const auto& poly : polylines) {
    if (reg.periodic()) {
      const Vec2 c = reg.canonical(p);
      for (int k = -2; k <= 2; ++k)
        best = std::min(best, point_polyline_distance(c + Vec2{k * *reg.period, 0}, poly));
    } else {
      best = std::min(best, point_polyline_distance(p, poly));
    }
  }
  return best;
}

bool JSDomain::contains(const Vec2& p, double eps) const {
  const Region& reg = chart.region();
  const auto& polys = polylines;
  if (reg.periodic()) {
    const auto lo = crossing_ys(polys[0], p.x, *reg.period);
    const auto hi = crossing_ys(polys[1], p.x, *reg.period);
    if (lo.empty() || hi.empty()) return false;
    const double yb = *std::max_element(lo.begin(), lo.end());
    const double yt = *std::min_element(hi.begin(), hi.end());
    if (!(p.y > yb && p.y < yt)) return false;
  } else {
    if (!point_in_polygon(p, polys[0])) return false;
  }
  return eps <= 0 || boundary_distance(p) > eps;
}

Vec2 JSDomain::centroid() const {
  if (chart.region().periodic()) return interior;
  auto poly = polylines[0];
  poly.pop_back();
  return polygon_centroid(poly);
}

double JSDomain::diameter() const {
  double x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
  for (const auto& poly : polylines) {
    for (const Vec2& p : poly) {
      x0 = std::min(x0, p.x);
      x1 = std::max(x1, p.x);
      y0 = std::min(y0, p.y);
      y1 = std::max(y1, p.y);
    }
  }
  return std::hypot(x1 - x0, y1 - y0);
}

JSDomain build_domain(const SubmersionChart& chart, const std::vector<std::vector<ArcInput>>& loops, double geo_tol,
                      std::optional<Vec2> interior) {
  if (loops.empty()) throw DomainRejected("domain has no boundary loops");
  if (!(geo_tol > 0)) throw std::invalid_argument("geo_tol must be positive");
  const Region& reg = chart.region();
  const bool periodic = reg.periodic();
  const double period = periodic ? *reg.period : 0.0;
  const double snap = 1e-8 * std::max(1.0, reg.diameter());

  auto closing_shift = [&](const Vec2& first, const Vec2& last, const std::string& what) -> Vec2 {
    const Vec2 d = last - first;
    if (norm(d) <= snap) return {};
    if (periodic) {
      for (double s : {period, -period})
        if (dist(d, {s, 0}) <= snap) return {s, 0};
    }
    throw DomainRejected(what + " does not close up");
  };

  std::vector<std::vector<RawArc>> raw(loops.size());
  for (std::size_t li = 0; li < loops.size(); ++li) {
    const auto& in = loops[li];
    if (in.empty()) throw DomainRejected("empty boundary loop");
    for (std::size_t k = 0; k < in.size(); ++k) {
      const ArcInput& a = in[k];
      const std::string nm = a.name.empty() ? "arc " + std::to_string(k) + " of loop " + std::to_string(li) : a.name;
      if (a.points.size() < 2) throw DomainRejected(nm + " needs at least two samples");
      for (const Vec2& p : a.points)
        if (!reg.contains(p)) throw DomainRejected(nm + " leaves the chart region at " + fmt_point(p));
      RawArc r;
      r.label = a.label;
      r.name = nm;
      r.closed = a.closed;
      r.points = a.points;
      if (a.closed) {
        if (in.size() != 1) throw DomainRejected(nm + ": a closed arc must form its own loop");
        r.shift = closing_shift(a.points.front(), a.points.back(), nm);
        r.points.pop_back();
        if (r.points.size() < 3) throw DomainRejected(nm + " needs at least three distinct samples");
      }
      raw[li].push_back(std::move(r));
    }
    auto& lp = raw[li];
    if (!lp[0].closed) {
      for (std::size_t k = 0; k + 1 < lp.size(); ++k) {
        if (dist(lp[k].points.back(), lp[k + 1].points.front()) > snap)
          throw DomainRejected(lp[k].name + " does not end where " + lp[k + 1].name + " starts");
        lp[k + 1].points.front() = lp[k].points.back();
      }
      const Vec2 s = closing_shift(lp.front().points.front(), lp.back().points.back(), "loop " + std::to_string(li));
      lp.back().points.back() = lp.front().points.front() + s;
    }
  }

  // Orientation: domain on the left of every arc.
  if (!periodic) {
    if (raw.size() != 1) throw DomainRejected("only simply connected domains are supported on non-periodic charts");
    if (norm(loop_shift(raw[0])) > 0) throw DomainRejected("loop wraps around a non-periodic chart");
    if (polygon_signed_area(loop_points(raw[0])) < 0) reverse_loop(raw[0]);
  } else {
    if (raw.size() != 2) throw DomainRejected("periodic domains must be annuli bounded by two loops");
    for (const auto& lp : raw)
      if (std::fabs(loop_shift(lp).x) < 0.5 * period) throw DomainRejected("periodic boundary loop must wrap once");
    double y0 = mean_y(loop_points(raw[0])), y1 = mean_y(loop_points(raw[1]));
    if (y0 > y1) {
      std::swap(raw[0], raw[1]);
      std::swap(y0, y1);
    }
    if (!interior) interior = Vec2{reg.xmin + 0.5 * period, 0.5 * (y0 + y1)};
    if (loop_shift(raw[0]).x < 0) reverse_loop(raw[0]);  // bottom travels +x
    if (loop_shift(raw[1]).x > 0) reverse_loop(raw[1]);  // top travels -x
  }

  JSDomain d{chart, {}, {}, {}, {}, geo_tol, periodic, {}};
  auto vertex_id = [&](const Vec2& p) {
    const Vec2 c = reg.canonical(p);
    for (std::size_t i = 0; i < d.vertices.size(); ++i)
      if (dist(reg.canonical(d.vertices[i]), c) <= snap) return static_cast<int>(i);
    d.vertices.push_back(p);
    return static_cast<int>(d.vertices.size() - 1);
  };
  for (std::size_t li = 0; li < raw.size(); ++li) {
    std::vector<int> ids;
    for (RawArc& r : raw[li]) {
      BoundaryArc b;
      try {
        b.curve = make_curve(chart, r.points, NormalSide::Left, r.closed, r.shift);
      } catch (const GeodesicError& e) {
        throw DomainRejected(r.name + ": " + e.what());
      }
      b.label = r.label;
      b.name = r.name;
      b.loop = static_cast<int>(li);
      if (!r.closed) {
        b.v_start = vertex_id(r.points.front());
        b.v_end = vertex_id(r.points.back());
      }
      b.length = mu_length(chart, b.curve);
      ids.push_back(static_cast<int>(d.arcs.size()));
      d.arcs.push_back(std::move(b));
    }
    d.loops.push_back(std::move(ids));
  }

  d.polylines = compute_loop_polylines(d.arcs, d.loops);

  // Curvature tests.
  for (const BoundaryArc& b : d.arcs) {
    double worst = 0;
    Vec2 where{};
    for (std::size_t i = 0; i < b.curve.size(); ++i) {
      if (!b.curve.is_interior(i)) continue;
      const double k = mu_geodesic_curvature(chart, b.curve, i);
      const double bad = b.label.infinite() ? std::fabs(k) : -k;
      if (bad > worst) {
        worst = bad;
        where = b.curve.points[i];
      }
    }
    if (worst > geo_tol) {
      std::ostringstream os;
      os.precision(3);
      if (b.label.infinite())
        os << b.name << " labeled " << label_name(b.label.kind) << " is not a mu-geodesic: |kappa| = " << worst;
      else
        os << b.name << " is not mu-convex toward the domain: kappa = " << -worst;
      os << " at " << fmt_point(where);
      throw DomainRejected(os.str());
    }
  }

  // Simplicity of loops and disjointness between loops.
  const auto& polys = d.loop_polylines();
  for (std::size_t li = 0; li < polys.size(); ++li) {
    if (closed_polyline_self_intersects(polys[li]))
      throw DomainRejected("boundary loop " + std::to_string(li) + " intersects itself");
    if (periodic) {
      const std::size_t m = polys[li].size() - 2;  // last segment index
      const auto skip_plus = [m](std::size_t i, std::size_t j) { return i == m && j == 0; };
      const auto skip_minus = [m](std::size_t i, std::size_t j) { return i == 0 && j == m; };
      const Vec2 wrap = polys[li].back() - polys[li].front();
      if (polylines_cross(polys[li], shifted(polys[li], wrap), skip_plus) ||
          polylines_cross(polys[li], shifted(polys[li], -wrap), skip_minus))
        throw DomainRejected("boundary loop " + std::to_string(li) + " meets its periodic translate");
    }
  }
  if (periodic) {
    for (int k = -2; k <= 2; ++k)
      if (polylines_cross(polys[0], shifted(polys[1], {k * period, 0}), {}))
        throw DomainRejected("the two boundary loops intersect");
  }

  if (interior) {
    d.interior = *interior;
  } else {
    d.interior = d.centroid();
    if (!d.contains(d.interior)) {
      // Grid search for the point farthest from the boundary.
      const auto& poly = polys[0];
      double x0 = poly[0].x, x1 = x0, y0 = poly[0].y, y1 = y0;
      for (const Vec2& p : poly) {
        x0 = std::min(x0, p.x);
        x1 = std::max(x1, p.x);
        y0 = std::min(y0, p.y);
        y1 = std::max(y1, p.y);
      }
      double best = -1;
      for (int i = 1; i < 40; ++i) {
        for (int j = 1; j < 40; ++j) {
          const Vec2 p{x0 + (x1 - x0) * i / 40.0, y0 + (y1 - y0) * j / 40.0};
          if (!d.contains(p)) continue;
          const double bd = d.boundary_distance(p);
          if (bd > best) {
            best = bd;
            d.interior = p;
          }
        }
      }
    }
  }
  if (!d.contains(d.interior)) throw DomainRejected("interior point " + fmt_point(d.interior) + " is not inside the domain");
  return d;
}

AdmissibilityResult check_admissibility(const JSDomain& d) {
  AdmissibilityResult r;
  for (const auto& loop : d.loops) {
    const std::size_t n = loop.size();
    if (n == 1 && d.arcs[static_cast<std::size_t>(loop[0])].closed()) continue;
    for (std::size_t k = 0; k < n; ++k) {
      const BoundaryArc& in = d.arcs[static_cast<std::size_t>(loop[k])];
      const BoundaryArc& out = d.arcs[static_cast<std::size_t>(loop[(k + 1) % n])];
      if (!in.label.infinite() || in.label.kind != out.label.kind) continue;
      const Vec2 ti = in.curve.tangents.back(), to = out.curve.tangents.front();
      const double turn = std::atan2(cross(ti, to), dot(ti, to));
      if (turn > 1e-9) {
        r.admissible = false;
        r.witness_vertex = in.v_end;
        r.witness = in.curve.points.back();
        r.witness_angle = kPi - turn;
        return r;
      }
    }
  }
  return r;
}

namespace {

struct Edge {
  int u, v;
  const std::vector<Vec2>* poly;  // from u to v
  PolygonEdge ref;
};

bool chord_pair_crosses(const Edge& a, const Edge& b) {
  const auto& pa = *a.poly;
  const auto& pb = *b.poly;
  const std::size_t la = pa.size() - 2, lb = pb.size() - 2;  // last segment indices
  return polylines_cross(pa, pb, [&](std::size_t i, std::size_t j) {
    const bool a_start = i == 0, a_end = i == la, b_start = j == 0, b_end = j == lb;
    if (a_start && b_start && a.u == b.u) return true;
    if (a_start && b_end && a.u == b.v) return true;
    if (a_end && b_start && a.v == b.u) return true;
    if (a_end && b_end && a.v == b.v) return true;
    return false;
  });
}

void add_lengths(const JSDomain& d, const PolygonSet& set, InscribedPolygon& poly) {
  for (const PolygonEdge& e : poly.edges) {
    double len = 0;
    if (e.kind == EdgeKind::Boundary) {
      const BoundaryArc& b = d.arcs[static_cast<std::size_t>(e.index)];
      len = b.length;
      if (b.label.kind == LabelKind::PlusInfinity) poly.alpha += len;
      if (b.label.kind == LabelKind::MinusInfinity) poly.beta += len;
    } else if (e.kind == EdgeKind::Chord) {
      len = set.chords[static_cast<std::size_t>(e.index)].length;
    } else {
      len = set.closed_lengths[static_cast<std::size_t>(e.index)];
    }
    poly.gamma += len;
  }
}

void enumerate_simply_connected(const JSDomain& d, int max_count, PolygonSet& set) {
  const SubmersionChart& chart = d.chart;
  const double diam = d.diameter();

  // A domain bounded by one closed arc has no vertices; its boundary is the only polygon.
  if (d.vertices.empty()) {
    InscribedPolygon p;
    for (int ai : d.loops[0]) p.edges.push_back({EdgeKind::Boundary, ai});
    p.is_boundary = true;
    add_lengths(d, set, p);
    set.polygons.push_back(std::move(p));
    return;
  }

  const int nv = static_cast<int>(d.vertices.size());
  for (int i = 0; i < nv; ++i) {
    for (int j = i + 1; j < nv; ++j) {
      std::vector<GeodesicArc> sols;
      try {
        sols = mu_geodesic_connect_all(chart, d.vertices[static_cast<std::size_t>(i)],
                                       d.vertices[static_cast<std::size_t>(j)]);
      } catch (const GeodesicError& e) {
        set.log.push_back("chord " + std::to_string(i) + "-" + std::to_string(j) + ": " + e.what());
        continue;
      }
      for (GeodesicArc& g : sols) {
        bool duplicate = false;
        for (const BoundaryArc& b : d.arcs) {
          const bool same_ends = (b.v_start == i && b.v_end == j) || (b.v_start == j && b.v_end == i);
          if (same_ends && hausdorff_distance(g.points, b.polyline()) < 1e-6 * diam) duplicate = true;
        }
        if (duplicate) continue;
        bool inside = true;
        for (std::size_t k = 1; k + 1 < g.points.size() && inside; ++k) inside = d.contains(g.points[k]);
        if (!inside) {
          set.log.push_back("chord " + std::to_string(i) + "-" + std::to_string(j) + " leaves the domain");
          continue;
        }
        if (open_polyline_self_intersects(g.points)) {
          set.log.push_back("chord " + std::to_string(i) + "-" + std::to_string(j) + " is not embedded");
          continue;
        }
        Chord c;
        c.length = mu_length(chart, std::span<const Vec2>(g.points));
        c.v0 = i;
        c.v1 = j;
        c.arc = std::move(g);
        set.chords.push_back(std::move(c));
      }
    }
  }

  std::vector<Edge> edges;
  std::vector<std::vector<Vec2>> arc_polys(d.arcs.size());
  for (std::size_t a = 0; a < d.arcs.size(); ++a) {
    arc_polys[a] = d.arcs[a].polyline();
    edges.push_back({d.arcs[a].v_start, d.arcs[a].v_end, &arc_polys[a], {EdgeKind::Boundary, static_cast<int>(a)}});
  }
  for (std::size_t c = 0; c < set.chords.size(); ++c)
    edges.push_back({set.chords[c].v0, set.chords[c].v1, &set.chords[c].arc.points, {EdgeKind::Chord, static_cast<int>(c)}});

  const std::size_t ne = edges.size();
  std::vector<std::vector<char>> crosses(ne, std::vector<char>(ne, 0));
  for (std::size_t a = d.arcs.size(); a < ne; ++a)
    for (std::size_t b = a + 1; b < ne; ++b)
      crosses[a][b] = crosses[b][a] = chord_pair_crosses(edges[a], edges[b]) ? 1 : 0;

  std::vector<std::vector<std::size_t>> incident(static_cast<std::size_t>(nv));
  for (std::size_t e = 0; e < ne; ++e) {
    incident[static_cast<std::size_t>(edges[e].u)].push_back(e);
    if (edges[e].v != edges[e].u) incident[static_cast<std::size_t>(edges[e].v)].push_back(e);
  }

  std::set<std::vector<std::size_t>> seen;
  std::vector<std::vector<std::size_t>> cycles;  // edge sequences
  std::vector<std::vector<int>> cycle_vertices;
  std::vector<std::size_t> path;
  std::vector<int> path_v;
  std::vector<char> visited(static_cast<std::size_t>(nv), 0);

  std::function<void(int, int)> dfs = [&](int s, int v) {
    if (set.overflow) return;
    for (std::size_t e : incident[static_cast<std::size_t>(v)]) {
      if (!path.empty() && e == path.back()) continue;
      if (std::find(path.begin(), path.end(), e) != path.end()) continue;
      const int w = edges[e].u == v ? edges[e].v : edges[e].u;
      bool ok = true;
      for (std::size_t f : path)
        if (crosses[e][f]) ok = false;
      if (!ok) continue;
      if (w == s) {
        std::vector<std::size_t> key(path);
        key.push_back(e);
        std::sort(key.begin(), key.end());
        if (seen.insert(key).second) {
          std::vector<std::size_t> cyc(path);
          cyc.push_back(e);
          cycles.push_back(std::move(cyc));
          cycle_vertices.push_back(path_v);
          if (static_cast<int>(cycles.size()) >= max_count) {
            set.overflow = true;
            return;
          }
        }
        continue;
      }
      if (w < s || visited[static_cast<std::size_t>(w)]) continue;
      visited[static_cast<std::size_t>(w)] = 1;
      path.push_back(e);
      path_v.push_back(w);
      dfs(s, w);
      path.pop_back();
      path_v.pop_back();
      visited[static_cast<std::size_t>(w)] = 0;
      if (set.overflow) return;
    }
  };
  for (int s = 0; s < nv && !set.overflow; ++s) {
    visited.assign(static_cast<std::size_t>(nv), 0);
    visited[static_cast<std::size_t>(s)] = 1;
    path_v = {s};
    dfs(s, s);
  }

  std::set<std::size_t> boundary_edges;
  for (std::size_t a = 0; a < d.arcs.size(); ++a) boundary_edges.insert(a);

  for (std::size_t ci = 0; ci < cycles.size(); ++ci) {
    const auto& cyc = cycles[ci];
    const auto& vs = cycle_vertices[ci];
    // Closed polyline following the cycle.
    std::vector<Vec2> ring;
    for (std::size_t k = 0; k < cyc.size(); ++k) {
      const Edge& e = edges[cyc[k]];
      const auto& pts = *e.poly;
      const bool forward = e.u == vs[k];
      const std::size_t n = pts.size();
      for (std::size_t t = 0; t + 1 < n; ++t) ring.push_back(forward ? pts[t] : pts[n - 1 - t]);
    }
    const double area = polygon_signed_area(ring);
    if (std::fabs(area) < 1e-14 * diam * diam) {
      set.log.push_back("degenerate cycle discarded");
      continue;
    }
    // Probe just inside the cycle next to the middle of its first edge.
    const auto& pts = *edges[cyc[0]].poly;
    const std::size_t m = pts.size() / 2;
    const Vec2 dir = normalized(pts[std::min(m + 1, pts.size() - 1)] - pts[m > 0 ? m - 1 : 0]);
    const bool forward = edges[cyc[0]].u == vs[0];
    Vec2 inward = perp(forward ? dir : -dir);
    if (area < 0) inward = -inward;
    bool valid = false;
    for (double eps = 1e-4 * diam; eps > 1e-9 * diam && !valid; eps *= 0.1) {
      const Vec2 probe = pts[m] + inward * eps;
      valid = point_in_polygon(probe, ring) && d.contains(probe);
    }
    if (!valid) {
      set.log.push_back("cycle does not bound a subdomain; discarded");
      continue;
    }
    InscribedPolygon poly;
    for (std::size_t e : cyc) poly.edges.push_back(edges[e].ref);
    poly.vertex_ids = vs;
    for (int v : vs) poly.vertices.push_back(d.vertices[static_cast<std::size_t>(v)]);
    poly.is_boundary = std::set<std::size_t>(cyc.begin(), cyc.end()) == boundary_edges;
    add_lengths(d, set, poly);
    set.polygons.push_back(std::move(poly));
  }

  std::stable_sort(set.polygons.begin(), set.polygons.end(), [](const InscribedPolygon& a, const InscribedPolygon& b) {
    std::vector<int> ka(a.vertex_ids), kb(b.vertex_ids);
    std::sort(ka.begin(), ka.end());
    std::sort(kb.begin(), kb.end());
    if (ka != kb) return ka < kb;
    return a.gamma < b.gamma;
  });
}

// Closed mu-geodesics winding once around a periodic annulus. Seeds sit at
// evenly spaced heights across the vertical extent.
void find_closed_geodesics(const JSDomain& d, PolygonSet& set) {
  const SubmersionChart& chart = d.chart;
  const double period = *chart.region().period;
  const auto& polys = d.loop_polylines();
  const double x = d.interior.x;
  const auto lo = crossing_ys(polys[0], x, period);
  const auto hi = crossing_ys(polys[1], x, period);
  const double yb = *std::max_element(lo.begin(), lo.end());
  const double yt = *std::min_element(hi.begin(), hi.end());
  for (double f : {0.25, 0.5, 0.75}) {
    const Vec2 p{x, yb + f * (yt - yb)};
    std::vector<GeodesicArc> sols;
    try {
      sols = mu_geodesic_connect_all(chart, p, p + Vec2{period, 0});
    } catch (const GeodesicError& e) {
      set.log.push_back(std::string("closed geodesic search: ") + e.what());
      continue;
    }
    for (GeodesicArc& g : sols) {
      bool inside = true;
      for (const Vec2& q : g.points)
        if (!d.contains(q)) inside = false;
      if (!inside) continue;
      bool dup = false;
      for (const auto& h : set.closed_geodesics) {
        for (int k = -1; k <= 1 && !dup; ++k)
          if (hausdorff_distance(g.points, shifted(h.points, {k * period, 0})) < 1e-6 * period) dup = true;
      }
      if (dup) continue;
      g.closed = true;
      set.closed_lengths.push_back(mu_length(chart, std::span<const Vec2>(g.points)));
      set.closed_geodesics.push_back(std::move(g));
    }
  }
}

void enumerate_annulus(const JSDomain& d, int max_count, PolygonSet& set) {
  find_closed_geodesics(d, set);
  const double period = *d.chart.region().period;

  struct Component {
    std::vector<PolygonEdge> edges;
    std::vector<Vec2> poly;
  };
  std::vector<Component> comps;
  const auto& polys = d.loop_polylines();
  for (std::size_t li = 0; li < d.loops.size(); ++li) {
    Component c;
    for (int ai : d.loops[li]) c.edges.push_back({EdgeKind::Boundary, ai});
    c.poly = polys[li];
    comps.push_back(std::move(c));
  }
  for (std::size_t g = 0; g < set.closed_geodesics.size(); ++g)
    comps.push_back({{{EdgeKind::ClosedGeodesic, static_cast<int>(g)}}, set.closed_geodesics[g].points});

  for (std::size_t i = 0; i < comps.size(); ++i) {
    for (std::size_t j = i + 1; j < comps.size(); ++j) {
      bool meet = false;
      for (int k = -2; k <= 2 && !meet; ++k)
        meet = polylines_cross(comps[i].poly, shifted(comps[j].poly, {k * period, 0}), {});
      if (meet) continue;
      if (static_cast<int>(set.polygons.size()) >= max_count) {
        set.overflow = true;
        return;
      }
      InscribedPolygon p;
      p.edges = comps[i].edges;
      p.edges.insert(p.edges.end(), comps[j].edges.begin(), comps[j].edges.end());
      p.is_boundary = i == 0 && j == 1;
      add_lengths(d, set, p);
      set.polygons.push_back(std::move(p));
    }
  }
}

}  // namespace

PolygonSet enumerate_inscribed_polygons(const JSDomain& d, int max_count) {
  if (max_count < 1) throw std::invalid_argument("max_count must be positive");
  PolygonSet set;
  if (d.periodic_annulus)
    enumerate_annulus(d, max_count, set);
  else
    enumerate_simply_connected(d, max_count, set);
  return set;
}

std::vector<std::vector<Vec2>> polygon_edge_polylines(const JSDomain& d, const PolygonSet& set,
                                                      const InscribedPolygon& p) {
  std::vector<std::vector<Vec2>> out;
  for (const PolygonEdge& e : p.edges) {
    if (e.kind == EdgeKind::Boundary)
      out.push_back(d.arcs[static_cast<std::size_t>(e.index)].polyline());
    else if (e.kind == EdgeKind::Chord)
      out.push_back(set.chords[static_cast<std::size_t>(e.index)].arc.points);
    else
      out.push_back(set.closed_geodesics[static_cast<std::size_t>(e.index)].points);
  }
  return out;
}

JSReport check_js_conditions(const JSDomain& d, int max_count) {
  JSReport r;
  r.admissibility = check_admissibility(d);
  r.admissible = r.admissibility.admissible;
  r.no_finite_arcs = !d.has_finite_arcs();
  r.polygons = enumerate_inscribed_polygons(d, max_count);

  double alpha = 0, beta = 0;
  for (const BoundaryArc& b : d.arcs) {
    if (b.label.kind == LabelKind::PlusInfinity) alpha += b.length;
    if (b.label.kind == LabelKind::MinusInfinity) beta += b.length;
  }
  r.boundary_balanced = std::fabs(alpha - beta) <= 1e-9 * std::max({alpha, beta, 1e-300});

  constexpr double kMarginal = 1e-9;
  for (std::size_t k = 0; k < r.polygons.polygons.size(); ++k) {
    const InscribedPolygon& p = r.polygons.polygons[k];
    const int idx = static_cast<int>(k);
    if (p.is_boundary && r.no_finite_arcs) {
      if (!r.boundary_balanced) r.violations.push_back({idx, "alpha=beta", p.alpha, p.beta, false});
      continue;
    }
    const double ma = p.gamma - 2 * p.alpha;
    if (ma <= kMarginal * p.gamma)
      r.violations.push_back({idx, "2alpha<gamma", 2 * p.alpha, p.gamma, ma > -kMarginal * p.gamma});
    const double mb = p.gamma - 2 * p.beta;
    if (mb <= kMarginal * p.gamma)
      r.violations.push_back({idx, "2beta<gamma", 2 * p.beta, p.gamma, mb > -kMarginal * p.gamma});
  }

  if (!r.admissible)
    r.status = "inadmissible";
  else if (!r.violations.empty())
    r.status = "unsolvable";
  else if (r.polygons.overflow)
    r.status = "inconclusive-solvable";
  else
    r.status = "solvable";
  r.solvable = r.status == "solvable";
  return r;
}

}  // namespace jsg
