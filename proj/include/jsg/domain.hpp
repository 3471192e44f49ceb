#pragma once

// Jenkins-Serrin problem statements: labeled boundary arcs, admissibility,
// inscribed mu-polygons, and the solvability decision.

#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsg/chart.hpp"
#include "jsg/expr.hpp"
#include "jsg/mugeo.hpp"

namespace jsg {

enum class LabelKind { PlusInfinity, MinusInfinity, Finite };

struct ArcLabel {
  LabelKind kind = LabelKind::Finite;
  Expr value = Expr::number(0);  // boundary data for Finite arcs

  static ArcLabel plus() { return {LabelKind::PlusInfinity, Expr::number(0)}; }
  static ArcLabel minus() { return {LabelKind::MinusInfinity, Expr::number(0)}; }
  static ArcLabel finite(Expr f) { return {LabelKind::Finite, std::move(f)}; }
  bool infinite() const { return kind != LabelKind::Finite; }
};

std::string label_name(LabelKind k);

// Input description of one boundary arc. A closed arc lists its first point
// again at the end, possibly translated by one period on periodic charts.
struct ArcInput {
  std::vector<Vec2> points;
  ArcLabel label;
  bool closed = false;
  std::string name;
};

struct BoundaryArc {
  CurveSample curve;  // traversed with the domain on the left; normal side Left is the inner conormal
  ArcLabel label;
  std::string name;
  int loop = 0;
  int v_start = -1;  // vertex indices, -1 for closed arcs
  int v_end = -1;
  double length = 0;  // mu-length

  bool closed() const { return curve.closed; }
  // Polyline including the closing point for closed arcs.
  std::vector<Vec2> polyline() const;
};

// The boundary description fails validation (geodesic or convexity test,
// self-intersection, open loop).
class DomainRejected : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct JSDomain {
  SubmersionChart chart;
  std::vector<BoundaryArc> arcs;
  std::vector<std::vector<int>> loops;  // arc indices in traversal order
  std::vector<Vec2> vertices;
  Vec2 interior{};
  double geo_tol = 1e-5;
  bool periodic_annulus = false;

  bool has_finite_arcs() const;
  // Point strictly inside the domain (away from the boundary polylines by more than eps).
  bool contains(const Vec2& p, double eps = 0) const;
  double boundary_distance(const Vec2& p) const;
  // Closed loop polylines (last point repeats the first, up to a period
  // translation); filled by build_domain.
  std::vector<std::vector<Vec2>> polylines;
  const std::vector<std::vector<Vec2>>& loop_polylines() const { return polylines; }
  Vec2 centroid() const;
  double diameter() const;
};

JSDomain build_domain(const SubmersionChart& chart, const std::vector<std::vector<ArcInput>>& loops,
                      double geo_tol, std::optional<Vec2> interior = std::nullopt);

struct AdmissibilityResult {
  bool admissible = true;
  std::optional<int> witness_vertex;
  std::optional<Vec2> witness;
  double witness_angle = 0;  // interior angle at the witness corner
};

AdmissibilityResult check_admissibility(const JSDomain& d);

enum class EdgeKind { Boundary, Chord, ClosedGeodesic };

struct PolygonEdge {
  EdgeKind kind = EdgeKind::Boundary;
  int index = 0;  // into domain arcs, chords, or closed geodesics
};

struct InscribedPolygon {
  std::vector<PolygonEdge> edges;
  std::vector<int> vertex_ids;    // cyclic order; empty for closed components
  std::vector<Vec2> vertices;
  double alpha = 0, beta = 0, gamma = 0;
  bool is_boundary = false;  // equals the whole boundary of the domain
};

struct Chord {
  GeodesicArc arc;
  int v0 = -1, v1 = -1;
  double length = 0;
};

struct PolygonSet {
  std::vector<Chord> chords;
  std::vector<GeodesicArc> closed_geodesics;
  std::vector<double> closed_lengths;
  std::vector<InscribedPolygon> polygons;
  bool overflow = false;
  std::vector<std::string> log;  // chord shooting failures and rejections
};

PolygonSet enumerate_inscribed_polygons(const JSDomain& d, int max_count = 10000);

// Edge polylines of a polygon, in cycle order.
std::vector<std::vector<Vec2>> polygon_edge_polylines(const JSDomain& d, const PolygonSet& set,
                                                      const InscribedPolygon& p);

struct Violation {
  int polygon = -1;
  std::string which;  // "2alpha<gamma", "2beta<gamma", or "alpha=beta"
  double lhs = 0, rhs = 0;
  bool marginal = false;
};

struct JSReport {
  AdmissibilityResult admissibility;
  bool admissible = true;
  bool solvable = false;
  std::string status;  // solvable, unsolvable, inadmissible, inconclusive-solvable
  bool no_finite_arcs = false;
  bool boundary_balanced = false;  // alpha(boundary) = beta(boundary) within 1e-9 relative
  PolygonSet polygons;
  std::vector<Violation> violations;
};

JSReport check_js_conditions(const JSDomain& d, int max_count = 10000);

}  // namespace jsg
