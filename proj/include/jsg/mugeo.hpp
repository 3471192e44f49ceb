#pragma once

// Geometry of the mu-metric rho^2 (dx^2 + dy^2), rho = lambda * mu.
//
// mu-geodesics are the projections of minimal vertical cylinders; the mean
// curvature of the cylinder over a base curve equals mu/2 times the
// mu-geodesic curvature of the curve.

#include <functional>
#include <stdexcept>
#include <vector>

#include "jsg/chart.hpp"
#include "jsg/geometry.hpp"

namespace jsg {

enum class NormalSide { Left, Right };

inline double side_sign(NormalSide s) { return s == NormalSide::Left ? 1.0 : -1.0; }

// A sampled base curve with a chosen unit normal: Left is the
// counter-clockwise quarter turn of the direction of travel.
struct CurveSample {
  std::vector<Vec2> points;
  std::vector<Vec2> tangents;  // unit for lambda^2 (dx^2 + dy^2)
  NormalSide side = NormalSide::Left;
  bool closed = false;
  // For closed curves the sample after the last one is points[0] + closure_shift
  // (a period translation on periodic charts, zero otherwise). The first point
  // is not repeated at the end.
  Vec2 closure_shift{};

  std::size_t size() const { return points.size(); }
  bool is_interior(std::size_t i) const { return closed ? i < points.size() : (i > 0 && i + 1 < points.size()); }
};

CurveSample make_curve(const SubmersionChart& chart, std::vector<Vec2> points, NormalSide side,
                       bool closed = false, Vec2 closure_shift = {});

// Reversed traversal with the normal kept on the same geometric side.
CurveSample reversed(const SubmersionChart& chart, const CurveSample& c);

struct GeodesicArc {
  std::vector<Vec2> points;
  std::vector<Vec2> directions;  // Euclidean unit directions of travel
  std::vector<double> s;         // cumulative mu-arclength, s[0] = 0
  double initial_angle = 0;
  bool closed = false;
  bool truncated = false;  // hit the region boundary before the requested length
  bool stopped = false;    // a caller-supplied predicate ended the shot
  double max_step_error = 0;

  double length() const { return s.empty() ? 0.0 : s.back(); }
  const Vec2& start() const { return points.front(); }
  const Vec2& end() const { return points.back(); }
  CurveSample curve(const SubmersionChart& chart, NormalSide side = NormalSide::Left) const;
};

class GeodesicError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NoConnection : public GeodesicError {
 public:
  using GeodesicError::GeodesicError;
};

struct ShootOptions {
  double max_step = 1e-2;     // in mu-arclength
  double step_tol = 1e-12;    // accepted local error per step (step-doubling estimate)
  // Called at each accepted sample; returning false ends the shot there.
  std::function<bool(const Vec2&)> keep_going;
};

GeodesicArc mu_geodesic_shoot(const SubmersionChart& chart, Vec2 p, double theta, double length,
                              const ShootOptions& opts);
GeodesicArc mu_geodesic_shoot(const SubmersionChart& chart, Vec2 p, double theta, double length, double h);

struct ConnectOptions {
  double tol = 1e-10;
  int fan = 16;            // evenly spaced initial angles
  int max_solutions = 4;   // distinct chords kept per pair
  double sample_step = 0;  // output spacing in mu-arclength; 0 picks length/1000
  double cluster_angle = 1e-3;
};

// Every distinct converged chord from p to q (at most max_solutions), sorted
// by mu-length. Throws NoConnection when no shot converges.
std::vector<GeodesicArc> mu_geodesic_connect_all(const SubmersionChart& chart, Vec2 p, Vec2 q,
                                                 const ConnectOptions& opts = {});
GeodesicArc mu_geodesic_connect(const SubmersionChart& chart, Vec2 p, Vec2 q, double tol = 1e-10);

// Integral of rho |dx| along the polyline (closing segment included for closed curves).
double mu_length(const SubmersionChart& chart, const CurveSample& curve);
double mu_length(const SubmersionChart& chart, std::span<const Vec2> polyline);

// mu-geodesic curvature at an interior sample, from centred 3-point differences.
double mu_geodesic_curvature(const SubmersionChart& chart, const CurveSample& curve, std::size_t i);

// Mean curvature H of the vertical cylinder over the curve, from the base
// geodesic curvature and the Killing-length gradient:
//     2H = kappa_g - <eta, grad(mu)/mu>.
double cylinder_mean_curvature(const SubmersionChart& chart, const CurveSample& curve, std::size_t i);

// Non-strict: every interior sample has mu-geodesic curvature >= -tol.
bool is_mu_convex(const SubmersionChart& chart, const CurveSample& curve, double tol);

// Largest |mu-geodesic curvature| over interior samples.
double max_abs_mu_curvature(const SubmersionChart& chart, const CurveSample& curve);

}  // namespace jsg
