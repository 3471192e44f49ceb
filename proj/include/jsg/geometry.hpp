#pragma once

// Planar vectors and polyline helpers in chart coordinates.

#include <cmath>
#include <span>
#include <vector>

namespace jsg {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2& operator+=(const Vec2& o) { x += o.x; y += o.y; return *this; }
  Vec2& operator-=(const Vec2& o) { x -= o.x; y -= o.y; return *this; }
  Vec2& operator*=(double s) { x *= s; y *= s; return *this; }
};

inline Vec2 operator+(Vec2 a, const Vec2& b) { return a += b; }
inline Vec2 operator-(Vec2 a, const Vec2& b) { return a -= b; }
inline Vec2 operator*(Vec2 a, double s) { return a *= s; }
inline Vec2 operator*(double s, Vec2 a) { return a *= s; }
inline Vec2 operator/(Vec2 a, double s) { return a *= (1.0 / s); }
inline Vec2 operator-(const Vec2& a) { return {-a.x, -a.y}; }
inline bool operator==(const Vec2& a, const Vec2& b) { return a.x == b.x && a.y == b.y; }

inline double dot(const Vec2& a, const Vec2& b) { return a.x * b.x + a.y * b.y; }
inline double cross(const Vec2& a, const Vec2& b) { return a.x * b.y - a.y * b.x; }
inline double norm(const Vec2& a) { return std::hypot(a.x, a.y); }
inline double dist(const Vec2& a, const Vec2& b) { return norm(a - b); }
// Counter-clockwise quarter turn.
inline Vec2 perp(const Vec2& a) { return {-a.y, a.x}; }
inline Vec2 normalized(const Vec2& a) { return a / norm(a); }

double polyline_length(std::span<const Vec2> pts);

// Point at Euclidean arclength t along the polyline (clamped to its ends).
Vec2 polyline_point_at(std::span<const Vec2> pts, double t);

double point_segment_distance(const Vec2& p, const Vec2& a, const Vec2& b);
double point_polyline_distance(const Vec2& p, std::span<const Vec2> pts);

// Symmetric Hausdorff distance between two polylines, measured from the
// vertices of each to the segments of the other.
double hausdorff_distance(std::span<const Vec2> a, std::span<const Vec2> b);

// Proper or touching intersection of closed segments [a,b] and [c,d].
bool segments_intersect(const Vec2& a, const Vec2& b, const Vec2& c, const Vec2& d);

// Even-odd rule against a closed polygon (last vertex joins the first).
bool point_in_polygon(const Vec2& p, std::span<const Vec2> poly);

// Signed area, positive for counter-clockwise order.
double polygon_signed_area(std::span<const Vec2> poly);
Vec2 polygon_centroid(std::span<const Vec2> poly);

}  // namespace jsg
