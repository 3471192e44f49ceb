#pragma once

// Triangulation of Jenkins-Serrin domains with boundary markers.
//
// Markers: 0 for interior nodes, arc_marker(k) for nodes on boundary arc k,
// corner_marker(v) for domain vertex v. On periodic strips the annulus is cut
// along a vertical seam; each node on the right copy of the seam is paired
// with its left copy, which carries the unknown.

#include <array>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "jsg/domain.hpp"
#include "jsg/geometry.hpp"

namespace jsg {

class MeshError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// The requested h is unusable for this domain.
class MeshSizeError : public MeshError {
 public:
  using MeshError::MeshError;
};

struct TriMesh {
  std::vector<Vec2> nodes;
  std::vector<std::array<int, 3>> triangles;  // counter-clockwise
  std::vector<int> markers;
  double h = 0;
  std::optional<double> period;
  std::vector<std::pair<int, int>> periodic_pairs;  // (slave, master), slave = master + (period, 0)

  static int arc_marker(int arc) { return arc + 1; }
  static int corner_marker(int vertex) { return -(vertex + 1); }
  static bool is_arc_marker(int m) { return m > 0; }
  static bool is_corner_marker(int m) { return m < 0; }
  static int marker_arc(int m) { return m - 1; }
  static int marker_corner(int m) { return -m - 1; }

  std::size_t node_count() const { return nodes.size(); }
  std::size_t triangle_count() const { return triangles.size(); }
  bool on_boundary(int n) const { return markers[static_cast<std::size_t>(n)] != 0; }
  // Node -> the node carrying its unknown (identity except for periodic slaves).
  std::vector<int> representatives() const;
  double area(std::size_t t) const;
  Vec2 centroid(std::size_t t) const;
};

TriMesh triangulate(const JSDomain& d, double h, std::uint32_t seed = 20240601);

struct MeshQuality {
  double min_angle_deg = 180;
  double min_angle_away_from_corners_deg = 180;  // triangles farther than 2h from every corner
  double max_edge = 0;
  double min_area = 0;
  bool positively_oriented = true;
};

MeshQuality mesh_quality(const TriMesh& m);

// V - E + F with periodic pairs identified.
int euler_characteristic(const TriMesh& m);

// Edges used by exactly one triangle after periodic identification, as node
// pairs in the triangle's orientation.
std::vector<std::pair<int, int>> boundary_edges(const TriMesh& m);

// Plain-text format:
//   jsgmesh 1
//   h <h>
//   nodes <N>          then N lines "x y marker"
//   triangles <M>      then M lines "i j k" (0-based)
//   periodic <K> <P>   then K lines "slave master" (K = 0 and P = 0 when absent)
void write_mesh(std::ostream& os, const TriMesh& m);
TriMesh read_mesh(std::istream& is);

}  // namespace jsg
