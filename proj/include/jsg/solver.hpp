#pragma once

// P1 finite elements for the minimal Killing graph equation and the
// truncated Jenkins-Serrin sequence built on them. Flux and divergence-line
// diagnostics live here too.

#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "jsg/chart.hpp"
#include "jsg/domain.hpp"
#include "jsg/mesh.hpp"
#include "jsg/mugeo.hpp"

namespace jsg {

class SolverError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Dirichlet value for a boundary node, given its marker and position.
using BoundaryData = std::function<double(int marker, const Vec2& p)>;

// Point location on a mesh; periodic meshes accept any x.
class MeshLocator {
 public:
  explicit MeshLocator(std::shared_ptr<const TriMesh> mesh);
  // Triangle containing p, or the nearest triangle within tol of p.
  std::optional<int> find(Vec2 p, double tol = 0) const;
  // p shifted by whole periods into the mesh's x range.
  Vec2 wrap(Vec2 p) const;
  const TriMesh& mesh() const { return *mesh_; }

 private:
  std::shared_ptr<const TriMesh> mesh_;
  Vec2 lo_{}, hi_{};
  double cell_ = 1;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> cells_;
};

struct GraphSolution {
  std::shared_ptr<const TriMesh> mesh;
  std::shared_ptr<const SubmersionChart> chart;
  std::vector<double> u;  // nodal heights; periodic slaves repeat their master
  // Per triangle, at the centroid.
  std::vector<Vec2> gu;  // frame components (u_x/lambda - a, u_y/lambda - b)
  std::vector<double> w;   // sqrt(1 + mu^2 |Gu|^2)
  std::vector<double> nu;  // mu / W
  double residual_norm = 0;  // max-norm of the weak-form residual over free nodes
  double energy = 0;
  int iterations = 0;
  bool converged = false;
  bool regularized = false;  // a linearization needed a diagonal shift
  std::vector<double> energy_steps;  // E(after) - E(before) per accepted Newton step
};

struct SolveOptions {
  double tol = 1e-10;
  int max_iter = 200;
  double armijo = 1e-4;
  // Starting heights for the free nodes (boundary entries are overwritten).
  std::optional<std::vector<double>> initial;
};

GraphSolution solve_dirichlet(std::shared_ptr<const TriMesh> m, const SubmersionChart& c, const BoundaryData& bdata,
                              const SolveOptions& opts = {});
GraphSolution solve_dirichlet(const TriMesh& m, const SubmersionChart& c, const BoundaryData& bdata,
                              double tol = 1e-10);

// Per-triangle fields and the residual of given nodal heights, without solving.
GraphSolution evaluate_graph(std::shared_ptr<const TriMesh> m, const SubmersionChart& c, std::vector<double> u,
                             double tol = 1e-10);

// Discrete energy sum_T int_T lambda^2 W for given nodal heights.
double discrete_energy(const GraphSolution& s, const std::vector<double>& u);

// Height at p by linear interpolation.
double interpolate(const GraphSolution& s, const MeshLocator& loc, const Vec2& p);

// Boundary data of level n: +n and -n on infinite arcs, clamp(f, -n, n) on
// finite arcs. Corners take 0 where +n meets -n, the finite value where an
// infinite arc meets a finite one, and the average between two finite arcs.
BoundaryData truncated_boundary_data(const JSDomain& d, double n);

struct SequenceOptions {
  double tol = 1e-10;
  int max_iter = 200;
  double interior_scale = 0.8;  // interior set: domain shrunk about its interior point
  double initial_offset = 0;    // added to the first level's starting guess
  std::uint32_t seed = 20240601;
};

struct SequenceLevel {
  double n = 0;
  GraphSolution solution;
  double u_at_p0 = 0;
  double interior_change = 0;  // sup over the interior set of the change in u - u(p0) from the previous level
};

struct SequenceResult {
  std::shared_ptr<const TriMesh> mesh;
  Vec2 p0{};
  std::vector<SequenceLevel> levels;
  std::vector<char> interior_nodes;  // nodes inside the shrunken domain
};

SequenceResult solve_truncated_sequence(const JSDomain& d, double h, const std::vector<double>& schedule,
                                        const SequenceOptions& opts = {});
SequenceResult solve_truncated_sequence(const JSDomain& d, std::shared_ptr<const TriMesh> mesh,
                                        const std::vector<double>& schedule, const SequenceOptions& opts = {});

enum class FluxSide { Left, Right };

struct FluxReport {
  double value = 0;      // int <X_u, eta>, X_u = mu^2 Gu / W
  double length_mu = 0;  // same midpoint quadrature
  double ratio = 0;
  int segments = 0;
};

// Midpoint rule per segment; X_u from the triangle containing the midpoint
// (or the nearest one within h/2 for curves along the boundary). eta is the
// unit normal on the curve's stated side.
FluxReport flux(const GraphSolution& s, const CurveSample& curve);

struct NuSummary {
  std::vector<double> nu;
  double min = 0, max = 0;
};

NuSummary angle_function_field(const GraphSolution& s);

struct DivergenceOptions {
  double decrease_factor = 1.9;  // nu(previous level) / nu(last level) must reach this
  double shoot_step = 0;         // 0 picks h / 4
};

struct DivergenceLine {
  std::vector<int> triangles;
  double area = 0;
  GeodesicArc line;
  double max_curvature = 0;  // max |kappa~_g| over the fitted line
  Vec2 seed{};
};

struct DivergenceReport {
  std::vector<DivergenceLine> lines;
  std::vector<double> min_nu_per_level;
  std::vector<int> flagged;  // triangles passing both tests
  double flagged_area = 0;
  double total_area = 0;
  std::string note;
};

DivergenceReport detect_divergence_lines(const SequenceResult& r, double nu_thresh,
                                         const DivergenceOptions& opts = {});

struct FactorizationGap {
  std::vector<double> lhs;  // <Gu/Wu - Gv/Wv, Gu - Gv>
  std::vector<double> rhs;  // (Wu + Wv) |Nu - Nv|^2 / (2 mu^2)
};

FactorizationGap factorization_gap(const GraphSolution& s1, const GraphSolution& s2);

}  // namespace jsg
