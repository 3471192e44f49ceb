#include "jsg/solver.hpp"

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <span>
#include <unordered_map>

namespace jsg {

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Triplet = Eigen::Triplet<double>;

// Conical product rule on the reference triangle: 4x4 Gauss-Legendre through
// the collapsed map (s, t) -> (s, t (1 - s)); exact for degree 6.
struct TriRule {
  std::vector<std::array<double, 2>> pts;  // barycentric coordinates of nodes 1 and 2
  std::vector<double> w;                   // fractions of the triangle area
};

const TriRule& tri_rule() {
  static const TriRule rule = [] {
    constexpr std::array<double, 4> x{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                      0.8611363115940526};
    constexpr std::array<double, 4> wx{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                       0.3478548451374538};
    TriRule r;
    for (int i = 0; i < 4; ++i)
      for (int j = 0; j < 4; ++j) {
        const double s = 0.5 * (x[static_cast<std::size_t>(i)] + 1);
        const double t = 0.5 * (x[static_cast<std::size_t>(j)] + 1);
        r.pts.push_back({s, t * (1 - s)});
        // Reference area 1/2; weights rescaled to sum to 1.
        r.w.push_back(2 * 0.25 * wx[static_cast<std::size_t>(i)] * wx[static_cast<std::size_t>(j)] * (1 - s));
      }
    return r;
  }();
  return rule;
}

// Mesh data and chart samples shared by every Newton step.
struct Discretization {
  std::shared_ptr<const TriMesh> mesh;
  std::vector<int> rep;
  std::vector<int> dof;  // node -> free unknown, -1 for Dirichlet nodes
  int ndof = 0;
  std::vector<std::array<Vec2, 3>> grad;
  std::vector<double> area;
  std::size_t nq = 0;
  // Per triangle and quadrature point.
  std::vector<double> wa, lam2, mu2, la, lb;

  Discretization(std::shared_ptr<const TriMesh> m, const SubmersionChart& c) : mesh(std::move(m)) {
    const TriMesh& M = *mesh;
    rep = M.representatives();
    dof.assign(M.nodes.size(), -1);
    for (std::size_t i = 0; i < M.nodes.size(); ++i)
      if (M.markers[i] == 0 && rep[i] == static_cast<int>(i)) dof[i] = ndof++;
    for (std::size_t i = 0; i < M.nodes.size(); ++i)
      if (rep[i] != static_cast<int>(i)) dof[i] = dof[static_cast<std::size_t>(rep[i])];
    const TriRule& r = tri_rule();
    nq = r.w.size();
    const std::size_t nt = M.triangles.size();
    grad.resize(nt);
    area.resize(nt);
    wa.resize(nt * nq);
    lam2.resize(nt * nq);
    mu2.resize(nt * nq);
    la.resize(nt * nq);
    lb.resize(nt * nq);
    for (std::size_t t = 0; t < nt; ++t) {
      const auto& tr = M.triangles[t];
      const std::array<Vec2, 3> p{M.nodes[static_cast<std::size_t>(tr[0])], M.nodes[static_cast<std::size_t>(tr[1])],
                                  M.nodes[static_cast<std::size_t>(tr[2])]};
      const double A = 0.5 * cross(p[1] - p[0], p[2] - p[0]);
      if (!(A > 0)) throw SolverError("degenerate or inverted triangle " + std::to_string(t));
      area[t] = A;
      for (int i = 0; i < 3; ++i)
        grad[t][static_cast<std::size_t>(i)] =
            perp(p[static_cast<std::size_t>((i + 2) % 3)] - p[static_cast<std::size_t>((i + 1) % 3)]) / (2 * A);
      for (std::size_t k = 0; k < nq; ++k) {
        const Vec2 x = p[0] + (p[1] - p[0]) * r.pts[k][0] + (p[2] - p[0]) * r.pts[k][1];
        const ChartFields f = c.fields(x);
        const std::size_t q = t * nq + k;
        wa[q] = r.w[k] * A;
        lam2[q] = f.lambda * f.lambda;
        mu2[q] = f.mu * f.mu;
        la[q] = f.lambda * f.a;
        lb[q] = f.lambda * f.b;
      }
    }
  }

  Vec2 gradient(std::size_t t, const std::vector<double>& u) const {
    const auto& tr = mesh->triangles[t];
    Vec2 g{};
    for (int i = 0; i < 3; ++i)
      g += grad[t][static_cast<std::size_t>(i)] * u[static_cast<std::size_t>(tr[static_cast<std::size_t>(i)])];
    return g;
  }

  double energy(const std::vector<double>& u) const {
    double e = 0;
    for (std::size_t t = 0; t < area.size(); ++t) {
      const Vec2 g = gradient(t, u);
      for (std::size_t k = 0; k < nq; ++k) {
        const std::size_t q = t * nq + k;
        const Vec2 d{g.x - la[q], g.y - lb[q]};
        e += wa[q] * lam2[q] * std::sqrt(1 + mu2[q] * dot(d, d) / lam2[q]);
      }
    }
    return e;
  }

  // E(u + alpha d) - E(u), summed from per-point differences.
  double energy_change(const std::vector<double>& u, const std::vector<double>& d, double alpha) const {
    double de = 0;
    for (std::size_t t = 0; t < area.size(); ++t) {
      const Vec2 g = gradient(t, u);
      const Vec2 dg = gradient(t, d) * alpha;
      for (std::size_t k = 0; k < nq; ++k) {
        const std::size_t q = t * nq + k;
        const Vec2 a{g.x - la[q], g.y - lb[q]};
        const double s0 = mu2[q] * dot(a, a) / lam2[q];
        const double ds = mu2[q] * dot(dg, 2 * a + dg) / lam2[q];
        const double w0 = std::sqrt(1 + s0), w1 = std::sqrt(1 + s0 + ds);
        de += wa[q] * lam2[q] * ds / (w0 + w1);
      }
    }
    return de;
  }

  // Residual over free unknowns and, if requested, the Hessian.
  void assemble(const std::vector<double>& u, Eigen::VectorXd& res, SpMat* hess) const {
    res.setZero(ndof);
    std::vector<Triplet> trip;
    if (hess) trip.reserve(area.size() * 9);
    for (std::size_t t = 0; t < area.size(); ++t) {
      const Vec2 g = gradient(t, u);
      Vec2 G{};
      double hxx = 0, hxy = 0, hyy = 0;
      for (std::size_t k = 0; k < nq; ++k) {
        const std::size_t q = t * nq + k;
        const Vec2 a{g.x - la[q], g.y - lb[q]};
        const double W2 = 1 + mu2[q] * dot(a, a) / lam2[q];
        const double W = std::sqrt(W2);
        const double c = wa[q] * mu2[q] / W;
        G += a * c;
        if (hess) {
          const double f = mu2[q] / (lam2[q] * W2);
          hxx += c * (1 - f * a.x * a.x);
          hxy += c * (-f * a.x * a.y);
          hyy += c * (1 - f * a.y * a.y);
        }
      }
      const auto& tr = mesh->triangles[t];
      for (int i = 0; i < 3; ++i) {
        const int di = dof[static_cast<std::size_t>(tr[static_cast<std::size_t>(i)])];
        if (di < 0) continue;
        const Vec2 gi = grad[t][static_cast<std::size_t>(i)];
        res[di] += dot(gi, G);
        if (!hess) continue;
        for (int j = 0; j < 3; ++j) {
          const int dj = dof[static_cast<std::size_t>(tr[static_cast<std::size_t>(j)])];
          if (dj < 0) continue;
          const Vec2 gj = grad[t][static_cast<std::size_t>(j)];
          trip.emplace_back(di, dj, gi.x * (hxx * gj.x + hxy * gj.y) + gi.y * (hxy * gj.x + hyy * gj.y));
        }
      }
    }
    if (hess) {
      hess->resize(ndof, ndof);
      hess->setFromTriplets(trip.begin(), trip.end());
    }
  }

  // Plain Dirichlet-Laplace extension of the boundary values in u.
  void harmonic_fill(std::vector<double>& u) const {
    if (ndof == 0) return;
    std::vector<Triplet> trip;
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(ndof);
    for (std::size_t t = 0; t < area.size(); ++t) {
      const auto& tr = mesh->triangles[t];
      for (int i = 0; i < 3; ++i) {
        const int di = dof[static_cast<std::size_t>(tr[static_cast<std::size_t>(i)])];
        if (di < 0) continue;
        for (int j = 0; j < 3; ++j) {
          const int nj = tr[static_cast<std::size_t>(j)];
          const double k = area[t] * dot(grad[t][static_cast<std::size_t>(i)], grad[t][static_cast<std::size_t>(j)]);
          const int dj = dof[static_cast<std::size_t>(nj)];
          if (dj >= 0)
            trip.emplace_back(di, dj, k);
          else
            rhs[di] -= k * u[static_cast<std::size_t>(nj)];
        }
      }
    }
    SpMat K(ndof, ndof);
    K.setFromTriplets(trip.begin(), trip.end());
    Eigen::SimplicialLDLT<SpMat> solver(K);
    if (solver.info() != Eigen::Success) throw SolverError("Laplace factorization failed");
    const Eigen::VectorXd x = solver.solve(rhs);
    scatter(x, u);
  }

  void scatter(const Eigen::VectorXd& x, std::vector<double>& u) const {
    for (std::size_t i = 0; i < u.size(); ++i)
      if (dof[i] >= 0) u[i] = x[dof[i]];
  }
};

double max_abs(const Eigen::VectorXd& v) { return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff(); }

void fill_triangle_fields(GraphSolution& s) {
  const TriMesh& m = *s.mesh;
  const std::size_t nt = m.triangles.size();
  s.gu.resize(nt);
  s.w.resize(nt);
  s.nu.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const auto& tr = m.triangles[t];
    const Vec2 p0 = m.nodes[static_cast<std::size_t>(tr[0])], p1 = m.nodes[static_cast<std::size_t>(tr[1])],
               p2 = m.nodes[static_cast<std::size_t>(tr[2])];
    const double A2 = cross(p1 - p0, p2 - p0);
    Vec2 g{};
    const std::array<Vec2, 3> p{p0, p1, p2};
    for (int i = 0; i < 3; ++i)
      g += perp(p[static_cast<std::size_t>((i + 2) % 3)] - p[static_cast<std::size_t>((i + 1) % 3)]) *
           (s.u[static_cast<std::size_t>(tr[static_cast<std::size_t>(i)])] / A2);
    const ChartFields f = s.chart->fields(m.centroid(t));
    const Vec2 gu{g.x / f.lambda - f.a, g.y / f.lambda - f.b};
    s.gu[t] = gu;
    s.w[t] = std::sqrt(1 + f.mu * f.mu * dot(gu, gu));
    s.nu[t] = f.mu / s.w[t];
  }
}

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

// ---------------------------------------------------------------------------

MeshLocator::MeshLocator(std::shared_ptr<const TriMesh> mesh) : mesh_(std::move(mesh)) {
  const TriMesh& m = *mesh_;
  if (m.nodes.empty()) throw SolverError("empty mesh");
  lo_ = hi_ = m.nodes.front();
  for (const Vec2& p : m.nodes) {
    lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
    hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
  }
  cell_ = m.h > 0 ? m.h : std::max(hi_.x - lo_.x, hi_.y - lo_.y) / 32;
  nx_ = static_cast<int>(std::ceil((hi_.x - lo_.x) / cell_)) + 1;
  ny_ = static_cast<int>(std::ceil((hi_.y - lo_.y) / cell_)) + 1;
  cells_.resize(static_cast<std::size_t>(nx_ * ny_));
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    Vec2 a = m.nodes[static_cast<std::size_t>(m.triangles[t][0])], b = a;
    for (int v : m.triangles[t]) {
      const Vec2 p = m.nodes[static_cast<std::size_t>(v)];
      a = {std::min(a.x, p.x), std::min(a.y, p.y)};
      b = {std::max(b.x, p.x), std::max(b.y, p.y)};
    }
    const int i0 = static_cast<int>((a.x - lo_.x) / cell_), i1 = static_cast<int>((b.x - lo_.x) / cell_);
    const int j0 = static_cast<int>((a.y - lo_.y) / cell_), j1 = static_cast<int>((b.y - lo_.y) / cell_);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) cells_[static_cast<std::size_t>(j * nx_ + i)].push_back(static_cast<int>(t));
  }
}

Vec2 MeshLocator::wrap(Vec2 p) const {
  if (const auto& P = mesh_->period) {
    p.x = lo_.x + std::fmod(p.x - lo_.x, *P);
    if (p.x < lo_.x) p.x += *P;
  }
  return p;
}

std::optional<int> MeshLocator::find(Vec2 p, double tol) const {
  p = wrap(p);
  const TriMesh& m = *mesh_;
  const int reach = static_cast<int>(std::ceil(tol / cell_));
  const int ci = static_cast<int>(std::floor((p.x - lo_.x) / cell_));
  const int cj = static_cast<int>(std::floor((p.y - lo_.y) / cell_));
  std::optional<int> best;
  double best_d = std::numeric_limits<double>::infinity();
  for (int j = cj - reach; j <= cj + reach; ++j) {
    if (j < 0 || j >= ny_) continue;
    for (int i = ci - reach; i <= ci + reach; ++i) {
      if (i < 0 || i >= nx_) continue;
      for (int t : cells_[static_cast<std::size_t>(j * nx_ + i)]) {
        const auto& tr = m.triangles[static_cast<std::size_t>(t)];
        const Vec2 a = m.nodes[static_cast<std::size_t>(tr[0])], b = m.nodes[static_cast<std::size_t>(tr[1])],
                   c = m.nodes[static_cast<std::size_t>(tr[2])];
        if (cross(b - a, p - a) >= 0 && cross(c - b, p - b) >= 0 && cross(a - c, p - c) >= 0) return t;
        if (tol > 0) {
          const double d =
              std::min({point_segment_distance(p, a, b), point_segment_distance(p, b, c), point_segment_distance(p, c, a)});
          if (d <= tol && d < best_d) {
            best_d = d;
            best = t;
          }
        }
      }
    }
  }
  return best;
}

// ---------------------------------------------------------------------------

GraphSolution solve_dirichlet(std::shared_ptr<const TriMesh> m, const SubmersionChart& c, const BoundaryData& bdata,
                              const SolveOptions& opts) {
  if (!(opts.tol > 0)) throw SolverError("tolerance must be positive");
  const Discretization disc(m, c);
  const TriMesh& M = *m;
  const std::size_t nn = M.nodes.size();

  std::vector<double> u(nn, 0.0);
  for (std::size_t i = 0; i < nn; ++i) {
    if (M.markers[i] == 0) continue;
    const double v = bdata(M.markers[i], M.nodes[i]);
    if (!std::isfinite(v)) throw SolverError("boundary value is not finite at node " + std::to_string(i));
    u[i] = v;
  }
  if (opts.initial) {
    if (opts.initial->size() != nn) throw SolverError("initial guess has the wrong size");
    for (std::size_t i = 0; i < nn; ++i)
      if (disc.dof[i] >= 0) u[i] = (*opts.initial)[i];
  } else {
    disc.harmonic_fill(u);
  }
  for (std::size_t i = 0; i < nn; ++i)
    if (disc.rep[i] != static_cast<int>(i)) u[i] = u[static_cast<std::size_t>(disc.rep[i])];

  GraphSolution s;
  s.mesh = m;
  s.chart = std::make_shared<const SubmersionChart>(c);

  Eigen::VectorXd res;
  SpMat H;
  Eigen::SimplicialLDLT<SpMat> ldlt;
  bool analyzed = false;
  std::vector<double> best_u = u;
  double best_res = std::numeric_limits<double>::infinity();
  int it = 0;
  for (;; ++it) {
    disc.assemble(u, res, &H);
    const double rn = max_abs(res);
    if (rn < best_res) {
      best_res = rn;
      best_u = u;
    }
    if (rn <= opts.tol) {
      s.converged = true;
      break;
    }
    if (it >= opts.max_iter) break;
    if (!analyzed) {
      ldlt.analyzePattern(H);
      analyzed = true;
    }
    ldlt.factorize(H);
    if (ldlt.info() != Eigen::Success || (ldlt.vectorD().array() <= 0).any()) {
      const double shift = 1e-10 * H.diagonal().cwiseAbs().maxCoeff();
      SpMat I(disc.ndof, disc.ndof);
      I.setIdentity();
      H += shift * I;
      ldlt.factorize(H);
      s.regularized = true;
      if (ldlt.info() != Eigen::Success) break;
    }
    const Eigen::VectorXd dx = ldlt.solve(-res);
    std::vector<double> d(nn, 0.0);
    disc.scatter(dx, d);
    const double slope = res.dot(dx);
    if (!(slope < 0)) break;
    double alpha = 1;
    double de = 0;
    bool accepted = false;
    for (int k = 0; k < 60; ++k, alpha *= 0.5) {
      de = disc.energy_change(u, d, alpha);
      if (de <= opts.armijo * alpha * slope && de < 0) {
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    for (std::size_t i = 0; i < nn; ++i) u[i] += alpha * d[i];
    s.energy_steps.push_back(de);
  }
  s.iterations = it;
  if (!s.converged) u = best_u;
  s.u = std::move(u);
  s.residual_norm = best_res;
  s.energy = disc.energy(s.u);
  fill_triangle_fields(s);
  return s;
}

GraphSolution solve_dirichlet(const TriMesh& m, const SubmersionChart& c, const BoundaryData& bdata, double tol) {
  SolveOptions o;
  o.tol = tol;
  return solve_dirichlet(std::make_shared<const TriMesh>(m), c, bdata, o);
}

GraphSolution evaluate_graph(std::shared_ptr<const TriMesh> m, const SubmersionChart& c, std::vector<double> u,
                             double tol) {
  if (u.size() != m->nodes.size()) throw SolverError("height vector does not match the mesh");
  const Discretization disc(m, c);
  GraphSolution s;
  s.mesh = m;
  s.chart = std::make_shared<const SubmersionChart>(c);
  Eigen::VectorXd res;
  disc.assemble(u, res, nullptr);
  s.residual_norm = max_abs(res);
  s.converged = s.residual_norm <= tol;
  s.energy = disc.energy(u);
  s.u = std::move(u);
  fill_triangle_fields(s);
  return s;
}

double discrete_energy(const GraphSolution& s, const std::vector<double>& u) {
  const Discretization disc(s.mesh, *s.chart);
  return disc.energy(u);
}

double interpolate(const GraphSolution& s, const MeshLocator& loc, const Vec2& p) {
  const auto t = loc.find(p, 1e-9 * std::max(1.0, s.mesh->h));
  if (!t) throw SolverError("point is outside the mesh");
  const TriMesh& m = *s.mesh;
  const auto& tr = m.triangles[static_cast<std::size_t>(*t)];
  const Vec2 q = loc.wrap(p);
  const Vec2 a = m.nodes[static_cast<std::size_t>(tr[0])], b = m.nodes[static_cast<std::size_t>(tr[1])],
             c = m.nodes[static_cast<std::size_t>(tr[2])];
  const double A = cross(b - a, c - a);
  const double l1 = cross(q - a, c - a) / A, l2 = cross(b - a, q - a) / A;
  return (1 - l1 - l2) * s.u[static_cast<std::size_t>(tr[0])] + l1 * s.u[static_cast<std::size_t>(tr[1])] +
         l2 * s.u[static_cast<std::size_t>(tr[2])];
}

BoundaryData truncated_boundary_data(const JSDomain& d, double n) {
  auto arc_value = [&d, n](int arc, const Vec2& p) {
    const ArcLabel& l = d.arcs[static_cast<std::size_t>(arc)].label;
    switch (l.kind) {
      case LabelKind::PlusInfinity: return n;
      case LabelKind::MinusInfinity: return -n;
      case LabelKind::Finite: return std::clamp(eval_expr(l.value, p.x, p.y), -n, n);
    }
    return 0.0;
  };
  // Arcs meeting at each vertex.
  std::vector<std::vector<int>> at(d.vertices.size());
  for (std::size_t a = 0; a < d.arcs.size(); ++a) {
    const BoundaryArc& b = d.arcs[a];
    if (b.v_start >= 0) at[static_cast<std::size_t>(b.v_start)].push_back(static_cast<int>(a));
    if (b.v_end >= 0) at[static_cast<std::size_t>(b.v_end)].push_back(static_cast<int>(a));
  }
  return [arc_value, at, &d](int marker, const Vec2& p) -> double {
    if (TriMesh::is_arc_marker(marker)) return arc_value(TriMesh::marker_arc(marker), p);
    if (!TriMesh::is_corner_marker(marker)) throw SolverError("no boundary value for an interior node");
    const auto& arcs = at[static_cast<std::size_t>(TriMesh::marker_corner(marker))];
    std::vector<double> finite, infinite;
    for (int a : arcs) {
      if (d.arcs[static_cast<std::size_t>(a)].label.infinite())
        infinite.push_back(arc_value(a, p));
      else
        finite.push_back(arc_value(a, p));
    }
    if (!finite.empty()) return std::accumulate(finite.begin(), finite.end(), 0.0) / static_cast<double>(finite.size());
    return std::accumulate(infinite.begin(), infinite.end(), 0.0) / static_cast<double>(infinite.size());
  };
}

// ---------------------------------------------------------------------------

SequenceResult solve_truncated_sequence(const JSDomain& d, double h, const std::vector<double>& schedule,
                                        const SequenceOptions& opts) {
  return solve_truncated_sequence(d, std::make_shared<const TriMesh>(triangulate(d, h, opts.seed)), schedule, opts);
}

SequenceResult solve_truncated_sequence(const JSDomain& d, std::shared_ptr<const TriMesh> mesh,
                                        const std::vector<double>& schedule, const SequenceOptions& opts) {
  if (schedule.empty()) throw SolverError("empty schedule");
  for (std::size_t i = 1; i < schedule.size(); ++i)
    if (!(schedule[i] > schedule[i - 1])) throw SolverError("schedule must be strictly increasing");
  SequenceResult r;
  r.mesh = mesh;
  r.p0 = d.interior;
  const TriMesh& M = *mesh;
  const MeshLocator loc(mesh);
  const Discretization disc(mesh, d.chart);

  r.interior_nodes.assign(M.nodes.size(), 0);
  for (std::size_t i = 0; i < M.nodes.size(); ++i) {
    const Vec2 q = r.p0 + (M.nodes[i] - r.p0) / opts.interior_scale;
    r.interior_nodes[i] = M.markers[i] == 0 && d.contains(q);
  }

  std::vector<double> prev_u, prev_b;
  for (double n : schedule) {
    const BoundaryData bd = truncated_boundary_data(d, n);
    std::vector<double> bvals(M.nodes.size(), 0.0);
    for (std::size_t i = 0; i < M.nodes.size(); ++i)
      if (M.markers[i] != 0) bvals[i] = bd(M.markers[i], M.nodes[i]);
    SolveOptions so;
    so.tol = opts.tol;
    so.max_iter = opts.max_iter;
    std::vector<double> init = bvals;
    if (prev_u.empty()) {
      disc.harmonic_fill(init);
      for (double& v : init) v += opts.initial_offset;
    } else {
      // Previous level plus the harmonic extension of the boundary change.
      std::vector<double> delta(M.nodes.size(), 0.0);
      for (std::size_t i = 0; i < delta.size(); ++i) delta[i] = bvals[i] - prev_b[i];
      disc.harmonic_fill(delta);
      for (std::size_t i = 0; i < init.size(); ++i) init[i] = prev_u[i] + delta[i];
    }
    so.initial = init;
    SequenceLevel lv;
    lv.n = n;
    lv.solution = solve_dirichlet(mesh, d.chart, bd, so);
    lv.u_at_p0 = interpolate(lv.solution, loc, r.p0);
    if (!r.levels.empty()) {
      const SequenceLevel& pl = r.levels.back();
      double sup = 0;
      for (std::size_t i = 0; i < M.nodes.size(); ++i) {
        if (!r.interior_nodes[i]) continue;
        const double a = lv.solution.u[i] - lv.u_at_p0;
        const double b = pl.solution.u[i] - pl.u_at_p0;
        sup = std::max(sup, std::fabs(a - b));
      }
      lv.interior_change = sup;
    }
    prev_u = lv.solution.u;
    prev_b = bvals;
    r.levels.push_back(std::move(lv));
  }
  return r;
}

// ---------------------------------------------------------------------------

FluxReport flux(const GraphSolution& s, const CurveSample& curve) {
  const SubmersionChart& c = *s.chart;
  const MeshLocator loc(s.mesh);
  const double tol = 0.5 * s.mesh->h;
  FluxReport r;
  const std::size_t n = curve.points.size();
  const std::size_t nseg = curve.closed ? n : n - 1;
  if (n < 2) throw SolverError("curve needs at least two samples");
  const double sign = side_sign(curve.side);
  for (std::size_t i = 0; i < nseg; ++i) {
    const Vec2 a = curve.points[i];
    const Vec2 b = i + 1 < n ? curve.points[i + 1] : curve.points[0] + curve.closure_shift;
    const Vec2 m = 0.5 * (a + b);
    const double len = dist(a, b);
    if (len == 0) continue;
    const auto t = loc.find(m, tol);
    if (!t) throw SolverError("curve exits the mesh near (" + std::to_string(m.x) + ", " + std::to_string(m.y) + ")");
    const auto& tr = s.mesh->triangles[static_cast<std::size_t>(*t)];
    const TriMesh& M = *s.mesh;
    const Vec2 p0 = M.nodes[static_cast<std::size_t>(tr[0])], p1 = M.nodes[static_cast<std::size_t>(tr[1])],
               p2 = M.nodes[static_cast<std::size_t>(tr[2])];
    const double A2 = cross(p1 - p0, p2 - p0);
    const std::array<Vec2, 3> p{p0, p1, p2};
    Vec2 g{};
    for (int k = 0; k < 3; ++k)
      g += perp(p[static_cast<std::size_t>((k + 2) % 3)] - p[static_cast<std::size_t>((k + 1) % 3)]) *
           (s.u[static_cast<std::size_t>(tr[static_cast<std::size_t>(k)])] / A2);
    const ChartFields f = c.fields(m);
    const Vec2 gu{g.x / f.lambda - f.a, g.y / f.lambda - f.b};
    const double W = std::sqrt(1 + f.mu * f.mu * dot(gu, gu));
    const Vec2 eta = perp(b - a) * (sign / len);
    r.value += f.mu * f.mu * dot(gu, eta) / W * f.lambda * len;
    r.length_mu += f.mu * f.lambda * len;
    ++r.segments;
  }
  r.ratio = r.length_mu > 0 ? r.value / r.length_mu : 0;
  return r;
}

NuSummary angle_function_field(const GraphSolution& s) {
  NuSummary r;
  r.nu = s.nu;
  if (!r.nu.empty()) {
    const auto [lo, hi] = std::minmax_element(r.nu.begin(), r.nu.end());
    r.min = *lo;
    r.max = *hi;
  }
  return r;
}

// ---------------------------------------------------------------------------

DivergenceReport detect_divergence_lines(const SequenceResult& r, double nu_thresh, const DivergenceOptions& opts) {
  DivergenceReport rep;
  for (const auto& lv : r.levels) rep.min_nu_per_level.push_back(angle_function_field(lv.solution).min);
  if (r.levels.size() < 2) {
    rep.note = "at least two levels are needed to assess the decrease of nu";
    return rep;
  }
  const TriMesh& M = *r.mesh;
  const GraphSolution& last = r.levels.back().solution;
  const GraphSolution& prev = r.levels[r.levels.size() - 2].solution;
  const SubmersionChart& chart = *last.chart;
  const std::size_t nt = M.triangles.size();
  std::vector<char> flag(nt, 0);
  for (std::size_t t = 0; t < nt; ++t) {
    const double a = M.area(t);
    rep.total_area += a;
    if (last.nu[t] < nu_thresh && prev.nu[t] >= opts.decrease_factor * last.nu[t]) {
      flag[t] = 1;
      rep.flagged.push_back(static_cast<int>(t));
      rep.flagged_area += a;
    }
  }

  // Clusters of flagged triangles sharing an edge (periodic seams identified).
  const auto rep_node = M.representatives();
  std::unordered_map<std::uint64_t, std::vector<int>> by_edge;
  for (int t : rep.flagged) {
    const auto& tr = M.triangles[static_cast<std::size_t>(t)];
    for (int i = 0; i < 3; ++i)
      by_edge[edge_key(rep_node[static_cast<std::size_t>(tr[static_cast<std::size_t>(i)])],
                       rep_node[static_cast<std::size_t>(tr[static_cast<std::size_t>((i + 1) % 3)])])]
          .push_back(t);
  }
  std::vector<int> comp(nt, -1);
  std::vector<std::vector<int>> clusters;
  for (int t0 : rep.flagged) {
    if (comp[static_cast<std::size_t>(t0)] >= 0) continue;
    const int id = static_cast<int>(clusters.size());
    clusters.emplace_back();
    std::vector<int> stack{t0};
    comp[static_cast<std::size_t>(t0)] = id;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      clusters.back().push_back(t);
      const auto& tr = M.triangles[static_cast<std::size_t>(t)];
      for (int i = 0; i < 3; ++i)
        for (int o : by_edge[edge_key(rep_node[static_cast<std::size_t>(tr[static_cast<std::size_t>(i)])],
                                      rep_node[static_cast<std::size_t>(tr[static_cast<std::size_t>((i + 1) % 3)])])])
          if (comp[static_cast<std::size_t>(o)] < 0) {
            comp[static_cast<std::size_t>(o)] = id;
            stack.push_back(o);
          }
    }
  }

  const MeshLocator loc(r.mesh);
  const double h = M.h;
  const double step = opts.shoot_step > 0 ? opts.shoot_step : h / 4;
  double lmax = 0;
  for (const auto& [a, b] : boundary_edges(M)) {
    const Vec2 pa = M.nodes[static_cast<std::size_t>(a)], pb = M.nodes[static_cast<std::size_t>(b)];
    lmax += chart.rho(0.5 * (pa + pb)).rho * dist(pa, pb);
  }
  const std::optional<double> P = M.period;

  for (auto& cl : clusters) {
    std::sort(cl.begin(), cl.end());
    int tmin = cl.front();
    for (int t : cl)
      if (last.nu[static_cast<std::size_t>(t)] < last.nu[static_cast<std::size_t>(tmin)]) tmin = t;
    const Vec2 gu = last.gu[static_cast<std::size_t>(tmin)];
    if (norm(gu) == 0) continue;
    const Vec2 seed = M.centroid(static_cast<std::size_t>(tmin));
    const Vec2 dir = perp(normalized(gu));
    const double theta = std::atan2(dir.y, dir.x);

    // Cluster centroids for the neighborhood test.
    std::vector<Vec2> cents;
    for (int t : cl) cents.push_back(M.centroid(static_cast<std::size_t>(t)));
    auto near_cluster = [&](Vec2 p) {
      p = loc.wrap(p);
      for (const Vec2& c : cents) {
        Vec2 dd = p - c;
        if (P) dd.x = std::remainder(dd.x, *P);
        if (norm(dd) <= 3 * h) return true;
      }
      return false;
    };

    ShootOptions so;
    so.max_step = step;
    auto inside = [&](const Vec2& p) { return loc.find(p, 0).has_value(); };
    DivergenceLine line;
    line.seed = seed;
    line.triangles = cl;
    for (int t : cl) line.area += M.area(static_cast<std::size_t>(t));

    so.keep_going = [&](const Vec2& p) { return inside(p) && (!P || std::fabs(p.x - seed.x) < *P); };
    GeodesicArc fwd = mu_geodesic_shoot(chart, seed, theta, lmax, so);
    CurveSample curve;
    const double shift = fwd.end().x > seed.x ? (P ? *P : 0.0) : -(P ? *P : 0.0);
    const Vec2 home = seed + Vec2{shift, 0};
    if (P && fwd.stopped && dist(fwd.end(), home) < 4 * step / chart.rho(fwd.end()).rho) {
      // Came around once: close it.
      GeodesicArc g = fwd;
      g.closed = true;
      line.line = g;
      curve = make_curve(chart, g.points, NormalSide::Left, true, Vec2{shift, 0});
    } else {
      so.keep_going = inside;
      const GeodesicArc back = mu_geodesic_shoot(chart, seed, theta + std::numbers::pi, lmax, so);
      GeodesicArc g;
      for (std::size_t i = back.points.size(); i-- > 1;) {
        g.points.push_back(back.points[i]);
        g.directions.push_back(-back.directions[i]);
      }
      for (std::size_t i = 0; i < fwd.points.size(); ++i) {
        g.points.push_back(fwd.points[i]);
        g.directions.push_back(fwd.directions[i]);
      }
      g.s.assign(g.points.size(), 0.0);
      for (std::size_t i = 1; i < g.points.size(); ++i)
        g.s[i] = g.s[i - 1] + mu_length(chart, std::span<const Vec2>(&g.points[i - 1], 2));
      g.initial_angle = theta + std::numbers::pi;
      g.truncated = back.truncated || fwd.truncated;
      g.stopped = back.stopped || fwd.stopped;
      line.line = g;
      curve = make_curve(chart, g.points, NormalSide::Left);
    }
    if (curve.size() < 3) continue;
    line.max_curvature = max_abs_mu_curvature(chart, curve);
    bool stays = true;
    for (const Vec2& p : line.line.points)
      if (!near_cluster(p)) {
        stays = false;
        break;
      }
    if (stays) rep.lines.push_back(std::move(line));
  }
  return rep;
}

// ---------------------------------------------------------------------------

FactorizationGap factorization_gap(const GraphSolution& s1, const GraphSolution& s2) {
  if (s1.mesh != s2.mesh && (s1.mesh->triangles != s2.mesh->triangles || s1.mesh->nodes != s2.mesh->nodes))
    throw SolverError("solutions live on different meshes");
  FactorizationGap g;
  const std::size_t nt = s1.gu.size();
  g.lhs.resize(nt);
  g.rhs.resize(nt);
  for (std::size_t t = 0; t < nt; ++t) {
    const Vec2 gu = s1.gu[t], gv = s2.gu[t];
    const double wu = s1.w[t], wv = s2.w[t];
    const double mu = s1.chart->mu(s1.mesh->centroid(t));
    g.lhs[t] = dot(gu / wu - gv / wv, gu - gv);
    // Unit normals in the frame (e1, e2, xi / mu).
    const Vec2 hu = gu * (-mu / wu), hv = gv * (-mu / wv);
    const double zu = 1 / wu, zv = 1 / wv;
    const Vec2 dh = hu - hv;
    const double dz = zu - zv;
    g.rhs[t] = (wu + wv) * (dot(dh, dh) + dz * dz) / (2 * mu * mu);
  }
  return g;
}

}  // namespace jsg
