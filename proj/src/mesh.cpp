#include "jsg/mesh.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <numbers>
#include <ostream>
#include <random>
#include <string>
#include <unordered_map>
#include <unordered_set>

namespace jsg {

namespace {

using i64 = std::int64_t;
using i128 = __int128;

// ---------------------------------------------------------------------------
// Exact predicates on integer coordinates in [0, 2^26] (super triangle up to 3*2^27).

struct IPt {
  i64 x = 0, y = 0;
  bool operator==(const IPt&) const = default;
};

constexpr i64 kGrid = i64{1} << 26;

int orient(const IPt& a, const IPt& b, const IPt& c) {
  const i64 v = (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x);
  return (v > 0) - (v < 0);
}

// Positive when d lies strictly inside the circumcircle of counter-clockwise abc.
int incircle(const IPt& a, const IPt& b, const IPt& c, const IPt& d) {
  const i128 adx = a.x - d.x, ady = a.y - d.y;
  const i128 bdx = b.x - d.x, bdy = b.y - d.y;
  const i128 cdx = c.x - d.x, cdy = c.y - d.y;
  const i128 al = adx * adx + ady * ady;
  const i128 bl = bdx * bdx + bdy * bdy;
  const i128 cl = cdx * cdx + cdy * cdy;
  const i128 det = al * (bdx * cdy - cdx * bdy) + bl * (cdx * ady - adx * cdy) + cl * (adx * bdy - bdx * ady);
  return (det > 0) - (det < 0);
}

std::uint64_t morton(const IPt& p) {
  auto spread = [](std::uint64_t v) {
    v &= 0xffffffffULL;
    v = (v | (v << 16)) & 0x0000ffff0000ffffULL;
    v = (v | (v << 8)) & 0x00ff00ff00ff00ffULL;
    v = (v | (v << 4)) & 0x0f0f0f0f0f0f0f0fULL;
    v = (v | (v << 2)) & 0x3333333333333333ULL;
    v = (v | (v << 1)) & 0x5555555555555555ULL;
    return v;
  };
  return spread(static_cast<std::uint64_t>(p.x)) | (spread(static_cast<std::uint64_t>(p.y)) << 1);
}

// Incremental Bowyer-Watson triangulation.
class Delaunay {
 public:
  explicit Delaunay(std::vector<IPt> pts) : p_(std::move(pts)), n_(static_cast<int>(p_.size())) {
    constexpr i64 K = i64{1} << 27;
    p_.push_back({-K, -K});
    p_.push_back({3 * K, -K});
    p_.push_back({-K, 3 * K});
    t_.push_back({{n_, n_ + 1, n_ + 2}, {-1, -1, -1}, true});
    stamp_.push_back(0);
    std::vector<int> order(static_cast<std::size_t>(n_));
    for (int i = 0; i < n_; ++i) order[static_cast<std::size_t>(i)] = i;
    std::vector<std::uint64_t> keys(order.size());
    for (int i = 0; i < n_; ++i) keys[static_cast<std::size_t>(i)] = morton(p_[static_cast<std::size_t>(i)]);
    std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
      return keys[static_cast<std::size_t>(a)] < keys[static_cast<std::size_t>(b)];
    });
    inserted_.assign(static_cast<std::size_t>(n_), false);
    for (int i : order) inserted_[static_cast<std::size_t>(i)] = insert(i);
  }

  bool inserted(int i) const { return inserted_[static_cast<std::size_t>(i)]; }

  std::vector<std::array<int, 3>> triangles() const {
    std::vector<std::array<int, 3>> out;
    for (const Tri& t : t_)
      if (t.alive && t.v[0] < n_ && t.v[1] < n_ && t.v[2] < n_) out.push_back(t.v);
    return out;
  }

 private:
  struct Tri {
    std::array<int, 3> v;
    std::array<int, 3> nb;  // nb[i] is across the edge opposite v[i]
    bool alive;
  };

  const IPt& P(int i) const { return p_[static_cast<std::size_t>(i)]; }
  Tri& T(int i) { return t_[static_cast<std::size_t>(i)]; }

  int locate(const IPt& q) {
    int t = last_;
    for (;;) {
      const Tri& tr = T(t);
      const int start = static_cast<int>(walk_++ % 3);
      bool moved = false;
      for (int k = 0; k < 3; ++k) {
        const int i = (start + k) % 3;
        if (orient(P(tr.v[(i + 1) % 3]), P(tr.v[(i + 2) % 3]), q) < 0) {
          t = tr.nb[i];
          moved = true;
          break;
        }
      }
      if (!moved) return t;
    }
  }

  bool insert(int pi) {
    const IPt q = P(pi);
    const int t0 = locate(q);
    for (int v : T(t0).v)
      if (P(v) == q) return false;
    ++epoch_;
    std::vector<int> cav{t0}, stack{t0};
    stamp_[static_cast<std::size_t>(t0)] = epoch_;
    while (!stack.empty()) {
      const int t = stack.back();
      stack.pop_back();
      for (int i = 0; i < 3; ++i) {
        const int n = T(t).nb[i];
        if (n < 0) continue;
        int& s = stamp_[static_cast<std::size_t>(n)];
        if (s == epoch_ || s == -epoch_) continue;
        const Tri& tn = T(n);
        if (incircle(P(tn.v[0]), P(tn.v[1]), P(tn.v[2]), q) > 0) {
          s = epoch_;
          cav.push_back(n);
          stack.push_back(n);
        } else {
          s = -epoch_;
        }
      }
    }
    struct BEdge {
      int a, b, outer;
    };
    std::vector<BEdge> rim;
    for (int t : cav) {
      for (int i = 0; i < 3; ++i) {
        const int n = T(t).nb[i];
        if (n >= 0 && stamp_[static_cast<std::size_t>(n)] == epoch_) continue;
        rim.push_back({T(t).v[(i + 1) % 3], T(t).v[(i + 2) % 3], n});
      }
    }
    std::vector<int> slots;
    for (std::size_t k = 0; k < rim.size(); ++k) {
      if (k < cav.size()) {
        slots.push_back(cav[k]);
      } else {
        slots.push_back(static_cast<int>(t_.size()));
        t_.push_back({});
        stamp_.push_back(0);
      }
    }
    for (std::size_t k = 0; k < rim.size(); ++k) {
      const BEdge& e = rim[k];
      const int id = slots[k];
      T(id) = {{e.a, e.b, pi}, {-1, -1, e.outer}, true};
      stamp_[static_cast<std::size_t>(id)] = 0;
      if (e.outer >= 0) {
        Tri& o = T(e.outer);
        for (int j = 0; j < 3; ++j)
          if (o.v[j] != e.a && o.v[j] != e.b) o.nb[j] = id;
      }
    }
    for (std::size_t k = 0; k < rim.size(); ++k) {
      Tri& tk = T(slots[k]);
      for (std::size_t m = 0; m < rim.size(); ++m) {
        if (rim[m].a == rim[k].b) tk.nb[0] = slots[m];
        if (rim[m].b == rim[k].a) tk.nb[1] = slots[m];
      }
    }
    last_ = slots.front();
    return true;
  }

  std::vector<IPt> p_;
  int n_;
  std::vector<Tri> t_;
  std::vector<int> stamp_;
  std::vector<bool> inserted_;
  int epoch_ = 0;
  int last_ = 0;
  std::uint64_t walk_ = 0;
};

// ---------------------------------------------------------------------------
// Uniform bucket grid over a bounding box.

class Buckets {
 public:
  Buckets(Vec2 lo, Vec2 hi, double cell) : lo_(lo), cell_(cell) {
    nx_ = std::max(1, static_cast<int>(std::ceil((hi.x - lo.x) / cell)) + 1);
    ny_ = std::max(1, static_cast<int>(std::ceil((hi.y - lo.y) / cell)) + 1);
    cells_.resize(static_cast<std::size_t>(nx_) * static_cast<std::size_t>(ny_));
  }

  void add(int id, Vec2 lo, Vec2 hi) {
    const auto [i0, j0] = cell_of(lo);
    const auto [i1, j1] = cell_of(hi);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i) cells_[index(i, j)].push_back(id);
  }
  void add(int id, Vec2 p) { add(id, p, p); }

  template <class F>
  void visit(Vec2 lo, Vec2 hi, F&& f) const {
    const auto [i0, j0] = cell_of(lo);
    const auto [i1, j1] = cell_of(hi);
    for (int j = j0; j <= j1; ++j)
      for (int i = i0; i <= i1; ++i)
        for (int id : cells_[index(i, j)]) f(id);
  }

 private:
  std::pair<int, int> cell_of(Vec2 p) const {
    const int i = static_cast<int>(std::floor((p.x - lo_.x) / cell_));
    const int j = static_cast<int>(std::floor((p.y - lo_.y) / cell_));
    return {std::clamp(i, 0, nx_ - 1), std::clamp(j, 0, ny_ - 1)};
  }
  std::size_t index(int i, int j) const {
    return static_cast<std::size_t>(j) * static_cast<std::size_t>(nx_) + static_cast<std::size_t>(i);
  }

  Vec2 lo_;
  double cell_;
  int nx_ = 1, ny_ = 1;
  std::vector<std::vector<int>> cells_;
};

// ---------------------------------------------------------------------------

struct Curve {
  std::vector<Vec2> pts;
  double length = 0;
  int marker = 0;
  bool seam = false;
  bool right_seam = false;
  int start_node = -1, end_node = -1;

  Vec2 at(double t) const { return polyline_point_at(pts, t); }
};

struct Seg {
  int a = -1, b = -1;
  int curve = -1;
  double t0 = 0, t1 = 0;
  int partner = -1;
};

constexpr double kMinAngleDeg = 20.0;

double min_angle_deg(const Vec2& a, const Vec2& b, const Vec2& c) {
  auto ang = [](const Vec2& p, const Vec2& q, const Vec2& r) {
    const Vec2 u = q - p, v = r - p;
    return std::atan2(std::fabs(cross(u, v)), dot(u, v));
  };
  const double m = std::min({ang(a, b, c), ang(b, c, a), ang(c, a, b)});
  return m * 180.0 / std::numbers::pi;
}

Vec2 circumcenter(const Vec2& a, const Vec2& b, const Vec2& c) {
  const Vec2 ba = b - a, ca = c - a;
  const double d = 2 * cross(ba, ca);
  const double b2 = dot(ba, ba), c2 = dot(ca, ca);
  return a + Vec2{(ca.y * b2 - ba.y * c2) / d, (ba.x * c2 - ca.x * b2) / d};
}

class Mesher {
 public:
  Mesher(const JSDomain& d, double h, std::uint32_t seed) : d_(d), h_(h), s_(0.8 * h), rng_(seed) {
    const Region& reg = d.chart.region();
    if (d.periodic_annulus) {
      period_ = *reg.period;
      xs_ = reg.xmin;
    }
  }

  TriMesh run() {
    check_arc_sizes();
    if (period_)
      setup_periodic();
    else
      setup_disk();
    resample_curves();
    check_boundary_simple();
    compute_box();
    seed_lattice();
    refine();
    return assemble();
  }

 private:
  int add_node(Vec2 p, int marker) {
    pts_.push_back(p);
    mark_.push_back(marker);
    return static_cast<int>(pts_.size()) - 1;
  }

  void check_arc_sizes() const {
    for (const BoundaryArc& a : d_.arcs) {
      const auto poly = a.polyline();
      const double len = polyline_length(poly);
      if (std::ceil(len / h_ - 1e-9) < 4)
        throw MeshSizeError("h too large: arc '" + a.name + "' of length " + std::to_string(len) +
                        " would receive fewer than 4 edges");
    }
  }

  void setup_disk() {
    if (d_.loops.size() != 1) throw MeshError("expected a single boundary loop");
    std::vector<int> vnode(d_.vertices.size(), -1);
    for (std::size_t v = 0; v < d_.vertices.size(); ++v) {
      vnode[v] = add_node(d_.vertices[v], TriMesh::corner_marker(static_cast<int>(v)));
      corners_.push_back(d_.vertices[v]);
    }
    for (int ai : d_.loops[0]) {
      const BoundaryArc& a = d_.arcs[static_cast<std::size_t>(ai)];
      Curve c;
      c.pts = a.polyline();
      c.marker = TriMesh::arc_marker(ai);
      if (a.closed()) {
        c.start_node = c.end_node = add_node(c.pts.front(), c.marker);
      } else {
        c.start_node = vnode[static_cast<std::size_t>(a.v_start)];
        c.end_node = vnode[static_cast<std::size_t>(a.v_end)];
        c.pts.front() = d_.vertices[static_cast<std::size_t>(a.v_start)];
        c.pts.back() = d_.vertices[static_cast<std::size_t>(a.v_end)];
      }
      curves_.push_back(std::move(c));
    }
  }

  // A loop of the annulus cut open at the seam, with per-segment arc ids and
  // the vertex indices at its points.
  struct CutLoop {
    std::vector<Vec2> pts;
    std::vector<int> seg_arc;
    std::vector<int> vertex;  // per point, -1 if none
  };

  CutLoop cut_loop(const std::vector<int>& loop) const {
    const double P = *period_;
    // Unwrapped loop with segment labels.
    std::vector<Vec2> q;
    std::vector<int> arc, vert;
    for (int ai : loop) {
      const BoundaryArc& a = d_.arcs[static_cast<std::size_t>(ai)];
      std::vector<Vec2> poly = a.polyline();
      if (!q.empty()) {
        const double k = std::round((q.back().x - poly.front().x) / P);
        for (Vec2& p : poly) p.x += k * P;
      }
      if (q.empty()) {
        q.push_back(poly.front());
        vert.push_back(a.v_start);
      }
      for (std::size_t i = 1; i < poly.size(); ++i) {
        q.push_back(poly[i]);
        arc.push_back(ai);
        vert.push_back(i + 1 == poly.size() ? a.v_end : -1);
      }
    }
    if (!vert.empty()) vert.back() = vert.front();
    const double wrap = q.back().x - q.front().x;
    if (std::fabs(std::fabs(wrap) - P) > 1e-9 * P) throw MeshError("periodic loop does not close after one period");

    // First crossing of a seam line x = xs + kP.
    std::size_t j = q.size();
    double X = 0, t = 0;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
      const double ka = std::floor((q[i].x - xs_) / P), kb = std::floor((q[i + 1].x - xs_) / P);
      if (ka != kb) {
        X = xs_ + std::max(ka, kb) * P;
        t = (X - q[i].x) / (q[i + 1].x - q[i].x);
        j = i;
        break;
      }
    }
    if (j == q.size()) throw MeshError("periodic loop does not cross the seam");
    int crossings = 0;
    for (std::size_t i = 0; i + 1 < q.size(); ++i) {
      const double ka = std::floor((q[i].x - xs_) / P), kb = std::floor((q[i + 1].x - xs_) / P);
      crossings += static_cast<int>(std::fabs(ka - kb));
    }
    if (crossings != 1) throw MeshError("periodic loop crosses the seam more than once");

    if (t >= 1) {
      ++j;
      t = 0;
    }
    const Vec2 w{wrap, 0};
    const std::size_t M = q.size() - 1;
    const Vec2 c = t == 0 ? q[j] : q[j] + (q[j + 1] - q[j]) * t;
    const int vc = t == 0 ? vert[j] : -1;
    CutLoop out;
    auto push = [&](Vec2 p, int v, int a) {
      out.pts.push_back(p);
      out.vertex.push_back(v);
      if (a >= 0) out.seg_arc.push_back(a);
    };
    push(c, vc, -1);
    for (std::size_t i = j + 1; i <= M; ++i) push(q[i], vert[i], arc[i - 1]);
    if (t == 0) {
      for (std::size_t i = 1; i < j; ++i) push(q[i] + w, vert[i], arc[i - 1]);
      if (j > 0) push(c + w, vc, arc[j - 1]);
    } else {
      for (std::size_t i = 1; i <= j; ++i) push(q[i] + w, vert[i], arc[i - 1]);
      push(c + w, vc, arc[j]);
    }
    const double target = wrap > 0 ? xs_ : xs_ + P;
    const double shift = target - X;
    for (Vec2& p : out.pts) p.x += shift;
    out.pts.front().x = target;
    out.pts.back().x = wrap > 0 ? xs_ + P : xs_;
    out.pts.back().y = out.pts.front().y;
    return out;
  }

  void setup_periodic() {
    if (d_.loops.size() != 2) throw MeshError("periodic annulus needs two loops");
    std::array<int, 2> start{}, end{};
    std::vector<int> vnode(d_.vertices.size(), -1);
    for (int l = 0; l < 2; ++l) {
      const CutLoop cl = cut_loop(d_.loops[static_cast<std::size_t>(l)]);
      const int m0 = cl.vertex.front() >= 0 ? TriMesh::corner_marker(cl.vertex.front())
                                            : TriMesh::arc_marker(cl.seg_arc.front());
      start[static_cast<std::size_t>(l)] = add_node(cl.pts.front(), m0);
      end[static_cast<std::size_t>(l)] = add_node(cl.pts.back(), m0);
      // Bottom loop travels +x: its end is the right copy.
      if (l == 0)
        pairs_.push_back({end[0], start[0]});
      else
        pairs_.push_back({start[1], end[1]});
      // Split at vertices.
      std::size_t k0 = 0;
      int node0 = start[static_cast<std::size_t>(l)];
      for (std::size_t k = 1; k < cl.pts.size(); ++k) {
        const bool last = k + 1 == cl.pts.size();
        if (!last && cl.vertex[k] < 0) continue;
        int node1;
        if (last) {
          node1 = end[static_cast<std::size_t>(l)];
        } else {
          const auto v = static_cast<std::size_t>(cl.vertex[k]);
          if (vnode[v] < 0) {
            vnode[v] = add_node(cl.pts[k], TriMesh::corner_marker(cl.vertex[k]));
            corners_.push_back(cl.pts[k]);
          }
          node1 = vnode[v];
        }
        Curve c;
        c.pts.assign(cl.pts.begin() + static_cast<std::ptrdiff_t>(k0), cl.pts.begin() + static_cast<std::ptrdiff_t>(k) + 1);
        c.marker = TriMesh::arc_marker(cl.seg_arc[k0]);
        c.start_node = node0;
        c.end_node = node1;
        curves_.push_back(std::move(c));
        k0 = k;
        node0 = node1;
      }
    }
    // Seams: right copy goes up from the bottom loop's end, left copy goes down
    // from the top loop's end.
    Curve right;
    right.pts = {pts_[static_cast<std::size_t>(end[0])], pts_[static_cast<std::size_t>(start[1])]};
    right.seam = right.right_seam = true;
    right.start_node = end[0];
    right.end_node = start[1];
    Curve left;
    left.pts = {pts_[static_cast<std::size_t>(end[1])], pts_[static_cast<std::size_t>(start[0])]};
    left.seam = true;
    left.start_node = end[1];
    left.end_node = start[0];
    if (!(right.pts[1].y > right.pts[0].y)) throw MeshError("periodic loops are not ordered bottom to top");
    curves_.push_back(std::move(right));
    curves_.push_back(std::move(left));
  }

  void resample_curves() {
    for (auto& c : curves_) c.length = polyline_length(c.pts);
    std::vector<int> right_segs, left_segs;
    for (std::size_t ci = 0; ci < curves_.size(); ++ci) {
      Curve& c = curves_[ci];
      int n = 4;
      while (c.length / n > s_) n *= 2;
      if (c.seam && !c.right_seam) continue;  // created with its partner
      int prev = c.start_node;
      int prev_left = -1;
      const Curve* lc = nullptr;
      std::size_t li = 0;
      if (c.right_seam) {
        li = ci + 1;
        lc = &curves_[li];
        prev_left = lc->end_node;  // bottom end of the left seam
      }
      std::vector<int> rnodes{prev}, lnodes{prev_left};
      for (int k = 1; k <= n; ++k) {
        const double t = c.length * k / n;
        int node;
        int lnode = -1;
        if (k == n) {
          node = c.end_node;
          if (lc) lnode = lc->start_node;
        } else if (c.right_seam) {
          const double y = c.at(t).y;
          node = add_node({xs_ + *period_, y}, 0);
          lnode = add_node({xs_, y}, 0);
          pairs_.push_back({node, lnode});
        } else {
          node = add_node(c.at(t), c.marker);
        }
        rnodes.push_back(node);
        lnodes.push_back(lnode);
        segs_.push_back({prev, node, static_cast<int>(ci), c.length * (k - 1) / n, t, -1});
        prev = node;
      }
      if (lc) {
        // Left seam runs top to bottom: segment m spans lnodes[n-m] -> lnodes[n-m-1].
        const int first_right = static_cast<int>(segs_.size()) - n;
        const double L = lc->length;
        for (int m = 0; m < n; ++m) {
          const int r = first_right + (n - 1 - m);
          segs_.push_back({lnodes[static_cast<std::size_t>(n - m)], lnodes[static_cast<std::size_t>(n - m - 1)],
                           static_cast<int>(li), L * m / n, L * (m + 1) / n, r});
          segs_[static_cast<std::size_t>(r)].partner = static_cast<int>(segs_.size()) - 1;
        }
      }
    }
  }

  void check_boundary_simple() const {
    const std::size_t n = segs_.size();
    std::vector<std::pair<Vec2, Vec2>> box(n);
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2 a = pts_[static_cast<std::size_t>(segs_[i].a)], b = pts_[static_cast<std::size_t>(segs_[i].b)];
      box[i] = {{std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)}};
    }
    std::vector<std::size_t> order(n);
    for (std::size_t i = 0; i < n; ++i) order[i] = i;
    std::sort(order.begin(), order.end(), [&](auto i, auto j) { return box[i].first.x < box[j].first.x; });
    for (std::size_t oi = 0; oi < n; ++oi) {
      const std::size_t i = order[oi];
      for (std::size_t oj = oi + 1; oj < n && box[order[oj]].first.x <= box[i].second.x; ++oj) {
        const std::size_t j = order[oj];
        if (box[j].first.y > box[i].second.y || box[j].second.y < box[i].first.y) continue;
        const Seg& s = segs_[i];
        const Seg& t = segs_[j];
        if (s.a == t.a || s.a == t.b || s.b == t.a || s.b == t.b) continue;
        if (segments_intersect(pts_[static_cast<std::size_t>(s.a)], pts_[static_cast<std::size_t>(s.b)],
                               pts_[static_cast<std::size_t>(t.a)], pts_[static_cast<std::size_t>(t.b)]))
          throw MeshError("boundary self-intersection after discretization");
      }
    }
  }

  void compute_box() {
    lo_ = hi_ = pts_.front();
    for (const Vec2& p : pts_) {
      lo_ = {std::min(lo_.x, p.x), std::min(lo_.y, p.y)};
      hi_ = {std::max(hi_.x, p.x), std::max(hi_.y, p.y)};
    }
    span_ = std::max(hi_.x - lo_.x, hi_.y - lo_.y);
  }

  IPt to_int(const Vec2& p) const {
    const double sx = (p.x - lo_.x) / span_ * static_cast<double>(kGrid);
    const double sy = (p.y - lo_.y) / span_ * static_cast<double>(kGrid);
    return {std::clamp<i64>(std::llround(sx), 0, kGrid), std::clamp<i64>(std::llround(sy), 0, kGrid)};
  }

  // Even-odd test against the current boundary segments.
  bool inside(const Vec2& p) const {
    bool in = false;
    rows_->visit({lo_.x, p.y}, {lo_.x, p.y}, [&](int si) {
      const Seg& s = segs_[static_cast<std::size_t>(si)];
      const Vec2 a = pts_[static_cast<std::size_t>(s.a)], b = pts_[static_cast<std::size_t>(s.b)];
      if ((a.y > p.y) != (b.y > p.y)) {
        const double x = a.x + (p.y - a.y) / (b.y - a.y) * (b.x - a.x);
        if (p.x < x) in = !in;
      }
    });
    return in;
  }

  void build_rows() {
    rows_.emplace(Vec2{lo_.x, lo_.y}, Vec2{lo_.x, hi_.y}, h_);
    for (std::size_t i = 0; i < segs_.size(); ++i) {
      const Vec2 a = pts_[static_cast<std::size_t>(segs_[i].a)], b = pts_[static_cast<std::size_t>(segs_[i].b)];
      rows_->add(static_cast<int>(i), {lo_.x, std::min(a.y, b.y)}, {lo_.x, std::max(a.y, b.y)});
    }
  }

  Buckets segment_buckets() const {
    Buckets g(lo_, hi_, h_);
    for (std::size_t i = 0; i < segs_.size(); ++i) {
      const Vec2 a = pts_[static_cast<std::size_t>(segs_[i].a)], b = pts_[static_cast<std::size_t>(segs_[i].b)];
      g.add(static_cast<int>(i), {std::min(a.x, b.x), std::min(a.y, b.y)}, {std::max(a.x, b.x), std::max(a.y, b.y)});
    }
    return g;
  }

  bool encroaches(const Vec2& q, const Seg& s) const {
    const Vec2 a = pts_[static_cast<std::size_t>(s.a)], b = pts_[static_cast<std::size_t>(s.b)];
    return dot(a - q, b - q) <= 0;
  }

  void seed_lattice() {
    build_rows();
    const Buckets sg = segment_buckets();
    const double a = s_;
    const double dy = a * std::sqrt(3.0) / 2;
    std::uniform_real_distribution<double> jitter(-0.05 * a, 0.05 * a);
    int row = 0;
    for (double y = lo_.y + dy / 2; y < hi_.y; y += dy, ++row) {
      for (double x = lo_.x + (row % 2 ? a / 2 : 0) + a / 4; x < hi_.x; x += a) {
        const Vec2 p{x + jitter(rng_), y + jitter(rng_)};
        if (!inside(p)) continue;
        const double r = 0.6 * a;
        bool near = false;
        sg.visit(p - Vec2{r, r}, p + Vec2{r, r}, [&](int si) {
          const Seg& s = segs_[static_cast<std::size_t>(si)];
          if (point_segment_distance(p, pts_[static_cast<std::size_t>(s.a)], pts_[static_cast<std::size_t>(s.b)]) < r)
            near = true;
        });
        if (!near) add_node(p, 0);
      }
    }
  }

  bool touches_corner(const Seg& s) const {
    return TriMesh::is_corner_marker(mark_[static_cast<std::size_t>(s.a)]) ||
           TriMesh::is_corner_marker(mark_[static_cast<std::size_t>(s.b)]);
  }

  // Split parameter; segments at a corner split at power-of-two distances from it.
  double split_param(const Seg& s) const {
    const bool ca = TriMesh::is_corner_marker(mark_[static_cast<std::size_t>(s.a)]);
    const bool cb = TriMesh::is_corner_marker(mark_[static_cast<std::size_t>(s.b)]);
    const double len = s.t1 - s.t0;
    if (ca == cb) return 0.5 * (s.t0 + s.t1);
    const double dd = s_ * std::exp2(std::round(std::log2(0.5 * len / s_)));
    return ca ? s.t0 + dd : s.t1 - dd;
  }

  void split(int si) {
    Seg s = segs_[static_cast<std::size_t>(si)];
    const Curve& c = curves_[static_cast<std::size_t>(s.curve)];
    if (s.partner < 0) {
      const double tm = split_param(s);
      const int m = add_node(c.at(tm), c.marker);
      segs_[static_cast<std::size_t>(si)] = {s.a, m, s.curve, s.t0, tm, -1};
      segs_.push_back({m, s.b, s.curve, tm, s.t1, -1});
      return;
    }
    const int ri = c.right_seam ? si : s.partner;
    const int li = c.right_seam ? s.partner : si;
    const Seg R = segs_[static_cast<std::size_t>(ri)];
    const Seg L = segs_[static_cast<std::size_t>(li)];
    const Curve& rc = curves_[static_cast<std::size_t>(R.curve)];
    const double Lc = curves_[static_cast<std::size_t>(L.curve)].length;
    const double tm = 0.5 * (R.t0 + R.t1);
    const double y = rc.at(tm).y;
    const int nr = add_node({xs_ + *period_, y}, 0);
    const int nl = add_node({xs_, y}, 0);
    pairs_.push_back({nr, nl});
    const int r2 = static_cast<int>(segs_.size());
    const int l2 = r2 + 1;
    segs_[static_cast<std::size_t>(ri)] = {R.a, nr, R.curve, R.t0, tm, l2};
    segs_[static_cast<std::size_t>(li)] = {L.a, nl, L.curve, L.t0, Lc - tm, r2};
    segs_.push_back({nr, R.b, R.curve, tm, R.t1, li});
    segs_.push_back({nl, L.b, L.curve, Lc - tm, L.t1, ri});
  }

  void split_all(std::vector<int> list) {
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
    std::unordered_set<int> done;
    for (int si : list) {
      if (done.count(si)) continue;
      const int partner = segs_[static_cast<std::size_t>(si)].partner;
      split(si);
      done.insert(si);
      if (partner >= 0) done.insert(partner);
    }
  }

  Buckets point_buckets() const {
    Buckets g(lo_, hi_, h_);
    for (std::size_t i = 0; i < pts_.size(); ++i) g.add(static_cast<int>(i), pts_[i]);
    return g;
  }

  // Splits every segment whose closed diametral disk holds another node.
  void split_encroached() {
    for (int pass = 0; pass < 200; ++pass) {
      const Buckets pg = point_buckets();
      std::vector<int> bad;
      for (std::size_t i = 0; i < segs_.size(); ++i) {
        const Seg& s = segs_[i];
        const Vec2 a = pts_[static_cast<std::size_t>(s.a)], b = pts_[static_cast<std::size_t>(s.b)];
        const Vec2 m = 0.5 * (a + b);
        const double r = 0.5 * dist(a, b);
        bool hit = false;
        pg.visit(m - Vec2{r, r}, m + Vec2{r, r}, [&](int q) {
          if (hit || q == s.a || q == s.b) return;
          if (encroaches(pts_[static_cast<std::size_t>(q)], s)) hit = true;
        });
        if (hit) bad.push_back(static_cast<int>(i));
      }
      if (bad.empty()) return;
      split_all(std::move(bad));
    }
    throw MeshError("boundary refinement did not terminate");
  }

  std::vector<std::array<int, 3>> delaunay_inside() {
    std::vector<IPt> ip(pts_.size());
    for (std::size_t i = 0; i < pts_.size(); ++i) ip[i] = to_int(pts_[i]);
    const Delaunay dt(std::move(ip));
    for (std::size_t i = 0; i < pts_.size(); ++i)
      if (!dt.inserted(static_cast<int>(i)) && mark_[i] != 0)
        throw MeshError("boundary nodes closer than the predicate grid");
    build_rows();
    std::vector<std::array<int, 3>> out;
    for (const auto& t : dt.triangles()) {
      const Vec2 c = (pts_[static_cast<std::size_t>(t[0])] + pts_[static_cast<std::size_t>(t[1])] +
                      pts_[static_cast<std::size_t>(t[2])]) / 3.0;
      if (inside(c)) out.push_back(t);
    }
    return out;
  }

  std::vector<int> missing_segments(const std::vector<std::array<int, 3>>& tris) const {
    std::unordered_set<std::uint64_t> edges;
    auto key = [](int a, int b) {
      if (a > b) std::swap(a, b);
      return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
    };
    for (const auto& t : tris)
      for (int i = 0; i < 3; ++i) edges.insert(key(t[static_cast<std::size_t>(i)], t[static_cast<std::size_t>((i + 1) % 3)]));
    std::vector<int> out;
    for (std::size_t i = 0; i < segs_.size(); ++i)
      if (!edges.count(key(segs_[i].a, segs_[i].b))) out.push_back(static_cast<int>(i));
    return out;
  }

  bool near_corner(const Vec2& p) const {
    for (const Vec2& c : corners_)
      if (dist(p, c) < 2 * h_) return true;
    return false;
  }

  void refine() {
    for (int round = 0; round < 200; ++round) {
      split_encroached();
      tris_ = delaunay_inside();
      if (auto miss = missing_segments(tris_); !miss.empty()) {
        split_all(std::move(miss));
        continue;
      }
      const Buckets sg = segment_buckets();
      Buckets fresh(lo_, hi_, h_);
      std::vector<Vec2> added;
      std::vector<int> to_split;
      for (const auto& t : tris_) {
        const Vec2 a = pts_[static_cast<std::size_t>(t[0])], b = pts_[static_cast<std::size_t>(t[1])],
                   c = pts_[static_cast<std::size_t>(t[2])];
        const double longest = std::max({dist(a, b), dist(b, c), dist(c, a)});
        const Vec2 g = (a + b + c) / 3.0;
        const bool bad = longest > h_ || (min_angle_deg(a, b, c) < kMinAngleDeg && !near_corner(g));
        if (!bad) continue;
        const Vec2 cc = circumcenter(a, b, c);
        const double R = dist(cc, a);
        std::vector<int> enc;
        sg.visit(cc - Vec2{h_, h_}, cc + Vec2{h_, h_}, [&](int si) {
          if (encroaches(cc, segs_[static_cast<std::size_t>(si)])) enc.push_back(si);
        });
        if (!enc.empty()) {
          to_split.insert(to_split.end(), enc.begin(), enc.end());
          continue;
        }
        if (!(cc.x > lo_.x && cc.x < hi_.x && cc.y > lo_.y && cc.y < hi_.y) || !inside(cc)) continue;
        bool crowded = false;
        fresh.visit(cc - Vec2{R, R}, cc + Vec2{R, R}, [&](int k) {
          if (dist(added[static_cast<std::size_t>(k)], cc) < 0.5 * R) crowded = true;
        });
        if (crowded) continue;
        fresh.add(static_cast<int>(added.size()), cc);
        added.push_back(cc);
      }
      if (added.empty() && to_split.empty()) return;
      for (const Vec2& p : added) add_node(p, 0);
      split_all(std::move(to_split));
    }
    split_encroached();
    tris_ = delaunay_inside();
  }

  TriMesh assemble() const {
    std::vector<int> idx(pts_.size(), -1);
    TriMesh m;
    m.h = h_;
    m.period = period_;
    for (const auto& t : tris_)
      for (int v : t) {
        auto& k = idx[static_cast<std::size_t>(v)];
        if (k < 0) {
          k = static_cast<int>(m.nodes.size());
          m.nodes.push_back(pts_[static_cast<std::size_t>(v)]);
          m.markers.push_back(mark_[static_cast<std::size_t>(v)]);
        }
      }
    for (const auto& t : tris_) {
      std::array<int, 3> r{idx[static_cast<std::size_t>(t[0])], idx[static_cast<std::size_t>(t[1])],
                           idx[static_cast<std::size_t>(t[2])]};
      const Vec2 a = m.nodes[static_cast<std::size_t>(r[0])];
      if (cross(m.nodes[static_cast<std::size_t>(r[1])] - a, m.nodes[static_cast<std::size_t>(r[2])] - a) < 0)
        std::swap(r[1], r[2]);
      m.triangles.push_back(r);
    }
    for (const auto& [s, t] : pairs_) {
      const int a = idx[static_cast<std::size_t>(s)], b = idx[static_cast<std::size_t>(t)];
      if (a < 0 || b < 0) throw MeshError("periodic seam node left unused");
      m.periodic_pairs.push_back({a, b});
    }
    return m;
  }

  const JSDomain& d_;
  double h_, s_;
  std::mt19937 rng_;
  std::optional<double> period_;
  double xs_ = 0;
  std::vector<Vec2> pts_;
  std::vector<int> mark_;
  std::vector<Curve> curves_;
  std::vector<Seg> segs_;
  std::vector<Vec2> corners_;
  std::vector<std::pair<int, int>> pairs_;
  Vec2 lo_{}, hi_{};
  double span_ = 1;
  std::optional<Buckets> rows_;
  std::vector<std::array<int, 3>> tris_;
};

std::uint64_t edge_key(int a, int b) {
  if (a > b) std::swap(a, b);
  return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

}  // namespace

std::vector<int> TriMesh::representatives() const {
  std::vector<int> r(nodes.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = static_cast<int>(i);
  for (const auto& [s, m] : periodic_pairs) r[static_cast<std::size_t>(s)] = m;
  return r;
}

double TriMesh::area(std::size_t t) const {
  const auto& tr = triangles[t];
  const Vec2 a = nodes[static_cast<std::size_t>(tr[0])];
  return 0.5 * cross(nodes[static_cast<std::size_t>(tr[1])] - a, nodes[static_cast<std::size_t>(tr[2])] - a);
}

Vec2 TriMesh::centroid(std::size_t t) const {
  const auto& tr = triangles[t];
  return (nodes[static_cast<std::size_t>(tr[0])] + nodes[static_cast<std::size_t>(tr[1])] +
          nodes[static_cast<std::size_t>(tr[2])]) / 3.0;
}

TriMesh triangulate(const JSDomain& d, double h, std::uint32_t seed) {
  if (!(h > 0) || !std::isfinite(h)) throw MeshSizeError("mesh size h must be positive");
  Mesher m(d, h, seed);
  return m.run();
}

MeshQuality mesh_quality(const TriMesh& m) {
  MeshQuality q;
  q.min_area = std::numeric_limits<double>::infinity();
  std::vector<Vec2> corners;
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    if (TriMesh::is_corner_marker(m.markers[i])) corners.push_back(m.nodes[i]);
  for (std::size_t t = 0; t < m.triangles.size(); ++t) {
    const auto& tr = m.triangles[t];
    const Vec2 a = m.nodes[static_cast<std::size_t>(tr[0])], b = m.nodes[static_cast<std::size_t>(tr[1])],
               c = m.nodes[static_cast<std::size_t>(tr[2])];
    const double ar = m.area(t);
    if (ar <= 0) q.positively_oriented = false;
    q.min_area = std::min(q.min_area, ar);
    q.max_edge = std::max({q.max_edge, dist(a, b), dist(b, c), dist(c, a)});
    const double ang = min_angle_deg(a, b, c);
    q.min_angle_deg = std::min(q.min_angle_deg, ang);
    const Vec2 g = m.centroid(t);
    bool near = false;
    for (const Vec2& cr : corners)
      if (dist(g, cr) < 2 * m.h) near = true;
    if (!near) q.min_angle_away_from_corners_deg = std::min(q.min_angle_away_from_corners_deg, ang);
  }
  return q;
}

int euler_characteristic(const TriMesh& m) {
  const auto rep = m.representatives();
  std::unordered_set<std::uint64_t> edges;
  for (const auto& t : m.triangles)
    for (int i = 0; i < 3; ++i)
      edges.insert(edge_key(rep[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])],
                            rep[static_cast<std::size_t>(t[static_cast<std::size_t>((i + 1) % 3)])]));
  const auto V = static_cast<long>(m.nodes.size() - m.periodic_pairs.size());
  return static_cast<int>(V - static_cast<long>(edges.size()) + static_cast<long>(m.triangles.size()));
}

std::vector<std::pair<int, int>> boundary_edges(const TriMesh& m) {
  const auto rep = m.representatives();
  std::unordered_map<std::uint64_t, int> count;
  for (const auto& t : m.triangles)
    for (int i = 0; i < 3; ++i)
      ++count[edge_key(rep[static_cast<std::size_t>(t[static_cast<std::size_t>(i)])],
                       rep[static_cast<std::size_t>(t[static_cast<std::size_t>((i + 1) % 3)])])];
  std::vector<std::pair<int, int>> out;
  for (const auto& t : m.triangles)
    for (int i = 0; i < 3; ++i) {
      const int a = t[static_cast<std::size_t>(i)], b = t[static_cast<std::size_t>((i + 1) % 3)];
      if (count[edge_key(rep[static_cast<std::size_t>(a)], rep[static_cast<std::size_t>(b)])] == 1) out.push_back({a, b});
    }
  return out;
}

void write_mesh(std::ostream& os, const TriMesh& m) {
  const auto old = os.precision(17);
  os << "jsgmesh 1\n";
  os << "h " << m.h << "\n";
  os << "nodes " << m.nodes.size() << "\n";
  for (std::size_t i = 0; i < m.nodes.size(); ++i)
    os << m.nodes[i].x << ' ' << m.nodes[i].y << ' ' << m.markers[i] << "\n";
  os << "triangles " << m.triangles.size() << "\n";
  for (const auto& t : m.triangles) os << t[0] << ' ' << t[1] << ' ' << t[2] << "\n";
  os << "periodic " << m.periodic_pairs.size() << ' ' << m.period.value_or(0.0) << "\n";
  for (const auto& [s, t] : m.periodic_pairs) os << s << ' ' << t << "\n";
  os.precision(old);
}

TriMesh read_mesh(std::istream& is) {
  auto expect = [&](const std::string& word) {
    std::string w;
    if (!(is >> w) || w != word) throw MeshError("mesh file: expected '" + word + "'");
  };
  TriMesh m;
  int version = 0;
  expect("jsgmesh");
  if (!(is >> version) || version != 1) throw MeshError("mesh file: unsupported version");
  expect("h");
  is >> m.h;
  std::size_t n = 0;
  expect("nodes");
  is >> n;
  m.nodes.resize(n);
  m.markers.resize(n);
  for (std::size_t i = 0; i < n; ++i) is >> m.nodes[i].x >> m.nodes[i].y >> m.markers[i];
  expect("triangles");
  is >> n;
  m.triangles.resize(n);
  for (auto& t : m.triangles) {
    is >> t[0] >> t[1] >> t[2];
    for (int v : t)
      if (v < 0 || static_cast<std::size_t>(v) >= m.nodes.size()) throw MeshError("mesh file: bad node index");
  }
  expect("periodic");
  double P = 0;
  is >> n >> P;
  if (n > 0) m.period = P;
  m.periodic_pairs.resize(n);
  for (auto& pr : m.periodic_pairs) is >> pr.first >> pr.second;
  if (!is) throw MeshError("mesh file: truncated");
  return m;
}

}  // namespace jsg
