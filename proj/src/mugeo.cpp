#include "jsg/mugeo.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>

namespace jsg {

namespace {

constexpr double kPi = std::numbers::pi;

struct State {
  double x, y, th;
};

State operator+(const State& a, const State& b) { return {a.x + b.x, a.y + b.y, a.th + b.th}; }
State operator*(double s, const State& a) { return {s * a.x, s * a.y, s * a.th}; }
State operator-(const State& a, const State& b) { return {a.x - b.x, a.y - b.y, a.th - b.th}; }

// Unit-speed geodesic flow of rho^2 (dx^2 + dy^2) in angle form.
State flow(const SubmersionChart& chart, const State& st) {
  const RhoJet r = chart.rho({st.x, st.y});
  if (!(r.rho > 0) || !std::isfinite(r.rho)) throw DomainError("non-positive rho");
  const double c = std::cos(st.th), s = std::sin(st.th);
  return {c / r.rho, s / r.rho, (r.rho_y * c - r.rho_x * s) / (r.rho * r.rho)};
}

State rk4(const SubmersionChart& chart, const State& y, double h) {
  const State k1 = flow(chart, y);
  const State k2 = flow(chart, y + (0.5 * h) * k1);
  const State k3 = flow(chart, y + (0.5 * h) * k2);
  const State k4 = flow(chart, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

struct Derivs {
  Vec2 d1, d2;
};

Vec2 neighbour(const CurveSample& c, std::ptrdiff_t i) {
  const auto n = static_cast<std::ptrdiff_t>(c.points.size());
  if (i < 0) return c.points[static_cast<std::size_t>(i + n)] - c.closure_shift;
  if (i >= n) return c.points[static_cast<std::size_t>(i - n)] + c.closure_shift;
  return c.points[static_cast<std::size_t>(i)];
}

// Chord-length parametrized 3-point differences around sample i.
Derivs derivs_at(const CurveSample& c, std::size_t i) {
  if (!c.is_interior(i)) throw GeodesicError("curvature requested at an end sample");
  const auto k = static_cast<std::ptrdiff_t>(i);
  const Vec2 a = neighbour(c, k - 1), b = c.points[i], d = neighbour(c, k + 1);
  const double h1 = dist(a, b), h2 = dist(b, d);
  if (h1 < 1e-14 || h2 < 1e-14) throw GeodesicError("degenerate tangent: repeated samples");
  Derivs r;
  r.d1 = a * (-h2 / (h1 * (h1 + h2))) + b * ((h2 - h1) / (h1 * h2)) + d * (h1 / (h2 * (h1 + h2)));
  r.d2 = (a / (h1 * (h1 + h2)) - b / (h1 * h2) + d / (h2 * (h1 + h2))) * 2.0;
  if (norm(r.d1) < 1e-12) throw GeodesicError("degenerate tangent");
  return r;
}

Vec2 tangent_direction(const CurveSample& c, std::size_t i) {
  const std::size_t n = c.points.size();
  if (c.is_interior(i)) return derivs_at(c, i).d1;
  if (n < 3) return c.points[n - 1] - c.points[0];
  // One-sided second-order differences at the ends of open curves.
  const bool first = i == 0;
  const Vec2 p0 = first ? c.points[0] : c.points[n - 1];
  const Vec2 p1 = first ? c.points[1] : c.points[n - 2];
  const Vec2 p2 = first ? c.points[2] : c.points[n - 3];
  const double h1 = dist(p0, p1), h2 = dist(p1, p2);
  const Vec2 d = p1 * ((h1 + h2) / (h1 * h2)) - p0 * ((2 * h1 + h2) / (h1 * (h1 + h2))) -
                 p2 * (h1 / (h2 * (h1 + h2)));
  return first ? d : -d;
}

constexpr std::array<double, 4> kGlNodes{-0.8611363115940526, -0.3399810435848563, 0.3399810435848563,
                                         0.8611363115940526};
constexpr std::array<double, 4> kGlWeights{0.3478548451374538, 0.6521451548625461, 0.6521451548625461,
                                           0.3478548451374538};

double rho_at(const SubmersionChart& chart, const Vec2& p) {
  if (!chart.region().contains(p)) throw GeodesicError("curve exits region");
  try {
    return chart.rho(p).rho;
  } catch (const DomainError& e) {
    throw GeodesicError(std::string("rho evaluation failed: ") + e.what());
  }
}

double gl_segment(const SubmersionChart& chart, const Vec2& a, const Vec2& b) {
  const Vec2 mid = (a + b) * 0.5, half = (b - a) * 0.5;
  double acc = 0;
  for (std::size_t k = 0; k < 4; ++k) acc += kGlWeights[k] * rho_at(chart, mid + half * kGlNodes[k]);
  return acc * norm(half);
}

double adaptive_segment(const SubmersionChart& chart, const Vec2& a, const Vec2& b, double whole, int depth) {
  const Vec2 m = (a + b) * 0.5;
  const double left = gl_segment(chart, a, m), right = gl_segment(chart, m, b);
  if (depth >= 24 || std::fabs(left + right - whole) <= 1e-14 * std::fabs(whole) + 1e-300) return left + right;
  return adaptive_segment(chart, a, m, left, depth + 1) + adaptive_segment(chart, m, b, right, depth + 1);
}

double segment_length(const SubmersionChart& chart, const Vec2& a, const Vec2& b) {
  if (a == b) return 0.0;
  return adaptive_segment(chart, a, b, gl_segment(chart, a, b), 0);
}

double wrap_angle(double t) {
  t = std::fmod(t, 2 * kPi);
  if (t > kPi) t -= 2 * kPi;
  if (t <= -kPi) t += 2 * kPi;
  return t;
}

struct ShotResult {
  GeodesicArc arc;
  bool ok = false;  // reached the requested length
};

ShotResult try_shoot(const SubmersionChart& chart, Vec2 p, double theta, double L, const ShootOptions& o) {
  ShotResult r;
  try {
    r.arc = mu_geodesic_shoot(chart, p, theta, L, o);
    r.ok = !r.arc.truncated;
  } catch (const GeodesicError&) {
    r.ok = false;
  }
  return r;
}

struct Candidate {
  double theta;
  double length;
};

// Newton iteration on (theta, L) for end(theta, L) = q.
std::optional<ShotResult> newton_connect(const SubmersionChart& chart, Vec2 p, Vec2 q, Candidate c,
                                         const ShootOptions& o, double tol, double max_length, int max_iter) {
  ShotResult cur = try_shoot(chart, p, c.theta, c.length, o);
  if (!cur.ok) return std::nullopt;
  double res = dist(cur.arc.end(), q);
  for (int it = 0; it < max_iter; ++it) {
    if (res < tol) return cur;
    constexpr double dth = 1e-7;
    const ShotResult plus = try_shoot(chart, p, c.theta + dth, c.length, o);
    const ShotResult minus = try_shoot(chart, p, c.theta - dth, c.length, o);
    if (!plus.ok || !minus.ok) return std::nullopt;
    const Vec2 jt = (plus.arc.end() - minus.arc.end()) / (2 * dth);
    const Vec2 e = cur.arc.end();
    double rho_end;
    try {
      rho_end = chart.rho(e).rho;
    } catch (const DomainError&) {
      return std::nullopt;
    }
    const Vec2 jl = cur.arc.directions.back() / rho_end;
    const double det = cross(jt, jl);
    if (std::fabs(det) < 1e-14 * (norm(jt) * norm(jl) + 1e-300)) return std::nullopt;
    const Vec2 f = e - q;
    double d_theta = -cross(f, jl) / det;
    double d_len = -cross(jt, f) / det;
    double t = 1.0;
    if (std::fabs(d_theta) > 0.5) t = std::min(t, 0.5 / std::fabs(d_theta));
    if (c.length + t * d_len < 0.25 * c.length) t = std::min(t, 0.75 * c.length / std::fabs(d_len));
    bool improved = false;
    for (int k = 0; k < 8 && !improved; ++k, t *= 0.5) {
      const Candidate trial{c.theta + t * d_theta, c.length + t * d_len};
      if (trial.length > max_length) continue;
      ShotResult s = try_shoot(chart, p, trial.theta, trial.length, o);
      if (!s.ok) continue;
      const double r2 = dist(s.arc.end(), q);
      if (r2 < res) {
        c = trial;
        cur = std::move(s);
        res = r2;
        improved = true;
      }
    }
    if (!improved) return std::nullopt;
  }
  if (res < tol) return cur;
  return std::nullopt;
}

bool same_chord(const Candidate& a, const Candidate& b, double angle_sep) {
  return std::fabs(wrap_angle(a.theta - b.theta)) < angle_sep &&
         std::fabs(a.length - b.length) < 1e-6 * std::max(1.0, a.length);
}

}  // namespace

CurveSample make_curve(const SubmersionChart& chart, std::vector<Vec2> points, NormalSide side, bool closed,
                       Vec2 closure_shift) {
  if (points.size() < 2) throw GeodesicError("curve needs at least two samples");
  CurveSample c;
  c.points = std::move(points);
  c.side = side;
  c.closed = closed;
  c.closure_shift = closure_shift;
  c.tangents.resize(c.points.size());
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    const Vec2 d = tangent_direction(c, i);
    const double len = norm(d);
    if (len < 1e-12) throw GeodesicError("degenerate tangent");
    c.tangents[i] = d / (len * chart.lambda(c.points[i]));
  }
  return c;
}

CurveSample reversed(const SubmersionChart& chart, const CurveSample& c) {
  std::vector<Vec2> pts(c.points.rbegin(), c.points.rend());
  const NormalSide flipped = c.side == NormalSide::Left ? NormalSide::Right : NormalSide::Left;
  if (c.closed) {
    // Keep the first sample first: p0, p_{n-1} - shift, ..., p_1 - shift.
    std::vector<Vec2> rp;
    rp.reserve(c.points.size());
    rp.push_back(c.points[0]);
    for (std::size_t i = c.points.size() - 1; i >= 1; --i) rp.push_back(c.points[i] - c.closure_shift);
    return make_curve(chart, std::move(rp), flipped, true, -c.closure_shift);
  }
  return make_curve(chart, std::move(pts), flipped, false);
}

CurveSample GeodesicArc::curve(const SubmersionChart& chart, NormalSide side) const {
  if (closed && points.size() > 2) {
    std::vector<Vec2> pts(points.begin(), points.end() - 1);
    return make_curve(chart, std::move(pts), side, true, points.back() - points.front());
  }
  return make_curve(chart, points, side, false);
}

GeodesicArc mu_geodesic_shoot(const SubmersionChart& chart, Vec2 p, double theta, double length,
                              const ShootOptions& opts) {
  if (!(length > 0)) throw std::invalid_argument("mu_geodesic_shoot: length must be positive");
  if (!(opts.max_step > 0)) throw std::invalid_argument("mu_geodesic_shoot: step must be positive");
  if (!chart.region().contains(p)) throw GeodesicError("immediate region exit: start point outside region");
  try {
    flow(chart, {p.x, p.y, theta});
  } catch (const DomainError& e) {
    throw GeodesicError(std::string("rho evaluation failed: ") + e.what());
  }

  GeodesicArc arc;
  arc.initial_angle = theta;
  State y{p.x, p.y, theta};
  double s = 0;
  arc.points.push_back(p);
  arc.directions.push_back({std::cos(theta), std::sin(theta)});
  arc.s.push_back(0);

  // Equal nominal steps keep the samples evenly spaced for the curvature stencils.
  const double h_max = length / std::ceil(length / opts.max_step);
  const double h_min = h_max * 1e-10;
  double h = h_max;
  bool near_boundary = false;
  const double slack = 1e-9 * h_max;
  while (length - s > slack) {
    const double remaining = length - s;
    const bool last = h >= remaining - slack;
    // Split a remainder between one and two steps evenly rather than leaving a sliver.
    const double step = last ? remaining : (h < remaining && remaining < 2 * h ? 0.5 * remaining : h);
    State full{}, half{};
    bool inside = true;
    try {
      full = rk4(chart, y, step);
      const State mid = rk4(chart, y, 0.5 * step);
      inside = chart.region().contains({mid.x, mid.y});
      half = rk4(chart, mid, 0.5 * step);
      inside = inside && chart.region().contains({half.x, half.y}) && chart.region().contains({full.x, full.y});
    } catch (const DomainError&) {
      inside = false;
    }
    if (!inside) {
      near_boundary = true;
      h = 0.5 * step;
      if (h < h_min) {
        arc.truncated = true;
        break;
      }
      continue;
    }
    const double err = std::max({std::fabs(full.x - half.x), std::fabs(full.y - half.y), std::fabs(full.th - half.th)});
    if (err > opts.step_tol) {
      h = std::max(h_min, step * std::max(0.1, 0.9 * std::pow(opts.step_tol / err, 0.2)));
      if (step <= h_min) {
        arc.truncated = true;
        break;
      }
      continue;
    }
    y = half + (1.0 / 15.0) * (half - full);
    s = last ? length : s + step;
    arc.max_step_error = std::max(arc.max_step_error, err);
    const Vec2 pt{y.x, y.y};
    if (opts.keep_going && !opts.keep_going(pt)) {
      arc.stopped = true;
      break;
    }
    arc.points.push_back(pt);
    arc.directions.push_back({std::cos(y.th), std::sin(y.th)});
    arc.s.push_back(s);
    if (!near_boundary) {
      const double grow = err > 0 ? 0.9 * std::pow(opts.step_tol / err, 0.2) : 5.0;
      h = std::min(h_max, step * std::clamp(grow, 1.0, 5.0));
    }
  }
  if (arc.points.size() < 2) throw GeodesicError("immediate region exit");
  return arc;
}

GeodesicArc mu_geodesic_shoot(const SubmersionChart& chart, Vec2 p, double theta, double length, double h) {
  ShootOptions o;
  o.max_step = h;
  return mu_geodesic_shoot(chart, p, theta, length, o);
}

std::vector<GeodesicArc> mu_geodesic_connect_all(const SubmersionChart& chart, Vec2 p, Vec2 q,
                                                 const ConnectOptions& opts) {
  const Region& reg = chart.region();
  if (!reg.contains(p) || !reg.contains(q)) throw GeodesicError("connect: endpoint outside region");
  const double d = dist(p, q);
  if (d == 0) throw std::invalid_argument("connect: endpoints coincide");

  double straight;
  try {
    const std::array<Vec2, 2> seg{p, q};
    straight = mu_length(chart, std::span<const Vec2>(seg));
  } catch (const GeodesicError&) {
    straight = d * std::max(chart.rho(p).rho, chart.rho(q).rho);
  }
  const double l_max = 3 * straight;
  ShootOptions coarse;
  coarse.max_step = l_max / 200;
  coarse.step_tol = 1e-10;
  const double coarse_tol = std::max(opts.tol, 1e-7 * d);

  const double direct = std::atan2(q.y - p.y, q.x - p.x);
  std::vector<Candidate> found;
  for (int k = 0; k < opts.fan; ++k) {
    const double th = direct + 2 * kPi * k / opts.fan;
    GeodesicArc fan_arc;
    try {
      fan_arc = mu_geodesic_shoot(chart, p, th, l_max, coarse);
    } catch (const GeodesicError&) {
      continue;
    }
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < fan_arc.points.size(); ++j) {
      const double dj = dist(fan_arc.points[j], q);
      if (dj < best_d) {
        best_d = dj;
        best = j;
      }
    }
    if (best == 0) continue;
    const Candidate start{th, fan_arc.s[best]};
    const auto sol = newton_connect(chart, p, q, start, coarse, coarse_tol, 2 * l_max, 40);
    if (!sol) continue;
    const Candidate c{sol->arc.initial_angle, sol->arc.length()};
    const bool dup = std::any_of(found.begin(), found.end(),
                                 [&](const Candidate& f) { return same_chord(f, c, opts.cluster_angle); });
    if (!dup) found.push_back(c);
  }

  std::vector<GeodesicArc> out;
  std::vector<Candidate> polished;
  for (const Candidate& c : found) {
    ShootOptions fine;
    fine.max_step = opts.sample_step > 0 ? opts.sample_step : c.length / 1000;
    fine.step_tol = 1e-13;
    const auto sol = newton_connect(chart, p, q, c, fine, opts.tol, 2 * l_max, 12);
    if (!sol) continue;
    const Candidate pc{sol->arc.initial_angle, sol->arc.length()};
    const bool dup = std::any_of(polished.begin(), polished.end(),
                                 [&](const Candidate& f) { return same_chord(f, pc, opts.cluster_angle); });
    if (dup) continue;
    polished.push_back(pc);
    GeodesicArc arc = sol->arc;
    arc.points.back() = q;
    out.push_back(std::move(arc));
  }
  if (out.empty()) throw NoConnection("no mu-geodesic shot converged between the endpoints");
  std::stable_sort(out.begin(), out.end(),
                   [](const GeodesicArc& a, const GeodesicArc& b) { return a.length() < b.length(); });
  if (out.size() > static_cast<std::size_t>(opts.max_solutions)) out.resize(static_cast<std::size_t>(opts.max_solutions));
  return out;
}

GeodesicArc mu_geodesic_connect(const SubmersionChart& chart, Vec2 p, Vec2 q, double tol) {
  ConnectOptions o;
  o.tol = tol;
  return mu_geodesic_connect_all(chart, p, q, o).front();
}

double mu_length(const SubmersionChart& chart, std::span<const Vec2> polyline) {
  double acc = 0;
  for (std::size_t i = 1; i < polyline.size(); ++i) acc += segment_length(chart, polyline[i - 1], polyline[i]);
  return acc;
}

double mu_length(const SubmersionChart& chart, const CurveSample& curve) {
  double acc = mu_length(chart, std::span<const Vec2>(curve.points));
  if (curve.closed) acc += segment_length(chart, curve.points.back(), curve.points.front() + curve.closure_shift);
  return acc;
}

double mu_geodesic_curvature(const SubmersionChart& chart, const CurveSample& curve, std::size_t i) {
  const Derivs d = derivs_at(curve, i);
  RhoJet r;
  try {
    r = chart.rho(curve.points[i]);
  } catch (const DomainError& e) {
    throw GeodesicError(std::string("rho evaluation failed: ") + e.what());
  }
  const double sp = norm(d.d1);
  const double k = cross(d.d1, d.d2) / (r.rho * sp * sp * sp) +
                   (r.rho_x * d.d1.y - r.rho_y * d.d1.x) / (r.rho * r.rho * sp);
  return side_sign(curve.side) * k;
}

double cylinder_mean_curvature(const SubmersionChart& chart, const CurveSample& curve, std::size_t i) {
  const Derivs d = derivs_at(curve, i);
  const Vec2& p = curve.points[i];
  double lam, m;
  Vec2 gl, gm;
  try {
    lam = chart.lambda(p);
    m = chart.mu(p);
    gl = chart.grad_lambda(p);
    gm = chart.grad_mu(p);
  } catch (const DomainError& e) {
    throw GeodesicError(std::string("field evaluation failed: ") + e.what());
  }
  const double sp = norm(d.d1);
  const double kappa_g = cross(d.d1, d.d2) / (lam * sp * sp * sp) + (gl.x * d.d1.y - gl.y * d.d1.x) / (lam * lam * sp);
  // Unit normal for lambda^2 delta: perp(gamma') / (lambda |gamma'|).
  const double eta_dot = (-gm.x * d.d1.y + gm.y * d.d1.x) / (m * lam * sp);
  return side_sign(curve.side) * 0.5 * (kappa_g - eta_dot);
}

bool is_mu_convex(const SubmersionChart& chart, const CurveSample& curve, double tol) {
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!curve.is_interior(i)) continue;
    if (mu_geodesic_curvature(chart, curve, i) < -tol) return false;
  }
  return true;
}

double max_abs_mu_curvature(const SubmersionChart& chart, const CurveSample& curve) {
  double m = 0;
  for (std::size_t i = 0; i < curve.size(); ++i) {
    if (!curve.is_interior(i)) continue;
    m = std::max(m, std::fabs(mu_geodesic_curvature(chart, curve, i)));
  }
  return m;
}

}  // namespace jsg
