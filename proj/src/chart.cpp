#include "jsg/chart.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace jsg {

Region Region::rectangle(double xmin, double xmax, double ymin, double ymax) {
  if (!(xmin < xmax && ymin < ymax)) throw std::invalid_argument("rectangle region with empty extent");
  Region r;
  r.shape = Shape::Rectangle;
  r.xmin = xmin;
  r.xmax = xmax;
  r.ymin = ymin;
  r.ymax = ymax;
  return r;
}

Region Region::disk(Vec2 center, double radius) {
  if (!(radius > 0)) throw std::invalid_argument("disk region needs a positive radius");
  Region r;
  r.shape = Shape::Disk;
  r.center = center;
  r.radius = radius;
  r.xmin = center.x - radius;
  r.xmax = center.x + radius;
  r.ymin = center.y - radius;
  r.ymax = center.y + radius;
  return r;
}

Region Region::periodic_strip(double x0, double period, double ymin, double ymax) {
  if (!(period > 0)) throw std::invalid_argument("period must be positive");
  Region r = rectangle(x0, x0 + period, ymin, ymax);
  r.period = period;
  return r;
}

bool Region::contains(const Vec2& p) const {
  if (!std::isfinite(p.x) || !std::isfinite(p.y)) return false;
  if (shape == Shape::Disk) {
    const double dx = p.x - center.x, dy = p.y - center.y;
    return dx * dx + dy * dy < radius * radius;
  }
  if (periodic()) return p.y > ymin && p.y < ymax;
  return p.x > xmin && p.x < xmax && p.y > ymin && p.y < ymax;
}

Vec2 Region::canonical(const Vec2& p) const {
  if (!periodic()) return p;
  const double P = *period;
  double x = std::fmod(p.x - xmin, P);
  if (x < 0) x += P;
  return {xmin + x, p.y};
}

double Region::diameter() const {
  if (shape == Shape::Disk) return 2 * radius;
  return std::hypot(xmax - xmin, ymax - ymin);
}

SubmersionChart::SubmersionChart(Region region, Expr lambda, Expr mu, Expr tau, Expr a, Expr b)
    : region_(std::move(region)),
      lambda_(std::move(lambda)),
      mu_(std::move(mu)),
      tau_(std::move(tau)),
      a_(std::move(a)),
      b_(std::move(b)) {
  lambda_x_ = diff_expr(lambda_, Var::X);
  lambda_y_ = diff_expr(lambda_, Var::Y);
  mu_x_ = diff_expr(mu_, Var::X);
  mu_y_ = diff_expr(mu_, Var::Y);
}

ChartFields SubmersionChart::fields(const Vec2& p) const {
  return {eval_expr(lambda_, p.x, p.y), eval_expr(mu_, p.x, p.y), eval_expr(tau_, p.x, p.y),
          eval_expr(a_, p.x, p.y), eval_expr(b_, p.x, p.y)};
}

RhoJet SubmersionChart::rho(const Vec2& p) const {
  const double l = eval_expr(lambda_, p.x, p.y);
  const double m = eval_expr(mu_, p.x, p.y);
  const double lx = eval_expr(lambda_x_, p.x, p.y);
  const double ly = eval_expr(lambda_y_, p.x, p.y);
  const double mx = eval_expr(mu_x_, p.x, p.y);
  const double my = eval_expr(mu_y_, p.x, p.y);
  return {l * m, lx * m + l * mx, ly * m + l * my};
}

Vec2 SubmersionChart::grad_lambda(const Vec2& p) const {
  return {eval_expr(lambda_x_, p.x, p.y), eval_expr(lambda_y_, p.x, p.y)};
}

Vec2 SubmersionChart::grad_mu(const Vec2& p) const {
  return {eval_expr(mu_x_, p.x, p.y), eval_expr(mu_y_, p.x, p.y)};
}

ChartError::ChartError(const std::string& what, Vec2 where)
    : std::runtime_error(what + " at (" + std::to_string(where.x) + ", " + std::to_string(where.y) + ")"),
      where_(where) {}

CompatibilityReport validate_chart(const SubmersionChart& chart, int grid_n) {
  if (grid_n < 2) throw std::invalid_argument("validate_chart: grid_n must be at least 2");
  const Region& reg = chart.region();
  const Expr lb = chart.lambda_expr() * chart.b_expr();
  const Expr la = chart.lambda_expr() * chart.a_expr();
  const Expr lb_x = diff_expr(lb, Var::X);
  const Expr la_y = diff_expr(la, Var::Y);

  CompatibilityReport rep;
  rep.min_lambda = std::numeric_limits<double>::infinity();
  rep.min_mu = std::numeric_limits<double>::infinity();
  const double dx = (reg.xmax - reg.xmin) / grid_n;
  const double dy = (reg.ymax - reg.ymin) / grid_n;
  for (int i = 0; i < grid_n; ++i) {
    for (int j = 0; j < grid_n; ++j) {
      const Vec2 p{reg.xmin + (i + 0.5) * dx, reg.ymin + (j + 0.5) * dy};
      if (!reg.contains(p)) continue;
      try {
        const ChartFields f = chart.fields(p);
        const double defect = std::fabs(eval_expr(lb_x, p.x, p.y) - eval_expr(la_y, p.x, p.y) -
                                        2 * f.tau * f.lambda * f.lambda / f.mu);
        if (!std::isfinite(defect)) throw DomainError("non-finite compatibility defect");
        ++rep.samples;
        rep.min_lambda = std::min(rep.min_lambda, f.lambda);
        rep.min_mu = std::min(rep.min_mu, f.mu);
        if (defect > rep.max_defect || rep.samples == 1) {
          rep.max_defect = std::max(rep.max_defect, defect);
          rep.worst_point = p;
        }
        if (reg.periodic()) {
          const ChartFields g = chart.fields({p.x + *reg.period, p.y});
          const double d = std::max({std::fabs(g.lambda - f.lambda), std::fabs(g.mu - f.mu),
                                     std::fabs(g.tau - f.tau), std::fabs(g.a - f.a), std::fabs(g.b - f.b)});
          rep.periodicity_defect = std::max(rep.periodicity_defect, d);
        }
      } catch (const DomainError& e) {
        throw ChartError(std::string("field evaluation failed: ") + e.what(), p);
      }
    }
  }
  return rep;
}

}  // namespace jsg
