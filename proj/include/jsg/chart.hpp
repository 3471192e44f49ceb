#pragma once

// Local model of a Killing submersion over a planar chart.
//
// The ambient metric is
//     ds^2 = lambda^2 (dx^2 + dy^2) + mu^2 (dt - lambda (a dx + b dy))^2
// where lambda is the conformal factor of the base, mu the Killing length,
// and (a, b) the orthonormal-frame components of the connection field Z.
// Compatibility with the bundle curvature tau is
//     (lambda b)_x - (lambda a)_y = 2 tau lambda^2 / mu.
// Heights t are measured from the zero section t = 0.

#include <optional>
#include <stdexcept>
#include <string>

#include "jsg/expr.hpp"
#include "jsg/geometry.hpp"

namespace jsg {

struct Region {
  enum class Shape { Rectangle, Disk };

  Shape shape = Shape::Rectangle;
  double xmin = 0, xmax = 0, ymin = 0, ymax = 0;  // rectangle, or disk bounding box
  Vec2 center{};
  double radius = 0;
  // x-period of a periodic strip; the fundamental domain is [xmin, xmin + period).
  std::optional<double> period;

  static Region rectangle(double xmin, double xmax, double ymin, double ymax);
  static Region disk(Vec2 center, double radius);
  static Region periodic_strip(double x0, double period, double ymin, double ymax);

  bool periodic() const { return period.has_value(); }
  // Open-set membership; periodic strips accept any x.
  bool contains(const Vec2& p) const;
  // Representative of p with x reduced into the fundamental domain.
  Vec2 canonical(const Vec2& p) const;
  double diameter() const;
};

struct ChartFields {
  double lambda = 1, mu = 1, tau = 0, a = 0, b = 0;
};

// rho = lambda * mu, the conformal factor of the mu-metric, with its gradient.
struct RhoJet {
  double rho = 1, rho_x = 0, rho_y = 0;
};

class SubmersionChart {
 public:
  SubmersionChart(Region region, Expr lambda, Expr mu, Expr tau, Expr a, Expr b);

  const Region& region() const { return region_; }
  const Expr& lambda_expr() const { return lambda_; }
  const Expr& mu_expr() const { return mu_; }
  const Expr& tau_expr() const { return tau_; }
  const Expr& a_expr() const { return a_; }
  const Expr& b_expr() const { return b_; }

  double lambda(const Vec2& p) const { return eval_expr(lambda_, p.x, p.y); }
  double mu(const Vec2& p) const { return eval_expr(mu_, p.x, p.y); }
  ChartFields fields(const Vec2& p) const;
  RhoJet rho(const Vec2& p) const;
  Vec2 grad_lambda(const Vec2& p) const;
  Vec2 grad_mu(const Vec2& p) const;

 private:
  Region region_;
  Expr lambda_, mu_, tau_, a_, b_;
  Expr lambda_x_, lambda_y_, mu_x_, mu_y_;
};

// A field could not be evaluated at a sample point of the chart.
class ChartError : public std::runtime_error {
 public:
  ChartError(const std::string& what, Vec2 where);
  Vec2 where() const { return where_; }

 private:
  Vec2 where_;
};

struct CompatibilityReport {
  double max_defect = 0;     // max |(lambda b)_x - (lambda a)_y - 2 tau lambda^2 / mu|
  Vec2 worst_point{};
  double min_lambda = 0;
  double min_mu = 0;
  double periodicity_defect = 0;  // max |f(x + P, y) - f(x, y)| over all five fields
  int samples = 0;
};

// Samples a grid_n x grid_n cell-centred grid over the region.
CompatibilityReport validate_chart(const SubmersionChart& chart, int grid_n);

}  // namespace jsg
