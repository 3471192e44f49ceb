#pragma once

// Test-only helpers: a random expression generator and finite-difference
// oracles that do not touch the symbolic differentiation path.

#include <cmath>
#include <random>

#include "jsg/expr.hpp"

namespace test_support {

inline jsg::Expr random_expr(std::mt19937_64& rng, int depth) {
  using jsg::BinOp;
  using jsg::Expr;
  using jsg::Func;
  std::uniform_int_distribution<int> pick(0, 9);
  std::uniform_real_distribution<double> lit(0.5, 2.0);
  if (depth <= 0 || pick(rng) < 2) {
    const int k = pick(rng);
    if (k < 4) return Expr::variable(jsg::Var::X);
    if (k < 8) return Expr::variable(jsg::Var::Y);
    return Expr::number(std::round(lit(rng) * 8) / 8);
  }
  if (pick(rng) < 4) {
    static constexpr Func funcs[] = {Func::Sin, Func::Cos, Func::Sinh, Func::Cosh, Func::Tanh,
                                     Func::Exp, Func::Log, Func::Sqrt, Func::Atan, Func::Neg};
    std::uniform_int_distribution<int> f(0, 9);
    return Expr::unary(funcs[f(rng)], random_expr(rng, depth - 1));
  }
  static constexpr BinOp ops[] = {BinOp::Add, BinOp::Sub, BinOp::Mul, BinOp::Div, BinOp::Pow};
  std::uniform_int_distribution<int> o(0, 4);
  const BinOp op = ops[o(rng)];
  if (op == BinOp::Pow) {
    // keep exponents tame so values stay representable
    std::uniform_int_distribution<int> ex(-2, 3);
    return Expr::binary(op, random_expr(rng, depth - 1), Expr::number(ex(rng)));
  }
  return Expr::binary(op, random_expr(rng, depth - 1), random_expr(rng, depth - 1));
}

inline double eval_shift(const jsg::Expr& e, jsg::Var v, double x, double y, double d) {
  return v == jsg::Var::X ? jsg::eval_expr(e, x + d, y) : jsg::eval_expr(e, x, y + d);
}

// Richardson-extrapolated central difference (fourth order).
inline double richardson_derivative(const jsg::Expr& e, jsg::Var v, double x, double y, double h = 1e-3) {
  const double d1 = (eval_shift(e, v, x, y, h) - eval_shift(e, v, x, y, -h)) / (2 * h);
  const double d2 = (eval_shift(e, v, x, y, h / 2) - eval_shift(e, v, x, y, -h / 2)) / h;
  return (4 * d2 - d1) / 3;
}

// Returns false where the finite-difference oracle itself cannot be trusted:
// the stencil leaves the natural domain, or two step sizes disagree (a
// singularity or a cancellation-dominated value nearby).
inline bool reliable_derivative(const jsg::Expr& e, jsg::Var v, double x, double y, double& out) {
  try {
    const double a = richardson_derivative(e, v, x, y, 2e-3);
    const double b = richardson_derivative(e, v, x, y, 1e-3);
    if (!std::isfinite(a) || !std::isfinite(b)) return false;
    if (std::fabs(a) > 1e6) return false;
    if (std::fabs(a - b) > 1e-8 * (1 + std::fabs(b))) return false;
    out = b;
    return true;
  } catch (const jsg::DomainError&) {
    return false;
  }
}

}  // namespace test_support
