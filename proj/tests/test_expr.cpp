#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "jsg/expr.hpp"
#include "support/random_expr.hpp"

using namespace jsg;

TEST_CASE("parse: single variable") {
  const Expr e = parse_expr("x");
  CHECK(e.kind() == Expr::Kind::Variable);
  CHECK(e.var() == Var::X);
}

TEST_CASE("parse: x*cosh(y/x) has the expected shape") {
  const Expr e = parse_expr("x*cosh(y/x)");
  REQUIRE(e.kind() == Expr::Kind::Binary);
  CHECK(e.op() == BinOp::Mul);
  CHECK(e.lhs().kind() == Expr::Kind::Variable);
  const Expr& c = e.rhs();
  REQUIRE(c.kind() == Expr::Kind::Unary);
  CHECK(c.func() == Func::Cosh);
  REQUIRE(c.arg().kind() == Expr::Kind::Binary);
  CHECK(c.arg().op() == BinOp::Div);
  CHECK(c.arg().lhs().var() == Var::Y);
  CHECK(c.arg().rhs().var() == Var::X);
}

TEST_CASE("parse: precedence and associativity") {
  CHECK(eval_expr(parse_expr("2/(1-x^2-y^2)"), 0, 0) == 2.0);
  CHECK(eval_expr(parse_expr("-x^2"), 3, 0) == -9.0);
  CHECK(eval_expr(parse_expr("2^3^2"), 0, 0) == 512.0);
  CHECK(eval_expr(parse_expr("8/4/2"), 0, 0) == 1.0);
  CHECK(eval_expr(parse_expr("1-2-3"), 0, 0) == -4.0);
  CHECK(eval_expr(parse_expr("2^-1"), 0, 0) == 0.5);
  CHECK(eval_expr(parse_expr("2*-3"), 0, 0) == -6.0);
  CHECK(eval_expr(parse_expr("1.5e2 + .5"), 0, 0) == 150.5);
  CHECK(eval_expr(parse_expr("neg(x)"), 4, 0) == -4.0);
  CHECK(eval_expr(parse_expr("pi"), 0, 0) == doctest::Approx(M_PI));
}

TEST_CASE("parse: errors carry byte offsets") {
  try {
    parse_expr("x + * y");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  try {
    parse_expr("x + foo(y)");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.offset() == 4);
  }
  CHECK_THROWS_AS(parse_expr("z"), ParseError);
  CHECK_THROWS_AS(parse_expr("asin(x)"), ParseError);
  CHECK_THROWS_AS(parse_expr(""), ParseError);
  CHECK_THROWS_AS(parse_expr("(x"), ParseError);
  CHECK_THROWS_AS(parse_expr("x)"), ParseError);
  CHECK_THROWS_AS(parse_expr("--x"), ParseError);
  CHECK_THROWS_AS(parse_expr("1e"), ParseError);
}

TEST_CASE("eval: direct values") {
  CHECK(eval_expr(parse_expr("x^2+y"), 2, 3) == 7.0);
  CHECK(eval_expr(parse_expr("cosh(0)"), 0, 0) == 1.0);
  // 2/(1 - 0.25) = 8/3
  CHECK(eval_expr(parse_expr("2/(1-x^2-y^2)"), 0.5, 0) == doctest::Approx(8.0 / 3.0).epsilon(1e-15));
}

TEST_CASE("eval: domain errors") {
  CHECK_THROWS_AS(eval_expr(parse_expr("1/x"), 0, 0), DomainError);
  CHECK_THROWS_AS(eval_expr(parse_expr("log(x)"), -1, 0), DomainError);
  CHECK_THROWS_AS(eval_expr(parse_expr("log(x)"), 0, 0), DomainError);
  CHECK_THROWS_AS(eval_expr(parse_expr("sqrt(x)"), -1e-3, 0), DomainError);
  CHECK_THROWS_AS(eval_expr(parse_expr("x^0.5"), -2, 0), DomainError);
  CHECK_THROWS_AS(eval_expr(parse_expr("exp(x)"), 1000, 0), DomainError);
  CHECK(eval_expr(parse_expr("x^2"), -2, 0) == 4.0);
}

TEST_CASE("diff: closed-form cases") {
  const Expr dx2 = diff_expr(parse_expr("x^2"), Var::X);
  for (double x : {-2.0, -0.5, 0.0, 1.0, 3.5}) CHECK(eval_expr(dx2, x, 0.7) == doctest::Approx(2 * x));

  const Expr d3 = diff_expr(parse_expr("3"), Var::X);
  CHECK(d3.kind() == Expr::Kind::Number);
  CHECK(d3.value() == 0.0);

  // d/dy x*cosh(y/x) = sinh(y/x); checked against central differences on a grid.
  const Expr f = parse_expr("x*cosh(y/x)");
  const Expr df = diff_expr(f, Var::Y);
  for (double x = 0.5; x <= 2.0; x += 0.25) {
    for (double y = -1.0; y <= 1.0; y += 0.25) {
      const double h = 1e-5;
      const double fd = (eval_expr(f, x, y + h) - eval_expr(f, x, y - h)) / (2 * h);
      const double v = eval_expr(df, x, y);
      CHECK(std::fabs(v - fd) <= 1e-6 * (1 + std::fabs(v)));
      CHECK(v == doctest::Approx(std::sinh(y / x)).epsilon(1e-14));
    }
  }
}

TEST_CASE("diff: every supported function matches finite differences") {
  for (const char* src : {"sin(x*y)", "cos(x+y)", "sinh(x-y)", "cosh(x*y)", "tanh(x*y)", "exp(x*y)",
                          "log(x+y)", "sqrt(x*x+y)", "atan(x/y)", "neg(x*y)", "x^y", "2^(x*y)",
                          "(x+y)^3", "x/(y+x^2)"}) {
    const Expr e = parse_expr(src);
    for (Var v : {Var::X, Var::Y}) {
      const Expr d = diff_expr(e, v);
      for (double x : {0.4, 0.9, 1.7}) {
        for (double y : {0.3, 1.1}) {
          const double fd = test_support::richardson_derivative(e, v, x, y);
          const double val = eval_expr(d, x, y);
          INFO(src);
          CHECK(std::fabs(val - fd) <= 1e-6 * (1 + std::fabs(val)));
        }
      }
    }
  }
}

TEST_CASE("property: random ASTs, symbolic derivative vs finite differences") {
  std::mt19937_64 rng(20240611);
  int checked = 0;
  int trees = 0;
  while (trees < 100) {
    const Expr e = test_support::random_expr(rng, 6);
    if (e.is_constant()) continue;
    ++trees;
    const Expr dx = diff_expr(e, Var::X);
    const Expr dy = diff_expr(e, Var::Y);
    std::uniform_real_distribution<double> coord(0.2, 1.2);
    for (int k = 0; k < 100; ++k) {
      const double x = coord(rng);
      const double y = coord(rng);
      for (Var v : {Var::X, Var::Y}) {
        double fd = 0.0;
        if (!test_support::reliable_derivative(e, v, x, y, fd)) continue;
        double val = 0.0;
        try {
          val = eval_expr(v == Var::X ? dx : dy, x, y);
        } catch (const DomainError&) {
          continue;
        }
        ++checked;
        INFO(to_string(e), " at (", x, ",", y, ")");
        CHECK(std::fabs(val - fd) <= 1e-6 * (1 + std::fabs(val)));
      }
    }
  }
  // most samples must be usable for the property to mean anything
  CHECK(checked > 10000);
}

TEST_CASE("property: parse(print(parse(s))) is evaluation-equivalent") {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> coord(-1.5, 1.5);
  for (int t = 0; t < 1000; ++t) {
    const Expr e = test_support::random_expr(rng, 6);
    const std::string text = to_string(e);
    const Expr back = parse_expr(text);
    CHECK(to_string(back) == text);
    for (int k = 0; k < 5; ++k) {
      const double x = coord(rng), y = coord(rng);
      bool threw_a = false, threw_b = false;
      double a = 0, b = 0;
      try { a = eval_expr(e, x, y); } catch (const DomainError&) { threw_a = true; }
      try { b = eval_expr(back, x, y); } catch (const DomainError&) { threw_b = true; }
      CHECK(threw_a == threw_b);
      if (!threw_a && !threw_b) CHECK(a == b);
    }
  }
}

TEST_CASE("printing keeps literals exact") {
  const Expr e = Expr::number(0.1) + Expr::variable(Var::X);
  const Expr back = parse_expr(to_string(e));
  CHECK(eval_expr(back, 0, 0) == 0.1);
  const Expr neg = Expr::number(-2.5) * Expr::variable(Var::Y);
  CHECK(eval_expr(parse_expr(to_string(neg)), 0, 2) == -5.0);
}

TEST_CASE("concurrent evaluation of a shared tree") {
  const Expr e = parse_expr("sin(x)*cosh(y)+log(1+x^2)");
  std::vector<double> out(4, 0.0);
  std::vector<std::thread> pool;
  for (int t = 0; t < 4; ++t)
    pool.emplace_back([&, t] {
      double acc = 0;
      for (int i = 0; i < 2000; ++i) acc += eval_expr(e, 0.001 * i, 0.5);
      out[t] = acc;
    });
  for (auto& th : pool) th.join();
  for (int t = 1; t < 4; ++t) CHECK(out[t] == out[0]);
}
