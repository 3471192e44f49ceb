#pragma once

// Scalar field expressions in the chart coordinates (x, y).
//
// An Expr is an immutable handle to a shared expression tree. Trees are built
// by parse_expr() or by the smart constructors below, evaluated with
// eval_expr() and differentiated symbolically with diff_expr(). Handles are
// cheap to copy and safe to evaluate concurrently.

#include <cstddef>
#include <memory>
#include <stdexcept>
#include <string>
#include <string_view>

namespace jsg {

enum class Var { X, Y };

enum class Func { Sin, Cos, Sinh, Cosh, Tanh, Exp, Log, Sqrt, Atan, Neg };

enum class BinOp { Add, Sub, Mul, Div, Pow };

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset);
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Raised when an expression is evaluated outside its natural domain.
class DomainError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class Expr {
 public:
  enum class Kind { Number, Variable, Unary, Binary };

  // Defaults to the literal 0.
  Expr();

  static Expr number(double value);
  static Expr variable(Var v);
  static Expr unary(Func f, Expr arg);
  static Expr binary(BinOp op, Expr lhs, Expr rhs);

  Kind kind() const;
  double value() const;  // Number only
  Var var() const;       // Variable only
  Func func() const;     // Unary only
  BinOp op() const;      // Binary only
  const Expr& arg() const;  // Unary only
  const Expr& lhs() const;  // Binary only
  const Expr& rhs() const;  // Binary only

  // True when the tree contains no variable.
  bool is_constant() const;

  double operator()(double x, double y) const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node);
  std::shared_ptr<const Node> node_;
};

Expr parse_expr(std::string_view source);
double eval_expr(const Expr& e, double x, double y);
Expr diff_expr(const Expr& e, Var var);

// Fully parenthesised text that parses back to an evaluation-equivalent tree.
std::string to_string(const Expr& e);

std::string_view func_name(Func f);

// Arithmetic helpers. These fold literal-only subtrees and drop additive and
// multiplicative identities; nothing else is simplified.
Expr operator+(const Expr& a, const Expr& b);
Expr operator-(const Expr& a, const Expr& b);
Expr operator*(const Expr& a, const Expr& b);
Expr operator/(const Expr& a, const Expr& b);
Expr operator-(const Expr& a);
Expr pow(const Expr& a, const Expr& b);

}  // namespace jsg
