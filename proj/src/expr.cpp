#include "jsg/expr.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>
#include <utility>

namespace jsg {

struct Expr::Node {
  Kind kind = Kind::Number;
  double value = 0.0;
  Var var = Var::X;
  Func func = Func::Neg;
  BinOp op = BinOp::Add;
  Expr a;
  Expr b;
  bool constant = true;
};

ParseError::ParseError(const std::string& what, std::size_t offset)
    : std::runtime_error(what + " at byte " + std::to_string(offset)), offset_(offset) {}

Expr::Expr() : node_(nullptr) {}
Expr::Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

Expr Expr::number(double value) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Number;
  n->value = value;
  return Expr(std::move(n));
}

Expr Expr::variable(Var v) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Variable;
  n->var = v;
  n->constant = false;
  return Expr(std::move(n));
}

Expr Expr::unary(Func f, Expr arg) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Unary;
  n->func = f;
  n->constant = arg.is_constant();
  n->a = std::move(arg);
  return Expr(std::move(n));
}

Expr Expr::binary(BinOp op, Expr lhs, Expr rhs) {
  auto n = std::make_shared<Node>();
  n->kind = Kind::Binary;
  n->op = op;
  n->constant = lhs.is_constant() && rhs.is_constant();
  n->a = std::move(lhs);
  n->b = std::move(rhs);
  return Expr(std::move(n));
}

Expr::Kind Expr::kind() const { return node_ ? node_->kind : Kind::Number; }
double Expr::value() const { return node_ ? node_->value : 0.0; }
Var Expr::var() const { return node_->var; }
Func Expr::func() const { return node_->func; }
BinOp Expr::op() const { return node_->op; }
const Expr& Expr::arg() const { return node_->a; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }
bool Expr::is_constant() const { return !node_ || node_->constant; }

double Expr::operator()(double x, double y) const { return eval_expr(*this, x, y); }

std::string_view func_name(Func f) {
  switch (f) {
    case Func::Sin: return "sin";
    case Func::Cos: return "cos";
    case Func::Sinh: return "sinh";
    case Func::Cosh: return "cosh";
    case Func::Tanh: return "tanh";
    case Func::Exp: return "exp";
    case Func::Log: return "log";
    case Func::Sqrt: return "sqrt";
    case Func::Atan: return "atan";
    case Func::Neg: return "neg";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Evaluation

namespace {

double checked(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string("non-finite result in ") + what);
  return v;
}

double apply(Func f, double v) {
  switch (f) {
    case Func::Sin: return std::sin(v);
    case Func::Cos: return std::cos(v);
    case Func::Sinh: return checked(std::sinh(v), "sinh");
    case Func::Cosh: return checked(std::cosh(v), "cosh");
    case Func::Tanh: return std::tanh(v);
    case Func::Exp: return checked(std::exp(v), "exp");
    case Func::Log:
      if (!(v > 0.0)) throw DomainError("log of non-positive argument");
      return std::log(v);
    case Func::Sqrt:
      if (v < 0.0) throw DomainError("sqrt of negative argument");
      return std::sqrt(v);
    case Func::Atan: return std::atan(v);
    case Func::Neg: return -v;
  }
  return v;
}

double apply(BinOp op, double l, double r) {
  switch (op) {
    case BinOp::Add: return checked(l + r, "+");
    case BinOp::Sub: return checked(l - r, "-");
    case BinOp::Mul: return checked(l * r, "*");
    case BinOp::Div:
      if (r == 0.0) throw DomainError("division by zero");
      return checked(l / r, "/");
    case BinOp::Pow: {
      if (l == 0.0 && r < 0.0) throw DomainError("zero raised to a negative power");
      const double v = std::pow(l, r);
      if (std::isnan(v)) throw DomainError("negative base with non-integer exponent");
      return checked(v, "^");
    }
  }
  return 0.0;
}

}  // namespace

double eval_expr(const Expr& e, double x, double y) {
  switch (e.kind()) {
    case Expr::Kind::Number: return e.value();
    case Expr::Kind::Variable: return e.var() == Var::X ? x : y;
    case Expr::Kind::Unary: return apply(e.func(), eval_expr(e.arg(), x, y));
    case Expr::Kind::Binary:
      return apply(e.op(), eval_expr(e.lhs(), x, y), eval_expr(e.rhs(), x, y));
  }
  return 0.0;
}

// ---------------------------------------------------------------------------
// Smart constructors

namespace {

bool is_number(const Expr& e, double v) {
  return e.kind() == Expr::Kind::Number && e.value() == v;
}

Expr fold_or_build(BinOp op, const Expr& a, const Expr& b) {
  if (a.kind() == Expr::Kind::Number && b.kind() == Expr::Kind::Number) {
    try {
      return Expr::number(apply(op, a.value(), b.value()));
    } catch (const DomainError&) {
      // keep the tree; evaluation reports the error
    }
  }
  return Expr::binary(op, a, b);
}

}  // namespace

Expr operator+(const Expr& a, const Expr& b) {
  if (is_number(a, 0.0)) return b;
  if (is_number(b, 0.0)) return a;
  return fold_or_build(BinOp::Add, a, b);
}

Expr operator-(const Expr& a, const Expr& b) {
  if (is_number(b, 0.0)) return a;
  if (is_number(a, 0.0)) return -b;
  return fold_or_build(BinOp::Sub, a, b);
}

Expr operator*(const Expr& a, const Expr& b) {
  if (is_number(a, 0.0) || is_number(b, 0.0)) return Expr::number(0.0);
  if (is_number(a, 1.0)) return b;
  if (is_number(b, 1.0)) return a;
  return fold_or_build(BinOp::Mul, a, b);
}

Expr operator/(const Expr& a, const Expr& b) {
  if (is_number(b, 1.0)) return a;
  if (is_number(a, 0.0) && !is_number(b, 0.0)) return Expr::number(0.0);
  return fold_or_build(BinOp::Div, a, b);
}

Expr operator-(const Expr& a) {
  if (a.kind() == Expr::Kind::Number) return Expr::number(-a.value());
  if (a.kind() == Expr::Kind::Unary && a.func() == Func::Neg) return a.arg();
  return Expr::unary(Func::Neg, a);
}

Expr pow(const Expr& a, const Expr& b) {
  if (is_number(b, 1.0)) return a;
  if (is_number(b, 0.0)) return Expr::number(1.0);
  return fold_or_build(BinOp::Pow, a, b);
}

// ---------------------------------------------------------------------------
// Differentiation

Expr diff_expr(const Expr& e, Var var) {
  using K = Expr::Kind;
  if (e.is_constant()) return Expr::number(0.0);
  switch (e.kind()) {
    case K::Number: return Expr::number(0.0);
    case K::Variable: return Expr::number(e.var() == var ? 1.0 : 0.0);
    case K::Unary: {
      const Expr& u = e.arg();
      const Expr du = diff_expr(u, var);
      const Expr one = Expr::number(1.0);
      switch (e.func()) {
        case Func::Sin: return Expr::unary(Func::Cos, u) * du;
        case Func::Cos: return -(Expr::unary(Func::Sin, u) * du);
        case Func::Sinh: return Expr::unary(Func::Cosh, u) * du;
        case Func::Cosh: return Expr::unary(Func::Sinh, u) * du;
        case Func::Tanh: {
          const Expr t = Expr::unary(Func::Tanh, u);
          return (one - t * t) * du;
        }
        case Func::Exp: return e * du;
        case Func::Log: return du / u;
        case Func::Sqrt: return du / (Expr::number(2.0) * e);
        case Func::Atan: return du / (one + u * u);
        case Func::Neg: return -du;
      }
      break;
    }
    case K::Binary: {
      const Expr& u = e.lhs();
      const Expr& v = e.rhs();
      const Expr du = diff_expr(u, var);
      const Expr dv = diff_expr(v, var);
      switch (e.op()) {
        case BinOp::Add: return du + dv;
        case BinOp::Sub: return du - dv;
        case BinOp::Mul: return du * v + u * dv;
        case BinOp::Div: return (du * v - u * dv) / (v * v);
        case BinOp::Pow:
          if (v.is_constant()) {
            return v * pow(u, v - Expr::number(1.0)) * du;
          }
          if (u.is_constant()) {
            return e * Expr::unary(Func::Log, u) * dv;
          }
          return e * (dv * Expr::unary(Func::Log, u) + v * du / u);
      }
      break;
    }
  }
  return Expr::number(0.0);
}

// ---------------------------------------------------------------------------
// Printing

namespace {

std::string format_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", std::fabs(v));
  if (std::signbit(v)) return std::string("(-") + buf + ")";
  return buf;
}

char op_char(BinOp op) {
  switch (op) {
    case BinOp::Add: return '+';
    case BinOp::Sub: return '-';
    case BinOp::Mul: return '*';
    case BinOp::Div: return '/';
    case BinOp::Pow: return '^';
  }
  return '?';
}

}  // namespace

std::string to_string(const Expr& e) {
  switch (e.kind()) {
    case Expr::Kind::Number: return format_number(e.value());
    case Expr::Kind::Variable: return e.var() == Var::X ? "x" : "y";
    case Expr::Kind::Unary:
      if (e.func() == Func::Neg) return "(-" + to_string(e.arg()) + ")";
      return std::string(func_name(e.func())) + "(" + to_string(e.arg()) + ")";
    case Expr::Kind::Binary:
      return "(" + to_string(e.lhs()) + op_char(e.op()) + to_string(e.rhs()) + ")";
  }
  return "0";
}

// ---------------------------------------------------------------------------
// Parsing
//
//   expr   := term (("+"|"-") term)*
//   term   := factor (("*"|"/") factor)*
//   factor := ["-"] power
//   power  := atom ["^" factor]
//   atom   := number | ident | ident "(" expr ")" | "(" expr ")"

namespace {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse() {
    skip_ws();
    if (pos_ == src_.size()) throw ParseError("empty expression", pos_);
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) throw ParseError("unexpected character '" + std::string(1, src_[pos_]) + "'", pos_);
    return e;
  }

 private:
  std::string_view src_;
  std::size_t pos_ = 0;

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (pos_ >= src_.size()) throw ParseError(std::string("expected '") + c + "' but input ended", pos_);
      throw ParseError(std::string("expected '") + c + "'", pos_);
    }
  }

  Expr expr() {
    Expr lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = Expr::binary(BinOp::Add, lhs, term());
      } else if (accept('-')) {
        lhs = Expr::binary(BinOp::Sub, lhs, term());
      } else {
        return lhs;
      }
    }
  }

  Expr term() {
    Expr lhs = factor();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(BinOp::Mul, lhs, factor());
      } else if (accept('/')) {
        lhs = Expr::binary(BinOp::Div, lhs, factor());
      } else {
        return lhs;
      }
    }
  }

  Expr factor() {
    if (accept('-')) return Expr::unary(Func::Neg, power());
    return power();
  }

  Expr power() {
    Expr base = atom();
    if (accept('^')) return Expr::binary(BinOp::Pow, base, factor());
    return base;
  }

  static bool is_ident_start(char c) {
    return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || c == '_';
  }
  static bool is_ident_char(char c) { return is_ident_start(c) || (c >= '0' && c <= '9'); }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }

  Expr atom() {
    skip_ws();
    if (pos_ >= src_.size()) throw ParseError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = expr();
      expect(')');
      return inner;
    }
    if (is_digit(c) || c == '.') return number();
    if (is_ident_start(c)) return identifier();
    throw ParseError(std::string("unexpected character '") + c + "'", pos_);
  }

  Expr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ - start == 1 && src_[start] == '.') throw ParseError("malformed number", start);
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p >= src_.size() || !is_digit(src_[p])) throw ParseError("malformed exponent", pos_);
      while (p < src_.size() && is_digit(src_[p])) ++p;
      pos_ = p;
    }
    double v = 0.0;
    const auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_ || !std::isfinite(v))
      throw ParseError("malformed number", start);
    return Expr::number(v);
  }

  Expr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_ident_char(src_[pos_])) ++pos_;
    const std::string_view name = src_.substr(start, pos_ - start);
    skip_ws();
    if (pos_ < src_.size() && src_[pos_] == '(') {
      static constexpr Func funcs[] = {Func::Sin, Func::Cos, Func::Sinh, Func::Cosh, Func::Tanh,
                                       Func::Exp, Func::Log, Func::Sqrt, Func::Atan, Func::Neg};
      for (Func f : funcs) {
        if (func_name(f) == name) {
          ++pos_;
          Expr arg = expr();
          expect(')');
          return Expr::unary(f, std::move(arg));
        }
      }
      throw ParseError("unknown function '" + std::string(name) + "'", start);
    }
    if (name == "x") return Expr::variable(Var::X);
    if (name == "y") return Expr::variable(Var::Y);
    if (name == "pi") return Expr::number(3.141592653589793);
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }
};

}  // namespace

Expr parse_expr(std::string_view source) { return Parser(source).parse(); }

}  // namespace jsg
