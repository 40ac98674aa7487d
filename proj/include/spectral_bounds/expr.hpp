#pragma once

// Scalar field expressions: parsing, evaluation, symbolic differentiation and
// printing. Expressions are immutable trees with shared subtrees, so copies
// are cheap and evaluation is safe from any number of threads.

#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <memory>
#include <numbers>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "spectral_bounds/error.hpp"

namespace spectral_bounds {

enum class Op {
  Const,
  Var,
  Add,
  Sub,
  Mul,
  Div,
  Neg,
  Pow,  // exponent is always a constant node
  Sin,
  Cos,
  Exp,
  Log,
  Sqrt,
  Abs,
  Min,
  Max,
  // Internal nodes produced by differentiation of abs/min/max. They are not
  // part of the input grammar.
  SignLeft,  // +1 if arg > 0, else -1
  SelectLe,  // args (a, b, p, q): a <= b ? p : q
};

namespace detail {

struct Node {
  Op op;
  double value = 0.0;
  int var = -1;
  std::vector<std::shared_ptr<const Node>> args;
};

using NodePtr = std::shared_ptr<const Node>;

inline NodePtr make_node(Op op, std::vector<NodePtr> args) {
  auto n = std::make_shared<Node>();
  n->op = op;
  n->args = std::move(args);
  return n;
}

inline NodePtr make_const(double v) {
  auto n = std::make_shared<Node>();
  n->op = Op::Const;
  n->value = v;
  return n;
}

inline NodePtr make_var(int index) {
  auto n = std::make_shared<Node>();
  n->op = Op::Var;
  n->var = index;
  return n;
}

inline bool is_const(const NodePtr& n, double v) {
  return n->op == Op::Const && n->value == v;
}

inline double eval_node(const Node& n, std::span<const double> x) {
  switch (n.op) {
    case Op::Const:
      return n.value;
    case Op::Var:
      return n.var < static_cast<int>(x.size()) ? x[n.var] : std::nan("");
    case Op::Add:
      return eval_node(*n.args[0], x) + eval_node(*n.args[1], x);
    case Op::Sub:
      return eval_node(*n.args[0], x) - eval_node(*n.args[1], x);
    case Op::Mul:
      return eval_node(*n.args[0], x) * eval_node(*n.args[1], x);
    case Op::Div:
      return eval_node(*n.args[0], x) / eval_node(*n.args[1], x);
    case Op::Neg:
      return -eval_node(*n.args[0], x);
    case Op::Pow: {
      const double base = eval_node(*n.args[0], x);
      const double e = n.args[1]->value;
      if (e == 2.0) return base * base;
      if (e == 1.0) return base;
      return std::pow(base, e);
    }
    case Op::Sin:
      return std::sin(eval_node(*n.args[0], x));
    case Op::Cos:
      return std::cos(eval_node(*n.args[0], x));
    case Op::Exp:
      return std::exp(eval_node(*n.args[0], x));
    case Op::Log:
      return std::log(eval_node(*n.args[0], x));
    case Op::Sqrt:
      return std::sqrt(eval_node(*n.args[0], x));
    case Op::Abs:
      return std::fabs(eval_node(*n.args[0], x));
    case Op::Min:
      return std::min(eval_node(*n.args[0], x), eval_node(*n.args[1], x));
    case Op::Max:
      return std::max(eval_node(*n.args[0], x), eval_node(*n.args[1], x));
    case Op::SignLeft:
      return eval_node(*n.args[0], x) > 0.0 ? 1.0 : -1.0;
    case Op::SelectLe:
      return eval_node(*n.args[0], x) <= eval_node(*n.args[1], x)
                 ? eval_node(*n.args[2], x)
                 : eval_node(*n.args[3], x);
  }
  return std::nan("");
}

// Constant-folding constructors. They keep derivative trees small.

inline NodePtr fold_unary(Op op, NodePtr a) {
  auto n = make_node(op, {std::move(a)});
  if (n->args[0]->op == Op::Const) {
    const double v = eval_node(*n, {});
    if (std::isfinite(v)) return make_const(v);
  }
  return n;
}

inline NodePtr add(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return b;
  if (is_const(b, 0.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const)
    return make_const(a->value + b->value);
  return make_node(Op::Add, {std::move(a), std::move(b)});
}

inline NodePtr neg(NodePtr a) {
  if (a->op == Op::Const) return make_const(-a->value);
  if (a->op == Op::Neg) return a->args[0];
  return make_node(Op::Neg, {std::move(a)});
}

inline NodePtr sub(NodePtr a, NodePtr b) {
  if (is_const(b, 0.0)) return a;
  if (is_const(a, 0.0)) return neg(std::move(b));
  if (a->op == Op::Const && b->op == Op::Const)
    return make_const(a->value - b->value);
  return make_node(Op::Sub, {std::move(a), std::move(b)});
}

inline NodePtr mul(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0) || is_const(b, 0.0)) return make_const(0.0);
  if (is_const(a, 1.0)) return b;
  if (is_const(b, 1.0)) return a;
  if (is_const(a, -1.0)) return neg(std::move(b));
  if (is_const(b, -1.0)) return neg(std::move(a));
  if (a->op == Op::Const && b->op == Op::Const)
    return make_const(a->value * b->value);
  return make_node(Op::Mul, {std::move(a), std::move(b)});
}

inline NodePtr div(NodePtr a, NodePtr b) {
  if (is_const(a, 0.0)) return make_const(0.0);
  if (is_const(b, 1.0)) return a;
  if (a->op == Op::Const && b->op == Op::Const && b->value != 0.0)
    return make_const(a->value / b->value);
  return make_node(Op::Div, {std::move(a), std::move(b)});
}

inline NodePtr pow(NodePtr base, double exponent) {
  if (exponent == 0.0) return make_const(1.0);
  if (exponent == 1.0) return base;
  if (base->op == Op::Const) {
    const double v = std::pow(base->value, exponent);
    if (std::isfinite(v)) return make_const(v);
  }
  return make_node(Op::Pow, {std::move(base), make_const(exponent)});
}

inline NodePtr derivative(const NodePtr& n, int axis) {
  const auto& a = n->args;
  switch (n->op) {
    case Op::Const:
      return make_const(0.0);
    case Op::Var:
      return make_const(n->var == axis ? 1.0 : 0.0);
    case Op::Add:
      return add(derivative(a[0], axis), derivative(a[1], axis));
    case Op::Sub:
      return sub(derivative(a[0], axis), derivative(a[1], axis));
    case Op::Mul:
      return add(mul(derivative(a[0], axis), a[1]),
                 mul(a[0], derivative(a[1], axis)));
    case Op::Div: {
      // (u/v)' = u'/v - u v'/v^2
      auto du = derivative(a[0], axis);
      auto dv = derivative(a[1], axis);
      return sub(div(du, a[1]), div(mul(a[0], dv), pow(a[1], 2.0)));
    }
    case Op::Neg:
      return neg(derivative(a[0], axis));
    case Op::Pow: {
      const double e = a[1]->value;
      return mul(mul(make_const(e), pow(a[0], e - 1.0)),
                 derivative(a[0], axis));
    }
    case Op::Sin:
      return mul(fold_unary(Op::Cos, a[0]), derivative(a[0], axis));
    case Op::Cos:
      return neg(mul(fold_unary(Op::Sin, a[0]), derivative(a[0], axis)));
    case Op::Exp:
      return mul(n, derivative(a[0], axis));
    case Op::Log:
      return div(derivative(a[0], axis), a[0]);
    case Op::Sqrt:
      return div(derivative(a[0], axis), mul(make_const(2.0), n));
    case Op::Abs:
      // One-sided convention: the left branch (-u) is taken at u == 0.
      return mul(fold_unary(Op::SignLeft, a[0]), derivative(a[0], axis));
    case Op::Min:
      // Ties pick the first argument.
      return make_node(Op::SelectLe, {a[0], a[1], derivative(a[0], axis),
                                      derivative(a[1], axis)});
    case Op::Max:
      // max(a, b): a wins when b <= a, including ties.
      return make_node(Op::SelectLe, {a[1], a[0], derivative(a[0], axis),
                                      derivative(a[1], axis)});
    case Op::SignLeft:
      return make_const(0.0);
    case Op::SelectLe:
      return make_node(Op::SelectLe, {a[0], a[1], derivative(a[2], axis),
                                      derivative(a[3], axis)});
  }
  return make_const(0.0);
}

inline int precedence(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub:
      return 1;
    case Op::Mul:
    case Op::Div:
      return 2;
    case Op::Neg:
      return 3;
    case Op::Pow:
      return 4;
    default:
      return 5;
  }
}

inline std::string format_number(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline const char* function_name(Op op) {
  switch (op) {
    case Op::Sin: return "sin";
    case Op::Cos: return "cos";
    case Op::Exp: return "exp";
    case Op::Log: return "log";
    case Op::Sqrt: return "sqrt";
    case Op::Abs: return "abs";
    case Op::Min: return "min";
    case Op::Max: return "max";
    case Op::SignLeft: return "sign_left";
    case Op::SelectLe: return "select_le";
    default: return "?";
  }
}

inline std::string print(const NodePtr& n);

inline std::string print_child(const NodePtr& child, int parent_prec,
                               bool right_side, Op parent) {
  std::string s = print(child);
  int cp = precedence(child->op);
  if (child->op == Op::Const && child->value < 0) cp = 3;
  bool paren = cp < parent_prec;
  if (!paren && cp == parent_prec && right_side &&
      (parent == Op::Sub || parent == Op::Div))
    paren = true;
  // The base of a power never carries a bare sign or a same-level power.
  if (parent == Op::Pow && !right_side && cp <= parent_prec) paren = true;
  return paren ? "(" + s + ")" : s;
}

inline std::string print(const NodePtr& n) {
  const auto& a = n->args;
  switch (n->op) {
    case Op::Const:
      return format_number(n->value);
    case Op::Var:
      return "x" + std::to_string(n->var + 1);
    case Op::Add:
      return print_child(a[0], 1, false, n->op) + " + " +
             print_child(a[1], 1, true, n->op);
    case Op::Sub:
      return print_child(a[0], 1, false, n->op) + " - " +
             print_child(a[1], 1, true, n->op);
    case Op::Mul:
      return print_child(a[0], 2, false, n->op) + "*" +
             print_child(a[1], 2, true, n->op);
    case Op::Div:
      return print_child(a[0], 2, false, n->op) + "/" +
             print_child(a[1], 2, true, n->op);
    case Op::Neg:
      return "-" + print_child(a[0], 4, true, n->op);
    case Op::Pow:
      return print_child(a[0], 4, false, n->op) + "^(" +
             format_number(a[1]->value) + ")";
    default: {
      std::string s = function_name(n->op);
      s += "(";
      for (std::size_t i = 0; i < a.size(); ++i) {
        if (i) s += ", ";
        s += print(a[i]);
      }
      return s + ")";
    }
  }
}

inline bool structurally_equal(const Node& a, const Node& b) {
  if (a.op != b.op || a.args.size() != b.args.size()) return false;
  if (a.op == Op::Const && a.value != b.value) return false;
  if (a.op == Op::Var && a.var != b.var) return false;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (!structurally_equal(*a.args[i], *b.args[i])) return false;
  return true;
}

inline int max_var(const Node& n) {
  int m = n.op == Op::Var ? n.var : -1;
  for (const auto& c : n.args) m = std::max(m, max_var(*c));
  return m;
}

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  NodePtr parse() {
    auto e = expression();
    skip_ws();
    if (pos_ != src_.size()) fail("unexpected '" + std::string(1, src_[pos_]) + "'");
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg) const {
    throw ParseError("syntax error: " + msg, pos_);
  }

  void skip_ws() {
    while (pos_ < src_.size() && std::isspace(static_cast<unsigned char>(src_[pos_])))
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
      if (pos_ >= src_.size()) fail(std::string("expected '") + c + "' before end of input");
      fail(std::string("expected '") + c + "'");
    }
  }

  NodePtr expression() {
    auto lhs = term();
    for (;;) {
      if (accept('+')) {
        lhs = make_node(Op::Add, {lhs, term()});
      } else if (accept('-')) {
        lhs = make_node(Op::Sub, {lhs, term()});
      } else {
        return lhs;
      }
    }
  }

  NodePtr term() {
    auto lhs = unary();
    for (;;) {
      if (accept('*')) {
        lhs = make_node(Op::Mul, {lhs, unary()});
      } else if (accept('/')) {
        lhs = make_node(Op::Div, {lhs, unary()});
      } else {
        return lhs;
      }
    }
  }

  // '^' binds tighter than unary minus: -x^2 == -(x^2).
  NodePtr unary() {
    if (accept('-')) return make_node(Op::Neg, {unary()});
    if (accept('+')) return unary();
    return power();
  }

  NodePtr power() {
    auto base = primary();
    skip_ws();
    if (accept('^')) {
      const std::size_t at = pos_;
      auto exponent = unary();
      if (max_var(*exponent) >= 0) {
        throw ParseError("syntax error: exponent must be a constant", at);
      }
      const double e = eval_node(*exponent, {});
      if (!std::isfinite(e)) throw ParseError("syntax error: exponent is not finite", at);
      return make_node(Op::Pow, {base, make_const(e)});
    }
    return base;
  }

  NodePtr primary() {
    skip_ws();
    if (pos_ >= src_.size()) fail("unexpected end of input");
    const char c = src_[pos_];
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return identifier();
    if (accept('(')) {
      auto e = expression();
      expect(')');
      return e;
    }
    fail("unexpected '" + std::string(1, c) + "'");
  }

  NodePtr number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isdigit(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '.'))
      ++pos_;
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t p = pos_ + 1;
      if (p < src_.size() && (src_[p] == '+' || src_[p] == '-')) ++p;
      if (p < src_.size() && std::isdigit(static_cast<unsigned char>(src_[p]))) {
        pos_ = p;
        while (pos_ < src_.size() && std::isdigit(static_cast<unsigned char>(src_[pos_])))
          ++pos_;
      }
    }
    const std::string text(src_.substr(start, pos_ - start));
    char* end = nullptr;
    const double v = std::strtod(text.c_str(), &end);
    if (end != text.c_str() + text.size()) {
      pos_ = start;
      fail("malformed number '" + text + "'");
    }
    return make_const(v);
  }

  NodePtr identifier() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() &&
           (std::isalnum(static_cast<unsigned char>(src_[pos_])) || src_[pos_] == '_'))
      ++pos_;
    const std::string name(src_.substr(start, pos_ - start));

    static constexpr std::pair<const char*, Op> unary_fns[] = {
        {"sin", Op::Sin}, {"cos", Op::Cos},   {"exp", Op::Exp},
        {"log", Op::Log}, {"sqrt", Op::Sqrt}, {"abs", Op::Abs}};
    for (const auto& [fname, op] : unary_fns) {
      if (name == fname) {
        expect('(');
        auto arg = expression();
        expect(')');
        return make_node(op, {arg});
      }
    }
    if (name == "min" || name == "max") {
      expect('(');
      auto first = expression();
      expect(',');
      auto second = expression();
      expect(')');
      return make_node(name == "min" ? Op::Min : Op::Max, {first, second});
    }
    // Internal nodes produced by differentiating abs/min/max; accepted so
    // that printed derivatives parse back.
    if (name == "sign_left") {
      expect('(');
      auto arg = expression();
      expect(')');
      return make_node(Op::SignLeft, {arg});
    }
    if (name == "select_le") {
      expect('(');
      std::vector<NodePtr> args{expression()};
      for (int i = 0; i < 3; ++i) {
        expect(',');
        args.push_back(expression());
      }
      expect(')');
      return make_node(Op::SelectLe, std::move(args));
    }
    if (name == "pi") return make_const(std::numbers::pi);
    if (name == "x") return make_var(0);
    if (name == "y") return make_var(1);
    if (name == "z") return make_var(2);
    if (name.size() > 1 && name[0] == 'x') {
      bool digits = true;
      for (std::size_t i = 1; i < name.size(); ++i)
        digits = digits && std::isdigit(static_cast<unsigned char>(name[i]));
      if (digits && name[1] != '0') return make_var(std::stoi(name.substr(1)) - 1);
    }
    throw ParseError("unknown identifier '" + name + "'", start);
  }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

/// Immutable scalar field over coordinates x1..xν.
class Expr {
 public:
  Expr() : node_(detail::make_const(0.0)) {}
  explicit Expr(detail::NodePtr node) : node_(std::move(node)) {}

  static Expr constant(double v) { return Expr(detail::make_const(v)); }
  static Expr variable(int index) { return Expr(detail::make_var(index)); }

  /// Evaluates at `x`. Throws EvalError if the result is not finite.
  double operator()(std::span<const double> x) const {
    const double v = detail::eval_node(*node_, x);
    if (!std::isfinite(v)) {
      std::string where;
      for (std::size_t i = 0; i < x.size(); ++i)
        where += (i ? ", " : "") + detail::format_number(x[i]);
      throw EvalError("expression '" + str() + "' is not finite at (" + where + ")");
    }
    return v;
  }

  double operator()(std::initializer_list<double> x) const {
    return (*this)(std::span<const double>(x.begin(), x.size()));
  }

  /// Raw evaluation without the finiteness check.
  double evaluate_unchecked(std::span<const double> x) const {
    return detail::eval_node(*node_, x);
  }

  Expr derivative(int axis) const { return Expr(detail::derivative(node_, axis)); }

  std::string str() const { return detail::print(node_); }

  std::optional<double> constant_value() const {
    if (node_->op == Op::Const) return node_->value;
    return std::nullopt;
  }
  bool is_zero() const { return detail::is_const(node_, 0.0); }

  /// Highest variable index referenced, or -1 for a constant expression.
  int max_variable() const { return detail::max_var(*node_); }

  bool structurally_equals(const Expr& other) const {
    return detail::structurally_equal(*node_, *other.node_);
  }

  const detail::NodePtr& node() const { return node_; }

  friend Expr operator+(const Expr& a, const Expr& b) { return Expr(detail::add(a.node_, b.node_)); }
  friend Expr operator-(const Expr& a, const Expr& b) { return Expr(detail::sub(a.node_, b.node_)); }
  friend Expr operator*(const Expr& a, const Expr& b) { return Expr(detail::mul(a.node_, b.node_)); }
  friend Expr operator/(const Expr& a, const Expr& b) { return Expr(detail::div(a.node_, b.node_)); }
  friend Expr operator-(const Expr& a) { return Expr(detail::neg(a.node_)); }
  friend Expr pow(const Expr& a, double e) { return Expr(detail::pow(a.node_, e)); }
  friend Expr exp(const Expr& a) { return Expr(detail::fold_unary(Op::Exp, a.node_)); }
  friend Expr log(const Expr& a) { return Expr(detail::fold_unary(Op::Log, a.node_)); }

 private:
  detail::NodePtr node_;
};

/// Parses a field expression over x1..xν (aliases x, y, z; constant pi).
inline Expr parse_field(std::string_view source) {
  return Expr(detail::Parser(source).parse());
}

inline Expr differentiate(const Expr& f, int axis) { return f.derivative(axis); }

}  // namespace spectral_bounds
