#pragma once

// Arithmetic expressions over coordinates x1..xn and named parameters, with
// exact symbolic partial derivatives.
//
// Axes are 0-based in the C++ API; the textual form uses x1..xn.

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ghm/error.hpp"

namespace ghm {

using Parameters = std::map<std::string, double, std::less<>>;

enum class Op {
  constant,
  coordinate,
  parameter,
  neg,
  sqrt,
  sin,
  cos,
  exp,
  log,
  add,
  sub,
  mul,
  div,
  pow,
};

class Expression;

namespace detail {

struct Node {
  Op op = Op::constant;
  double value = 0.0;  // constant value, or the exponent of a pow node
  int axis = -1;       // coordinate axis
  std::string name;    // parameter name
  std::shared_ptr<const Node> lhs;
  std::shared_ptr<const Node> rhs;
};

using NodePtr = std::shared_ptr<const Node>;

inline bool is_unary(Op op) {
  return op == Op::neg || op == Op::sqrt || op == Op::sin || op == Op::cos || op == Op::exp ||
         op == Op::log || op == Op::pow;
}

inline bool is_binary(Op op) {
  return op == Op::add || op == Op::sub || op == Op::mul || op == Op::div;
}

inline std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  std::string s(buf);
  // Prefer the shortest representation that round-trips.
  for (int prec = 1; prec < 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) {
      s = buf;
      break;
    }
  }
  return s;
}

}  // namespace detail

/// Immutable expression tree. Copies share structure; all operations are pure.
class Expression {
 public:
  Expression() : Expression(constant(0.0)) {}

  static Expression constant(double v) {
    auto n = std::make_shared<detail::Node>();
    n->op = Op::constant;
    n->value = v;
    return Expression(std::move(n));
  }

  static Expression coordinate(int axis) {
    if (axis < 0) throw InvalidArgument("coordinate axis must be nonnegative");
    auto n = std::make_shared<detail::Node>();
    n->op = Op::coordinate;
    n->axis = axis;
    return Expression(std::move(n));
  }

  static Expression parameter(std::string name) {
    auto n = std::make_shared<detail::Node>();
    n->op = Op::parameter;
    n->name = std::move(name);
    return Expression(std::move(n));
  }

  Op op() const { return node_->op; }
  bool is_constant() const { return node_->op == Op::constant; }
  bool is_zero() const { return is_constant() && node_->value == 0.0; }
  bool is_one() const { return is_constant() && node_->value == 1.0; }
  std::optional<double> constant_value() const {
    if (is_constant()) return node_->value;
    return std::nullopt;
  }
  /// Axis of a bare coordinate node.
  std::optional<int> coordinate_axis() const {
    if (node_->op == Op::coordinate) return node_->axis;
    return std::nullopt;
  }
  double exponent() const { return node_->value; }
  const std::string& parameter_name() const { return node_->name; }

  Expression lhs() const { return Expression(node_->lhs); }
  Expression rhs() const { return Expression(node_->rhs); }

  const detail::Node* node() const { return node_.get(); }

  friend Expression make_unary(Op op, const Expression& a, double exponent);
  friend Expression make_binary(Op op, const Expression& a, const Expression& b);

 private:
  explicit Expression(detail::NodePtr n) : node_(std::move(n)) {}
  detail::NodePtr node_;
};

// ---------------------------------------------------------------------------
// Evaluation

namespace detail {

inline std::string to_string_impl(const Node& n);

[[noreturn]] inline void domain_fail(const Node& n, const char* what) {
  throw DomainError(std::string(what) + " in '" + to_string_impl(n) + "'");
}

inline double eval_node(const Node& n, std::span<const double> x, const Parameters& params) {
  switch (n.op) {
    case Op::constant:
      return n.value;
    case Op::coordinate:
      if (static_cast<std::size_t>(n.axis) >= x.size())
        throw InvalidArgument("point has " + std::to_string(x.size()) + " coordinates, expression uses x" +
                              std::to_string(n.axis + 1));
      return x[n.axis];
    case Op::parameter: {
      auto it = params.find(n.name);
      if (it == params.end()) throw InvalidArgument("unbound parameter '" + n.name + "'");
      return it->second;
    }
    case Op::neg:
      return -eval_node(*n.lhs, x, params);
    case Op::sqrt: {
      double a = eval_node(*n.lhs, x, params);
      if (a < 0.0) domain_fail(n, "sqrt of negative value");
      return std::sqrt(a);
    }
    case Op::sin:
      return std::sin(eval_node(*n.lhs, x, params));
    case Op::cos:
      return std::cos(eval_node(*n.lhs, x, params));
    case Op::exp:
      return std::exp(eval_node(*n.lhs, x, params));
    case Op::log: {
      double a = eval_node(*n.lhs, x, params);
      if (!(a > 0.0)) domain_fail(n, "log of nonpositive value");
      return std::log(a);
    }
    case Op::pow: {
      double a = eval_node(*n.lhs, x, params);
      double p = n.value;
      bool integral = p == std::floor(p);
      if (!integral && a < 0.0) domain_fail(n, "non-integer power of negative value");
      if (p < 0.0 && a == 0.0) domain_fail(n, "division by zero");
      if (p == 2.0) return a * a;
      return std::pow(a, p);
    }
    case Op::add:
      return eval_node(*n.lhs, x, params) + eval_node(*n.rhs, x, params);
    case Op::sub:
      return eval_node(*n.lhs, x, params) - eval_node(*n.rhs, x, params);
    case Op::mul:
      return eval_node(*n.lhs, x, params) * eval_node(*n.rhs, x, params);
    case Op::div: {
      double a = eval_node(*n.lhs, x, params);
      double b = eval_node(*n.rhs, x, params);
      if (b == 0.0) domain_fail(n, "division by zero");
      return a / b;
    }
  }
  return 0.0;
}

}  // namespace detail

inline double evaluate(const Expression& e, std::span<const double> x, const Parameters& params = {}) {
  return detail::eval_node(*e.node(), x, params);
}

// ---------------------------------------------------------------------------
// Construction with constant folding

inline Expression make_unary(Op op, const Expression& a, double exponent = 0.0) {
  if (op == Op::neg) {
    if (auto c = a.constant_value()) return Expression::constant(-*c);
    if (a.op() == Op::neg) return a.lhs();
  }
  if (op == Op::pow) {
    if (exponent == 0.0) return Expression::constant(1.0);
    if (exponent == 1.0) return a;
  }
  if (auto c = a.constant_value()) {
    // Fold only where the result is defined; otherwise keep the node so that
    // evaluation reports the domain error with its location.
    switch (op) {
      case Op::sqrt:
        if (*c >= 0.0) return Expression::constant(std::sqrt(*c));
        break;
      case Op::sin:
        return Expression::constant(std::sin(*c));
      case Op::cos:
        return Expression::constant(std::cos(*c));
      case Op::exp:
        return Expression::constant(std::exp(*c));
      case Op::log:
        if (*c > 0.0) return Expression::constant(std::log(*c));
        break;
      case Op::pow:
        if ((exponent == std::floor(exponent) || *c >= 0.0) && !(exponent < 0.0 && *c == 0.0))
          return Expression::constant(exponent == 2.0 ? *c * *c : std::pow(*c, exponent));
        break;
      default:
        break;
    }
  }
  auto n = std::make_shared<detail::Node>();
  n->op = op;
  n->value = exponent;
  n->lhs = a.node_;
  return Expression(std::move(n));
}

inline Expression make_binary(Op op, const Expression& a, const Expression& b) {
  auto ca = a.constant_value();
  auto cb = b.constant_value();
  switch (op) {
    case Op::add:
      if (ca && cb) return Expression::constant(*ca + *cb);
      if (a.is_zero()) return b;
      if (b.is_zero()) return a;
      break;
    case Op::sub:
      if (ca && cb) return Expression::constant(*ca - *cb);
      if (b.is_zero()) return a;
      if (a.is_zero()) return make_unary(Op::neg, b);
      break;
    case Op::mul:
      if (ca && cb) return Expression::constant(*ca * *cb);
      if (a.is_zero() || b.is_zero()) return Expression::constant(0.0);
      if (a.is_one()) return b;
      if (b.is_one()) return a;
      if (ca && *ca == -1.0) return make_unary(Op::neg, b);
      if (cb && *cb == -1.0) return make_unary(Op::neg, a);
      break;
    case Op::div:
      if (ca && cb && *cb != 0.0) return Expression::constant(*ca / *cb);
      if (b.is_one()) return a;
      if (a.is_zero() && cb && *cb != 0.0) return a;
      break;
    default:
      throw InvalidArgument("make_binary: not a binary operator");
  }
  auto n = std::make_shared<detail::Node>();
  n->op = op;
  n->lhs = a.node_;
  n->rhs = b.node_;
  return Expression(std::move(n));
}

inline Expression operator+(const Expression& a, const Expression& b) { return make_binary(Op::add, a, b); }
inline Expression operator-(const Expression& a, const Expression& b) { return make_binary(Op::sub, a, b); }
inline Expression operator*(const Expression& a, const Expression& b) { return make_binary(Op::mul, a, b); }
inline Expression operator/(const Expression& a, const Expression& b) { return make_binary(Op::div, a, b); }
inline Expression operator-(const Expression& a) { return make_unary(Op::neg, a); }
inline Expression operator+(const Expression& a, double b) { return a + Expression::constant(b); }
inline Expression operator+(double a, const Expression& b) { return Expression::constant(a) + b; }
inline Expression operator-(const Expression& a, double b) { return a - Expression::constant(b); }
inline Expression operator-(double a, const Expression& b) { return Expression::constant(a) - b; }
inline Expression operator*(const Expression& a, double b) { return a * Expression::constant(b); }
inline Expression operator*(double a, const Expression& b) { return Expression::constant(a) * b; }
inline Expression operator/(const Expression& a, double b) { return a / Expression::constant(b); }
inline Expression operator/(double a, const Expression& b) { return Expression::constant(a) / b; }
inline Expression& operator+=(Expression& a, const Expression& b) { return a = a + b; }
inline Expression& operator-=(Expression& a, const Expression& b) { return a = a - b; }
inline Expression& operator*=(Expression& a, const Expression& b) { return a = a * b; }

inline Expression pow(const Expression& a, double exponent) { return make_unary(Op::pow, a, exponent); }
inline Expression sqrt(const Expression& a) { return make_unary(Op::sqrt, a); }
inline Expression sin(const Expression& a) { return make_unary(Op::sin, a); }
inline Expression cos(const Expression& a) { return make_unary(Op::cos, a); }
inline Expression exp(const Expression& a) { return make_unary(Op::exp, a); }
inline Expression log(const Expression& a) { return make_unary(Op::log, a); }

// ---------------------------------------------------------------------------
// Differentiation and substitution

/// Exact partial derivative with respect to the given (0-based) axis.
inline Expression differentiate(const Expression& e, int axis) {
  switch (e.op()) {
    case Op::constant:
    case Op::parameter:
      return Expression::constant(0.0);
    case Op::coordinate:
      return Expression::constant(*e.coordinate_axis() == axis ? 1.0 : 0.0);
    case Op::neg:
      return -differentiate(e.lhs(), axis);
    case Op::sqrt: {
      Expression du = differentiate(e.lhs(), axis);
      if (du.is_zero()) return du;
      return du / (2.0 * e);
    }
    case Op::sin: {
      Expression du = differentiate(e.lhs(), axis);
      return cos(e.lhs()) * du;
    }
    case Op::cos: {
      Expression du = differentiate(e.lhs(), axis);
      return -sin(e.lhs()) * du;
    }
    case Op::exp:
      return e * differentiate(e.lhs(), axis);
    case Op::log: {
      Expression du = differentiate(e.lhs(), axis);
      if (du.is_zero()) return du;
      return du / e.lhs();
    }
    case Op::pow: {
      Expression du = differentiate(e.lhs(), axis);
      if (du.is_zero()) return du;
      double p = e.exponent();
      return p * pow(e.lhs(), p - 1.0) * du;
    }
    case Op::add:
      return differentiate(e.lhs(), axis) + differentiate(e.rhs(), axis);
    case Op::sub:
      return differentiate(e.lhs(), axis) - differentiate(e.rhs(), axis);
    case Op::mul: {
      Expression a = e.lhs(), b = e.rhs();
      return differentiate(a, axis) * b + a * differentiate(b, axis);
    }
    case Op::div: {
      Expression a = e.lhs(), b = e.rhs();
      Expression da = differentiate(a, axis), db = differentiate(b, axis);
      if (db.is_zero()) return da / b;
      return (da * b - a * db) / pow(b, 2.0);
    }
  }
  return Expression::constant(0.0);
}

/// Rebuild `e` with each coordinate node replaced by `replacement(axis)` and each
/// parameter node by `parameter(name)` (which may return the node unchanged).
template <class CoordFn, class ParamFn>
Expression transform(const Expression& e, CoordFn&& replacement, ParamFn&& parameter) {
  switch (e.op()) {
    case Op::constant:
      return e;
    case Op::coordinate:
      return replacement(*e.coordinate_axis());
    case Op::parameter:
      return parameter(e);
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      return make_binary(e.op(), transform(e.lhs(), replacement, parameter),
                         transform(e.rhs(), replacement, parameter));
    default:
      return make_unary(e.op(), transform(e.lhs(), replacement, parameter), e.exponent());
  }
}

/// Replace parameters by their values, constant folding the result.
inline Expression bind(const Expression& e, const Parameters& params) {
  return transform(
      e, [](int axis) { return Expression::coordinate(axis); },
      [&](const Expression& p) {
        auto it = params.find(p.parameter_name());
        return it == params.end() ? p : Expression::constant(it->second);
      });
}

/// Replace coordinate nodes: axis i becomes replacement[i].
inline Expression substitute(const Expression& e, std::span<const Expression> replacement) {
  return transform(
      e,
      [&](int axis) {
        if (static_cast<std::size_t>(axis) >= replacement.size())
          throw InvalidArgument("substitute: no replacement for x" + std::to_string(axis + 1));
        return replacement[axis];
      },
      [](const Expression& p) { return p; });
}

inline bool depends_on(const Expression& e, int axis) {
  switch (e.op()) {
    case Op::constant:
    case Op::parameter:
      return false;
    case Op::coordinate:
      return *e.coordinate_axis() == axis;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      return depends_on(e.lhs(), axis) || depends_on(e.rhs(), axis);
    default:
      return depends_on(e.lhs(), axis);
  }
}

inline void collect_parameters(const Expression& e, std::set<std::string>& out) {
  switch (e.op()) {
    case Op::parameter:
      out.insert(e.parameter_name());
      return;
    case Op::constant:
    case Op::coordinate:
      return;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      collect_parameters(e.lhs(), out);
      collect_parameters(e.rhs(), out);
      return;
    default:
      collect_parameters(e.lhs(), out);
  }
}

inline std::size_t node_count(const Expression& e) {
  switch (e.op()) {
    case Op::constant:
    case Op::coordinate:
    case Op::parameter:
      return 1;
    case Op::add:
    case Op::sub:
    case Op::mul:
    case Op::div:
      return 1 + node_count(e.lhs()) + node_count(e.rhs());
    default:
      return 1 + node_count(e.lhs());
  }
}

// ---------------------------------------------------------------------------
// Printing

namespace detail {

inline int precedence(const Node& n) {
  switch (n.op) {
    case Op::add:
    case Op::sub:
      return 1;
    case Op::mul:
    case Op::div:
      return 2;
    case Op::neg:
      return 3;
    case Op::pow:
      return 4;
    case Op::constant:
      return n.value < 0.0 || std::signbit(n.value) ? 3 : 5;
    default:
      return 5;
  }
}

inline std::string wrap(const Node& n, int min_prec) {
  std::string s = to_string_impl(n);
  return precedence(n) < min_prec ? "(" + s + ")" : s;
}

inline const char* function_name(Op op) {
  switch (op) {
    case Op::sqrt:
      return "sqrt";
    case Op::sin:
      return "sin";
    case Op::cos:
      return "cos";
    case Op::exp:
      return "exp";
    case Op::log:
      return "log";
    default:
      return "?";
  }
}

inline std::string to_string_impl(const Node& n) {
  switch (n.op) {
    case Op::constant:
      return format_number(n.value);
    case Op::coordinate:
      return "x" + std::to_string(n.axis + 1);
    case Op::parameter:
      return n.name;
    case Op::neg:
      return "-" + wrap(*n.lhs, 4);
    case Op::pow: {
      std::string ex = format_number(n.value);
      if (n.value < 0.0 || n.value != std::floor(n.value)) ex = "(" + ex + ")";
      return wrap(*n.lhs, 5) + "^" + ex;
    }
    case Op::add:
      return wrap(*n.lhs, 1) + " + " + wrap(*n.rhs, 2);
    case Op::sub:
      return wrap(*n.lhs, 1) + " - " + wrap(*n.rhs, 2);
    case Op::mul:
      return wrap(*n.lhs, 2) + "*" + wrap(*n.rhs, 3);
    case Op::div:
      return wrap(*n.lhs, 2) + "/" + wrap(*n.rhs, 3);
    default:
      return std::string(function_name(n.op)) + "(" + to_string_impl(*n.lhs) + ")";
  }
}

}  // namespace detail

/// Text that `parse` maps back to an equivalent tree (coordinates as x1..xn).
inline std::string to_string(const Expression& e) { return detail::to_string_impl(*e.node()); }

// ---------------------------------------------------------------------------
// Parsing

/// Names that may appear in expression text besides x1..xn.
struct ParseContext {
  int dimension = 0;
  /// Display names for coordinates; aliases[i] refers to axis i. Empty entries are skipped.
  std::vector<std::string> aliases;
  std::set<std::string, std::less<>> parameters;
};

namespace detail {

class Parser {
 public:
  Parser(std::string_view text, const ParseContext& ctx) : text_(text), ctx_(ctx) {}

  Expression parse() {
    skip_ws();
    if (pos_ == text_.size()) throw ParseError("empty expression", pos_);
    Expression e = parse_sum();
    skip_ws();
    if (pos_ != text_.size()) throw ParseError(unexpected(), pos_);
    return e;
  }

 private:
  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  bool peek(char c) {
    skip_ws();
    return pos_ < text_.size() && text_[pos_] == c;
  }

  std::string unexpected() const {
    if (pos_ >= text_.size()) return "unexpected end of input";
    return std::string("unexpected '") + text_[pos_] + "'";
  }

  Expression parse_sum() {
    Expression lhs = parse_product();
    while (true) {
      if (peek('+')) {
        ++pos_;
        lhs = lhs + parse_product();
      } else if (peek('-')) {
        ++pos_;
        lhs = lhs - parse_product();
      } else {
        return lhs;
      }
    }
  }

  Expression parse_product() {
    Expression lhs = parse_unary();
    while (true) {
      if (peek('*')) {
        ++pos_;
        lhs = lhs * parse_unary();
      } else if (peek('/')) {
        ++pos_;
        lhs = lhs / parse_unary();
      } else {
        return lhs;
      }
    }
  }

  Expression parse_unary() {
    if (peek('-')) {
      ++pos_;
      return -parse_unary();
    }
    if (peek('+')) {
      ++pos_;
      return parse_unary();
    }
    return parse_power();
  }

  Expression parse_power() {
    Expression base = parse_primary();
    if (peek('^')) {
      ++pos_;
      skip_ws();
      std::size_t at = pos_;
      Expression ex = parse_unary();
      auto c = ex.constant_value();
      if (!c) throw ParseError("exponent must be a constant", at);
      return pow(base, *c);
    }
    return base;
  }

  Expression parse_primary() {
    skip_ws();
    if (pos_ >= text_.size()) throw ParseError("unexpected end of input", pos_);
    char c = text_[pos_];
    if (c == '(') {
      ++pos_;
      Expression e = parse_sum();
      if (!peek(')')) throw ParseError("expected ')'", pos_);
      ++pos_;
      return e;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') return parse_number();
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') return parse_identifier();
    throw ParseError(unexpected(), pos_);
  }

  Expression parse_number() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isdigit(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '.'))
      ++pos_;
    if (pos_ < text_.size() && (text_[pos_] == 'e' || text_[pos_] == 'E')) {
      std::size_t save = pos_++;
      if (pos_ < text_.size() && (text_[pos_] == '+' || text_[pos_] == '-')) ++pos_;
      if (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) {
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(text_.data() + start, text_.data() + pos_, v);
    if (ec != std::errc() || ptr != text_.data() + pos_) throw ParseError("malformed number", start);
    return Expression::constant(v);
  }

  Expression parse_identifier() {
    std::size_t start = pos_;
    while (pos_ < text_.size() && (std::isalnum(static_cast<unsigned char>(text_[pos_])) || text_[pos_] == '_'))
      ++pos_;
    std::string_view name = text_.substr(start, pos_ - start);

    if (peek('(')) {
      Op op;
      if (name == "sqrt") op = Op::sqrt;
      else if (name == "sin") op = Op::sin;
      else if (name == "cos") op = Op::cos;
      else if (name == "exp") op = Op::exp;
      else if (name == "log") op = Op::log;
      else throw ParseError("unknown function '" + std::string(name) + "'", start);
      ++pos_;
      std::vector<Expression> args;
      if (!peek(')')) {
        args.push_back(parse_sum());
        while (peek(',')) {
          ++pos_;
          args.push_back(parse_sum());
        }
      }
      if (!peek(')')) throw ParseError("expected ')'", pos_);
      ++pos_;
      if (args.size() != 1)
        throw ParseError("arity error: " + std::string(name) + " takes 1 argument, got " +
                             std::to_string(args.size()),
                         start);
      return make_unary(op, args[0]);
    }

    for (std::size_t i = 0; i < ctx_.aliases.size(); ++i)
      if (!ctx_.aliases[i].empty() && ctx_.aliases[i] == name) return Expression::coordinate(static_cast<int>(i));
    if (name.size() > 1 && name[0] == 'x') {
      int idx = 0;
      auto [ptr, ec] = std::from_chars(name.data() + 1, name.data() + name.size(), idx);
      if (ec == std::errc() && ptr == name.data() + name.size() && name[1] != '0') {
        if (idx >= 1 && idx <= ctx_.dimension) return Expression::coordinate(idx - 1);
        throw ParseError("coordinate '" + std::string(name) + "' outside 1.." + std::to_string(ctx_.dimension),
                         start);
      }
    }
    if (ctx_.parameters.count(name)) return Expression::parameter(std::string(name));
    if (name == "sqrt" || name == "sin" || name == "cos" || name == "exp" || name == "log")
      throw ParseError("arity error: " + std::string(name) + " requires an argument", start);
    throw ParseError("unknown identifier '" + std::string(name) + "'", start);
  }

  std::string_view text_;
  const ParseContext& ctx_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expression parse(std::string_view text, const ParseContext& ctx) {
  return detail::Parser(text, ctx).parse();
}

inline Expression parse(std::string_view text, int dimension, std::set<std::string, std::less<>> parameters = {}) {
  ParseContext ctx;
  ctx.dimension = dimension;
  ctx.parameters = std::move(parameters);
  return parse(text, ctx);
}

// ---------------------------------------------------------------------------

/// A scalar function on R^n. Parameters are bound into the expression at construction.
class ScalarField {
 public:
  ScalarField() = default;
  ScalarField(Expression e, int dimension, const Parameters& params = {})
      : expr_(ghm::bind(e, params)), dimension_(dimension) {}

  const Expression& expression() const { return expr_; }
  int dimension() const { return dimension_; }

  double operator()(std::span<const double> x) const { return evaluate(expr_, x); }

  Expression partial(int axis) const { return differentiate(expr_, axis); }

  std::vector<Expression> grad() const {
    std::vector<Expression> g;
    g.reserve(dimension_);
    for (int i = 0; i < dimension_; ++i) g.push_back(differentiate(expr_, i));
    return g;
  }

 private:
  Expression expr_;
  int dimension_ = 0;
};

}  // namespace ghm
