#pragma once

// Univariate scalar functions of t with exact derivative jets.
//
// Expressions are parsed into an immutable tree and evaluated by forward propagation of
// derivative jets (value and derivatives up to a fixed order). No symbolic simplification
// is performed; every node applies the product, quotient and chain rules exactly.
//
// Grammar (tightest binding first):
//   primary  := number | 't' | func '(' expr ')' | '(' expr ')'
//   unary    := '-' unary | primary
//   power    := unary [ '^' exponent ]          exponent is a rational literal
//   product  := power { ('*' | '/') power }
//   expr     := product { ('+' | '-') product }
//   exponent := ['-'] number | '(' ['-'] number [ '/' number ] ')'
//   func     := exp | ln | sqrt

#include <array>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <numeric>
#include <optional>
#include <string>
#include <string_view>
#include <utility>

#include "tbcurv/errors.hpp"

namespace tbcurv {

/// Value and derivatives f, f', ..., f^(Order) of a function at a point.
template <int Order>
class Jet {
  static_assert(Order >= 0 && Order <= 3, "jets are implemented up to third order");

 public:
  static constexpr int order = Order;
  std::array<double, Order + 1> d{};

  constexpr Jet() = default;
  static constexpr Jet constant(double c) {
    Jet j;
    j.d[0] = c;
    return j;
  }
  /// The identity function evaluated at t.
  static constexpr Jet variable(double t) {
    Jet j;
    j.d[0] = t;
    if constexpr (Order >= 1) j.d[1] = 1.0;
    return j;
  }
  static Jet from(std::initializer_list<double> values) {
    Jet j;
    j.d.fill(std::numeric_limits<double>::quiet_NaN());
    int k = 0;
    for (double v : values) {
      if (k > Order) break;
      j.d[k++] = v;
    }
    return j;
  }

  double value() const noexcept { return d[0]; }
  double d1() const noexcept requires(Order >= 1) { return d[1]; }
  double d2() const noexcept requires(Order >= 2) { return d[2]; }
  double d3() const noexcept requires(Order >= 3) { return d[3]; }

  /// Drop the highest derivatives.
  template <int Lower>
  Jet<Lower> truncate() const requires(Lower <= Order) {
    Jet<Lower> r;
    for (int k = 0; k <= Lower; ++k) r.d[k] = d[k];
    return r;
  }

  Jet operator-() const {
    Jet r;
    for (int k = 0; k <= Order; ++k) r.d[k] = -d[k];
    return r;
  }
  friend Jet operator+(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k <= Order; ++k) r.d[k] = a.d[k] + b.d[k];
    return r;
  }
  friend Jet operator-(const Jet& a, const Jet& b) {
    Jet r;
    for (int k = 0; k <= Order; ++k) r.d[k] = a.d[k] - b.d[k];
    return r;
  }
  // Leibniz rule.
  friend Jet operator*(const Jet& a, const Jet& b) {
    static constexpr int binom[4][4] = {{1, 0, 0, 0}, {1, 1, 0, 0}, {1, 2, 1, 0}, {1, 3, 3, 1}};
    Jet r;
    for (int k = 0; k <= Order; ++k) {
      double s = 0.0;
      for (int i = 0; i <= k; ++i) s += binom[k][i] * a.d[i] * b.d[k - i];
      r.d[k] = s;
    }
    return r;
  }
  friend Jet operator*(double s, const Jet& a) {
    Jet r;
    for (int k = 0; k <= Order; ++k) r.d[k] = s * a.d[k];
    return r;
  }
  friend Jet operator*(const Jet& a, double s) { return s * a; }
  friend Jet operator+(double s, const Jet& a) { return Jet::constant(s) + a; }
  friend Jet operator+(const Jet& a, double s) { return a + Jet::constant(s); }
  friend Jet operator-(double s, const Jet& a) { return Jet::constant(s) - a; }
  friend Jet operator-(const Jet& a, double s) { return a - Jet::constant(s); }
};

using Jet2 = Jet<2>;
using Jet3 = Jet<3>;

/// phi(f) given the derivatives phi^(k) at f.value(), via Faa di Bruno up to third order.
template <int Order>
Jet<Order> compose(const Jet<Order>& f, const std::array<double, Order + 1>& phi) {
  Jet<Order> r;
  r.d[0] = phi[0];
  if constexpr (Order >= 1) r.d[1] = phi[1] * f.d[1];
  if constexpr (Order >= 2) r.d[2] = phi[2] * f.d[1] * f.d[1] + phi[1] * f.d[2];
  if constexpr (Order >= 3)
    r.d[3] = phi[3] * f.d[1] * f.d[1] * f.d[1] + 3.0 * phi[2] * f.d[1] * f.d[2] + phi[1] * f.d[3];
  return r;
}

template <int Order>
Jet<Order> reciprocal(const Jet<Order>& f) {
  const double x = f.d[0];
  std::array<double, Order + 1> phi{};
  double inv = 1.0 / x;
  double p = inv;
  double fact = 1.0;
  for (int k = 0; k <= Order; ++k) {
    phi[k] = ((k % 2) ? -1.0 : 1.0) * fact * p;
    p *= inv;
    fact *= (k + 1);
  }
  return compose(f, phi);
}

template <int Order>
Jet<Order> operator/(const Jet<Order>& a, const Jet<Order>& b) {
  return a * reciprocal(b);
}

template <int Order>
Jet<Order> exp(const Jet<Order>& f) {
  std::array<double, Order + 1> phi;
  phi.fill(std::exp(f.d[0]));
  return compose(f, phi);
}

template <int Order>
Jet<Order> log(const Jet<Order>& f) {
  const double x = f.d[0];
  std::array<double, Order + 1> phi{};
  phi[0] = std::log(x);
  double p = 1.0 / x;
  double fact = 1.0;
  for (int k = 1; k <= Order; ++k) {
    phi[k] = ((k % 2) ? 1.0 : -1.0) * fact * p;
    p /= x;
    fact *= k;
  }
  return compose(f, phi);
}

/// Exact rational number with positive denominator, used for power exponents.
struct Rational {
  std::int64_t num = 0;
  std::int64_t den = 1;

  static Rational make(std::int64_t n, std::int64_t d) {
    if (d < 0) n = -n, d = -d;
    const std::int64_t g = std::gcd(n < 0 ? -n : n, d);
    return g > 1 ? Rational{n / g, d / g} : Rational{n, d};
  }
  bool is_integer() const noexcept { return den == 1; }
  double value() const noexcept { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Rational&, const Rational&) = default;
};

/// f^p for rational p. Integer exponents accept any base (except 0 with p < 0).
template <int Order>
Jet<Order> pow(const Jet<Order>& f, Rational p) {
  const double x = f.d[0];
  const double pv = p.value();
  std::array<double, Order + 1> phi{};
  double falling = 1.0;  // p (p-1) ... (p-k+1)
  for (int k = 0; k <= Order; ++k) {
    if (falling == 0.0) {
      phi[k] = 0.0;
    } else if (p.is_integer()) {
      const std::int64_t e = p.num - k;
      phi[k] = falling * std::pow(x, static_cast<double>(e));
    } else {
      phi[k] = falling * std::pow(x, pv - k);
    }
    falling *= (pv - k);
  }
  return compose(f, phi);
}

template <int Order>
Jet<Order> sqrt(const Jet<Order>& f) {
  return pow(f, Rational{1, 2});
}

// ---------------------------------------------------------------------------------------
// Expression tree

enum class ExprOp { Constant, Variable, Add, Sub, Mul, Div, Neg, Pow, Exp, Ln, Sqrt };

struct ExprNode {
  ExprOp op = ExprOp::Constant;
  double value = 0.0;     // Constant
  Rational exponent{};    // Pow
  std::shared_ptr<const ExprNode> lhs, rhs;  // rhs used by binary ops only
};

/// Immutable expression in the single variable t.
class Expr {
 public:
  Expr() = default;
  explicit Expr(std::shared_ptr<const ExprNode> root) : root_(std::move(root)) {}

  static Expr constant(double c) { return leaf(ExprOp::Constant, c); }
  static Expr variable() { return leaf(ExprOp::Variable, 0.0); }
  static Expr binary(ExprOp op, const Expr& a, const Expr& b) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = a.root_;
    n->rhs = b.root_;
    return Expr(std::move(n));
  }
  static Expr unary(ExprOp op, const Expr& a) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->lhs = a.root_;
    return Expr(std::move(n));
  }
  static Expr power(const Expr& base, Rational p) {
    auto n = std::make_shared<ExprNode>();
    n->op = ExprOp::Pow;
    n->exponent = p;
    n->lhs = base.root_;
    return Expr(std::move(n));
  }

  const ExprNode* root() const noexcept { return root_.get(); }
  bool empty() const noexcept { return !root_; }

  friend bool operator==(const Expr& a, const Expr& b) { return same(a.root(), b.root()); }

 private:
  static Expr leaf(ExprOp op, double v) {
    auto n = std::make_shared<ExprNode>();
    n->op = op;
    n->value = v;
    return Expr(std::move(n));
  }
  static bool same(const ExprNode* a, const ExprNode* b) {
    if (a == b) return true;
    if (!a || !b || a->op != b->op) return false;
    switch (a->op) {
      case ExprOp::Constant: return a->value == b->value;
      case ExprOp::Variable: return true;
      case ExprOp::Pow: return a->exponent == b->exponent && same(a->lhs.get(), b->lhs.get());
      default: return same(a->lhs.get(), b->lhs.get()) && same(a->rhs.get(), b->rhs.get());
    }
  }

  std::shared_ptr<const ExprNode> root_;
};

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_double(double x) {
  std::array<char, 64> buf{};
  auto res = std::to_chars(buf.data(), buf.data() + buf.size(), x);
  return std::string(buf.data(), res.ptr);
}

namespace detail {

inline bool is_atomic(const ExprNode* n) {
  switch (n->op) {
    case ExprOp::Constant:
    case ExprOp::Variable:
    case ExprOp::Exp:
    case ExprOp::Ln:
    case ExprOp::Sqrt: return true;
    default: return false;
  }
}

inline void print_node(const ExprNode* n, std::string& out) {
  auto bin = [&](const char* sym) {
    out += '(';
    print_node(n->lhs.get(), out);
    out += sym;
    print_node(n->rhs.get(), out);
    out += ')';
  };
  auto call = [&](const char* name) {
    out += name;
    out += '(';
    print_node(n->lhs.get(), out);
    out += ')';
  };
  switch (n->op) {
    case ExprOp::Constant:
      if (std::signbit(n->value))
        out += '(' + format_double(n->value) + ')';
      else
        out += format_double(n->value);
      break;
    case ExprOp::Variable: out += 't'; break;
    case ExprOp::Add: bin(" + "); break;
    case ExprOp::Sub: bin(" - "); break;
    case ExprOp::Mul: bin(" * "); break;
    case ExprOp::Div: bin(" / "); break;
    case ExprOp::Neg: {
      // "-2" reads back as a constant and "-t^2" as (-t)^2, so both operands keep parentheses.
      const bool wrap = n->lhs->op == ExprOp::Constant || n->lhs->op == ExprOp::Pow;
      out += "(-";
      if (wrap) out += '(';
      print_node(n->lhs.get(), out);
      if (wrap) out += ')';
      out += ')';
      break;
    }
    case ExprOp::Pow: {
      const bool wrap = !is_atomic(n->lhs.get());
      if (wrap) out += '(';
      print_node(n->lhs.get(), out);
      if (wrap) out += ')';
      out += '^';
      if (n->exponent.is_integer() && n->exponent.num >= 0) {
        out += std::to_string(n->exponent.num);
      } else {
        out += '(' + std::to_string(n->exponent.num);
        if (!n->exponent.is_integer()) out += '/' + std::to_string(n->exponent.den);
        out += ')';
      }
      break;
    }
    case ExprOp::Exp: call("exp"); break;
    case ExprOp::Ln: call("ln"); break;
    case ExprOp::Sqrt: call("sqrt"); break;
  }
}

}  // namespace detail

/// Canonical, fully parenthesized text. parse(print(e)) reproduces e node for node.
inline std::string print(const Expr& e) {
  std::string out;
  if (!e.empty()) detail::print_node(e.root(), out);
  return out;
}

namespace detail {

class Parser {
 public:
  explicit Parser(std::string_view src) : src_(src) {}

  Expr parse_all() {
    skip_ws();
    if (pos_ == src_.size()) throw SyntaxError("empty expression", pos_);
    Expr e = expr();
    skip_ws();
    if (pos_ != src_.size()) throw SyntaxError(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return e;
  }

 private:
  Expr expr() {
    Expr lhs = product();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        lhs = Expr::binary(ExprOp::Add, lhs, product());
      } else if (accept('-')) {
        lhs = Expr::binary(ExprOp::Sub, lhs, product());
      } else {
        return lhs;
      }
    }
  }

  Expr product() {
    Expr lhs = power();
    for (;;) {
      skip_ws();
      if (accept('*')) {
        lhs = Expr::binary(ExprOp::Mul, lhs, power());
      } else if (accept('/')) {
        lhs = Expr::binary(ExprOp::Div, lhs, power());
      } else {
        return lhs;
      }
    }
  }

  Expr power() {
    Expr base = unary();
    skip_ws();
    if (accept('^')) return Expr::power(base, exponent());
    return base;
  }

  Expr unary() {
    skip_ws();
    if (accept('-')) {
      skip_ws();
      if (pos_ < src_.size() && (is_digit(src_[pos_]) || src_[pos_] == '.')) return Expr::constant(-number());
      return Expr::unary(ExprOp::Neg, unary());
    }
    return primary();
  }

  Expr primary() {
    skip_ws();
    if (pos_ == src_.size()) throw SyntaxError("unexpected end of input", pos_);
    const char c = src_[pos_];
    if (c == '(') {
      ++pos_;
      Expr inner = expr();
      expect(')');
      return inner;
    }
    if (is_digit(c) || c == '.') return Expr::constant(number());
    if (is_alpha(c)) {
      const std::size_t start = pos_;
      while (pos_ < src_.size() && (is_alpha(src_[pos_]) || is_digit(src_[pos_]) || src_[pos_] == '_')) ++pos_;
      const std::string_view name = src_.substr(start, pos_ - start);
      if (name == "t") return Expr::variable();
      ExprOp op;
      if (name == "exp") {
        op = ExprOp::Exp;
      } else if (name == "ln") {
        op = ExprOp::Ln;
      } else if (name == "sqrt") {
        op = ExprOp::Sqrt;
      } else {
        throw UnknownIdentifier(std::string(name), start);
      }
      skip_ws();
      expect('(');
      Expr arg = expr();
      expect(')');
      return Expr::unary(op, arg);
    }
    throw SyntaxError(std::string("unexpected '") + c + "'", pos_);
  }

  Rational exponent() {
    skip_ws();
    if (accept('(')) {
      skip_ws();
      const bool neg = accept('-');
      Rational r = rational_literal();
      skip_ws();
      if (accept('/')) {
        skip_ws();
        const std::size_t at = pos_;
        Rational d = rational_literal();
        if (d.num == 0) throw SyntaxError("zero denominator in exponent", at);
        r = Rational::make(r.num * d.den, r.den * d.num);
      }
      expect(')');
      return neg ? Rational{-r.num, r.den} : r;
    }
    const bool neg = accept('-');
    skip_ws();
    Rational r = rational_literal();
    return neg ? Rational{-r.num, r.den} : r;
  }

  // Decimal literal converted exactly to a fraction ("0.25" -> 1/4).
  Rational rational_literal() {
    const std::size_t start = pos_;
    std::int64_t num = 0, den = 1;
    bool any = false;
    constexpr std::int64_t limit = std::int64_t{1} << 52;
    while (pos_ < src_.size() && is_digit(src_[pos_])) {
      num = num * 10 + (src_[pos_++] - '0');
      any = true;
      if (num > limit) throw SyntaxError("exponent literal too long", start);
    }
    if (accept('.')) {
      while (pos_ < src_.size() && is_digit(src_[pos_])) {
        num = num * 10 + (src_[pos_++] - '0');
        den *= 10;
        any = true;
        if (num > limit || den > limit) throw SyntaxError("exponent literal too long", start);
      }
    }
    if (!any) throw SyntaxError("expected rational exponent", start);
    return Rational::make(num, den);
  }

  double number() {
    const std::size_t start = pos_;
    while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    if (pos_ < src_.size() && src_[pos_] == '.') {
      ++pos_;
      while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
    }
    if (pos_ < src_.size() && (src_[pos_] == 'e' || src_[pos_] == 'E')) {
      std::size_t look = pos_ + 1;
      if (look < src_.size() && (src_[look] == '+' || src_[look] == '-')) ++look;
      if (look < src_.size() && is_digit(src_[look])) {
        pos_ = look;
        while (pos_ < src_.size() && is_digit(src_[pos_])) ++pos_;
      }
    }
    double v = 0.0;
    auto res = std::from_chars(src_.data() + start, src_.data() + pos_, v);
    if (res.ec != std::errc() || res.ptr != src_.data() + pos_) throw SyntaxError("malformed number", start);
    return v;
  }

  void skip_ws() {
    while (pos_ < src_.size() && (src_[pos_] == ' ' || src_[pos_] == '\t' || src_[pos_] == '\n' || src_[pos_] == '\r'))
      ++pos_;
  }
  bool accept(char c) {
    if (pos_ < src_.size() && src_[pos_] == c) {
      ++pos_;
      return true;
    }
    return false;
  }
  void expect(char c) {
    skip_ws();
    if (accept(c)) return;
    if (pos_ == src_.size()) throw SyntaxError(std::string("expected '") + c + "' but input ended", pos_);
    throw SyntaxError(std::string("expected '") + c + "'", pos_);
  }
  static bool is_digit(char c) { return c >= '0' && c <= '9'; }
  static bool is_alpha(char c) { return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z'); }

  std::string_view src_;
  std::size_t pos_ = 0;
};

}  // namespace detail

inline Expr parse(std::string_view src) { return detail::Parser(src).parse_all(); }

namespace detail {

template <int Order>
Jet<Order> eval_node(const ExprNode* n, double t) {
  using J = Jet<Order>;
  auto fail = [&](const std::string& why) -> DomainError {
    std::string where;
    print_node(n, where);
    return DomainError(why + " in '" + where + "' at t=" + format_double(t));
  };
  switch (n->op) {
    case ExprOp::Constant: return J::constant(n->value);
    case ExprOp::Variable: return J::variable(t);
    case ExprOp::Add: return eval_node<Order>(n->lhs.get(), t) + eval_node<Order>(n->rhs.get(), t);
    case ExprOp::Sub: return eval_node<Order>(n->lhs.get(), t) - eval_node<Order>(n->rhs.get(), t);
    case ExprOp::Mul: return eval_node<Order>(n->lhs.get(), t) * eval_node<Order>(n->rhs.get(), t);
    case ExprOp::Div: {
      const J den = eval_node<Order>(n->rhs.get(), t);
      if (den.value() == 0.0) throw fail("division by zero");
      return eval_node<Order>(n->lhs.get(), t) / den;
    }
    case ExprOp::Neg: return -eval_node<Order>(n->lhs.get(), t);
    case ExprOp::Pow: {
      const J base = eval_node<Order>(n->lhs.get(), t);
      if (n->exponent.is_integer()) {
        if (base.value() == 0.0 && n->exponent.num < 0) throw fail("zero raised to a negative power");
      } else if (!(base.value() > 0.0)) {
        throw fail("non-integer power of a nonpositive base");
      }
      return pow(base, n->exponent);
    }
    case ExprOp::Exp: return exp(eval_node<Order>(n->lhs.get(), t));
    case ExprOp::Ln: {
      const J arg = eval_node<Order>(n->lhs.get(), t);
      if (!(arg.value() > 0.0)) throw fail("ln of a nonpositive value");
      return log(arg);
    }
    case ExprOp::Sqrt: {
      const J arg = eval_node<Order>(n->lhs.get(), t);
      if (!(arg.value() > 0.0)) throw fail("sqrt of a nonpositive value");
      return sqrt(arg);
    }
  }
  throw fail("corrupt expression node");
}

}  // namespace detail

/// (f, f', ..., f^(Order)) at t. Throws DomainError when t is outside the domain of some node.
template <int Order = 2>
Jet<Order> eval_jet(const Expr& f, double t) {
  if (f.empty()) throw DomainError("empty expression");
  return detail::eval_node<Order>(f.root(), t);
}

/// A univariate function with derivative jets, backed either by an expression or by a
/// user-supplied evaluator. Derivatives above `exact_order()` are NaN.
class ScalarFunction {
 public:
  using Evaluator = std::function<Jet3(double)>;

  ScalarFunction() : ScalarFunction(Expr::constant(0.0)) {}
  explicit ScalarFunction(Expr e)
      : label_(print(e)), expr_(e), eval_([e](double t) { return eval_jet<3>(e, t); }), exact_order_(3) {}
  ScalarFunction(std::string label, Evaluator fn, int exact_order)
      : label_(std::move(label)), eval_(std::move(fn)), exact_order_(exact_order) {}

  static ScalarFunction parse(std::string_view src) { return ScalarFunction(tbcurv::parse(src)); }
  static ScalarFunction constant(double c) { return ScalarFunction(Expr::constant(c)); }

  Jet3 jet3(double t) const { return eval_(t); }
  Jet2 jet(double t) const { return eval_(t).truncate<2>(); }
  double operator()(double t) const { return eval_(t).value(); }

  int exact_order() const noexcept { return exact_order_; }
  const std::string& label() const noexcept { return label_; }
  const std::optional<Expr>& expr() const noexcept { return expr_; }

 private:
  std::string label_;
  std::optional<Expr> expr_;
  Evaluator eval_;
  int exact_order_ = 3;
};

}  // namespace tbcurv
