#pragma once

// Scalar expressions over the coordinates of a chart.
//
// Grammar (whitespace-insensitive):
//   expr     := term (("+" | "-") term)*
//   term     := unary (("*" | "/") unary)*
//   unary    := "-" unary | power
//   power    := atom ("^" exponent)?
//   atom     := number | ident | ident "(" expr ")" | "(" expr ")"
//   exponent := "-"? number | "(" "-"? number ("/" integer)? ")"
//
// Unary minus binds looser than "^", so "-r^2" is -(r^2). Exponents are
// rational literals; a "/" inside an exponent must be parenthesized.
// Integer literals are exact rationals, literals with "." or an exponent
// part are decimals. The only simplification is folding of operations on
// rational constants.

#include "biconf/error.hpp"
#include "biconf/scalar_ops.hpp"

#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace biconf {

struct Rational {
  long num = 0;
  long den = 1;

  /// Reduced form with positive denominator; throws std::domain_error on den == 0.
  static Rational make(long num, long den = 1);
  double to_double() const { return static_cast<double>(num) / static_cast<double>(den); }
  bool is_integer() const { return den == 1; }
  friend bool operator==(const Rational&, const Rational&) = default;
};

enum class ExprKind : std::uint8_t {
  Rational,
  Decimal,
  Variable,
  Neg,
  Sin,
  Cos,
  Tan,
  Exp,
  Log,
  Sqrt,
  Add,
  Sub,
  Mul,
  Div,
  Pow,
};

/// Immutable expression tree. Copies share nodes.
class Expr {
 public:
  Expr();  // the rational constant 0

  static Expr rational(Rational value);
  static Expr rational(long num, long den = 1) { return rational(Rational::make(num, den)); }
  static Expr decimal(double value);
  static Expr variable(int index, std::string name);
  /// Neg or a named function. Folds negation of constants.
  static Expr unary(ExprKind kind, Expr operand);
  /// Add/Sub/Mul/Div. Folds operations on two rational constants.
  static Expr binary(ExprKind kind, Expr lhs, Expr rhs);
  static Expr power(Expr base, Rational exponent);

  ExprKind kind() const;
  const Rational& rational_value() const;
  double decimal_value() const;
  int variable_index() const;
  const std::string& variable_name() const;
  const Rational& exponent() const;
  const Expr& lhs() const;  // operand of unary ops and the base of Pow
  const Expr& rhs() const;

  bool is_constant() const { return kind() == ExprKind::Rational || kind() == ExprKind::Decimal; }
  bool structurally_equal(const Expr& other) const;
  friend bool operator==(const Expr& a, const Expr& b) { return a.structurally_equal(b); }

  /// Number of nodes; used to bound generated trees in tests.
  std::size_t node_count() const;
  int depth() const;

  /// Value under the assignment vars[i] = value of coordinate i.
  template <class S>
  S evaluate(std::span<const S> vars) const;

 private:
  struct Node;
  explicit Expr(std::shared_ptr<const Node> node) : node_(std::move(node)) {}
  std::shared_ptr<const Node> node_;
};

struct Expr::Node {
  ExprKind kind = ExprKind::Rational;
  Rational rational;
  double decimal = 0.0;
  int var = -1;
  std::string name;
  Rational exponent;
  Expr a{nullptr};
  Expr b{nullptr};
};

/// Names usable as function calls.
bool is_function_name(std::string_view name);

/// Parse `source` with `chart` as the declared coordinates (by position).
Expr parse(std::string_view source, std::span<const std::string> chart);

/// Canonical text; parse(print(e)) is structurally equal to e.
std::string print(const Expr& e);

template <class S>
S Expr::evaluate(std::span<const S> vars) const {
  const Node& n = *node_;
  switch (n.kind) {
    case ExprKind::Rational:
      return S(n.rational.to_double());
    case ExprKind::Decimal:
      return S(n.decimal);
    case ExprKind::Variable:
      return vars[static_cast<std::size_t>(n.var)];
    case ExprKind::Neg:
      return -n.a.evaluate(vars);
    case ExprKind::Sin:
      return ops::sin(n.a.evaluate(vars));
    case ExprKind::Cos:
      return ops::cos(n.a.evaluate(vars));
    case ExprKind::Tan:
      return ops::tan(n.a.evaluate(vars));
    case ExprKind::Exp:
      return ops::exp(n.a.evaluate(vars));
    case ExprKind::Log:
      return ops::log(n.a.evaluate(vars));
    case ExprKind::Sqrt:
      return ops::sqrt(n.a.evaluate(vars));
    case ExprKind::Add:
      return n.a.evaluate(vars) + n.b.evaluate(vars);
    case ExprKind::Sub:
      return n.a.evaluate(vars) - n.b.evaluate(vars);
    case ExprKind::Mul:
      return n.a.evaluate(vars) * n.b.evaluate(vars);
    case ExprKind::Div:
      return ops::divide(n.a.evaluate(vars), n.b.evaluate(vars));
    case ExprKind::Pow:
      return ops::pow_rational(n.a.evaluate(vars), n.exponent.num, n.exponent.den);
  }
  return S(0.0);
}

}  // namespace biconf
