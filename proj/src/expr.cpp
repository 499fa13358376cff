#include "biconf/expr.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <charconv>
#include <numeric>
#include <optional>
#include <stdexcept>

namespace biconf {

namespace {

struct FunctionName {
  std::string_view name;
  ExprKind kind;
};

constexpr std::array<FunctionName, 6> kFunctions{{
    {"sin", ExprKind::Sin},
    {"cos", ExprKind::Cos},
    {"tan", ExprKind::Tan},
    {"exp", ExprKind::Exp},
    {"log", ExprKind::Log},
    {"sqrt", ExprKind::Sqrt},
}};

std::optional<ExprKind> function_kind(std::string_view name) {
  for (const auto& f : kFunctions) {
    if (f.name == name) return f.kind;
  }
  return std::nullopt;
}

std::string_view function_name(ExprKind kind) {
  for (const auto& f : kFunctions) {
    if (f.kind == kind) return f.name;
  }
  throw std::logic_error("not a function kind");
}

bool is_unary(ExprKind k) {
  return k == ExprKind::Neg || k == ExprKind::Sin || k == ExprKind::Cos || k == ExprKind::Tan ||
         k == ExprKind::Exp || k == ExprKind::Log || k == ExprKind::Sqrt;
}

bool is_binary(ExprKind k) {
  return k == ExprKind::Add || k == ExprKind::Sub || k == ExprKind::Mul || k == ExprKind::Div;
}

// Checked rational arithmetic; nullopt on overflow or division by zero.
std::optional<Rational> checked(long num, long den) {
  if (den == 0) return std::nullopt;
  if (den == std::numeric_limits<long>::min() || num == std::numeric_limits<long>::min()) return std::nullopt;
  return Rational::make(num, den);
}

std::optional<Rational> rational_op(ExprKind kind, const Rational& x, const Rational& y) {
  long a = 0;
  long b = 0;
  long c = 0;
  switch (kind) {
    case ExprKind::Add:
    case ExprKind::Sub: {
      long rhs_num = y.num;
      if (kind == ExprKind::Sub) {
        if (rhs_num == std::numeric_limits<long>::min()) return std::nullopt;
        rhs_num = -rhs_num;
      }
      if (__builtin_mul_overflow(x.num, y.den, &a) || __builtin_mul_overflow(rhs_num, x.den, &b) ||
          __builtin_add_overflow(a, b, &c) || __builtin_mul_overflow(x.den, y.den, &a)) {
        return std::nullopt;
      }
      return checked(c, a);
    }
    case ExprKind::Mul:
      if (__builtin_mul_overflow(x.num, y.num, &a) || __builtin_mul_overflow(x.den, y.den, &b)) return std::nullopt;
      return checked(a, b);
    case ExprKind::Div:
      if (y.num == 0) return std::nullopt;
      if (__builtin_mul_overflow(x.num, y.den, &a) || __builtin_mul_overflow(x.den, y.num, &b)) return std::nullopt;
      return checked(a, b);
    default:
      return std::nullopt;
  }
}

std::optional<Rational> rational_pow(const Rational& base, long exponent) {
  if (exponent < 0) {
    if (base.num == 0) return std::nullopt;
    auto p = rational_pow(base, -exponent);
    if (!p) return std::nullopt;
    return checked(p->den, p->num);
  }
  Rational r{1, 1};
  for (long i = 0; i < exponent; ++i) {
    auto next = rational_op(ExprKind::Mul, r, base);
    if (!next) return std::nullopt;
    r = *next;
  }
  return r;
}

// ---------------------------------------------------------------------------
// Parser

class Parser {
 public:
  Parser(std::string_view src, std::span<const std::string> chart) : src_(src), chart_(chart) {}

  Expr parse_all() {
    skip_ws();
    if (at_end()) fail("empty expression", pos_);
    Expr e = parse_expr();
    skip_ws();
    if (!at_end()) fail(std::string("unexpected '") + src_[pos_] + "'", pos_);
    return e;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, std::size_t at) const {
    int line = 1;
    int col = 1;
    for (std::size_t i = 0; i < at && i < src_.size(); ++i) {
      if (src_[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
    throw ParseError(msg, line, col);
  }

  bool at_end() const { return pos_ >= src_.size(); }
  char peek() const { return at_end() ? '\0' : src_[pos_]; }

  void skip_ws() {
    while (!at_end() && std::isspace(static_cast<unsigned char>(src_[pos_]))) ++pos_;
  }

  bool accept(char c) {
    skip_ws();
    if (peek() == c) {
      ++pos_;
      return true;
    }
    return false;
  }

  void expect(char c) {
    if (!accept(c)) {
      if (at_end()) fail(std::string("expected '") + c + "' before end of input", pos_);
      fail(std::string("expected '") + c + "'", pos_);
    }
  }

  Expr parse_expr() {
    Expr lhs = parse_term();
    for (;;) {
      skip_ws();
      if (accept('+')) {
        lhs = Expr::binary(ExprKind::Add, lhs, parse_term());
      } else if (accept('-')) {
        lhs = Expr::binary(ExprKind::Sub, lhs, parse_term());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_term() {
    Expr lhs = parse_unary();
    for (;;) {
      if (accept('*')) {
        lhs = Expr::binary(ExprKind::Mul, lhs, parse_unary());
      } else if (accept('/')) {
        lhs = Expr::binary(ExprKind::Div, lhs, parse_unary());
      } else {
        return lhs;
      }
    }
  }

  Expr parse_unary() {
    if (accept('-')) return Expr::unary(ExprKind::Neg, parse_unary());
    return parse_power();
  }

  Expr parse_power() {
    Expr base = parse_atom();
    if (accept('^')) return Expr::power(base, parse_exponent());
    return base;
  }

  struct NumberToken {
    std::string_view text;
    bool is_decimal = false;
  };

  std::optional<NumberToken> lex_number() {
    skip_ws();
    std::size_t start = pos_;
    bool decimal = false;
    while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    if (peek() == '.') {
      decimal = true;
      ++pos_;
      while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
    }
    if (pos_ == start || (decimal && pos_ == start + 1 && !std::isdigit(static_cast<unsigned char>(src_[start])))) {
      if (decimal && pos_ == start + 1) fail("malformed number", start);
      pos_ = start;
      return std::nullopt;
    }
    if (peek() == 'e' || peek() == 'E') {
      std::size_t save = pos_;
      ++pos_;
      if (peek() == '+' || peek() == '-') ++pos_;
      if (std::isdigit(static_cast<unsigned char>(peek()))) {
        decimal = true;
        while (std::isdigit(static_cast<unsigned char>(peek()))) ++pos_;
      } else {
        pos_ = save;
      }
    }
    return NumberToken{src_.substr(start, pos_ - start), decimal};
  }

  long parse_integer_text(std::string_view text, std::size_t at) const {
    long v = 0;
    auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), v);
    if (ec != std::errc() || ptr != text.data() + text.size()) fail("integer literal out of range", at);
    return v;
  }

  // Exact rational value of a decimal literal without exponent part.
  Rational decimal_text_to_rational(std::string_view text, std::size_t at) const {
    if (text.find_first_of("eE") != std::string_view::npos) {
      fail("exponent must be a rational literal", at);
    }
    auto dot = text.find('.');
    std::string digits(text.substr(0, dot));
    std::string frac(text.substr(dot + 1));
    long den = 1;
    for (std::size_t i = 0; i < frac.size(); ++i) {
      if (__builtin_mul_overflow(den, 10L, &den)) fail("exponent literal too long", at);
    }
    std::string all = digits + frac;
    if (all.empty()) all = "0";
    long num = parse_integer_text(all, at);
    return Rational::make(num, den);
  }

  Rational number_to_rational(const NumberToken& tok, std::size_t at) const {
    if (tok.is_decimal) return decimal_text_to_rational(tok.text, at);
    return Rational::make(parse_integer_text(tok.text, at));
  }

  Rational parse_exponent() {
    skip_ws();
    std::size_t at = pos_;
    if (accept('(')) {
      bool negative = accept('-');
      auto tok = lex_number();
      if (!tok) exponent_failure(at);
      Rational r = number_to_rational(*tok, at);
      if (accept('/')) {
        auto den_tok = lex_number();
        if (!den_tok || den_tok->is_decimal) exponent_failure(at);
        long den = parse_integer_text(den_tok->text, at);
        if (den == 0) fail("zero denominator in exponent", at);
        r = *rational_op(ExprKind::Div, r, Rational::make(den));
      }
      skip_ws();
      if (peek() != ')') exponent_failure(at);
      ++pos_;
      return negative ? Rational::make(-r.num, r.den) : r;
    }
    bool negative = accept('-');
    auto tok = lex_number();
    if (!tok) exponent_failure(at);
    Rational r = number_to_rational(*tok, at);
    return negative ? Rational::make(-r.num, r.den) : r;
  }

  [[noreturn]] void exponent_failure(std::size_t at) {
    // Distinguish symbolic exponents from merely unsupported literal forms.
    std::size_t depth = 0;
    std::size_t i = at;
    while (i < src_.size()) {
      char c = src_[i];
      if (c == '(') ++depth;
      if (c == ')') {
        if (depth == 0) break;
        --depth;
        if (depth == 0) break;
      }
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
        // "1e5" style literals are not identifiers.
        bool exponent_marker = (c == 'e' || c == 'E') && i > at && std::isdigit(static_cast<unsigned char>(src_[i - 1]));
        if (!exponent_marker) fail("non-constant exponent", at);
      }
      if (depth == 0 && i > at && (c == '+' || c == '*' || c == '/' || c == ')')) break;
      ++i;
    }
    fail("exponent must be a rational literal", at);
  }

  Expr parse_atom() {
    skip_ws();
    std::size_t at = pos_;
    if (at_end()) fail("unexpected end of input", pos_);
    char c = peek();
    if (c == '(') {
      ++pos_;
      Expr inner = parse_expr();
      expect(')');
      return inner;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) || c == '.') {
      auto tok = lex_number();
      if (!tok) fail("malformed number", at);
      if (tok->is_decimal) {
        double v = 0.0;
        auto [ptr, ec] = std::from_chars(tok->text.data(), tok->text.data() + tok->text.size(), v);
        if (ec != std::errc() || ptr != tok->text.data() + tok->text.size()) fail("malformed number", at);
        return Expr::decimal(v);
      }
      return Expr::rational(parse_integer_text(tok->text, at));
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      while (!at_end() && (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_')) ++pos_;
      std::string_view ident = src_.substr(at, pos_ - at);
      skip_ws();
      if (peek() == '(') {
        auto kind = function_kind(ident);
        if (!kind) fail("unknown function '" + std::string(ident) + "'", at);
        ++pos_;
        Expr arg = parse_expr();
        expect(')');
        return Expr::unary(*kind, arg);
      }
      auto it = std::find(chart_.begin(), chart_.end(), ident);
      if (it == chart_.end()) {
        if (function_kind(ident)) fail("function '" + std::string(ident) + "' needs an argument", at);
        fail("unknown identifier '" + std::string(ident) + "'", at);
      }
      return Expr::variable(static_cast<int>(it - chart_.begin()), std::string(ident));
    }
    fail(std::string("unexpected '") + c + "'", at);
  }

  std::string_view src_;
  std::span<const std::string> chart_;
  std::size_t pos_ = 0;
};

// ---------------------------------------------------------------------------
// Printer. Precedence levels: 1 add/sub, 2 mul/div, 3 unary minus, 4 pow, 5 atom.

std::string format_decimal(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  std::string s(buf.data(), ptr);
  if (s.find_first_of(".eEn") == std::string::npos) s += ".0";
  return s;
}

std::string format_rational(const Rational& r) {
  std::string s = std::to_string(r.num);
  if (r.den != 1) s += "/" + std::to_string(r.den);
  return s;
}

struct Printed {
  std::string text;
  int level;
};

Printed print_node(const Expr& e);

std::string wrap(const Printed& p, int min_level) {
  if (p.level >= min_level) return p.text;
  return "(" + p.text + ")";
}

Printed print_node(const Expr& e) {
  switch (e.kind()) {
    case ExprKind::Rational: {
      const auto& r = e.rational_value();
      if (r.den == 1 && r.num >= 0) return {std::to_string(r.num), 5};
      return {"(" + format_rational(r) + ")", 5};
    }
    case ExprKind::Decimal: {
      double v = e.decimal_value();
      if (std::signbit(v)) return {"(" + format_decimal(v) + ")", 5};
      return {format_decimal(v), 5};
    }
    case ExprKind::Variable:
      return {e.variable_name(), 5};
    case ExprKind::Neg:
      return {"-" + wrap(print_node(e.lhs()), 3), 3};
    case ExprKind::Sin:
    case ExprKind::Cos:
    case ExprKind::Tan:
    case ExprKind::Exp:
    case ExprKind::Log:
    case ExprKind::Sqrt:
      return {std::string(function_name(e.kind())) + "(" + print_node(e.lhs()).text + ")", 5};
    case ExprKind::Add:
      return {wrap(print_node(e.lhs()), 1) + " + " + wrap(print_node(e.rhs()), 2), 1};
    case ExprKind::Sub:
      return {wrap(print_node(e.lhs()), 1) + " - " + wrap(print_node(e.rhs()), 2), 1};
    case ExprKind::Mul:
      return {wrap(print_node(e.lhs()), 2) + "*" + wrap(print_node(e.rhs()), 3), 2};
    case ExprKind::Div:
      return {wrap(print_node(e.lhs()), 2) + "/" + wrap(print_node(e.rhs()), 3), 2};
    case ExprKind::Pow: {
      const auto& q = e.exponent();
      std::string exp = (q.den == 1 && q.num >= 0) ? std::to_string(q.num) : "(" + format_rational(q) + ")";
      return {wrap(print_node(e.lhs()), 5) + "^" + exp, 4};
    }
  }
  throw std::logic_error("unhandled expression kind");
}

}  // namespace

Rational Rational::make(long num, long den) {
  if (den == 0) throw std::domain_error("rational with zero denominator");
  if (den < 0) {
    num = -num;
    den = -den;
  }
  long g = std::gcd(num, den);
  if (g > 1) {
    num /= g;
    den /= g;
  }
  return Rational{num, den};
}

Expr::Expr() {
  static const auto zero = std::make_shared<const Node>();
  node_ = zero;
}

Expr Expr::rational(Rational value) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Rational;
  n->rational = value;
  return Expr(std::move(n));
}

Expr Expr::decimal(double value) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Decimal;
  n->decimal = value;
  return Expr(std::move(n));
}

Expr Expr::variable(int index, std::string name) {
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Variable;
  n->var = index;
  n->name = std::move(name);
  return Expr(std::move(n));
}

Expr Expr::unary(ExprKind kind, Expr operand) {
  if (!is_unary(kind)) throw std::logic_error("Expr::unary with non-unary kind");
  if (kind == ExprKind::Neg) {
    if (operand.kind() == ExprKind::Rational) {
      const auto& r = operand.rational_value();
      if (r.num != std::numeric_limits<long>::min()) return rational(Rational{-r.num, r.den});
    }
    if (operand.kind() == ExprKind::Decimal) return decimal(-operand.decimal_value());
  }
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = std::move(operand);
  return Expr(std::move(n));
}

Expr Expr::binary(ExprKind kind, Expr lhs, Expr rhs) {
  if (!is_binary(kind)) throw std::logic_error("Expr::binary with non-binary kind");
  if (lhs.kind() == ExprKind::Rational && rhs.kind() == ExprKind::Rational) {
    if (auto folded = rational_op(kind, lhs.rational_value(), rhs.rational_value())) return rational(*folded);
  }
  auto n = std::make_shared<Node>();
  n->kind = kind;
  n->a = std::move(lhs);
  n->b = std::move(rhs);
  return Expr(std::move(n));
}

Expr Expr::power(Expr base, Rational exponent) {
  if (exponent.den <= 0) throw std::logic_error("Expr::power: denominator must be positive");
  if (base.kind() == ExprKind::Rational && exponent.is_integer()) {
    if (auto folded = rational_pow(base.rational_value(), exponent.num)) return rational(*folded);
  }
  auto n = std::make_shared<Node>();
  n->kind = ExprKind::Pow;
  n->a = std::move(base);
  n->exponent = exponent;
  return Expr(std::move(n));
}

ExprKind Expr::kind() const { return node_->kind; }
const Rational& Expr::rational_value() const { return node_->rational; }
double Expr::decimal_value() const { return node_->decimal; }
int Expr::variable_index() const { return node_->var; }
const std::string& Expr::variable_name() const { return node_->name; }
const Rational& Expr::exponent() const { return node_->exponent; }
const Expr& Expr::lhs() const { return node_->a; }
const Expr& Expr::rhs() const { return node_->b; }

bool Expr::structurally_equal(const Expr& other) const {
  if (node_ == other.node_) return true;
  const Node& x = *node_;
  const Node& y = *other.node_;
  if (x.kind != y.kind) return false;
  switch (x.kind) {
    case ExprKind::Rational:
      return x.rational == y.rational;
    case ExprKind::Decimal:
      return x.decimal == y.decimal && std::signbit(x.decimal) == std::signbit(y.decimal);
    case ExprKind::Variable:
      return x.var == y.var && x.name == y.name;
    case ExprKind::Pow:
      return x.exponent == y.exponent && x.a.structurally_equal(y.a);
    default:
      break;
  }
  if (is_unary(x.kind)) return x.a.structurally_equal(y.a);
  return x.a.structurally_equal(y.a) && x.b.structurally_equal(y.b);
}

std::size_t Expr::node_count() const {
  const Node& n = *node_;
  if (is_unary(n.kind) || n.kind == ExprKind::Pow) return 1 + n.a.node_count();
  if (is_binary(n.kind)) return 1 + n.a.node_count() + n.b.node_count();
  return 1;
}

int Expr::depth() const {
  const Node& n = *node_;
  if (is_unary(n.kind) || n.kind == ExprKind::Pow) return 1 + n.a.depth();
  if (is_binary(n.kind)) return 1 + std::max(n.a.depth(), n.b.depth());
  return 1;
}

bool is_function_name(std::string_view name) { return function_kind(name).has_value(); }

Expr parse(std::string_view source, std::span<const std::string> chart) {
  return Parser(source, chart).parse_all();
}

std::string print(const Expr& e) { return print_node(e).text; }

}  // namespace biconf
