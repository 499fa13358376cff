#pragma once

// Truncated multivariate Taylor jets.
//
// A Jet of order K in n variables stores the Taylor coefficients
// c_alpha = (d^alpha f)(x0) / alpha! for every multi-index |alpha| <= K.
// Coefficients are laid out in graded lexicographic order: by total degree
// first, then lexicographically descending exponent tuples inside a degree.
// With that order the layout of order K-1 is a prefix of the layout of
// order K, so truncation is a resize.
//
// A Jet without a layout is an exact constant. It combines with any other
// jet and never lowers the order of a result. Combining two jets of
// different orders yields the lower order (standard jet truncation);
// combining jets over different variable counts is a logic error.

#include <boost/container/small_vector.hpp>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

namespace biconf {

inline constexpr int kMaxJetVars = 8;
inline constexpr int kMaxJetOrder = 3;

class JetLayout {
 public:
  struct Product {
    std::uint16_t lhs;
    std::uint16_t rhs;
    std::uint16_t out;
  };
  struct DerivativeEntry {
    std::uint16_t source;
    double factor;
  };

  /// Shared, immutable layout for (nvars, order). Thread-safe.
  static const JetLayout& get(int nvars, int order);

  int nvars() const noexcept { return nvars_; }
  int order() const noexcept { return order_; }
  std::size_t size() const noexcept { return degrees_.size(); }

  /// Exponent tuple of coefficient `idx`.
  std::span<const std::uint8_t> monomial(std::size_t idx) const {
    return {exponents_.data() + idx * static_cast<std::size_t>(nvars_), static_cast<std::size_t>(nvars_)};
  }
  int degree(std::size_t idx) const { return degrees_[idx]; }

  /// Coefficient index of a multi-index; throws OrderError when |alpha| > order.
  std::size_t index_of(std::span<const int> alpha) const;

  /// Pairs (lhs, rhs) whose monomials multiply to `out`, sorted by `out`.
  std::span<const Product> products() const noexcept { return products_; }

  /// For each coefficient t of the order-1 layout: where d/dx_var reads from.
  std::span<const DerivativeEntry> derivative_map(int var) const;

 private:
  JetLayout(int nvars, int order);

  int nvars_;
  int order_;
  std::vector<std::uint8_t> exponents_;
  std::vector<int> degrees_;
  std::vector<std::int16_t> code_to_index_;
  std::vector<Product> products_;
  std::vector<std::vector<DerivativeEntry>> derivatives_;
};

class Jet {
 public:
  using Storage = boost::container::small_vector<double, 36>;

  /// Exact constant.
  Jet(double value = 0.0) : coeffs_{value} {}  // NOLINT(google-explicit-constructor)

  /// Zero jet with the given layout.
  explicit Jet(const JetLayout& layout) : layout_(&layout), coeffs_(layout.size(), 0.0) {}

  /// Constant `value` carried in an explicit layout.
  static Jet constant(const JetLayout& layout, double value);

  /// The coordinate function x^var at `point`, truncated at `order`.
  static Jet seed(std::span<const double> point, int var, int order);

  bool is_exact_constant() const noexcept { return layout_ == nullptr; }
  const JetLayout* layout() const noexcept { return layout_; }
  /// Truncation order; exact constants report kExactOrder.
  int order() const noexcept { return layout_ ? layout_->order() : kExactOrder; }
  int nvars() const noexcept { return layout_ ? layout_->nvars() : 0; }

  double value() const noexcept { return coeffs_[0]; }
  std::span<const double> coefficients() const noexcept { return {coeffs_.data(), coeffs_.size()}; }
  double coefficient(std::span<const int> alpha) const;

  /// d^alpha f at the expansion point, i.e. alpha! * c_alpha.
  double partial(std::span<const int> alpha) const;

  /// Jet of d f / d x^var, one order lower. Throws OrderError at order 0.
  Jet derivative(int var) const;

  /// Same function truncated to `order` (no-op if already lower).
  Jet truncated(int order) const;

  Jet operator-() const;
  Jet& operator+=(const Jet& rhs);
  Jet& operator-=(const Jet& rhs);
  Jet& operator*=(const Jet& rhs);
  Jet& operator/=(const Jet& rhs);
  Jet& operator*=(double s);

  friend Jet operator+(Jet lhs, const Jet& rhs) { return lhs += rhs; }
  friend Jet operator-(Jet lhs, const Jet& rhs) { return lhs -= rhs; }
  friend Jet operator*(const Jet& lhs, const Jet& rhs);
  friend Jet operator/(const Jet& lhs, const Jet& rhs);
  friend Jet operator*(Jet lhs, double s) { return lhs *= s; }
  friend Jet operator*(double s, Jet rhs) { return rhs *= s; }

  /// Composition f(a) from the Taylor coefficients f^(k)(a0)/k!, k = 0..order.
  static Jet compose(const Jet& a, std::span<const double> taylor);

  static constexpr int kExactOrder = 255;

 private:
  const JetLayout* layout_ = nullptr;
  Storage coeffs_;
};

std::ostream& operator<<(std::ostream& os, const Jet& j);

// Elementary functions. Domain violations throw DomainError.
Jet sin(const Jet& a);
Jet cos(const Jet& a);
Jet tan(const Jet& a);
Jet exp(const Jet& a);
Jet log(const Jet& a);
Jet sqrt(const Jet& a);
/// a^(num/den) with den > 0. Negative bases need an odd denominator.
Jet pow_rational(const Jet& a, long num, long den);

}  // namespace biconf
