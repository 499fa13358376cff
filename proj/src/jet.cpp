#include "biconf/jet.hpp"

#include "biconf/error.hpp"
#include "biconf/scalar_ops.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <memory>
#include <mutex>
#include <ostream>
#include <string>

namespace biconf {

namespace {

// Exponent tuples of total degree `degree` in lexicographically descending order.
void enumerate_degree(int nvars, int degree, std::vector<std::uint8_t>& current, int var,
                      std::vector<std::uint8_t>& out) {
  if (var == nvars - 1) {
    current[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(degree);
    out.insert(out.end(), current.begin(), current.end());
    return;
  }
  for (int e = degree; e >= 0; --e) {
    current[static_cast<std::size_t>(var)] = static_cast<std::uint8_t>(e);
    enumerate_degree(nvars, degree - e, current, var + 1, out);
  }
}

void check_same_vars(const Jet& a, const Jet& b) {
  if (a.nvars() != b.nvars()) {
    throw std::logic_error("jet variable count mismatch: " + std::to_string(a.nvars()) + " vs " +
                           std::to_string(b.nvars()));
  }
}

}  // namespace

JetLayout::JetLayout(int nvars, int order) : nvars_(nvars), order_(order) {
  std::vector<std::uint8_t> current(static_cast<std::size_t>(nvars), 0);
  for (int d = 0; d <= order; ++d) {
    std::size_t before = exponents_.size() / static_cast<std::size_t>(nvars);
    enumerate_degree(nvars, d, current, 0, exponents_);
    std::size_t after = exponents_.size() / static_cast<std::size_t>(nvars);
    degrees_.insert(degrees_.end(), after - before, d);
  }

  std::size_t radix = static_cast<std::size_t>(order + 1);
  std::size_t table = 1;
  for (int i = 0; i < nvars; ++i) table *= radix;
  code_to_index_.assign(table, -1);
  auto code_of = [&](std::span<const std::uint8_t> m) {
    std::size_t code = 0;
    for (int i = nvars - 1; i >= 0; --i) code = code * radix + m[static_cast<std::size_t>(i)];
    return code;
  };
  for (std::size_t k = 0; k < size(); ++k) code_to_index_[code_of(monomial(k))] = static_cast<std::int16_t>(k);

  std::vector<std::uint8_t> sum(static_cast<std::size_t>(nvars));
  for (std::size_t i = 0; i < size(); ++i) {
    for (std::size_t j = 0; j < size(); ++j) {
      if (degrees_[i] + degrees_[j] > order) continue;
      auto mi = monomial(i);
      auto mj = monomial(j);
      for (std::size_t v = 0; v < sum.size(); ++v) sum[v] = static_cast<std::uint8_t>(mi[v] + mj[v]);
      auto out = code_to_index_[code_of(sum)];
      products_.push_back({static_cast<std::uint16_t>(i), static_cast<std::uint16_t>(j),
                           static_cast<std::uint16_t>(out)});
    }
  }
  std::stable_sort(products_.begin(), products_.end(),
                   [](const Product& a, const Product& b) { return a.out < b.out; });

  if (order >= 1) {
    // The order-1 layout is the prefix of this one of length `lower`.
    std::size_t lower = 0;
    while (lower < size() && degrees_[lower] <= order - 1) ++lower;
    derivatives_.resize(static_cast<std::size_t>(nvars));
    for (int v = 0; v < nvars; ++v) {
      auto& map = derivatives_[static_cast<std::size_t>(v)];
      map.reserve(lower);
      for (std::size_t t = 0; t < lower; ++t) {
        auto m = monomial(t);
        std::copy(m.begin(), m.end(), sum.begin());
        sum[static_cast<std::size_t>(v)] += 1;
        auto src = code_to_index_[code_of(sum)];
        map.push_back({static_cast<std::uint16_t>(src), static_cast<double>(sum[static_cast<std::size_t>(v)])});
      }
    }
  }
}

const JetLayout& JetLayout::get(int nvars, int order) {
  if (nvars < 1 || nvars > kMaxJetVars || order < 0 || order > kMaxJetOrder) {
    throw std::logic_error("unsupported jet layout: nvars=" + std::to_string(nvars) +
                           " order=" + std::to_string(order));
  }
  constexpr std::size_t kSlots = static_cast<std::size_t>((kMaxJetVars + 1) * (kMaxJetOrder + 1));
  static std::array<std::once_flag, kSlots> flags;
  static std::array<std::unique_ptr<JetLayout>, kSlots> layouts;
  std::size_t slot = static_cast<std::size_t>(nvars * (kMaxJetOrder + 1) + order);
  std::call_once(flags[slot], [&] { layouts[slot].reset(new JetLayout(nvars, order)); });
  return *layouts[slot];
}

std::size_t JetLayout::index_of(std::span<const int> alpha) const {
  if (static_cast<int>(alpha.size()) != nvars_) throw std::logic_error("multi-index length mismatch");
  int degree = 0;
  std::size_t code = 0;
  std::size_t radix = static_cast<std::size_t>(order_ + 1);
  for (int i = nvars_ - 1; i >= 0; --i) {
    int a = alpha[static_cast<std::size_t>(i)];
    if (a < 0) throw std::logic_error("negative multi-index entry");
    degree += a;
    if (degree > order_) {
      throw OrderError("multi-index degree exceeds jet order " + std::to_string(order_));
    }
    code = code * radix + static_cast<std::size_t>(a);
  }
  return static_cast<std::size_t>(code_to_index_[code]);
}

std::span<const JetLayout::DerivativeEntry> JetLayout::derivative_map(int var) const {
  if (order_ == 0) throw OrderError("cannot differentiate an order-0 jet");
  return derivatives_.at(static_cast<std::size_t>(var));
}

Jet Jet::constant(const JetLayout& layout, double value) {
  Jet j(layout);
  j.coeffs_[0] = value;
  return j;
}

Jet Jet::seed(std::span<const double> point, int var, int order) {
  if (var < 0 || var >= static_cast<int>(point.size())) throw std::logic_error("seed variable out of range");
  const JetLayout& layout = JetLayout::get(static_cast<int>(point.size()), order);
  Jet j(layout);
  j.coeffs_[0] = point[static_cast<std::size_t>(var)];
  if (order >= 1) j.coeffs_[1 + static_cast<std::size_t>(var)] = 1.0;
  return j;
}

double Jet::coefficient(std::span<const int> alpha) const {
  if (!layout_) {
    bool zero = std::all_of(alpha.begin(), alpha.end(), [](int a) { return a == 0; });
    return zero ? coeffs_[0] : 0.0;
  }
  return coeffs_[layout_->index_of(alpha)];
}

double Jet::partial(std::span<const int> alpha) const {
  double factorial = 1.0;
  for (int a : alpha) {
    for (int k = 2; k <= a; ++k) factorial *= k;
  }
  return factorial * coefficient(alpha);
}

Jet Jet::derivative(int var) const {
  if (!layout_) return Jet(0.0);
  if (var < 0 || var >= layout_->nvars()) throw std::logic_error("derivative variable out of range");
  auto map = layout_->derivative_map(var);
  Jet r(JetLayout::get(layout_->nvars(), layout_->order() - 1));
  for (std::size_t t = 0; t < map.size(); ++t) r.coeffs_[t] = map[t].factor * coeffs_[map[t].source];
  return r;
}

Jet Jet::truncated(int order) const {
  if (!layout_ || order >= layout_->order()) return *this;
  if (order < 0) throw OrderError("negative truncation order");
  Jet r(*this);
  r.layout_ = &JetLayout::get(layout_->nvars(), order);
  r.coeffs_.resize(r.layout_->size());
  return r;
}

Jet Jet::operator-() const {
  Jet r(*this);
  for (auto& c : r.coeffs_) c = -c;
  return r;
}

Jet& Jet::operator+=(const Jet& rhs) {
  if (!rhs.layout_) {
    coeffs_[0] += rhs.coeffs_[0];
    return *this;
  }
  if (!layout_) {
    double c = coeffs_[0];
    *this = rhs;
    coeffs_[0] = c + coeffs_[0];
    return *this;
  }
  check_same_vars(*this, rhs);
  if (rhs.layout_->order() < layout_->order()) {
    layout_ = rhs.layout_;
    coeffs_.resize(layout_->size());
  }
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += rhs.coeffs_[i];
  return *this;
}

Jet& Jet::operator-=(const Jet& rhs) {
  if (!rhs.layout_) {
    coeffs_[0] -= rhs.coeffs_[0];
    return *this;
  }
  if (!layout_) {
    double c = coeffs_[0];
    *this = -rhs;
    coeffs_[0] = c + coeffs_[0];
    return *this;
  }
  check_same_vars(*this, rhs);
  if (rhs.layout_->order() < layout_->order()) {
    layout_ = rhs.layout_;
    coeffs_.resize(layout_->size());
  }
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= rhs.coeffs_[i];
  return *this;
}

Jet& Jet::operator*=(double s) {
  for (auto& c : coeffs_) c *= s;
  return *this;
}

Jet operator*(const Jet& a, const Jet& b) {
  if (!a.layout_) return b * a.coeffs_[0];
  if (!b.layout_) return a * b.coeffs_[0];
  check_same_vars(a, b);
  const JetLayout& layout = a.layout_->order() <= b.layout_->order() ? *a.layout_ : *b.layout_;
  Jet r(layout);
  for (const auto& p : layout.products()) r.coeffs_[p.out] += a.coeffs_[p.lhs] * b.coeffs_[p.rhs];
  return r;
}

Jet& Jet::operator*=(const Jet& rhs) { return *this = *this * rhs; }

Jet operator/(const Jet& a, const Jet& b) {
  double b0 = b.coeffs_[0];
  if (b0 == 0.0) throw DomainError("division by a jet with zero constant part");
  if (!b.layout_) {
    Jet r(a);
    for (auto& c : r.coeffs_) c /= b0;
    return r;
  }
  if (a.layout_) check_same_vars(a, b);
  const JetLayout& layout = (a.layout_ && a.layout_->order() < b.layout_->order()) ? *a.layout_ : *b.layout_;
  // Solve b * q = a coefficient by coefficient in graded order.
  Jet q(layout);
  auto a_at = [&](std::size_t k) { return a.layout_ ? a.coeffs_[k] : (k == 0 ? a.coeffs_[0] : 0.0); };
  auto products = layout.products();
  std::size_t p = 0;
  for (std::size_t k = 0; k < layout.size(); ++k) {
    double acc = a_at(k);
    for (; p < products.size() && products[p].out == k; ++p) {
      if (products[p].lhs == 0) continue;
      acc -= b.coeffs_[products[p].lhs] * q.coeffs_[products[p].rhs];
    }
    q.coeffs_[k] = acc / b0;
  }
  return q;
}

Jet& Jet::operator/=(const Jet& rhs) { return *this = *this / rhs; }

Jet Jet::compose(const Jet& a, std::span<const double> taylor) {
  if (!a.layout_) return Jet(taylor[0]);
  int order = a.layout_->order();
  if (static_cast<int>(taylor.size()) < order + 1) throw std::logic_error("compose: too few Taylor coefficients");
  Jet h(a);
  h.coeffs_[0] = 0.0;
  Jet r = Jet::constant(*a.layout_, taylor[static_cast<std::size_t>(order)]);
  for (int k = order - 1; k >= 0; --k) {
    r = r * h;
    r.coeffs_[0] += taylor[static_cast<std::size_t>(k)];
  }
  return r;
}

std::ostream& operator<<(std::ostream& os, const Jet& j) {
  os << "Jet(" << j.value();
  if (!j.is_exact_constant()) os << "; n=" << j.nvars() << " K=" << j.order();
  return os << ")";
}

Jet sin(const Jet& a) {
  double s = std::sin(a.value());
  double c = std::cos(a.value());
  std::array<double, 4> t{s, c, -s / 2.0, -c / 6.0};
  return Jet::compose(a, t);
}

Jet cos(const Jet& a) {
  double s = std::sin(a.value());
  double c = std::cos(a.value());
  std::array<double, 4> t{c, -s, -c / 2.0, s / 6.0};
  return Jet::compose(a, t);
}

Jet tan(const Jet& a) {
  double v = ops::tan(a.value());
  double sec2 = 1.0 + v * v;
  std::array<double, 4> t{v, sec2, v * sec2, sec2 * (1.0 + 3.0 * v * v) / 3.0};
  return Jet::compose(a, t);
}

Jet exp(const Jet& a) {
  double e = std::exp(a.value());
  std::array<double, 4> t{e, e, e / 2.0, e / 6.0};
  return Jet::compose(a, t);
}

Jet log(const Jet& a) {
  double x = a.value();
  double l = ops::log(x);
  std::array<double, 4> t{l, 1.0 / x, -1.0 / (2.0 * x * x), 1.0 / (3.0 * x * x * x)};
  return Jet::compose(a, t);
}

Jet sqrt(const Jet& a) {
  double x = a.value();
  double r = ops::sqrt(x);
  if (x == 0.0 && a.order() >= 1 && !a.is_exact_constant()) {
    throw DomainError("sqrt is not differentiable at zero");
  }
  if (x == 0.0) return Jet::compose(a, std::array<double, 4>{0.0, 0.0, 0.0, 0.0});
  std::array<double, 4> t{r, 1.0 / (2.0 * r), -1.0 / (8.0 * r * x), 1.0 / (16.0 * r * x * x)};
  return Jet::compose(a, t);
}

Jet pow_rational(const Jet& a, long num, long den) {
  if (den <= 0) throw std::logic_error("pow_rational: denominator must be positive");
  double x = a.value();
  double q = static_cast<double>(num) / static_cast<double>(den);
  int order = a.is_exact_constant() ? 0 : a.order();
  std::array<double, 4> t{};
  double falling = 1.0;
  double factorial = 1.0;
  for (int k = 0; k <= order; ++k) {
    if (k > 0) {
      falling *= q - (k - 1);
      factorial *= k;
    }
    t[static_cast<std::size_t>(k)] = falling / factorial * ops::pow_rational(x, num - k * den, den);
  }
  return Jet::compose(a, t);
}

}  // namespace biconf
