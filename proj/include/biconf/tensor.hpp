#pragma once

// Dense tensors with per-slot valence over a scalar ring (double or Jet).
// Components are stored row-major: the last index varies fastest.

#include "biconf/jet.hpp"

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <iosfwd>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

namespace biconf {

enum class Valence : unsigned char { Up, Down };

inline double constant_part(double x) { return x; }
inline double constant_part(const Jet& x) { return x.value(); }

template <class S>
class Tensor {
 public:
  using Scalar = S;

  Tensor() = default;
  Tensor(int dim, std::vector<Valence> valences)
      : dim_(dim), valences_(std::move(valences)), data_(count(dim, valences_.size()), S(0.0)) {}

  static Tensor scalar(S value) {
    Tensor t(0, {});
    t.data_.assign(1, std::move(value));
    return t;
  }

  int dim() const noexcept { return dim_; }
  int rank() const noexcept { return static_cast<int>(valences_.size()); }
  const std::vector<Valence>& valences() const noexcept { return valences_; }
  Valence valence(int slot) const { return valences_.at(static_cast<std::size_t>(slot)); }
  std::size_t size() const noexcept { return data_.size(); }

  S& operator[](std::size_t flat) { return data_[flat]; }
  const S& operator[](std::size_t flat) const { return data_[flat]; }

  template <class... I>
  S& operator()(I... idx) {
    static_assert((std::is_integral_v<I> && ...));
    return data_[offset({static_cast<int>(idx)...})];
  }
  template <class... I>
  const S& operator()(I... idx) const {
    static_assert((std::is_integral_v<I> && ...));
    return data_[offset({static_cast<int>(idx)...})];
  }

  S& at(std::span<const int> idx) { return data_[offset(idx)]; }
  const S& at(std::span<const int> idx) const { return data_[offset(idx)]; }

  std::size_t offset(std::initializer_list<int> idx) const {
    return offset(std::span<const int>(idx.begin(), idx.size()));
  }
  std::size_t offset(std::span<const int> idx) const {
    if (idx.size() != valences_.size()) throw std::out_of_range("tensor index arity mismatch");
    std::size_t f = 0;
    for (int i : idx) f = f * static_cast<std::size_t>(dim_) + static_cast<std::size_t>(i);
    return f;
  }

  /// Multi-index of a flat offset.
  void unflatten(std::size_t flat, std::span<int> idx) const {
    for (std::size_t k = idx.size(); k-- > 0;) {
      idx[k] = static_cast<int>(flat % static_cast<std::size_t>(dim_));
      flat /= static_cast<std::size_t>(dim_);
    }
  }

  const std::vector<S>& data() const noexcept { return data_; }

 private:
  static std::size_t count(int dim, std::size_t rank) {
    std::size_t c = 1;
    for (std::size_t i = 0; i < rank; ++i) c *= static_cast<std::size_t>(dim);
    return c;
  }

  int dim_ = 0;
  std::vector<Valence> valences_;
  std::vector<S> data_;
};

using JetTensor = Tensor<Jet>;
using RealTensor = Tensor<double>;

// ---------------------------------------------------------------------------
// Elementwise algebra

template <class S>
void require_same_shape(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.dim() != b.dim() || a.valences() != b.valences()) throw std::invalid_argument("tensor shape mismatch");
}

template <class S>
Tensor<S> operator+(const Tensor<S>& a, const Tensor<S>& b) {
  require_same_shape(a, b);
  Tensor<S> r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] += b[i];
  return r;
}

template <class S>
Tensor<S> operator-(const Tensor<S>& a, const Tensor<S>& b) {
  require_same_shape(a, b);
  Tensor<S> r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] -= b[i];
  return r;
}

template <class S>
Tensor<S> operator*(const S& s, const Tensor<S>& a) {
  Tensor<S> r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = s * a[i];
  return r;
}

template <class S>
Tensor<S> scale(const Tensor<S>& a, double s) {
  Tensor<S> r = a;
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = r[i] * s;
  return r;
}

/// Outer product; slots of a come first.
template <class S>
Tensor<S> outer(const Tensor<S>& a, const Tensor<S>& b) {
  if (a.dim() != b.dim() && a.rank() > 0 && b.rank() > 0) throw std::invalid_argument("outer: dimension mismatch");
  std::vector<Valence> v = a.valences();
  v.insert(v.end(), b.valences().begin(), b.valences().end());
  Tensor<S> r(a.rank() > 0 ? a.dim() : b.dim(), std::move(v));
  std::size_t k = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) r[k++] = a[i] * b[j];
  }
  return r;
}

/// Trace over slots i and j (opposite valence).
template <class S>
Tensor<S> contract(const Tensor<S>& t, int i, int j) {
  if (i == j || i < 0 || j < 0 || i >= t.rank() || j >= t.rank()) throw std::out_of_range("contract: bad slots");
  if (t.valence(i) == t.valence(j)) throw std::invalid_argument("contract: slots have the same valence");
  if (i > j) std::swap(i, j);
  std::vector<Valence> v;
  for (int k = 0; k < t.rank(); ++k) {
    if (k != i && k != j) v.push_back(t.valence(k));
  }
  Tensor<S> r(t.dim(), std::move(v));
  std::vector<int> ridx(static_cast<std::size_t>(r.rank()));
  std::vector<int> tidx(static_cast<std::size_t>(t.rank()));
  for (std::size_t f = 0; f < r.size(); ++f) {
    r.unflatten(f, ridx);
    for (int k = 0, m = 0; k < t.rank(); ++k) {
      if (k != i && k != j) tidx[static_cast<std::size_t>(k)] = ridx[static_cast<std::size_t>(m++)];
    }
    S acc(0.0);
    for (int s = 0; s < t.dim(); ++s) {
      tidx[static_cast<std::size_t>(i)] = s;
      tidx[static_cast<std::size_t>(j)] = s;
      acc += t.at(tidx);
    }
    r[f] = std::move(acc);
  }
  return r;
}

/// Slot k of the result is slot order[k] of t.
template <class S>
Tensor<S> permute(const Tensor<S>& t, std::span<const int> order) {
  if (static_cast<int>(order.size()) != t.rank()) throw std::invalid_argument("permute: arity mismatch");
  std::vector<Valence> v;
  for (int o : order) v.push_back(t.valence(o));
  Tensor<S> r(t.dim(), std::move(v));
  std::vector<int> ridx(order.size());
  std::vector<int> tidx(order.size());
  for (std::size_t f = 0; f < r.size(); ++f) {
    r.unflatten(f, ridx);
    for (std::size_t k = 0; k < order.size(); ++k) tidx[static_cast<std::size_t>(order[k])] = ridx[k];
    r[f] = t.at(tidx);
  }
  return r;
}

template <class S>
Tensor<S> permute(const Tensor<S>& t, std::initializer_list<int> order) {
  return permute(t, std::span<const int>(order.begin(), order.size()));
}

namespace detail {

template <class S>
Tensor<S> bracket(const Tensor<S>& t, std::vector<int> slots, bool alternating) {
  if (slots.size() < 2) return t;
  for (int s : slots) {
    if (s < 0 || s >= t.rank()) throw std::out_of_range("bracket: bad slot");
    if (t.valence(s) != t.valence(slots.front())) throw std::invalid_argument("bracket: mixed-valence slot list");
  }
  std::vector<int> perm(slots.size());
  std::iota(perm.begin(), perm.end(), 0);
  Tensor<S> acc(t.dim(), t.valences());
  std::vector<int> order(static_cast<std::size_t>(t.rank()));
  double count = 0.0;
  do {
    std::iota(order.begin(), order.end(), 0);
    for (std::size_t k = 0; k < slots.size(); ++k) order[static_cast<std::size_t>(slots[k])] = slots[static_cast<std::size_t>(perm[k])];
    int inversions = 0;
    for (std::size_t a = 0; a < perm.size(); ++a) {
      for (std::size_t b = a + 1; b < perm.size(); ++b) inversions += perm[a] > perm[b] ? 1 : 0;
    }
    Tensor<S> p = permute(t, order);
    double sign = (alternating && (inversions % 2 == 1)) ? -1.0 : 1.0;
    for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += p[i] * sign;
    count += 1.0;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return scale(acc, 1.0 / count);
}

}  // namespace detail

/// Weight-one symmetrization over the listed slots.
template <class S>
Tensor<S> symmetrize(const Tensor<S>& t, std::vector<int> slots) {
  return detail::bracket(t, std::move(slots), false);
}

/// Weight-one antisymmetrization: [ab] = (T_ab - T_ba) / 2.
template <class S>
Tensor<S> antisymmetrize(const Tensor<S>& t, std::vector<int> slots) {
  return detail::bracket(t, std::move(slots), true);
}

// ---------------------------------------------------------------------------
// Constant parts and norms

template <class S>
RealTensor values(const Tensor<S>& t) {
  RealTensor r(t.dim(), t.valences());
  for (std::size_t i = 0; i < t.size(); ++i) r[i] = constant_part(t[i]);
  return r;
}

template <class S>
double max_abs(const Tensor<S>& t) {
  double m = 0.0;
  for (std::size_t i = 0; i < t.size(); ++i) m = std::max(m, std::fabs(constant_part(t[i])));
  return m;
}

template <class S>
Tensor<S> truncated(const Tensor<S>& t, int order) {
  if constexpr (std::is_same_v<S, Jet>) {
    Tensor<S> r = t;
    for (std::size_t i = 0; i < r.size(); ++i) r[i] = r[i].truncated(order);
    return r;
  } else {
    return t;
  }
}

// ---------------------------------------------------------------------------
// Metric

struct MetricAtPoint {
  JetTensor g;      // (down, down)
  JetTensor g_inv;  // (up, up)
  /// Eigenvalue signs of the constant part, ascending: -1 entries then +1 entries.
  std::vector<int> signature;

  int dim() const { return g.dim(); }
};

/// Inverse by LU with partial pivoting on constant parts. Throws DomainError
/// when |det| of the constant part is at most `min_det`.
JetTensor inverse_matrix(const JetTensor& m, double min_det = 1e-10);
RealTensor inverse_matrix(const RealTensor& m, double min_det = 1e-10);

/// Determinant of the constant part.
double determinant(const RealTensor& m);

/// Symmetric metric with inverse and signature; checks g * g_inv = 1 within 1e-10.
MetricAtPoint make_metric(JetTensor g);

/// Contract `slot` with g_inv (slot must be Down) or g (slot must be Up).
JetTensor raise(const JetTensor& t, int slot, const MetricAtPoint& m);
JetTensor lower(const JetTensor& t, int slot, const MetricAtPoint& m);

/// Contract slot `slot` of t against slot `other_slot` of u; result keeps the
/// remaining slots of t in order with the remaining slot(s) of u put in place
/// of `slot`. Used for raising/lowering and matrix actions.
template <class S>
Tensor<S> apply_matrix(const Tensor<S>& t, int slot, const Tensor<S>& mat, Valence result) {
  if (mat.rank() != 2) throw std::invalid_argument("apply_matrix: need a rank-2 matrix");
  std::vector<Valence> v = t.valences();
  v[static_cast<std::size_t>(slot)] = result;
  Tensor<S> r(t.dim(), std::move(v));
  std::vector<int> idx(static_cast<std::size_t>(t.rank()));
  for (std::size_t f = 0; f < r.size(); ++f) {
    r.unflatten(f, idx);
    const int a = idx[static_cast<std::size_t>(slot)];
    S acc(0.0);
    for (int s = 0; s < t.dim(); ++s) {
      idx[static_cast<std::size_t>(slot)] = s;
      acc += mat(a, s) * t.at(idx);
    }
    r[f] = std::move(acc);
  }
  return r;
}

/// Kronecker delta (up, down).
template <class S>
Tensor<S> identity(int dim) {
  Tensor<S> d(dim, {Valence::Up, Valence::Down});
  for (int i = 0; i < dim; ++i) d(i, i) = S(1.0);
  return d;
}

// ---------------------------------------------------------------------------
// Debug dump: one component per line, "name[a,b,...] = value", 1-based.

void dump(std::ostream& os, std::string_view name, const RealTensor& t);

template <class S>
void dump(std::ostream& os, std::string_view name, const Tensor<S>& t) {
  dump(os, name, values(t));
}

}  // namespace biconf
