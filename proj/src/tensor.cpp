#include "biconf/tensor.hpp"

#include "biconf/error.hpp"

#include <Eigen/Dense>

#include <array>
#include <charconv>
#include <ostream>

namespace biconf {

namespace {

template <class S>
Tensor<S> invert(const Tensor<S>& m, double min_det) {
  if (m.rank() != 2) throw std::invalid_argument("inverse_matrix: need a rank-2 tensor");
  const int n = m.dim();
  std::vector<S> a(m.data());
  Tensor<S> inv(n, {m.valence(0) == Valence::Down ? Valence::Up : Valence::Down,
                    m.valence(1) == Valence::Down ? Valence::Up : Valence::Down});
  std::vector<S> b(static_cast<std::size_t>(n * n), S(0.0));
  for (int i = 0; i < n; ++i) b[static_cast<std::size_t>(i * n + i)] = S(1.0);
  auto at = [n](std::vector<S>& v, int r, int c) -> S& { return v[static_cast<std::size_t>(r * n + c)]; };

  double det = 1.0;
  for (int col = 0; col < n; ++col) {
    int piv = col;
    double best = std::fabs(constant_part(at(a, col, col)));
    for (int r = col + 1; r < n; ++r) {
      double v = std::fabs(constant_part(at(a, r, col)));
      if (v > best) {
        best = v;
        piv = r;
      }
    }
    if (best == 0.0) throw DomainError("degenerate metric: singular matrix");
    if (piv != col) {
      for (int c = 0; c < n; ++c) {
        std::swap(at(a, piv, c), at(a, col, c));
        std::swap(at(b, piv, c), at(b, col, c));
      }
      det = -det;
    }
    S p = at(a, col, col);
    det *= constant_part(p);
    for (int c = 0; c < n; ++c) {
      at(a, col, c) = at(a, col, c) / p;
      at(b, col, c) = at(b, col, c) / p;
    }
    for (int r = 0; r < n; ++r) {
      if (r == col) continue;
      S f = at(a, r, col);
      for (int c = 0; c < n; ++c) {
        at(a, r, c) -= f * at(a, col, c);
        at(b, r, c) -= f * at(b, col, c);
      }
    }
  }
  if (std::fabs(det) <= min_det) throw DomainError("degenerate metric: |det| = " + std::to_string(std::fabs(det)));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) inv(r, c) = at(b, r, c);
  }
  return inv;
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [ptr, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), ptr);
}

}  // namespace

JetTensor inverse_matrix(const JetTensor& m, double min_det) { return invert(m, min_det); }
RealTensor inverse_matrix(const RealTensor& m, double min_det) { return invert(m, min_det); }

double determinant(const RealTensor& m) {
  const int n = m.dim();
  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = m(i, j);
  }
  return a.partialPivLu().determinant();
}

MetricAtPoint make_metric(JetTensor g) {
  if (g.rank() != 2 || g.valence(0) != Valence::Down || g.valence(1) != Valence::Down) {
    throw std::invalid_argument("make_metric: metric must be (down, down)");
  }
  const int n = g.dim();
  const double scale = std::max(1.0, max_abs(g));
  for (int i = 0; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) {
      if (std::fabs(g(i, j).value() - g(j, i).value()) > 1e-12 * scale) {
        throw DomainError("metric is not symmetric");
      }
    }
  }
  MetricAtPoint m;
  m.g_inv = inverse_matrix(g);

  Eigen::MatrixXd a(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) a(i, j) = g(i, j).value();
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(a, Eigen::EigenvaluesOnly);
  for (int i = 0; i < n; ++i) m.signature.push_back(es.eigenvalues()(i) < 0.0 ? -1 : 1);
  std::sort(m.signature.begin(), m.signature.end());

  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double s = 0.0;
      for (int k = 0; k < n; ++k) s += g(i, k).value() * m.g_inv(k, j).value();
      if (std::fabs(s - (i == j ? 1.0 : 0.0)) > 1e-10) throw DomainError("metric inverse check failed");
    }
  }
  m.g = std::move(g);
  return m;
}

JetTensor raise(const JetTensor& t, int slot, const MetricAtPoint& m) {
  if (t.valence(slot) != Valence::Down) throw std::invalid_argument("raise: slot is already contravariant");
  return apply_matrix(t, slot, m.g_inv, Valence::Up);
}

JetTensor lower(const JetTensor& t, int slot, const MetricAtPoint& m) {
  if (t.valence(slot) != Valence::Up) throw std::invalid_argument("lower: slot is already covariant");
  return apply_matrix(t, slot, m.g, Valence::Down);
}

void dump(std::ostream& os, std::string_view name, const RealTensor& t) {
  if (t.rank() == 0) {
    os << name << " = " << format_double(t[0]) << '\n';
    return;
  }
  std::vector<int> idx(static_cast<std::size_t>(t.rank()));
  for (std::size_t f = 0; f < t.size(); ++f) {
    t.unflatten(f, idx);
    os << name << '[';
    for (std::size_t k = 0; k < idx.size(); ++k) os << (k ? "," : "") << idx[k] + 1;
    os << "] = " << format_double(t[f]) << '\n';
  }
}

}  // namespace biconf
