#include "biconf/geometry.hpp"

#include "biconf/error.hpp"

namespace biconf {

namespace {

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

}  // namespace

std::vector<Jet> seed_point(std::span<const double> point, int order) {
  std::vector<Jet> vars;
  vars.reserve(point.size());
  for (std::size_t i = 0; i < point.size(); ++i) vars.push_back(Jet::seed(point, static_cast<int>(i), order));
  return vars;
}

JetTensor evaluate_tensor2(std::span<const Expr> components, int dim, std::span<const Jet> vars, double factor) {
  JetTensor t(dim, {Valence::Down, Valence::Down});
  for (int i = 0; i < dim; ++i) {
    for (int j = i; j < dim; ++j) {
      Jet v = components[sz(i * dim + j)].evaluate<Jet>(vars);
      if (factor != 1.0) v *= factor;
      t(i, j) = v;
      t(j, i) = v;
    }
  }
  return t;
}

JetTensor evaluate_vector(std::span<const Expr> components, std::span<const Jet> vars) {
  JetTensor t(static_cast<int>(components.size()), {Valence::Up});
  for (std::size_t i = 0; i < components.size(); ++i) t[i] = components[i].evaluate<Jet>(vars);
  return t;
}

JetTensor partial_derivative(const JetTensor& t) {
  std::vector<Valence> v{Valence::Down};
  v.insert(v.end(), t.valences().begin(), t.valences().end());
  JetTensor r(t.dim(), std::move(v));
  const std::size_t block = t.size();
  for (int e = 0; e < t.dim(); ++e) {
    for (std::size_t f = 0; f < block; ++f) r[sz(e) * block + f] = t[f].derivative(e);
  }
  return r;
}

JetTensor christoffel(const MetricAtPoint& m) {
  const int n = m.dim();
  JetTensor dg = partial_derivative(m.g);  // dg(c, a, b) = d_c g_ab
  JetTensor lowered(n, {Valence::Down, Valence::Down, Valence::Down});
  for (int d = 0; d < n; ++d) {
    for (int b = 0; b < n; ++b) {
      for (int c = b; c < n; ++c) {
        Jet v = (dg(b, d, c) + dg(c, d, b) - dg(d, b, c)) * 0.5;
        lowered(d, b, c) = v;
        lowered(d, c, b) = v;
      }
    }
  }
  JetTensor gamma(n, {Valence::Up, Valence::Down, Valence::Down});
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = b; c < n; ++c) {
        Jet acc(0.0);
        for (int d = 0; d < n; ++d) acc += m.g_inv(a, d) * lowered(d, b, c);
        gamma(a, b, c) = acc;
        gamma(a, c, b) = acc;
      }
    }
  }
  return gamma;
}

JetTensor riemann(const JetTensor& gamma) {
  const int n = gamma.dim();
  JetTensor dgam = partial_derivative(gamma);  // dgam(e, a, b, c) = d_e G^a_bc
  JetTensor r(n, {Valence::Up, Valence::Down, Valence::Down, Valence::Down});
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        for (int d = c + 1; d < n; ++d) {
          Jet acc = dgam(c, a, d, b) - dgam(d, a, c, b);
          for (int s = 0; s < n; ++s) acc += gamma(a, s, c) * gamma(s, d, b) - gamma(a, s, d) * gamma(s, c, b);
          r(a, b, d, c) = -acc;
          r(a, b, c, d) = std::move(acc);
        }
      }
    }
  }
  return r;
}

JetTensor ricci(const JetTensor& riem) { return contract(riem, 0, 2); }

Jet scalar_curvature(const JetTensor& ric, const MetricAtPoint& m) {
  Jet acc(0.0);
  for (int a = 0; a < ric.dim(); ++a) {
    for (int b = 0; b < ric.dim(); ++b) acc += m.g_inv(a, b) * ric(a, b);
  }
  return acc;
}

JetTensor weyl(const JetTensor& riem, const MetricAtPoint& m) {
  const int n = riem.dim();
  if (n < 3) throw std::invalid_argument("weyl: dimension must be at least 3");
  JetTensor ric = ricci(riem);
  Jet scal = scalar_curvature(ric, m);
  JetTensor low = lower(riem, 0, m);
  const double k1 = 1.0 / (n - 2);
  const double k2 = 1.0 / ((n - 1) * (n - 2));
  const JetTensor& g = m.g;
  JetTensor c(n, {Valence::Down, Valence::Down, Valence::Down, Valence::Down});
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int cc = 0; cc < n; ++cc) {
        for (int d = 0; d < n; ++d) {
          Jet v = low(a, b, cc, d) -
                  k1 * (g(a, cc) * ric(d, b) - g(a, d) * ric(cc, b) - g(b, cc) * ric(d, a) + g(b, d) * ric(cc, a)) +
                  k2 * scal * (g(a, cc) * g(d, b) - g(a, d) * g(cc, b));
          c(a, b, cc, d) = std::move(v);
        }
      }
    }
  }
  return raise(c, 0, m);
}

JetTensor covariant_derivative(const JetTensor& t, const JetTensor& gamma) {
  const int n = t.dim();
  JetTensor r = partial_derivative(t);
  const int rank = t.rank();
  std::vector<int> idx(sz(rank + 1));
  std::vector<int> src(sz(rank));
  for (std::size_t f = 0; f < r.size(); ++f) {
    r.unflatten(f, idx);
    const int e = idx[0];
    Jet acc = r[f];
    for (int k = 0; k < rank; ++k) {
      std::copy(idx.begin() + 1, idx.end(), src.begin());
      const int own = idx[sz(k + 1)];
      for (int s = 0; s < n; ++s) {
        src[sz(k)] = s;
        if (t.valence(k) == Valence::Up) {
          acc += gamma(own, e, s) * t.at(src);
        } else {
          acc -= gamma(s, e, own) * t.at(src);
        }
      }
    }
    r[f] = std::move(acc);
  }
  return r;
}

JetTensor lie_derivative(const JetTensor& t, const JetTensor& xi) {
  const int n = t.dim();
  JetTensor dt = partial_derivative(t);
  JetTensor dxi = partial_derivative(xi);  // dxi(c, a) = d_c xi^a
  JetTensor r(n, t.valences());
  const int rank = t.rank();
  std::vector<int> idx(sz(rank));
  std::vector<int> src(sz(rank));
  for (std::size_t f = 0; f < r.size(); ++f) {
    r.unflatten(f, idx);
    Jet acc(0.0);
    for (int c = 0; c < n; ++c) acc += xi[sz(c)] * dt[sz(c) * t.size() + f];
    for (int k = 0; k < rank; ++k) {
      src = idx;
      const int own = idx[sz(k)];
      for (int c = 0; c < n; ++c) {
        src[sz(k)] = c;
        if (t.valence(k) == Valence::Up) {
          acc -= t.at(src) * dxi(c, own);
        } else {
          acc += t.at(src) * dxi(own, c);
        }
      }
    }
    r[f] = std::move(acc);
  }
  return r;
}

JetTensor lie_derivative_connection(const JetTensor& gamma, const JetTensor& xi) {
  const int n = gamma.dim();
  JetTensor r = lie_derivative(gamma, xi);
  JetTensor ddxi = partial_derivative(partial_derivative(xi));  // ddxi(b, c, a) = d_b d_c xi^a
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) r(a, b, c) += ddxi(b, c, a);
    }
  }
  return r;
}

MetricAtPoint leaf_metric(const SymbolicMetric& metric, std::span<const int> leaf, std::span<const double> point,
                          int order, double factor) {
  const int k = static_cast<int>(leaf.size());
  std::vector<double> sub;
  for (int i : leaf) sub.push_back(point[sz(i)]);
  std::vector<Jet> vars;
  for (std::size_t i = 0; i < point.size(); ++i) vars.emplace_back(point[i]);
  for (int j = 0; j < k; ++j) vars[sz(leaf[sz(j)])] = Jet::seed(sub, j, order);
  JetTensor g(k, {Valence::Down, Valence::Down});
  for (int i = 0; i < k; ++i) {
    for (int j = i; j < k; ++j) {
      Jet v = metric.at(leaf[sz(i)], leaf[sz(j)]).evaluate<Jet>(vars);
      if (factor != 1.0) v *= factor;
      if (v.is_exact_constant()) v = Jet::constant(JetLayout::get(k, order), v.value());
      g(i, j) = v;
      g(j, i) = v;
    }
  }
  return make_metric(std::move(g));
}

}  // namespace biconf
