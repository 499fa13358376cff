#include "biconf/biconformal.hpp"

#include "biconf/error.hpp"

#include <cmath>
#include <string>

namespace biconf {

namespace {

constexpr Valence U = Valence::Up;
constexpr Valence D = Valence::Down;

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

double mixed_trace(const JetTensor& mixed) {
  double t = 0.0;
  for (int a = 0; a < mixed.dim(); ++a) t += mixed(a, a).value();
  return t;
}

ProjectorPair complete(const MetricAtPoint& m, JetTensor P, ProjectorSource source) {
  ProjectorPair pair;
  pair.n = m.dim();
  pair.source = source;
  pair.Pi = m.g - P;
  pair.P = std::move(P);
  pair.P_mixed = raise(pair.P, 0, m);
  pair.Pi_mixed = raise(pair.Pi, 0, m);
  pair.P_up = raise(pair.P_mixed, 1, m);
  pair.Pi_up = raise(pair.Pi_mixed, 1, m);
  pair.p = static_cast<int>(std::lround(mixed_trace(pair.P_mixed)));
  return pair;
}

void check_rank(int p, int n) {
  if (p < 1 || p > n - 1) {
    throw RankError("projector rank " + std::to_string(p) + " outside [1, " + std::to_string(n - 1) + "]");
  }
}

// sum_c A^a_c B^c_b on constant parts
double max_product_residual(const JetTensor& A, const JetTensor& B, const JetTensor* target) {
  const int n = A.dim();
  double worst = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      double s = 0.0;
      for (int c = 0; c < n; ++c) s += A(a, c).value() * B(c, b).value();
      double want = target ? (*target)(a, b).value() : 0.0;
      worst = std::max(worst, std::fabs(s - want));
    }
  }
  return worst;
}

}  // namespace

double ProjectorResiduals::max() const {
  return std::max({sum, idempotent_p, idempotent_pi, annihilate, trace_offset});
}

ProjectorPair build_projectors(const MetricAtPoint& m, const std::vector<JetTensor>& frame) {
  const int n = m.dim();
  check_rank(static_cast<int>(frame.size()), n);
  std::vector<JetTensor> basis;  // orthogonalized, contravariant
  std::vector<JetTensor> lowered;
  std::vector<Jet> norms;
  for (const JetTensor& u : frame) {
    JetTensor v = u;
    for (std::size_t k = 0; k < basis.size(); ++k) {
      Jet dot(0.0);
      for (int a = 0; a < n; ++a) dot += v[sz(a)] * lowered[k][sz(a)];
      Jet coef = dot / norms[k];
      for (int a = 0; a < n; ++a) v[sz(a)] -= coef * basis[k][sz(a)];
    }
    JetTensor vl = lower(v, 0, m);
    Jet norm(0.0);
    for (int a = 0; a < n; ++a) norm += v[sz(a)] * vl[sz(a)];
    if (std::fabs(norm.value()) < 1e-8) {
      throw DomainError("degenerate distribution: frame vector " + std::to_string(basis.size() + 1) +
                        " has |u.g.u| = " + std::to_string(std::fabs(norm.value())));
    }
    basis.push_back(std::move(v));
    lowered.push_back(std::move(vl));
    norms.push_back(std::move(norm));
  }
  JetTensor P(n, {D, D});
  for (int a = 0; a < n; ++a) {
    for (int b = a; b < n; ++b) {
      Jet s(0.0);
      for (std::size_t k = 0; k < basis.size(); ++k) s += lowered[k][sz(a)] * lowered[k][sz(b)] / norms[k];
      P(a, b) = s;
      P(b, a) = s;
    }
  }
  ProjectorPair pair = complete(m, std::move(P), ProjectorSource::Frame);
  check_rank(pair.p, n);
  return pair;
}

ProjectorPair build_projectors(const MetricAtPoint& m, JetTensor P) {
  ProjectorPair pair = complete(m, std::move(P), ProjectorSource::Direct);
  ProjectorResiduals r = projector_residuals(m, pair);
  if (r.trace_offset >= 1e-8) {
    throw ProjectorError("projector trace is not an integer (offset " + std::to_string(r.trace_offset) + ")");
  }
  check_rank(pair.p, m.dim());
  if (std::max({r.sum, r.idempotent_p, r.idempotent_pi, r.annihilate}) > 1e-10) {
    throw ProjectorError("projector identities violated: idempotency " +
                         std::to_string(std::max(r.idempotent_p, r.idempotent_pi)) + ", annihilation " +
                         std::to_string(r.annihilate));
  }
  return pair;
}

ProjectorResiduals projector_residuals(const MetricAtPoint& m, const ProjectorPair& pair) {
  ProjectorResiduals r;
  r.sum = max_abs(pair.P + pair.Pi - m.g);
  r.idempotent_p = max_product_residual(pair.P_mixed, pair.P_mixed, &pair.P_mixed);
  r.idempotent_pi = max_product_residual(pair.Pi_mixed, pair.Pi_mixed, &pair.Pi_mixed);
  r.annihilate = std::max(max_product_residual(pair.P_mixed, pair.Pi_mixed, nullptr),
                          max_product_residual(pair.Pi_mixed, pair.P_mixed, nullptr));
  double tr = mixed_trace(pair.P_mixed);
  r.trace_offset = std::fabs(tr - std::round(tr));
  return r;
}

DimensionBound dimension_bound(int p, int n) {
  const int q = n - p;
  if (p < 1 || q < 1) throw RankError("dimension bound needs 1 <= p <= n-1");
  const bool finite = !(p == 1 || p == 2 || q == 1 || q == 2);
  return {finite, static_cast<long>((p + 1) * (p + 2) / 2 + (q + 1) * (q + 2) / 2)};
}

// ---------------------------------------------------------------------------

BiconformalContext::BiconformalContext(MetricAtPoint metric, ProjectorPair pair)
    : metric_(std::move(metric)), pair_(std::move(pair)) {
  check_rank(pair_.p, pair_.n);
}

const JetTensor& BiconformalContext::gamma() {
  if (!gamma_) gamma_ = christoffel(metric_);
  return *gamma_;
}

const JetTensor& BiconformalContext::nabla_P() {
  if (!nabla_p_) nabla_p_ = covariant_derivative(pair_.P, gamma());
  return *nabla_p_;
}

void BiconformalContext::compute_mew() {
  const int n = pair_.n;
  const JetTensor& dp = nabla_P();
  JetTensor M(n, {D, D, D});
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = b; c < n; ++c) {
        Jet v = dp(b, a, c) + dp(c, a, b) - dp(a, b, c);
        M(a, b, c) = v;
        M(a, c, b) = v;
      }
    }
  }
  JetTensor E(n, {D});
  JetTensor W(n, {D});
  for (int a = 0; a < n; ++a) {
    Jet e(0.0);
    Jet w(0.0);
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        e += M(a, b, c) * pair_.P_up(b, c);
        w -= M(a, b, c) * pair_.Pi_up(b, c);
      }
    }
    E[sz(a)] = std::move(e);
    W[sz(a)] = std::move(w);
  }
  m_ = std::move(M);
  e_ = std::move(E);
  w_ = std::move(W);
}

const JetTensor& BiconformalContext::M() {
  if (!m_) compute_mew();
  return *m_;
}
const JetTensor& BiconformalContext::E() {
  if (!e_) compute_mew();
  return *e_;
}
const JetTensor& BiconformalContext::W() {
  if (!w_) compute_mew();
  return *w_;
}

const JetTensor& BiconformalContext::gamma_bar() {
  if (gamma_bar_) return *gamma_bar_;
  const int n = pair_.n;
  const double kp = 1.0 / (2.0 * pair_.p);
  const double kq = 1.0 / (2.0 * (n - pair_.p));
  const JetTensor& G = gamma();
  const JetTensor& Mt = M();
  const JetTensor& Et = E();
  const JetTensor& Wt = W();
  const JetTensor Mup = raise(Mt, 0, metric_);  // M^q_bc
  const JetTensor& Pm = pair_.P_mixed;
  const JetTensor& Qm = pair_.Pi_mixed;
  JetTensor gb(n, {U, D, D});
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = b; c < n; ++c) {
        Jet v = G(a, b, c) + kp * (Et[sz(b)] * Pm(a, c) + Et[sz(c)] * Pm(a, b)) +
                kq * (Wt[sz(b)] * Qm(a, c) + Wt[sz(c)] * Qm(a, b));
        Jet s(0.0);
        for (int q = 0; q < n; ++q) s += (Pm(a, q) - Qm(a, q)) * Mup(q, b, c);
        v += 0.5 * s;
        gb(a, b, c) = v;
        gb(a, c, b) = v;
      }
    }
  }
  gamma_bar_ = std::move(gb);
  return *gamma_bar_;
}

const JetTensor& BiconformalContext::riemann_bar() {
  if (!riemann_bar_) riemann_bar_ = riemann(gamma_bar());
  return *riemann_bar_;
}

void BiconformalContext::compute_L(Leaf side) {
  const int rank = leaf_rank(side);
  if (rank == 1 || rank == 2) {
    throw RankError(std::string(side == Leaf::P ? "L0" : "L1") + ": L-tensors undefined at this rank (" +
                    std::to_string(rank) + ")");
  }
  const int n = pair_.n;
  const JetTensor& R = riemann_bar();
  const JetTensor& Pm = mixed(side);
  const JetTensor& Pl = low(side);
  const JetTensor& Pu = up(side);
  // A_cb = P^d_r R^r_cdb ; Q_db = P^r_q R^q_rdb
  JetTensor A(n, {D, D});
  JetTensor Q(n, {D, D});
  for (int x = 0; x < n; ++x) {
    for (int y = 0; y < n; ++y) {
      Jet a(0.0);
      Jet q(0.0);
      for (int d = 0; d < n; ++d) {
        for (int r = 0; r < n; ++r) {
          a += Pm(d, r) * R(r, x, d, y);
          q += Pm(r, d) * R(d, r, x, y);
        }
      }
      A(x, y) = std::move(a);
      Q(x, y) = std::move(q);
    }
  }
  Jet trace(0.0);
  for (int c = 0; c < n; ++c) {
    for (int b = 0; b < n; ++b) trace += A(c, b) * Pu(c, b);
  }
  const double inv_rank = 1.0 / rank;
  const double k1 = 1.0 / (1.0 - rank);
  JetTensor L(n, {D, D});
  for (int b = 0; b < n; ++b) {
    for (int c = 0; c < n; ++c) {
      Jet s1(0.0);
      Jet s2(0.0);
      for (int d = 0; d < n; ++d) {
        s1 += Pm(d, c) * Q(d, b);
        s2 += Pm(d, b) * Q(d, c);
      }
      L(b, c) = 2.0 * (A(c, b) - inv_rank * (s1 + s2 - Q(b, c))) + k1 * trace * Pl(b, c);
    }
  }
  l_[idx(side)] = std::move(L);
  r_bar_trace_[idx(side)] = std::move(trace);
}

const JetTensor& BiconformalContext::L(Leaf side) {
  if (!l_[idx(side)]) compute_L(side);
  return *l_[idx(side)];
}

const Jet& BiconformalContext::R_bar_trace(Leaf side) {
  if (!r_bar_trace_[idx(side)]) compute_L(side);
  return *r_bar_trace_[idx(side)];
}

const JetTensor& BiconformalContext::t3() {
  if (t3_) return *t3_;
  const int n = pair_.n;
  const double ip = 1.0 / pair_.p;
  const double iq = 1.0 / (n - pair_.p);
  const JetTensor& Mt = M();
  const JetTensor& Et = E();
  const JetTensor& Wt = W();
  JetTensor T(n, {D, D, D});
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        T(a, b, c) = Mt(a, b, c) - ip * Et[sz(a)] * pair_.P(b, c) + iq * Wt[sz(a)] * pair_.Pi(b, c);
      }
    }
  }
  t3_ = std::move(T);
  return *t3_;
}

namespace {

// -2/(2 - rank) (P^d_c L_[ab] + P^d_[b L_a]c + P_c[a L_b]q P^qd), indexed (d, c, a, b).
JetTensor t4_leaf_term(const JetTensor& Pm, const JetTensor& Pl, const JetTensor& Pu, const JetTensor& L, int rank) {
  const int n = L.dim();
  JetTensor K(n, {D, U});  // K_b^d = L_bq P^qd
  for (int b = 0; b < n; ++b) {
    for (int d = 0; d < n; ++d) {
      Jet s(0.0);
      for (int q = 0; q < n; ++q) s += L(b, q) * Pu(q, d);
      K(b, d) = std::move(s);
    }
  }
  const double k = -2.0 / (2.0 - rank);
  JetTensor out(n, {U, D, D, D});
  for (int d = 0; d < n; ++d) {
    for (int c = 0; c < n; ++c) {
      for (int a = 0; a < n; ++a) {
        for (int b = 0; b < n; ++b) {
          Jet v = Pm(d, c) * (L(a, b) - L(b, a)) + Pm(d, b) * L(a, c) - Pm(d, a) * L(b, c) +
                  Pl(c, a) * K(b, d) - Pl(c, b) * K(a, d);
          out(d, c, a, b) = (0.5 * k) * v;
        }
      }
    }
  }
  return out;
}

}  // namespace

const JetTensor& BiconformalContext::t4() {
  if (t4_) return *t4_;
  JetTensor T = scale(riemann_bar(), 2.0);
  T = T + t4_leaf_term(pair_.P_mixed, pair_.P, pair_.P_up, L(Leaf::P), leaf_rank(Leaf::P));
  T = T + t4_leaf_term(pair_.Pi_mixed, pair_.Pi, pair_.Pi_up, L(Leaf::Pi), leaf_rank(Leaf::Pi));
  t4_ = std::move(T);
  return *t4_;
}

const JetTensor& BiconformalContext::t4_projected(Leaf side) {
  auto& cache = t4p_[idx(side)];
  if (cache) return *cache;
  // Terms of the complementary leaf vanish under full projection.
  JetTensor T = scale(riemann_bar(), 2.0);
  T = T + t4_leaf_term(mixed(side), low(side), up(side), L(side), leaf_rank(side));
  const JetTensor& Pm = mixed(side);
  JetTensor X = apply_matrix(T, 0, Pm, U);
  JetTensor Pt = permute(Pm, {1, 0});  // Pt(b, q) = P^q_b
  for (int slot = 1; slot < 4; ++slot) X = apply_matrix(X, slot, Pt, D);
  cache = std::move(X);
  return *cache;
}

const JetTensor& BiconformalContext::rank3(Leaf side) {
  auto& cache = rank3_[idx(side)];
  if (cache) return *cache;
  if (leaf_rank(side) != 3) {
    throw RankError("rank-3 condition requires a leaf of rank 3 (have " + std::to_string(leaf_rank(side)) + ")");
  }
  JetTensor dl = covariant_derivative(L(side), gamma_bar());  // (a, b, c) = Dbar_a L_bc
  cache = antisymmetrize(dl, {0, 1});
  return *cache;
}

const JetTensor& BiconformalContext::projected_rank3(Leaf side) {
  auto& cache = projected_rank3_[idx(side)];
  if (cache) return *cache;
  JetTensor X = rank3(side);
  JetTensor Pt = permute(mixed(side), {1, 0});
  for (int slot = 0; slot < 3; ++slot) X = apply_matrix(X, slot, Pt, D);
  cache = std::move(X);
  return *cache;
}

const JetTensor& BiconformalContext::nabla_bar_P() {
  if (!nabla_bar_p_) nabla_bar_p_ = covariant_derivative(pair_.P, gamma_bar());
  return *nabla_bar_p_;
}

const JetTensor& BiconformalContext::nabla_bar_Pi() {
  if (!nabla_bar_pi_) nabla_bar_pi_ = covariant_derivative(pair_.Pi, gamma_bar());
  return *nabla_bar_pi_;
}

const JetTensor& BiconformalContext::lambda(Leaf side) {
  auto& cache = lambda_[idx(side)];
  if (cache) return *cache;
  const int n = pair_.n;
  const JetTensor& dp = side == Leaf::P ? nabla_bar_P() : nabla_bar_Pi();
  const JetTensor& Pu = up(side);
  JetTensor Lam(n, {U, D, D});
  for (int d = 0; d < n; ++d) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        Jet s(0.0);
        for (int r = 0; r < n; ++r) s += Pu(d, r) * dp(r, b, c);
        Lam(d, b, c) = 2.0 * s;
      }
    }
  }
  cache = std::move(Lam);
  return *cache;
}

const JetTensor& BiconformalContext::upsilon(Leaf side) {
  auto& cache = upsilon_[idx(side)];
  if (cache) return *cache;
  const int n = pair_.n;
  const JetTensor& dp = side == Leaf::P ? nabla_bar_P() : nabla_bar_Pi();
  const JetTensor& Pu = up(side);
  JetTensor dpu = covariant_derivative(Pu, gamma_bar());  // (b, s, c) = Dbar_b P^sc
  const double k = 2.0 - leaf_rank(side);
  JetTensor Ups(n, {U, U, D});
  for (int s = 0; s < n; ++s) {
    for (int c = 0; c < n; ++c) {
      for (int b = 0; b < n; ++b) {
        Jet v(0.0);
        for (int r = 0; r < n; ++r) {
          for (int q = 0; q < n; ++q) v += Pu(s, r) * Pu(c, q) * dp(r, q, b);
        }
        Ups(s, c, b) = 2.0 * v + k * dpu(b, s, c);
      }
    }
  }
  cache = std::move(Ups);
  return *cache;
}

// ---------------------------------------------------------------------------

FieldCheck verify_biconformal_field(BiconformalContext& ctx, const JetTensor& xi, double tol) {
  const ProjectorPair& pr = ctx.pair();
  const MetricAtPoint& m = ctx.metric();
  const int n = pr.n;
  const int p = pr.p;
  JetTensor lp = lie_derivative(pr.P, xi);
  JetTensor lq = lie_derivative(pr.Pi, xi);
  Jet phi(0.0);
  Jet chi(0.0);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      phi += pr.P_up(a, b) * lp(a, b);
      chi += pr.Pi_up(a, b) * lq(a, b);
    }
  }
  phi *= 1.0 / p;
  chi *= 1.0 / (n - p);

  FieldCheck out;
  out.phi = phi.value();
  out.chi = chi.value();
  out.residual_p = max_abs(lp - phi * pr.P);
  out.residual_pi = max_abs(lq - chi * pr.Pi);
  if (out.residual_p >= tol || out.residual_pi >= tol) return out;

  // phibar_a = P_a^b d_b phi, chibar_a = Pi_a^b d_b chi, raised with g.
  JetTensor dphi(n, {D});
  JetTensor dchi(n, {D});
  for (int b = 0; b < n; ++b) {
    dphi[sz(b)] = phi.derivative(b);
    dchi[sz(b)] = chi.derivative(b);
  }
  JetTensor phibar(n, {D});
  JetTensor chibar(n, {D});
  for (int a = 0; a < n; ++a) {
    Jet s(0.0);
    Jet t(0.0);
    for (int b = 0; b < n; ++b) {
      s += pr.P_mixed(b, a) * dphi[sz(b)];
      t += pr.Pi_mixed(b, a) * dchi[sz(b)];
    }
    phibar[sz(a)] = std::move(s);
    chibar[sz(a)] = std::move(t);
  }
  JetTensor phibar_up = raise(phibar, 0, m);
  JetTensor chibar_up = raise(chibar, 0, m);
  const JetTensor& Pm = pr.P_mixed;
  const JetTensor& Qm = pr.Pi_mixed;
  JetTensor lg = lie_derivative_connection(ctx.gamma_bar(), xi);
  double worst = 0.0;
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) {
      for (int c = 0; c < n; ++c) {
        Jet want = 0.5 * (phibar[sz(b)] * Pm(a, c) + phibar[sz(c)] * Pm(a, b) - phibar_up[sz(a)] * pr.P(c, b) +
                          chibar[sz(b)] * Qm(a, c) + chibar[sz(c)] * Qm(a, b) - chibar_up[sz(a)] * pr.Pi(c, b));
        worst = std::max(worst, std::fabs(lg(a, b, c).value() - want.value()));
      }
    }
  }
  out.connection_residual = worst;
  return out;
}

}  // namespace biconf
