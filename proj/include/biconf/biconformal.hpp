#pragma once

// Projector pairs, the bi-conformal connection and the tensors built on it.
//
// Given complementary orthogonal projectors P + Pi = g with rank p:
//   M_abc = D_b P_ac + D_c P_ab - D_a P_bc,  E_a = M_abc P^bc,  W_a = -M_abc Pi^bc
//   gbar^a_bc = G^a_bc + (E_b P^a_c + E_c P^a_b)/(2p) + (W_b Pi^a_c + W_c Pi^a_b)/(2(n-p))
//               + (P^a_q - Pi^a_q) M^q_bc / 2
// Rbar is the curvature of gbar (same convention as geometry.hpp).

#include "biconf/geometry.hpp"
#include "biconf/tensor.hpp"

#include <optional>
#include <vector>

namespace biconf {

enum class ProjectorSource { Direct, Frame };

struct ProjectorPair {
  JetTensor P;         // P_ab
  JetTensor Pi;        // Pi_ab
  JetTensor P_mixed;   // P^a_b
  JetTensor Pi_mixed;  // Pi^a_b
  JetTensor P_up;      // P^ab
  JetTensor Pi_up;     // Pi^ab
  int p = 0;
  int n = 0;
  ProjectorSource source = ProjectorSource::Direct;
};

/// Largest violations of P + Pi = g, idempotency and mutual annihilation.
struct ProjectorResiduals {
  double sum = 0.0;
  double idempotent_p = 0.0;
  double idempotent_pi = 0.0;
  double annihilate = 0.0;
  double trace_offset = 0.0;  // |tr P - round(tr P)|

  double max() const;
};

/// Gram-Schmidt on `frame` (contravariant vectors, user order). Throws
/// DomainError when an intermediate |u.g.u| < 1e-8 and RankError when the
/// frame size is outside [1, n-1].
ProjectorPair build_projectors(const MetricAtPoint& m, const std::vector<JetTensor>& frame);

/// Validates P_ab given directly; throws ProjectorError beyond 1e-10.
ProjectorPair build_projectors(const MetricAtPoint& m, JetTensor P);

ProjectorResiduals projector_residuals(const MetricAtPoint& m, const ProjectorPair& pair);

struct DimensionBound {
  bool finite = false;
  long value = 0;
};

/// N = (p+1)(p+2)/2 + (n-p+1)(n-p+2)/2. `finite` is false when p or n-p is
/// 1 or 2; the algebra is then infinite-dimensional and N is only the formula value.
DimensionBound dimension_bound(int p, int n);

enum class Leaf { P, Pi };

/// Lazily evaluated bi-conformal quantities at one point. Not thread-safe;
/// use one context per worker.
class BiconformalContext {
 public:
  BiconformalContext(MetricAtPoint metric, ProjectorPair pair);

  const MetricAtPoint& metric() const { return metric_; }
  const ProjectorPair& pair() const { return pair_; }
  int p() const { return pair_.p; }
  int n() const { return pair_.n; }

  const JetTensor& gamma();
  const JetTensor& nabla_P();  // (a, b, c) = D_a P_bc
  const JetTensor& M();
  const JetTensor& E();
  const JetTensor& W();
  const JetTensor& gamma_bar();
  const JetTensor& riemann_bar();

  /// L0 (P side) or L1 (Pi side). Throws RankError when the leaf rank is 1 or 2.
  const JetTensor& L(Leaf side);
  /// Rbar^0 or Rbar^1.
  const Jet& R_bar_trace(Leaf side);

  const JetTensor& t3();
  /// T^d_cab; needs both leaf ranks outside {1, 2}.
  const JetTensor& t4();
  /// P^a_r P^q_b P^s_c P^t_d T^r_qst (or the Pi analogue); needs only the
  /// L tensor of that side.
  const JetTensor& t4_projected(Leaf side = Leaf::P);

  /// Dbar_[a L_b]c for a leaf of rank 3.
  const JetTensor& rank3(Leaf side);
  /// Fully projected version of rank3(side).
  const JetTensor& projected_rank3(Leaf side);

  const JetTensor& nabla_bar_P();   // (a, b, c) = Dbar_a P_bc
  const JetTensor& nabla_bar_Pi();  // (a, b, c) = Dbar_a Pi_bc
  const JetTensor& lambda(Leaf side);
  const JetTensor& upsilon(Leaf side);

  /// Rank of the requested leaf.
  int leaf_rank(Leaf side) const { return side == Leaf::P ? pair_.p : pair_.n - pair_.p; }

 private:
  const JetTensor& mixed(Leaf side) const { return side == Leaf::P ? pair_.P_mixed : pair_.Pi_mixed; }
  const JetTensor& low(Leaf side) const { return side == Leaf::P ? pair_.P : pair_.Pi; }
  const JetTensor& up(Leaf side) const { return side == Leaf::P ? pair_.P_up : pair_.Pi_up; }
  static int idx(Leaf side) { return side == Leaf::P ? 0 : 1; }
  void compute_mew();
  void compute_L(Leaf side);

  MetricAtPoint metric_;
  ProjectorPair pair_;

  std::optional<JetTensor> gamma_, nabla_p_, m_, e_, w_, gamma_bar_, riemann_bar_;
  std::optional<JetTensor> t3_, t4_;
  std::optional<JetTensor> nabla_bar_p_, nabla_bar_pi_;
  std::optional<JetTensor> l_[2], t4p_[2], rank3_[2], projected_rank3_[2], lambda_[2], upsilon_[2];
  std::optional<Jet> r_bar_trace_[2];
};

/// Result of checking a candidate bi-conformal vector field at one point.
struct FieldCheck {
  double phi = 0.0;
  double chi = 0.0;
  double residual_p = 0.0;    // max |Lie_xi P - phi P|
  double residual_pi = 0.0;   // max |Lie_xi Pi - chi Pi|
  std::optional<double> connection_residual;  // Lie_xi gbar identity, when evaluated
};

/// xi: contravariant field at the point (jets of order >= 2 for the
/// connection cross-check). The connection identity is evaluated only when
/// both residuals are below `tol`.
FieldCheck verify_biconformal_field(BiconformalContext& ctx, const JetTensor& xi, double tol);

}  // namespace biconf
