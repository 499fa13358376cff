#pragma once

// Christoffel symbols, curvature, Weyl tensor, covariant and Lie derivatives.
//
// Riemann convention:
//   R^a_bcd = d_c G^a_db - d_d G^a_cb + G^a_rc G^r_db - G^a_rd G^r_cb
// Ricci R_bd = R^a_bad. For this convention the Ricci identity reads
//   (D_b D_c - D_c D_b) u_a = -R^r_abc u_r.

#include "biconf/expr.hpp"
#include "biconf/tensor.hpp"

#include <span>
#include <string>
#include <vector>

namespace biconf {

/// Metric components as expressions, full row-major n x n (symmetric).
struct SymbolicMetric {
  std::vector<std::string> chart;
  std::vector<Expr> components;

  int dim() const { return static_cast<int>(chart.size()); }
  const Expr& at(int i, int j) const { return components[static_cast<std::size_t>(i * dim() + j)]; }
};

/// Coordinate seeds x^i at `point`, truncated at `order`.
std::vector<Jet> seed_point(std::span<const double> point, int order);

/// Evaluate an n x n expression array as a (down, down) tensor, scaled by `factor`.
JetTensor evaluate_tensor2(std::span<const Expr> components, int dim, std::span<const Jet> vars, double factor = 1.0);

/// Vector field components (up).
JetTensor evaluate_vector(std::span<const Expr> components, std::span<const Jet> vars);

/// Partial derivative; the new first slot is the derivative slot (down).
JetTensor partial_derivative(const JetTensor& t);

/// Levi-Civita connection G^a_bc (up, down, down), one jet order below g.
JetTensor christoffel(const MetricAtPoint& m);

/// Curvature of a symmetric or general affine connection (up, down, down, down).
JetTensor riemann(const JetTensor& gamma);
/// R_bd = R^a_bad.
JetTensor ricci(const JetTensor& riem);
Jet scalar_curvature(const JetTensor& ric, const MetricAtPoint& m);

/// Standard Weyl tensor C^a_bcd of a metric with n >= 3.
JetTensor weyl(const JetTensor& riem, const MetricAtPoint& m);

/// D_e t with e as the new first slot.
JetTensor covariant_derivative(const JetTensor& t, const JetTensor& gamma);

/// Lie derivative of a tensor along a vector field.
JetTensor lie_derivative(const JetTensor& t, const JetTensor& xi);

/// Lie derivative of connection coefficients (a tensor in up, down, down).
JetTensor lie_derivative_connection(const JetTensor& gamma, const JetTensor& xi);

/// Metric of the leaf through `point` spanned by the coordinates in `leaf`:
/// the corresponding block of g with jets seeded in those coordinates only.
MetricAtPoint leaf_metric(const SymbolicMetric& metric, std::span<const int> leaf, std::span<const double> point,
                          int order, double factor = 1.0);

}  // namespace biconf
