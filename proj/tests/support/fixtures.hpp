#pragma once

// Problem builders shared by the biconformal, classify and acceptance tests.

#include "biconf/classify.hpp"
#include "biconf/expr.hpp"

#include "oracle.hpp"

#include <random>
#include <string>
#include <vector>

namespace fixtures {

using biconf::Interval;
using biconf::Problem;

inline std::vector<biconf::Expr> parse_all(const std::vector<std::string>& texts, const std::vector<std::string>& chart) {
  std::vector<biconf::Expr> out;
  for (const auto& t : texts) out.push_back(biconf::parse(t, chart));
  return out;
}

/// Frame given as coordinate directions (0-based).
inline Problem coordinate_frame_problem(const std::vector<std::string>& chart, const std::vector<std::string>& metric,
                                        const std::vector<int>& directions, std::vector<Interval> domain) {
  Problem pr;
  pr.metric = oracle::symbolic_metric(chart, metric);
  pr.projector.mode = biconf::ProjectorSource::Frame;
  const int n = static_cast<int>(chart.size());
  for (int d : directions) {
    std::vector<std::string> v(static_cast<std::size_t>(n), "0");
    v[static_cast<std::size_t>(d)] = "1";
    pr.projector.frame.push_back(parse_all(v, chart));
  }
  pr.domain = std::move(domain);
  return pr;
}

inline std::vector<Interval> box(int n, double lo, double hi) { return std::vector<Interval>(static_cast<std::size_t>(n), {lo, hi}); }

/// ds^2 = Psi2 sin^2(theta) (dt + dphi)^2 - alpha dt^2 + B2 (dr^2 + r^2 dtheta^2), frame {d_r, d_theta, d_phi}.
inline Problem example1_family(const std::string& psi2, const std::string& b2, const std::string& alpha) {
  const std::vector<std::string> chart{"t", "r", "theta", "phi"};
  const std::string w = "(" + psi2 + ")*sin(theta)^2";
  auto g = oracle::sparse_metric(4, {{0, 0, w + " - (" + alpha + ")"},
                                     {0, 3, w},
                                     {3, 3, w},
                                     {1, 1, b2},
                                     {2, 2, "(" + b2 + ")*r^2"}});
  return coordinate_frame_problem(chart, g, {1, 2, 3}, {{0.0, 1.0}, {0.5, 2.0}, {0.5, 2.5}, {0.5, 5.5}});
}

inline Problem example1() { return example1_family("r^2*(1+r^2)", "1+r^2", "-r^2"); }

/// The same metric in (T, x, y, z); leaves T = const.
inline Problem example1_cartesian() {
  const std::vector<std::string> chart{"T", "x", "y", "z"};
  auto g = oracle::sparse_metric(4, {{0, 0, "x^2+y^2+z^2"},
                                     {1, 1, "1+x^2+y^2+z^2"},
                                     {2, 2, "1+x^2+y^2+z^2"},
                                     {3, 3, "1+x^2+y^2+z^2"}});
  return coordinate_frame_problem(chart, g, {1, 2, 3}, {{-1.0, 2.0}, {-3.0, 3.0}, {-3.0, 3.0}, {-3.0, 3.0}});
}

inline std::vector<biconf::Expr> example1_change() {
  return parse_all({"t", "r*sin(theta)*cos(t+phi)", "r*sin(theta)*sin(t+phi)", "r*cos(theta)"},
                   {"t", "r", "theta", "phi"});
}

/// Phi (dx1^2 + dx2^2 + dx3^2) + 2 beta_i dx^i dx4 + Psi dx4^2 with random smooth Phi > 0, beta_i, Psi.
inline Problem example2_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  auto c = [&] { return std::to_string(u(rng)); };
  const std::string phi = "(2 + 0.3*" + c() + "*x1*x2 + 0.5*x3^2 + 0.3*" + c() + "*x4 + 0.3*x1*x4^2 + 0.3*" + c() + "*x2*x3)";
  std::vector<std::string> beta;
  for (int i = 0; i < 3; ++i) {
    beta.push_back("0.4*sin(" + c() + "*x1 + " + c() + "*x2 + " + c() + "*x3 + " + c() + "*x4)");
  }
  const std::string psi = "(-3 + " + c() + "*cos(x1 + " + c() + "*x4) + 0.2*x2*x3)";
  auto g = oracle::sparse_metric(4, {{0, 0, phi}, {1, 1, phi}, {2, 2, phi}, {0, 3, beta[0]}, {1, 3, beta[1]},
                                     {2, 3, beta[2]}, {3, 3, psi}});
  return coordinate_frame_problem(oracle::coordinate_names(4), g, {0, 1, 2}, box(4, 0.0, 1.0));
}

/// Xi1(x) G_ab(x_P) + Xi2(x) G_AB(x_Pi) block metric with leaf coordinates first.
inline Problem separable(int p, int q, const std::string& xi1, const std::string& xi2,
                         const std::vector<std::string>& leaf1, const std::vector<std::string>& leaf2) {
  const int n = p + q;
  std::vector<std::string> g(static_cast<std::size_t>(n * n), "0");
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) g[static_cast<std::size_t>(i * n + j)] = "(" + xi1 + ")*(" + leaf1[static_cast<std::size_t>(i * p + j)] + ")";
  }
  for (int i = 0; i < q; ++i) {
    for (int j = 0; j < q; ++j) {
      g[static_cast<std::size_t>((p + i) * n + p + j)] = "(" + xi2 + ")*(" + leaf2[static_cast<std::size_t>(i * q + j)] + ")";
    }
  }
  std::vector<int> dirs;
  for (int i = 0; i < p; ++i) dirs.push_back(i);
  return coordinate_frame_problem(oracle::coordinate_names(n), g, dirs, box(n, 0.5, 1.5));
}

/// Generic (non conformally flat) block on the coordinates x_{first+1}..x_{first+k}.
inline std::vector<std::string> generic_block(int k, int first) {
  std::vector<std::string> b(static_cast<std::size_t>(k * k), "0");
  auto x = [&](int i) { return "x" + std::to_string(first + i + 1); };
  for (int i = 0; i < k; ++i) {
    b[static_cast<std::size_t>(i * k + i)] =
        "(" + std::to_string(2 + i) + " + 0.3*sin(" + x(i) + "+" + x((i + 1) % k) + ") + 0.2*" + x((i + 2) % k) + "^2)";
    for (int j = i + 1; j < k; ++j) {
      std::string e = "0.1*cos(" + x(i) + "*" + x(j) + ")";
      b[static_cast<std::size_t>(i * k + j)] = e;
      b[static_cast<std::size_t>(j * k + i)] = e;
    }
  }
  return b;
}

/// Conformally flat block: sigma(x) * diag(eps).
inline std::vector<std::string> conformally_flat_block(int k, int first, int negatives = 0) {
  std::vector<std::string> b(static_cast<std::size_t>(k * k), "0");
  std::string sigma = "exp(0.2*x" + std::to_string(first + 1);
  for (int i = 1; i < k; ++i) sigma += " + 0.1*x" + std::to_string(first + i + 1) + "^2";
  sigma += ")";
  for (int i = 0; i < k; ++i) b[static_cast<std::size_t>(i * k + i)] = (i < negatives ? "-" : "") + sigma;
  return b;
}

inline std::vector<std::string> flat_block(int k) {
  std::vector<std::string> b(static_cast<std::size_t>(k * k), "0");
  for (int i = 0; i < k; ++i) b[static_cast<std::size_t>(i * k + i)] = "1";
  return b;
}

}  // namespace fixtures
