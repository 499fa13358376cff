#pragma once

// Sampling, tolerance policy and theorem-level verdicts.

#include "biconf/biconformal.hpp"
#include "biconf/expr.hpp"
#include "biconf/geometry.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace biconf {

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct ProjectorSpec {
  ProjectorSource mode = ProjectorSource::Frame;
  std::vector<std::vector<Expr>> frame;  // contravariant components per vector
  std::vector<Expr> components;          // full row-major n x n P_ab
};

/// Everything the analysis needs about one chart.
struct Problem {
  SymbolicMetric metric;
  ProjectorSpec projector;
  std::vector<Interval> domain;  // declared chart domain
  std::map<std::string, std::vector<Expr>> fields;

  int dim() const { return metric.dim(); }
};

/// Metric and projectors at a point; the metric (and direct projector
/// components) are multiplied by `scale`.
BiconformalContext make_context(const Problem& problem, std::span<const double> point, int order, double scale = 1.0);

struct SamplingPlan {
  std::vector<Interval> box;  // empty: use the chart domain
  int samples = 64;
  std::uint64_t seed = 1;
  int oversampling = 10;
  double tolerance = 1e-8;
  std::optional<int> jet_order;
  int threads = 0;  // 0: hardware concurrency
};

enum class Status { Pass, Fail, Inconclusive, Skipped };

const char* to_string(Status s);

/// PASS below tol, FAIL above 1e3 * tol, INCONCLUSIVE in between.
Status classify_norm(double value, double tol);

struct ConditionRecord {
  std::string name;
  double max_abs = 0.0;
  double tolerance = 0.0;
  Status status = Status::Skipped;
  std::string note;
};

struct Verdict {
  std::optional<bool> value;  // nullopt: undecided
  std::vector<std::string> cites;
  std::string note;
};

struct AnalysisReport {
  std::vector<ConditionRecord> conditions;
  Verdict conformally_separable;
  Verdict bi_conformally_flat;
  Verdict p_leaf_conformally_flat;
  Verdict pi_leaf_conformally_flat;
  bool rank3_path_used = false;
  std::optional<DimensionBound> dimension;

  // environment
  std::uint64_t seed = 0;
  int samples = 0;
  int jet_order = 0;
  double tolerance = 0.0;
  double normalization = 1.0;
  int p = 0;
  int n = 0;
  std::vector<int> signature;
  std::vector<std::string> chart;
  std::vector<std::vector<double>> points;

  const ConditionRecord* find(const std::string& name) const;
};

/// Draw i.i.d. uniform points from the plan's box, rejecting points where
/// the metric or projectors cannot be evaluated (|det g| <= 1e-10, domain
/// errors). Throws SamplingError after oversampling * samples draws.
std::vector<std::vector<double>> draw_samples(const Problem& problem, const SamplingPlan& plan);

/// Jet order needed for the analysis (3 when a rank-3 leaf is present).
int required_jet_order(const Problem& problem, std::span<const double> point);

AnalysisReport run_analysis(const Problem& problem, const SamplingPlan& plan);
/// Same analysis on explicit points.
AnalysisReport run_analysis(const Problem& problem, const SamplingPlan& plan,
                            const std::vector<std::vector<double>>& points);

std::string to_json(const AnalysisReport& report, int indent = 2);

struct CoordinateChangeRecord {
  int samples = 0;
  double max_metric_difference = 0.0;
  double tolerance = 1e-8;
  bool metrics_agree = false;
  bool verdicts_agree = false;
  AnalysisReport report_a;
  AnalysisReport report_b;
};

/// `change` gives the coordinates of chart B as expressions in chart A.
/// Pulls B's metric back through the change and compares it with A's metric
/// at A's samples; both charts are classified at corresponding points.
CoordinateChangeRecord verify_coordinate_change(const Problem& a, const Problem& b, const std::vector<Expr>& change,
                                                const SamplingPlan& plan, double tolerance = 1e-8);

struct FieldReport {
  std::string name;
  int samples = 0;
  double max_residual_p = 0.0;
  double max_residual_pi = 0.0;
  std::optional<double> max_connection_residual;
  double phi_min = 0.0, phi_max = 0.0, phi_mean = 0.0;
  double chi_min = 0.0, chi_max = 0.0, chi_mean = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

FieldReport verify_field(const Problem& problem, const std::string& name, const SamplingPlan& plan);

}  // namespace biconf
