#include "biconf/classify.hpp"

#include "biconf/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <limits>
#include <random>
#include <thread>

namespace biconf {

namespace {

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

const char* leaf_tag(Leaf side) { return side == Leaf::P ? "P" : "Pi"; }

std::vector<Interval> effective_box(const Problem& problem, const SamplingPlan& plan) {
  const std::vector<Interval>& box = plan.box.empty() ? problem.domain : plan.box;
  if (static_cast<int>(box.size()) != problem.dim()) throw ManifestError("sampling box has the wrong dimension");
  for (std::size_t i = 0; i < box.size(); ++i) {
    if (!std::isfinite(box[i].low) || !std::isfinite(box[i].high)) {
      throw ManifestError("sampling interval for '" + problem.metric.chart[i] + "' is unbounded; give a finite [plan].box");
    }
    if (!(box[i].low < box[i].high)) {
      throw ManifestError("sampling interval for '" + problem.metric.chart[i] + "' is empty");
    }
    if (i < problem.domain.size() && (box[i].low < problem.domain[i].low || box[i].high > problem.domain[i].high)) {
      throw ManifestError("sampling interval for '" + problem.metric.chart[i] + "' leaves the chart domain");
    }
  }
  return box;
}

// Uniform double in (0, 1) from the top 53 bits.
double open_unit(std::mt19937_64& rng) {
  for (;;) {
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    if (u > 0.0) return u;
  }
}

double metric_scale(const Problem& problem, const std::vector<std::vector<double>>& points) {
  const int n = problem.dim();
  double biggest = 0.0;
  for (const auto& pt : points) {
    for (int i = 0; i < n; ++i) {
      for (int j = i; j < n; ++j) {
        biggest = std::max(biggest, std::fabs(problem.metric.at(i, j).evaluate<double>(pt)));
      }
    }
  }
  return biggest > 0.0 ? 1.0 / biggest : 1.0;
}

int worker_count(const SamplingPlan& plan, std::size_t jobs) {
  int t = plan.threads > 0 ? plan.threads : static_cast<int>(std::thread::hardware_concurrency());
  t = std::max(1, t);
  return static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(t), std::max<std::size_t>(jobs, 1)));
}

/// Runs fn(i) for i in [0, count) on a pool; the first failure by index is rethrown.
template <class Fn>
void parallel_for(std::size_t count, int threads, Fn fn) {
  std::vector<std::exception_ptr> errors(count);
  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (;;) {
      std::size_t i = next.fetch_add(1);
      if (i >= count) return;
      try {
        fn(i);
      } catch (...) {
        errors[i] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < threads; ++t) pool.emplace_back(work);
    for (auto& th : pool) th.join();
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

struct ConditionPlan {
  std::string name;
  enum Kind { T3, T4, TLeaf, Rank3, ProjectedRank3 } kind;
  Leaf side = Leaf::P;
};

std::vector<ConditionPlan> plan_conditions(int p, int n) {
  std::vector<ConditionPlan> out;
  out.push_back({"T_abc", ConditionPlan::T3, Leaf::P});
  for (Leaf side : {Leaf::P, Leaf::Pi}) {
    const int rank = side == Leaf::P ? p : n - p;
    if (rank >= 4) out.push_back({std::string("T(") + leaf_tag(side) + ")", ConditionPlan::TLeaf, side});
    if (rank == 3) {
      out.push_back({std::string("rank3(") + leaf_tag(side) + ")", ConditionPlan::Rank3, side});
      out.push_back({std::string("projected-rank3(") + leaf_tag(side) + ")", ConditionPlan::ProjectedRank3, side});
    }
  }
  if (p >= 3 && n - p >= 3) out.push_back({"T^d_cab", ConditionPlan::T4, Leaf::P});
  return out;
}

double evaluate_condition(BiconformalContext& ctx, const ConditionPlan& c) {
  switch (c.kind) {
    case ConditionPlan::T3: return max_abs(ctx.t3());
    case ConditionPlan::T4: return max_abs(ctx.t4());
    case ConditionPlan::TLeaf: return max_abs(ctx.t4_projected(c.side));
    case ConditionPlan::Rank3: return max_abs(ctx.rank3(c.side));
    case ConditionPlan::ProjectedRank3: return max_abs(ctx.projected_rank3(c.side));
  }
  return 0.0;
}

Verdict from_record(const ConditionRecord& r) {
  Verdict v;
  v.cites = {r.name};
  if (r.status == Status::Pass) v.value = true;
  if (r.status == Status::Fail) v.value = false;
  if (r.status == Status::Inconclusive) v.note = "norm between tolerance and 1e3 x tolerance";
  if (r.status == Status::Skipped) v.note = r.note;
  return v;
}

Verdict leaf_verdict(const AnalysisReport& rep, Leaf side, int rank, bool& rank3_used) {
  const std::string tag = leaf_tag(side);
  Verdict v;
  if (rank <= 2) {
    v.value = true;
    v.note = "leaf of rank " + std::to_string(rank) + ": undecidable by this method; every metric of dimension <= 2 is conformally flat";
    return v;
  }
  const std::string name = rank == 3 ? "rank3(" + tag + ")" : "T(" + tag + ")";
  const ConditionRecord* r = rep.find(name);
  if (!r) {
    v.note = "condition " + name + " not evaluated";
    return v;
  }
  if (rank == 3) rank3_used = true;
  v = from_record(*r);
  v.cites.insert(v.cites.begin(), "T_abc");
  return v;
}

}  // namespace

const char* to_string(Status s) {
  switch (s) {
    case Status::Pass: return "PASS";
    case Status::Fail: return "FAIL";
    case Status::Inconclusive: return "INCONCLUSIVE";
    case Status::Skipped: return "SKIPPED";
  }
  return "?";
}

Status classify_norm(double value, double tol) {
  if (!std::isfinite(value)) return Status::Fail;
  if (value < tol) return Status::Pass;
  if (value > 1e3 * tol) return Status::Fail;
  return Status::Inconclusive;
}

const ConditionRecord* AnalysisReport::find(const std::string& name) const {
  for (const auto& c : conditions) {
    if (c.name == name) return &c;
  }
  return nullptr;
}

BiconformalContext make_context(const Problem& problem, std::span<const double> point, int order, double scale) {
  const int n = problem.dim();
  std::vector<Jet> vars = seed_point(point, order);
  MetricAtPoint m = make_metric(evaluate_tensor2(problem.metric.components, n, vars, scale));
  if (problem.projector.mode == ProjectorSource::Frame) {
    std::vector<JetTensor> frame;
    for (const auto& v : problem.projector.frame) frame.push_back(evaluate_vector(v, vars));
    ProjectorPair pair = build_projectors(m, frame);
    return BiconformalContext(std::move(m), std::move(pair));
  }
  JetTensor P = evaluate_tensor2(problem.projector.components, n, vars, scale);
  ProjectorPair pair = build_projectors(m, std::move(P));
  return BiconformalContext(std::move(m), std::move(pair));
}

std::vector<std::vector<double>> draw_samples(const Problem& problem, const SamplingPlan& plan) {
  const std::vector<Interval> box = effective_box(problem, plan);
  if (plan.samples < 1) throw ManifestError("sample count must be positive");
  std::mt19937_64 rng(plan.seed);
  std::vector<std::vector<double>> points;
  const long cap = static_cast<long>(plan.samples) * std::max(1, plan.oversampling);
  long draws = 0;
  std::string last_reason;
  while (static_cast<int>(points.size()) < plan.samples) {
    if (draws >= cap) {
      throw SamplingError("sampling exhausted: " + std::to_string(points.size()) + " admissible points after " +
                          std::to_string(draws) + " draws (last rejection: " + last_reason + ")");
    }
    ++draws;
    std::vector<double> pt(box.size());
    for (std::size_t i = 0; i < box.size(); ++i) pt[i] = box[i].low + open_unit(rng) * (box[i].high - box[i].low);
    try {
      make_context(problem, pt, 1);
    } catch (const DomainError& e) {
      last_reason = e.what();
      continue;
    }
    points.push_back(std::move(pt));
  }
  return points;
}

int required_jet_order(const Problem& problem, std::span<const double> point) {
  BiconformalContext ctx = make_context(problem, point, 1);
  return (ctx.p() == 3 || ctx.n() - ctx.p() == 3) ? 3 : 2;
}

AnalysisReport run_analysis(const Problem& problem, const SamplingPlan& plan) {
  return run_analysis(problem, plan, draw_samples(problem, plan));
}

AnalysisReport run_analysis(const Problem& problem, const SamplingPlan& plan,
                            const std::vector<std::vector<double>>& points) {
  if (points.empty()) throw SamplingError("no sample points");
  AnalysisReport rep;
  rep.seed = plan.seed;
  rep.samples = static_cast<int>(points.size());
  rep.tolerance = plan.tolerance;
  rep.chart = problem.metric.chart;
  rep.points = points;
  rep.normalization = metric_scale(problem, points);
  rep.jet_order = plan.jet_order ? *plan.jet_order : required_jet_order(problem, points.front());

  {
    BiconformalContext first = make_context(problem, points.front(), 1, rep.normalization);
    rep.p = first.p();
    rep.n = first.n();
    rep.signature = first.metric().signature;
  }
  const std::vector<ConditionPlan> conds = plan_conditions(rep.p, rep.n);
  std::vector<std::vector<double>> norms(points.size(), std::vector<double>(conds.size(), 0.0));
  std::vector<std::vector<std::string>> notes(points.size(), std::vector<std::string>(conds.size()));

  parallel_for(points.size(), worker_count(plan, points.size()), [&](std::size_t i) {
    BiconformalContext ctx = make_context(problem, points[i], rep.jet_order, rep.normalization);
    if (ctx.p() != rep.p) {
      throw RankError("projector rank changes across samples (" + std::to_string(rep.p) + " vs " +
                      std::to_string(ctx.p()) + ")");
    }
    if (ctx.metric().signature != rep.signature) throw DomainError("metric signature changes across samples");
    for (std::size_t c = 0; c < conds.size(); ++c) {
      try {
        norms[i][c] = evaluate_condition(ctx, conds[c]);
      } catch (const OrderError&) {
        norms[i][c] = std::numeric_limits<double>::quiet_NaN();
        notes[i][c] = "insufficient jet order " + std::to_string(rep.jet_order);
      }
    }
  });

  for (std::size_t c = 0; c < conds.size(); ++c) {
    ConditionRecord r;
    r.name = conds[c].name;
    r.tolerance = plan.tolerance;
    bool skipped = false;
    for (std::size_t i = 0; i < points.size(); ++i) {
      if (std::isnan(norms[i][c])) {
        skipped = true;
        r.note = notes[i][c];
        break;
      }
      r.max_abs = std::max(r.max_abs, norms[i][c]);
    }
    r.status = skipped ? Status::Skipped : classify_norm(r.max_abs, plan.tolerance);
    if (conds[c].kind == ConditionPlan::ProjectedRank3) r.note = "informational";
    if (conds[c].kind == ConditionPlan::T4) r.note = "complete integrability";
    rep.conditions.push_back(std::move(r));
  }

  rep.conformally_separable = from_record(*rep.find("T_abc"));
  const bool separable = rep.conformally_separable.value.value_or(false);
  if (separable) {
    rep.p_leaf_conformally_flat = leaf_verdict(rep, Leaf::P, rep.p, rep.rank3_path_used);
    rep.pi_leaf_conformally_flat = leaf_verdict(rep, Leaf::Pi, rep.n - rep.p, rep.rank3_path_used);
  } else {
    for (Verdict* v : {&rep.p_leaf_conformally_flat, &rep.pi_leaf_conformally_flat}) {
      v->cites = {"T_abc"};
      v->note = "leaf conditions apply only to conformally separable metrics";
    }
  }

  Verdict& flat = rep.bi_conformally_flat;
  flat.cites = {"T_abc"};
  for (const Verdict* leaf : {&rep.p_leaf_conformally_flat, &rep.pi_leaf_conformally_flat}) {
    for (const auto& c : leaf->cites) {
      if (std::find(flat.cites.begin(), flat.cites.end(), c) == flat.cites.end()) flat.cites.push_back(c);
    }
  }
  if (rep.conformally_separable.value == false) {
    flat.value = false;
    flat.note = "not conformally separable";
  } else if (separable && rep.p_leaf_conformally_flat.value && rep.pi_leaf_conformally_flat.value) {
    flat.value = *rep.p_leaf_conformally_flat.value && *rep.pi_leaf_conformally_flat.value;
  } else {
    flat.note = "undecided";
  }

  const DimensionBound bound = dimension_bound(rep.p, rep.n);
  if (bound.finite) rep.dimension = bound;
  return rep;
}

std::string to_json(const AnalysisReport& rep, int indent) {
  using nlohmann::ordered_json;
  auto verdict = [](const Verdict& v) {
    ordered_json j;
    j["value"] = v.value ? ordered_json(*v.value) : ordered_json(nullptr);
    j["cites"] = v.cites;
    if (!v.note.empty()) j["note"] = v.note;
    return j;
  };
  ordered_json j;
  j["conditions"] = ordered_json::array();
  for (const auto& c : rep.conditions) {
    ordered_json r;
    r["name"] = c.name;
    r["max_abs"] = c.max_abs;
    r["tolerance"] = c.tolerance;
    r["status"] = to_string(c.status);
    if (!c.note.empty()) r["note"] = c.note;
    j["conditions"].push_back(r);
  }
  ordered_json v;
  v["conformally_separable"] = verdict(rep.conformally_separable);
  v["bi_conformally_flat"] = verdict(rep.bi_conformally_flat);
  v["p_leaf_conformally_flat"] = verdict(rep.p_leaf_conformally_flat);
  v["pi_leaf_conformally_flat"] = verdict(rep.pi_leaf_conformally_flat);
  v["rank3_path_used"] = rep.rank3_path_used;
  j["verdicts"] = v;
  ordered_json env;
  env["seed"] = rep.seed;
  env["samples"] = rep.samples;
  env["jet_order"] = rep.jet_order;
  env["tolerance"] = rep.tolerance;
  env["normalization"] = rep.normalization;
  env["chart"] = rep.chart;
  env["n"] = rep.n;
  env["p"] = rep.p;
  env["signature"] = rep.signature;
  env["dimension_bound"] = rep.dimension ? ordered_json(rep.dimension->value) : ordered_json("infinite");
  env["points"] = rep.points;
  j["environment"] = env;
  return j.dump(indent);
}

CoordinateChangeRecord verify_coordinate_change(const Problem& a, const Problem& b, const std::vector<Expr>& change,
                                                const SamplingPlan& plan, double tolerance) {
  const int n = a.dim();
  if (b.dim() != n || static_cast<int>(change.size()) != n) throw ManifestError("coordinate change dimension mismatch");
  CoordinateChangeRecord rec;
  rec.tolerance = tolerance;
  const auto points_a = draw_samples(a, plan);
  std::vector<std::vector<double>> points_b;
  for (const auto& pa : points_a) {
    std::vector<Jet> xa = seed_point(pa, 1);
    std::vector<Jet> yb;
    std::vector<double> pb;
    for (const auto& e : change) {
      yb.push_back(e.evaluate<Jet>(xa));
      pb.push_back(yb.back().value());
    }
    for (int k = 0; k < n; ++k) {
      const Interval& d = b.domain[sz(k)];
      if (!(pb[sz(k)] > d.low && pb[sz(k)] < d.high)) {
        throw DomainError("image point outside the target chart domain (coordinate '" + b.metric.chart[sz(k)] + "')");
      }
    }
    // Pull back: g'_ij = dy^k/dx^i dy^l/dx^j g_kl(y)
    JetTensor gb = evaluate_tensor2(b.metric.components, n, yb);
    JetTensor ga = evaluate_tensor2(a.metric.components, n, xa);
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        Jet s(0.0);
        for (int k = 0; k < n; ++k) {
          for (int l = 0; l < n; ++l) s += yb[sz(k)].derivative(i) * yb[sz(l)].derivative(j) * gb(k, l);
        }
        rec.max_metric_difference = std::max(rec.max_metric_difference, std::fabs(s.value() - ga(i, j).value()));
      }
    }
    points_b.push_back(std::move(pb));
  }
  rec.samples = static_cast<int>(points_a.size());
  rec.metrics_agree = rec.max_metric_difference <= tolerance;
  rec.report_a = run_analysis(a, plan, points_a);
  SamplingPlan plan_b = plan;
  plan_b.box.clear();
  rec.report_b = run_analysis(b, plan_b, points_b);
  auto same = [](const Verdict& x, const Verdict& y) { return x.value == y.value; };
  rec.verdicts_agree = same(rec.report_a.conformally_separable, rec.report_b.conformally_separable) &&
                       same(rec.report_a.bi_conformally_flat, rec.report_b.bi_conformally_flat) &&
                       same(rec.report_a.p_leaf_conformally_flat, rec.report_b.p_leaf_conformally_flat) &&
                       same(rec.report_a.pi_leaf_conformally_flat, rec.report_b.pi_leaf_conformally_flat);
  return rec;
}

FieldReport verify_field(const Problem& problem, const std::string& name, const SamplingPlan& plan) {
  auto it = problem.fields.find(name);
  if (it == problem.fields.end()) throw ManifestError("unknown field '" + name + "'");
  const auto points = draw_samples(problem, plan);
  const double scale = metric_scale(problem, points);
  const int order = plan.jet_order ? std::max(2, *plan.jet_order) : 2;
  std::vector<FieldCheck> checks(points.size());
  parallel_for(points.size(), worker_count(plan, points.size()), [&](std::size_t i) {
    BiconformalContext ctx = make_context(problem, points[i], order, scale);
    JetTensor xi = evaluate_vector(it->second, seed_point(points[i], order));
    checks[i] = verify_biconformal_field(ctx, xi, plan.tolerance);
  });
  FieldReport r;
  r.name = name;
  r.samples = static_cast<int>(points.size());
  r.tolerance = plan.tolerance;
  r.phi_min = r.chi_min = std::numeric_limits<double>::infinity();
  r.phi_max = r.chi_max = -std::numeric_limits<double>::infinity();
  bool all_connection = true;
  double conn = 0.0;
  double scale_phi = 0.0;
  for (const auto& c : checks) {
    r.max_residual_p = std::max(r.max_residual_p, c.residual_p);
    r.max_residual_pi = std::max(r.max_residual_pi, c.residual_pi);
    r.phi_min = std::min(r.phi_min, c.phi);
    r.phi_max = std::max(r.phi_max, c.phi);
    r.chi_min = std::min(r.chi_min, c.chi);
    r.chi_max = std::max(r.chi_max, c.chi);
    r.phi_mean += c.phi / static_cast<double>(checks.size());
    r.chi_mean += c.chi / static_cast<double>(checks.size());
    scale_phi = std::max({scale_phi, std::fabs(c.phi), std::fabs(c.chi)});
    if (c.connection_residual) {
      conn = std::max(conn, *c.connection_residual);
    } else {
      all_connection = false;
    }
  }
  if (all_connection) r.max_connection_residual = conn;
  const double derived = 100.0 * plan.tolerance * (1.0 + scale_phi);
  r.pass = r.max_residual_p < plan.tolerance && r.max_residual_pi < plan.tolerance && r.max_connection_residual &&
           *r.max_connection_residual < derived;
  return r;
}

}  // namespace biconf
