// biconf: classify metrics by their bi-conformal structure.
//
//   biconf check <manifest> [--out report.json] [--seed N] [--samples S] [--tolerance T] [--jet-order K]
//   biconf dump <manifest> <tensor> --point v1,v2,...
//   biconf verify-field <manifest> <name>
//
// Exit codes: 0 success, 2 manifest error, 3 math-domain error, 4 rank precondition.

#include "biconf/biconformal.hpp"
#include "biconf/classify.hpp"
#include "biconf/error.hpp"
#include "biconf/geometry.hpp"
#include "biconf/manifest.hpp"

#include <CLI11.hpp>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

using namespace biconf;

namespace {

constexpr int kManifestExit = 2;
constexpr int kDomainExit = 3;
constexpr int kRankExit = 4;

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<int> samples;
  std::optional<double> tolerance;
  std::optional<int> jet_order;
  std::optional<int> threads;
};

void add_plan_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("--seed", o.seed, "PRNG seed");
  cmd->add_option("--samples", o.samples, "number of sample points")->check(CLI::PositiveNumber);
  cmd->add_option("--tolerance", o.tolerance, "absolute tolerance on condition norms")->check(CLI::PositiveNumber);
  cmd->add_option("--jet-order", o.jet_order, "truncation order of the jets")->check(CLI::Range(1, 8));
  cmd->add_option("--threads", o.threads, "worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
}

SamplingPlan plan_for(const Manifest& m, const Overrides& o) {
  SamplingPlan plan = make_plan(m);
  if (o.seed) plan.seed = *o.seed;
  if (o.samples) plan.samples = *o.samples;
  if (o.tolerance) plan.tolerance = *o.tolerance;
  if (o.jet_order) plan.jet_order = *o.jet_order;
  if (o.threads) plan.threads = *o.threads;
  return plan;
}

std::string sci(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3e", v);
  return buf;
}

std::string verdict_word(const Verdict& v) {
  if (!v.value) return "UNDECIDED";
  return *v.value ? "TRUE" : "FALSE";
}

std::string leaf_line(const AnalysisReport& rep, Leaf side) {
  const int rank = side == Leaf::P ? rep.p : rep.n - rep.p;
  const std::string tag = side == Leaf::P ? "P" : "Pi";
  const Verdict& v = side == Leaf::P ? rep.p_leaf_conformally_flat : rep.pi_leaf_conformally_flat;
  std::string label;
  if (rank == 3) {
    label = "rank-3 leaf conformally flat (" + tag + ")";
  } else if (rank >= 4) {
    label = tag + "-leaf conformally flat (T(" + tag + "))";
  } else {
    label = tag + "-leaf conformally flat (rank " + std::to_string(rank) + ")";
  }
  std::string word;
  if (rank <= 2) {
    word = "TRIVIAL";
  } else if (!rep.conformally_separable.value.value_or(false)) {
    word = "N/A";
  } else {
    const ConditionRecord* r = rep.find(rank == 3 ? "rank3(" + tag + ")" : "T(" + tag + ")");
    word = r ? to_string(r->status) : "N/A";
  }
  std::string out = label + ": " + word;
  if (!v.note.empty()) out += "  [" + v.note + "]";
  return out;
}

void print_summary(std::ostream& os, const AnalysisReport& rep) {
  os << "chart:";
  for (const auto& c : rep.chart) os << " " << c;
  os << "   n = " << rep.n << "   p = " << rep.p << "   signature (";
  for (std::size_t i = 0; i < rep.signature.size(); ++i) os << (rep.signature[i] < 0 ? "-" : "+");
  os << ")\n";
  os << "samples: " << rep.samples << "   seed: " << rep.seed << "   jet order: " << rep.jet_order
     << "   tolerance: " << sci(rep.tolerance) << "   normalization: " << sci(rep.normalization) << "\n\n";
  os << "  condition                 max |.|      status\n";
  for (const auto& c : rep.conditions) {
    std::string name = c.name;
    name.resize(std::max<std::size_t>(name.size(), 24), ' ');
    os << "  " << name << "  " << sci(c.max_abs) << "   " << to_string(c.status);
    if (!c.note.empty()) os << "  (" << c.note << ")";
    os << "\n";
  }
  os << "\n";
  const ConditionRecord* t3 = rep.find("T_abc");
  os << "conformally separable (T_abc): " << (t3 ? to_string(t3->status) : "N/A") << "\n";
  os << leaf_line(rep, Leaf::P) << "\n";
  os << leaf_line(rep, Leaf::Pi) << "\n";
  os << "bi-conformally flat (T_abc & T^d_cab / rank-3): " << verdict_word(rep.bi_conformally_flat);
  if (!rep.bi_conformally_flat.note.empty()) os << "  [" << rep.bi_conformally_flat.note << "]";
  os << "\n";
  const DimensionBound bound = dimension_bound(rep.p, rep.n);
  if (bound.finite) {
    os << "bi-conformal vector fields: at most N = " << bound.value << "\n";
  } else {
    os << "bi-conformal vector fields: infinite-dimensional algebra (a leaf has rank 1 or 2)\n";
  }
}

int cmd_check(const std::string& path, const Overrides& o, const std::string& out, bool json_stdout) {
  Manifest m = load_manifest(path);
  Problem problem = to_problem(m);
  AnalysisReport rep = run_analysis(problem, plan_for(m, o));
  if (json_stdout) {
    std::cout << to_json(rep) << "\n";
  } else {
    print_summary(std::cout, rep);
  }
  if (!out.empty()) {
    std::ofstream f(out);
    if (!f) throw ManifestError(out + ": cannot write report");
    f << to_json(rep) << "\n";
  }
  return 0;
}

using Getter = std::function<JetTensor(BiconformalContext&, Leaf)>;

struct DumpEntry {
  int order;
  Getter get;
};

const std::map<std::string, DumpEntry>& dump_table() {
  static const std::map<std::string, DumpEntry> table{
      {"christoffel", {1, [](BiconformalContext& c, Leaf) { return c.gamma(); }}},
      {"biconformal-connection", {1, [](BiconformalContext& c, Leaf) { return c.gamma_bar(); }}},
      {"riemann", {2, [](BiconformalContext& c, Leaf) { return riemann(c.gamma()); }}},
      {"riemann-bar", {2, [](BiconformalContext& c, Leaf) { return c.riemann_bar(); }}},
      {"M", {1, [](BiconformalContext& c, Leaf) { return c.M(); }}},
      {"E", {1, [](BiconformalContext& c, Leaf) { return c.E(); }}},
      {"W", {1, [](BiconformalContext& c, Leaf) { return c.W(); }}},
      {"L0", {2, [](BiconformalContext& c, Leaf) { return c.L(Leaf::P); }}},
      {"L1", {2, [](BiconformalContext& c, Leaf) { return c.L(Leaf::Pi); }}},
      {"T3", {1, [](BiconformalContext& c, Leaf) { return c.t3(); }}},
      {"T4", {2, [](BiconformalContext& c, Leaf) { return c.t4(); }}},
      {"TP", {2, [](BiconformalContext& c, Leaf s) { return c.t4_projected(s); }}},
      {"lambda", {1, [](BiconformalContext& c, Leaf s) { return c.lambda(s); }}},
      {"upsilon", {1, [](BiconformalContext& c, Leaf s) { return c.upsilon(s); }}},
      {"rank3", {3, [](BiconformalContext& c, Leaf s) { return c.rank3(s); }}},
      {"projected-rank3", {3, [](BiconformalContext& c, Leaf s) { return c.projected_rank3(s); }}},
  };
  return table;
}

int cmd_dump(const std::string& path, const std::string& tensor, const std::vector<double>& point, const std::string& leaf) {
  const auto& table = dump_table();
  auto it = table.find(tensor);
  if (it == table.end()) {
    std::string names;
    for (const auto& [k, v] : table) names += (names.empty() ? "" : ", ") + k;
    throw ManifestError("unknown tensor '" + tensor + "' (one of: " + names + ")");
  }
  Manifest m = load_manifest(path);
  Problem problem = to_problem(m);
  if (static_cast<int>(point.size()) != problem.dim()) {
    throw ManifestError("--point needs " + std::to_string(problem.dim()) + " values");
  }
  for (std::size_t i = 0; i < point.size(); ++i) {
    const Interval& d = problem.domain[i];
    if (!(point[i] > d.low && point[i] < d.high)) {
      throw DomainError("point outside the chart domain (coordinate '" + problem.metric.chart[i] + "')");
    }
  }
  BiconformalContext ctx = make_context(problem, point, it->second.order);
  JetTensor t = it->second.get(ctx, leaf == "Pi" ? Leaf::Pi : Leaf::P);
  dump(std::cout, tensor, t);
  return 0;
}

int cmd_verify_field(const std::string& path, const std::string& name, const Overrides& o) {
  Manifest m = load_manifest(path);
  Problem problem = to_problem(m);
  FieldReport r = verify_field(problem, name, plan_for(m, o));
  std::cout << "field: " << r.name << "   samples: " << r.samples << "   tolerance: " << sci(r.tolerance) << "\n";
  std::cout << "  max |Lie_xi P - phi P|    " << sci(r.max_residual_p) << "\n";
  std::cout << "  max |Lie_xi Pi - chi Pi|  " << sci(r.max_residual_pi) << "\n";
  std::cout << "  connection identity       "
            << (r.max_connection_residual ? sci(*r.max_connection_residual) : std::string("not evaluated")) << "\n";
  std::cout << "  phi: min " << sci(r.phi_min) << "  max " << sci(r.phi_max) << "  mean " << sci(r.phi_mean) << "\n";
  std::cout << "  chi: min " << sci(r.chi_min) << "  max " << sci(r.chi_max) << "  mean " << sci(r.chi_mean) << "\n";
  std::cout << "bi-conformal vector field: " << (r.pass ? "PASS" : "FAIL") << "\n";
  return 0;
}

int run(int argc, char** argv) {
  CLI::App app{"Bi-conformal structure of pseudo-Riemannian metrics"};
  app.require_subcommand(1);

  Overrides check_o;
  std::string check_path, out_path;
  bool json_stdout = false;
  auto* check = app.add_subcommand("check", "classify a manifest");
  check->add_option("manifest", check_path)->required();
  check->add_option("--out", out_path, "write the JSON report here");
  check->add_flag("--json", json_stdout, "print the JSON report instead of the summary");
  add_plan_flags(check, check_o);

  std::string dump_path, dump_name, dump_leaf = "P";
  std::vector<double> dump_point;
  auto* dmp = app.add_subcommand("dump", "print one tensor at a point");
  dmp->add_option("manifest", dump_path)->required();
  dmp->add_option("tensor", dump_name)->required();
  dmp->add_option("--point", dump_point, "coordinates, comma separated")->required()->delimiter(',');
  dmp->add_option("--leaf", dump_leaf, "leaf for TP, lambda, upsilon, rank3 and projected-rank3")
      ->check(CLI::IsMember({"P", "Pi"}));

  Overrides field_o;
  std::string field_path, field_name;
  auto* field = app.add_subcommand("verify-field", "check a candidate bi-conformal vector field");
  field->add_option("manifest", field_path)->required();
  field->add_option("name", field_name)->required();
  add_plan_flags(field, field_o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kManifestExit;
  }

  if (*check) return cmd_check(check_path, check_o, out_path, json_stdout);
  if (*dmp) return cmd_dump(dump_path, dump_name, dump_point, dump_leaf);
  return cmd_verify_field(field_path, field_name, field_o);
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const ParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kManifestExit;
  } catch (const ManifestError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kManifestExit;
  } catch (const ProjectorError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kManifestExit;
  } catch (const DomainError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainExit;
  } catch (const SamplingError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kDomainExit;
  } catch (const RankError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kRankExit;
  } catch (const std::exception& e) {
    std::cerr << "internal error: " << e.what() << "\n";
    return 1;
  }
}
