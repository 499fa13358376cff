#include "biconf/manifest.hpp"

#include "biconf/error.hpp"

#include <toml.hpp>

#include <cmath>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>

namespace biconf {

namespace {

std::size_t sz(int i) { return static_cast<std::size_t>(i); }

[[noreturn]] void fail(const std::string& where, const std::string& what) { throw ManifestError(where + ": " + what); }

void only_keys(const toml::table& t, const std::string& where, std::initializer_list<std::string_view> allowed) {
  for (const auto& [k, v] : t) {
    bool ok = false;
    for (auto a : allowed) ok = ok || k.str() == a;
    if (!ok) fail(where, "unknown key '" + std::string(k.str()) + "'");
  }
}

const toml::table& table_at(const toml::table& root, std::string_view key, const std::string& source) {
  const toml::table* t = root[key].as_table();
  if (!t) fail(source, "missing section [" + std::string(key) + "]");
  return *t;
}

double number(const toml::node& n, const std::string& where) {
  if (auto i = n.value_exact<std::int64_t>()) return static_cast<double>(*i);
  if (auto d = n.value_exact<double>()) return *d;
  fail(where, "expected a number");
}

std::vector<Interval> intervals(const toml::node* n, const std::string& where) {
  const toml::array* arr = n ? n->as_array() : nullptr;
  if (!arr) fail(where, "expected an array of [low, high] pairs");
  std::vector<Interval> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    const std::string w = where + "[" + std::to_string(i) + "]";
    const toml::array* pair = (*arr)[i].as_array();
    if (!pair || pair->size() != 2) fail(w, "expected [low, high]");
    Interval iv{number((*pair)[0], w), number((*pair)[1], w)};
    if (std::isnan(iv.low) || std::isnan(iv.high) || !(iv.low < iv.high)) fail(w, "interval must satisfy low < high");
    out.push_back(iv);
  }
  return out;
}

std::vector<std::string> strings(const toml::node* n, const std::string& where) {
  const toml::array* arr = n ? n->as_array() : nullptr;
  if (!arr) fail(where, "expected an array of expression strings");
  std::vector<std::string> out;
  for (std::size_t i = 0; i < arr->size(); ++i) {
    auto s = (*arr)[i].value_exact<std::string>();
    if (!s) fail(where + "[" + std::to_string(i) + "]", "expected an expression string");
    out.push_back(*s);
  }
  return out;
}

// "g_1_2" -> (0, 1)
std::map<std::pair<int, int>, std::string> components(const toml::table& t, std::string_view prefix, int n,
                                                      const std::string& where, std::initializer_list<std::string_view> other) {
  std::map<std::pair<int, int>, std::string> out;
  for (const auto& [k, v] : t) {
    const std::string key(k.str());
    bool skip = false;
    for (auto o : other) skip = skip || key == o;
    if (skip) continue;
    const std::string w = where + "." + key;
    const std::regex pattern(std::string(prefix) + "_([0-9]+)_([0-9]+)");
    std::smatch match;
    if (!std::regex_match(key, match, pattern)) {
      fail(where, "unknown key '" + key + "' (expected " + std::string(prefix) + "_i_j)");
    }
    const int i = std::stoi(match[1].str());
    const int j = std::stoi(match[2].str());
    if (i < 1 || j < 1 || i > n || j > n) fail(w, "index out of range 1.." + std::to_string(n));
    if (i > j) fail(w, "give entries with i <= j only");
    auto s = v.value_exact<std::string>();
    if (!s) fail(w, "expected an expression string");
    out[{i - 1, j - 1}] = *s;
  }
  return out;
}

std::optional<std::int64_t> integer(const toml::table& t, std::string_view key, const std::string& where) {
  const toml::node* n = t.get(key);
  if (!n) return std::nullopt;
  auto v = n->value_exact<std::int64_t>();
  if (!v) fail(where + "." + std::string(key), "expected an integer");
  return v;
}

Expr parse_at(const std::string& text, const std::vector<std::string>& chart, const std::string& where) {
  try {
    return parse(text, chart);
  } catch (const ParseError& e) {
    fail(where, e.what());
  }
}

toml::array interval_array(const std::vector<Interval>& box) {
  toml::array arr;
  for (const auto& iv : box) arr.push_back(toml::array{iv.low, iv.high});
  return arr;
}

toml::array string_array(const std::vector<std::string>& v) {
  toml::array arr;
  for (const auto& s : v) arr.push_back(s);
  return arr;
}

std::string component_key(std::string_view prefix, const std::pair<int, int>& ij) {
  return std::string(prefix) + "_" + std::to_string(ij.first + 1) + "_" + std::to_string(ij.second + 1);
}

}  // namespace

Manifest parse_manifest(std::string_view text, const std::string& source) {
  toml::table root;
  try {
    root = toml::parse(text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream os;
    os << source << ":" << e.source().begin.line << ":" << e.source().begin.column << ": " << e.description();
    throw ManifestError(os.str());
  }
  only_keys(root, source, {"chart", "metric", "projector", "fields", "plan"});

  Manifest m;
  const toml::table& chart = table_at(root, "chart", source);
  only_keys(chart, "chart", {"coordinates", "domain"});
  m.coordinates = strings(chart.get("coordinates"), "chart.coordinates");
  const int n = m.dim();
  if (n < 2) fail("chart.coordinates", "need at least two coordinates");
  std::set<std::string> seen;
  for (const auto& c : m.coordinates) {
    if (!seen.insert(c).second) fail("chart.coordinates", "duplicate coordinate '" + c + "'");
  }
  m.domain = intervals(chart.get("domain"), "chart.domain");
  if (static_cast<int>(m.domain.size()) != n) fail("chart.domain", "need one interval per coordinate");

  const toml::table& metric = table_at(root, "metric", source);
  m.metric = components(metric, "g", n, "metric", {});
  if (m.metric.empty()) fail("metric", "no components given");

  const toml::table& proj = table_at(root, "projector", source);
  auto mode = proj["mode"].value_exact<std::string>();
  if (!mode) fail("projector.mode", "expected \"frame\" or \"components\"");
  if (*mode == "frame") {
    m.mode = ProjectorSource::Frame;
    only_keys(proj, "projector", {"mode", "vectors"});
    const toml::array* vecs = proj["vectors"].as_array();
    if (!vecs) fail("projector.vectors", "expected an array of vectors");
    for (std::size_t k = 0; k < vecs->size(); ++k) {
      const std::string w = "projector.vectors[" + std::to_string(k) + "]";
      auto v = strings(&(*vecs)[k], w);
      if (static_cast<int>(v.size()) != n) fail(w, "need " + std::to_string(n) + " components");
      m.frame.push_back(std::move(v));
    }
    if (m.frame.empty() || static_cast<int>(m.frame.size()) > n - 1) {
      fail("projector.vectors", "frame needs between 1 and " + std::to_string(n - 1) + " vectors");
    }
  } else if (*mode == "components") {
    m.mode = ProjectorSource::Direct;
    m.projector = components(proj, "P", n, "projector", {"mode"});
    if (m.projector.empty()) fail("projector", "no P_i_j components given");
  } else {
    fail("projector.mode", "expected \"frame\" or \"components\", got \"" + *mode + "\"");
  }

  if (const toml::node* f = root.get("fields")) {
    const toml::table* ft = f->as_table();
    if (!ft) fail("fields", "expected tables [fields.NAME]");
    for (const auto& [k, v] : *ft) {
      const std::string w = "fields." + std::string(k.str());
      const toml::table* t = v.as_table();
      if (!t) fail(w, "expected a table");
      only_keys(*t, w, {"components"});
      auto comps = strings(t->get("components"), w + ".components");
      if (static_cast<int>(comps.size()) != n) fail(w + ".components", "need " + std::to_string(n) + " components");
      m.fields.emplace_back(std::string(k.str()), std::move(comps));
    }
  }

  if (const toml::node* p = root.get("plan")) {
    const toml::table* pt = p->as_table();
    if (!pt) fail("plan", "expected a table");
    only_keys(*pt, "plan", {"samples", "seed", "oversampling", "tolerance", "jet_order", "threads", "box"});
    auto positive = [&](std::string_view key, int low) -> std::optional<int> {
      auto v = integer(*pt, key, "plan");
      if (!v) return std::nullopt;
      if (*v < low || *v > 1000000) fail("plan." + std::string(key), "out of range");
      return static_cast<int>(*v);
    };
    m.plan.samples = positive("samples", 1);
    m.plan.oversampling = positive("oversampling", 1);
    m.plan.jet_order = positive("jet_order", 1);
    m.plan.threads = positive("threads", 0);
    if (auto s = integer(*pt, "seed", "plan")) {
      if (*s < 0) fail("plan.seed", "must be nonnegative");
      m.plan.seed = static_cast<std::uint64_t>(*s);
    }
    if (const toml::node* t = pt->get("tolerance")) {
      double v = number(*t, "plan.tolerance");
      if (!(v > 0.0)) fail("plan.tolerance", "must be positive");
      m.plan.tolerance = v;
    }
    if (const toml::node* b = pt->get("box")) {
      m.plan.box = intervals(b, "plan.box");
      if (static_cast<int>(m.plan.box->size()) != n) fail("plan.box", "need one interval per coordinate");
    }
  }

  to_problem(m);  // validates every expression
  return m;
}

Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ManifestError(path.string() + ": cannot open file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_manifest(ss.str(), path.string());
}

std::string to_toml(const Manifest& m) {
  toml::table root;
  root.insert("chart", toml::table{{"coordinates", string_array(m.coordinates)}, {"domain", interval_array(m.domain)}});
  toml::table metric;
  for (const auto& [ij, s] : m.metric) metric.insert(component_key("g", ij), s);
  root.insert("metric", std::move(metric));
  toml::table proj;
  if (m.mode == ProjectorSource::Frame) {
    proj.insert("mode", "frame");
    toml::array vecs;
    for (const auto& v : m.frame) vecs.push_back(string_array(v));
    proj.insert("vectors", std::move(vecs));
  } else {
    proj.insert("mode", "components");
    for (const auto& [ij, s] : m.projector) proj.insert(component_key("P", ij), s);
  }
  root.insert("projector", std::move(proj));
  if (!m.fields.empty()) {
    toml::table fields;
    for (const auto& [name, comps] : m.fields) fields.insert(name, toml::table{{"components", string_array(comps)}});
    root.insert("fields", std::move(fields));
  }
  toml::table plan;
  if (m.plan.samples) plan.insert("samples", *m.plan.samples);
  if (m.plan.seed) plan.insert("seed", static_cast<std::int64_t>(*m.plan.seed));
  if (m.plan.oversampling) plan.insert("oversampling", *m.plan.oversampling);
  if (m.plan.tolerance) plan.insert("tolerance", *m.plan.tolerance);
  if (m.plan.jet_order) plan.insert("jet_order", *m.plan.jet_order);
  if (m.plan.threads) plan.insert("threads", *m.plan.threads);
  if (m.plan.box) plan.insert("box", interval_array(*m.plan.box));
  if (!plan.empty()) root.insert("plan", std::move(plan));
  std::ostringstream os;
  os << root << "\n";
  return os.str();
}

Problem to_problem(const Manifest& m) {
  const int n = m.dim();
  Problem pr;
  pr.metric.chart = m.coordinates;
  pr.metric.components.assign(sz(n * n), Expr());
  for (const auto& [ij, s] : m.metric) {
    Expr e = parse_at(s, m.coordinates, "metric." + component_key("g", ij));
    pr.metric.components[sz(ij.first * n + ij.second)] = e;
    pr.metric.components[sz(ij.second * n + ij.first)] = e;
  }
  pr.projector.mode = m.mode;
  for (std::size_t k = 0; k < m.frame.size(); ++k) {
    std::vector<Expr> v;
    for (std::size_t a = 0; a < m.frame[k].size(); ++a) {
      v.push_back(parse_at(m.frame[k][a], m.coordinates,
                           "projector.vectors[" + std::to_string(k) + "][" + std::to_string(a) + "]"));
    }
    pr.projector.frame.push_back(std::move(v));
  }
  if (m.mode == ProjectorSource::Direct) {
    pr.projector.components.assign(sz(n * n), Expr());
    for (const auto& [ij, s] : m.projector) {
      Expr e = parse_at(s, m.coordinates, "projector." + component_key("P", ij));
      pr.projector.components[sz(ij.first * n + ij.second)] = e;
      pr.projector.components[sz(ij.second * n + ij.first)] = e;
    }
  }
  pr.domain = m.domain;
  for (const auto& [name, comps] : m.fields) {
    std::vector<Expr> v;
    for (std::size_t a = 0; a < comps.size(); ++a) {
      v.push_back(parse_at(comps[a], m.coordinates, "fields." + name + ".components[" + std::to_string(a) + "]"));
    }
    pr.fields[name] = std::move(v);
  }
  return pr;
}

SamplingPlan make_plan(const Manifest& m) {
  SamplingPlan plan;
  if (m.plan.box) plan.box = *m.plan.box;
  if (m.plan.samples) plan.samples = *m.plan.samples;
  if (m.plan.seed) plan.seed = *m.plan.seed;
  if (m.plan.oversampling) plan.oversampling = *m.plan.oversampling;
  if (m.plan.tolerance) plan.tolerance = *m.plan.tolerance;
  if (m.plan.jet_order) plan.jet_order = *m.plan.jet_order;
  if (m.plan.threads) plan.threads = *m.plan.threads;
  return plan;
}

}  // namespace biconf
