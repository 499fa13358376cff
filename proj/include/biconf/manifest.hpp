#pragma once

// TOML manifests:
//
//   [chart]       coordinates = ["t", "r"], domain = [[0, 1], [0.5, 2]]
//   [metric]      g_1_1 = "...", g_1_2 = "..."   (i <= j, omitted entries are 0)
//   [projector]   mode = "frame", vectors = [["0", "1"]]
//                 or mode = "components", P_1_1 = "...", ...
//   [fields.NAME] components = ["...", ...]
//   [plan]        samples, seed, tolerance, jet_order, oversampling, threads, box
//
// Expressions are kept as written so that saving reproduces them verbatim.

#include "biconf/classify.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace biconf {

struct PlanOverrides {
  std::optional<std::vector<Interval>> box;
  std::optional<int> samples;
  std::optional<std::uint64_t> seed;
  std::optional<int> oversampling;
  std::optional<double> tolerance;
  std::optional<int> jet_order;
  std::optional<int> threads;
};

struct Manifest {
  std::vector<std::string> coordinates;
  std::vector<Interval> domain;
  std::map<std::pair<int, int>, std::string> metric;  // 0-based (i, j), i <= j
  ProjectorSource mode = ProjectorSource::Frame;
  std::vector<std::vector<std::string>> frame;
  std::map<std::pair<int, int>, std::string> projector;  // components mode
  std::vector<std::pair<std::string, std::vector<std::string>>> fields;
  PlanOverrides plan;

  int dim() const { return static_cast<int>(coordinates.size()); }
};

/// Throws ManifestError (with the expression or TOML location) on any problem.
Manifest parse_manifest(std::string_view text, const std::string& source = "<manifest>");
Manifest load_manifest(const std::filesystem::path& path);

std::string to_toml(const Manifest& m);

/// Parses every expression against the chart.
Problem to_problem(const Manifest& m);

/// Defaults overridden by [plan].
SamplingPlan make_plan(const Manifest& m);

}  // namespace biconf
