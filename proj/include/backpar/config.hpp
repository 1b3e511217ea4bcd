#pragma once

// INI run configuration. Every key is validated before any computation;
// unknown keys are rejected by name.

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "backpar/experiments.hpp"

namespace backpar {

struct RunConfig {
  // [domain]
  DomainSpec domain;
  std::vector<std::string> domain_keys;  // keys given explicitly, applied over a named case
  std::optional<std::size_t> modes;
  // [case]
  std::optional<std::string> case_name;
  std::optional<std::vector<double>> u0;
  std::optional<double> a;
  std::optional<std::string> source;
  std::optional<double> T;
  std::optional<std::size_t> forward_steps;
  // [method]
  std::string method = "truncation";
  MethodConfig method_cfg;
  // [noise]
  std::vector<double> deltas{1e-1, 1e-2, 1e-3, 1e-4};
  std::vector<double> t_fractions{0.25, 0.5, 0.75};
  std::size_t trials = 200;
  std::uint64_t seed = 0;
  unsigned threads = 0;
  // [illposed]
  double illposed_T = 1.0;
  std::vector<double> illposed_deltas{1e-1, 1e-2, 1e-3};
  // [output]
  std::string out_dir = ".";

  // Defaults and overrides as "section.key = value" lines for report headers.
  std::vector<std::string> provenance() const;
};

RunConfig parse_config_text(const std::string& text);
RunConfig load_config(const std::string& path);

// Builds (and manufactures) the case the config describes.
ManufacturedCase build_case(const RunConfig& cfg);
std::vector<double> requested_times(const RunConfig& cfg, double T);

}  // namespace backpar
