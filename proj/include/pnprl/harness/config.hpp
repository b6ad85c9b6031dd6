// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>
#include <string>
#include <vector>

#include "pnprl/policies/baselines.hpp"

namespace pnprl::harness {

struct PolicyEntry {
  policies::PolicySpec spec;
  std::string name;  // column value; defaults to the kind
};

// Evaluation campaign description. Every key has a default; the effective
// config (defaults included) is echoed into the output directory.
struct ExperimentConfig {
  std::string task = "csmri";  // "csmri" | "pr"

  std::string dataset_path = "data/desk";
  int resize = 0;   // 0 keeps native size
  int limit = 0;    // 0 keeps all images

  std::vector<double> accels{4};
  std::vector<double> sigma_ns{15};
  std::vector<double> alphas{27};
  std::string mask_pattern = "radial";
  std::uint64_t mask_seed = 7;
  int cdp_patterns = 4;
  std::uint64_t cdp_seed = 11;

  std::vector<PolicyEntry> policies;
  std::string denoiser_checkpoint;
  int iterations = 30;  // budget for non-learned policies
  std::vector<std::uint64_t> seeds{0};

  int env_m = 5;
  int env_N = 6;
  double env_eta = 0.05;
  double env_gamma = 0.99;

  std::vector<double> sigma8_grid;  // search grids (8-bit units); defaults used when empty
  std::vector<double> mu_grid;

  bool write_curves = true;
  bool write_images = false;
  std::string output_dir = "out/eval";

  static ExperimentConfig from_json(const nlohmann::json& j);
  nlohmann::json to_json() const;
  static ExperimentConfig load(const std::string& path);
  void validate() const;

  // PNPRL_OUTPUT_ROOT prefixes relative output directories when set.
  std::string resolved_output_dir() const;
};

// Applies a dotted-path override ("env.m=5", "dataset.resize=64") onto raw
// JSON; values parse as JSON when possible, else as strings.
void apply_override(nlohmann::json& j, const std::string& assignment);

}  // namespace pnprl::harness
