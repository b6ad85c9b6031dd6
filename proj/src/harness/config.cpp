// SPDX-License-Identifier: Apache-2.0
#include "pnprl/harness/config.hpp"

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <stdexcept>

namespace pnprl::harness {

namespace {

nlohmann::json policy_to_json(const PolicyEntry& p) {
  nlohmann::json j;
  j["kind"] = policies::to_string(p.spec.kind);
  j["name"] = p.name;
  j["sigma8"] = p.spec.sigma * 255.0;
  j["mu"] = p.spec.mu;
  j["hc_lambda"] = p.spec.hc_lambda;
  j["hc_sigma_start"] = p.spec.hc_sigma_start;
  j["snapshot"] = p.spec.snapshot_path;
  j["max_inner_iterations"] = p.spec.max_inner_iterations;
  return j;
}

PolicyEntry policy_from_json(const nlohmann::json& j) {
  PolicyEntry p;
  p.spec.kind = policies::policy_kind_from_string(j.at("kind"));
  p.spec.sigma = j.value("sigma8", 15.0) / 255.0;
  p.spec.mu = j.value("mu", 0.1);
  p.spec.hc_lambda = j.value("hc_lambda", 0.23);
  p.spec.hc_sigma_start = j.value("hc_sigma_start", 35.0);
  p.spec.snapshot_path = j.value("snapshot", "");
  p.spec.max_inner_iterations = j.value("max_inner_iterations", 30);
  p.name = j.value("name", std::string(policies::to_string(p.spec.kind)));
  return p;
}

}  // namespace

ExperimentConfig ExperimentConfig::from_json(const nlohmann::json& j) {
  ExperimentConfig c;
  c.task = j.value("task", c.task);
  if (j.contains("dataset")) {
    const auto& d = j["dataset"];
    c.dataset_path = d.value("path", c.dataset_path);
    c.resize = d.value("resize", c.resize);
    c.limit = d.value("limit", c.limit);
  }
  if (j.contains("problems")) {
    const auto& p = j["problems"];
    if (p.contains("accels")) c.accels = p["accels"].get<std::vector<double>>();
    if (p.contains("sigma_ns"))
      c.sigma_ns = p["sigma_ns"].get<std::vector<double>>();
    if (p.contains("alphas")) c.alphas = p["alphas"].get<std::vector<double>>();
    c.mask_pattern = p.value("mask_pattern", c.mask_pattern);
    c.mask_seed = p.value("mask_seed", c.mask_seed);
    c.cdp_patterns = p.value("cdp_patterns", c.cdp_patterns);
    c.cdp_seed = p.value("cdp_seed", c.cdp_seed);
  }
  if (j.contains("policies"))
    for (const auto& pj : j["policies"]) c.policies.push_back(policy_from_json(pj));
  c.denoiser_checkpoint = j.value("denoiser", c.denoiser_checkpoint);
  c.iterations = j.value("iterations", c.iterations);
  if (j.contains("seeds")) c.seeds = j["seeds"].get<std::vector<std::uint64_t>>();
  if (j.contains("env")) {
    const auto& e = j["env"];
    c.env_m = e.value("m", c.env_m);
    c.env_N = e.value("N", c.env_N);
    c.env_eta = e.value("eta", c.env_eta);
    c.env_gamma = e.value("gamma", c.env_gamma);
  }
  if (j.contains("grids")) {
    const auto& g = j["grids"];
    if (g.contains("sigma8"))
      c.sigma8_grid = g["sigma8"].get<std::vector<double>>();
    if (g.contains("mu")) c.mu_grid = g["mu"].get<std::vector<double>>();
  }
  c.write_curves = j.value("write_curves", c.write_curves);
  c.write_images = j.value("write_images", c.write_images);
  c.output_dir = j.value("output_dir", c.output_dir);
  return c;
}

nlohmann::json ExperimentConfig::to_json() const {
  nlohmann::json j;
  j["task"] = task;
  j["dataset"] = {{"path", dataset_path}, {"resize", resize}, {"limit", limit}};
  j["problems"] = {{"accels", accels},       {"sigma_ns", sigma_ns},
                   {"alphas", alphas},       {"mask_pattern", mask_pattern},
                   {"mask_seed", mask_seed}, {"cdp_patterns", cdp_patterns},
                   {"cdp_seed", cdp_seed}};
  auto& pl = j["policies"] = nlohmann::json::array();
  for (const PolicyEntry& p : policies) pl.push_back(policy_to_json(p));
  j["denoiser"] = denoiser_checkpoint;
  j["iterations"] = iterations;
  j["seeds"] = seeds;
  j["env"] = {{"m", env_m}, {"N", env_N}, {"eta", env_eta}, {"gamma", env_gamma}};
  j["grids"] = {{"sigma8", sigma8_grid}, {"mu", mu_grid}};
  j["write_curves"] = write_curves;
  j["write_images"] = write_images;
  j["output_dir"] = output_dir;
  return j;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("config: cannot open " + path);
  return from_json(nlohmann::json::parse(f));
}

void ExperimentConfig::validate() const {
  if (task != "csmri" && task != "pr")
    throw std::invalid_argument("config: task must be csmri or pr");
  if (!std::filesystem::exists(dataset_path))
    throw std::invalid_argument("config: dataset path does not exist: " +
                                dataset_path);
  if (task == "csmri" && (accels.empty() || sigma_ns.empty()))
    throw std::invalid_argument("config: empty csmri problem grid");
  if (task == "pr" && alphas.empty())
    throw std::invalid_argument("config: empty pr problem grid");
  if (policies.empty()) throw std::invalid_argument("config: no policies");
  if (seeds.empty()) throw std::invalid_argument("config: no seeds");
  if (!denoiser_checkpoint.empty() &&
      !std::filesystem::exists(denoiser_checkpoint))
    throw std::invalid_argument("config: denoiser checkpoint missing: " +
                                denoiser_checkpoint);
  for (const PolicyEntry& p : policies)
    if (p.spec.kind == policies::PolicyKind::kLearned &&
        !std::filesystem::exists(p.spec.snapshot_path))
      throw std::invalid_argument("config: policy snapshot missing: " +
                                  p.spec.snapshot_path);
}

std::string ExperimentConfig::resolved_output_dir() const {
  const char* root = std::getenv("PNPRL_OUTPUT_ROOT");
  if (root == nullptr || output_dir.starts_with('/')) return output_dir;
  return std::string(root) + "/" + output_dir;
}

void apply_override(nlohmann::json& j, const std::string& assignment) {
  const auto eq = assignment.find('=');
  if (eq == std::string::npos)
    throw std::invalid_argument("override must look like key.path=value: " +
                                assignment);
  const std::string path = assignment.substr(0, eq);
  const std::string raw = assignment.substr(eq + 1);
  nlohmann::json value;
  try {
    value = nlohmann::json::parse(raw);
  } catch (...) {
    value = raw;  // plain string
  }
  nlohmann::json* cur = &j;
  std::size_t pos = 0;
  for (;;) {
    const auto dot = path.find('.', pos);
    const std::string key = path.substr(pos, dot - pos);
    if (dot == std::string::npos) {
      (*cur)[key] = value;
      break;
    }
    cur = &(*cur)[key];
    pos = dot + 1;
  }
}

}  // namespace pnprl::harness
