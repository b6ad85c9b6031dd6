// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <memory>
#include <optional>
#include <string>

#include "pnprl/prox/admm_diff.hpp"

namespace pnprl::env {

// MDP geometry: a transition runs m ADMM iterations, episodes run at most N
// transitions (N*m inner iterations), continuation costs eta per step.
struct EnvConfig {
  int m = 5;
  int N = 6;
  double eta = 0.05;
  double gamma = 0.99;
  bool shared_pair = false;       // one (sigma, mu) pair reused for all m iterates
  double sigma_scale = 50.0 / 255.0;  // decode range for sigma entries
};

struct ProblemInstance {
  CImage x_gt;  // empty when unavailable (pure inference)
  fm::MeasurementModel model;
  bool has_gt = false;
};

struct EnvState {
  prox::OptState opt;
  std::shared_ptr<const fm::Observation> obs;
  std::shared_ptr<const fm::MeasurementModel> model;
  std::shared_ptr<const CImage> x_gt;  // null at inference
  std::shared_ptr<const CImage> x0;    // initialization, part of the observation
  int t = 0;
  bool done = false;
  EnvConfig cfg;
  std::shared_ptr<const den::DenoiserHandle> prior;

  int height() const { return opt.x.h; }
  int width() const { return opt.x.w; }
};

struct Action {
  int a1 = 0;               // 1 = terminate
  std::vector<double> a2;   // raw parameter coordinates in (0,1]
};

struct TransitionRecord {
  int t = 0;
  Action a;
  double r = 0.0;
  bool has_reward = false;
  bool done = false;
  double psnr_before = 0.0;
  double psnr_after = 0.0;
};

struct StepResult {
  EnvState next;
  std::optional<double> reward;
  bool done = false;
};

EnvState reset(const ProblemInstance& problem, const EnvConfig& cfg,
               std::shared_ptr<const den::DenoiserHandle> prior,
               std::uint64_t seed);

// Observation layout (fixed order): x re, x im, z re, z im, u re, u im,
// x0 re, x0 im, constant sigma_n/255 plane (0 for PR), constant t/N plane.
constexpr int kObservationPlanes = 10;
Tensor observe(const EnvState& s);

// Raw layout: [p_terminate, sigma_1..m, mu_1..m] (or [p, sigma, mu] in
// shared-pair mode). Continuous coordinates decode monotonically:
// sigma_j = raw * sigma_scale, mu_j = raw.
Action decode_action(const std::vector<double>& raw, const EnvConfig& cfg);
prox::ParamBlock decode_params(const std::vector<double>& a2,
                               const EnvConfig& cfg);

double state_psnr(const EnvState& s);  // requires ground truth

StepResult step(const EnvState& s, const Action& a);

double discounted_return(const std::vector<TransitionRecord>& records,
                         double gamma);

void write_trace_jsonl(const std::string& path,
                       const std::vector<TransitionRecord>& records);

// Differentiable pieces used by the model-based policy update. next_t is the
// step index encoded in the t/N plane of the produced observation.
nn::Var observe_diff(nn::Tape& t, const prox::DiffState& d, const EnvState& base,
                     int next_t);
nn::Var reward_diff(nn::Tape& t, const prox::DiffState& next,
                    const EnvState& base);

}  // namespace pnprl::env
