// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <nlohmann/json.hpp>

#include "pnprl/agent/buffer.hpp"
#include "pnprl/agent/updates.hpp"

namespace pnprl::agent {

struct TrainPolicyConfig {
  // Problem distribution. One policy is trained across the whole grid of
  // settings (all accelerations x noise levels, or all alpha values).
  std::string task = "csmri";               // "csmri" | "pr"
  std::vector<double> accels{2, 4, 8};
  std::vector<double> sigma_ns{5, 10, 15};
  std::vector<double> alphas{9, 27, 81};
  fm::MaskPattern mask_pattern = fm::MaskPattern::kRadial;
  std::uint64_t mask_seed = 7;
  int cdp_patterns = 4;
  std::uint64_t cdp_seed = 11;

  env::EnvConfig env;
  nn::TrunkConfig trunk;

  int batch = 48;
  long outer_iterations = 1500;
  int grad_steps = 10;
  double lr_policy = 3e-4;
  double lr_value = 1e-3;
  long lr_decay_at = 1000;
  double lr_policy_after = 1e-4;
  double lr_value_after = 3e-4;
  double ema_rate = 0.005;
  std::size_t buffer_capacity = 0;  // 0 -> 10 * batch
  int warmup_episodes = 10;
  int episodes_per_iteration = 1;
  double collect_noise = 0.05;      // gaussian exploration on a2 during collection
  bool model_free_pi2 = false;      // DDPG-style continuous update (no env backprop)
  std::uint64_t seed = 0;
  std::string checkpoint_dir;
  long checkpoint_every = 0;        // 0 -> final snapshot only
  bool verbose = false;

  nlohmann::json to_json() const;
};

struct IterationLog {
  long iteration = 0;
  double mean_reward = 0.0;
  double value_loss = 0.0;
  double mean_episode_length = 0.0;
};

struct PolicySnapshot {
  PolicyNet policy;
  ValueNet value;
  ValueNet target;
  long train_step = 0;
  std::string config_hash;
  env::EnvConfig env;
};

struct TrainPolicyResult {
  PolicySnapshot snapshot;
  std::vector<IterationLog> log;
};

// Builds the measurement model for one sampled setting.
fm::MeasurementModel make_setting_model(const TrainPolicyConfig& cfg, int h,
                                        int w, std::size_t setting_index);
std::size_t setting_count(const TrainPolicyConfig& cfg);

TrainPolicyResult train_policy(const std::vector<Tensor>& train_images,
                               const den::DenoiserHandle& prior,
                               const TrainPolicyConfig& cfg);

void save_snapshot(const std::string& path, PolicySnapshot& snap);
PolicySnapshot load_snapshot(const std::string& path);

void write_train_log(const std::string& path,
                     const std::vector<IterationLog>& log);

}  // namespace pnprl::agent
