// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pnprl/agent/trainer.hpp"
#include "pnprl/harness/config.hpp"
#include "pnprl/harness/dataset.hpp"

namespace pnprl::harness {

struct ResultRecord {
  std::string image_id;
  std::string task;
  double accel_or_alpha = 0.0;
  double sigma_n = 0.0;
  std::string policy;
  std::uint64_t seed = 0;  // row-level observation seed (reproducible via `run`)
  double psnr_db = 0.0;
  int iterations = 0;
  double wall_time_s = 0.0;
};

struct EvalOutput {
  std::vector<ResultRecord> records;
  std::string records_csv;
  std::string aggregate_csv;
};

// Runs the full (image x setting x policy x seed) campaign, writes the
// per-record CSV, the aggregated CSV, the effective config echo, and curve
// files. Cells run on the worker pool; output order is deterministic.
EvalOutput evaluate_policy(const ExperimentConfig& cfg);

// Single-image reconstruction sharing the evaluation code path.
struct RunOutput {
  ResultRecord record;
  std::vector<double> psnr_trace;  // per iteration (baselines) or per block (learned)
  std::vector<int> trace_iterations;
  CImage reconstruction;
};
RunOutput run_single(const ExperimentConfig& cfg, const Tensor& image,
                     const std::string& image_id, std::size_t setting_index,
                     const PolicyEntry& policy, std::uint64_t obs_seed);

// Measurement model for setting index s of the config grid.
fm::MeasurementModel eval_setting_model(const ExperimentConfig& cfg, int h,
                                        int w, std::size_t setting_index);
std::size_t eval_setting_count(const ExperimentConfig& cfg);
double setting_accel_or_alpha(const ExperimentConfig& cfg, std::size_t s);
double setting_sigma_n(const ExperimentConfig& cfg, std::size_t s);

std::uint64_t row_obs_seed(std::uint64_t config_seed, std::size_t image_index,
                           std::size_t setting_index);

den::DenoiserHandle load_denoiser_or_identity(const std::string& path);

void write_records_csv(const std::string& path,
                       const std::vector<ResultRecord>& records);
std::vector<ResultRecord> read_records_csv(const std::string& path);
void write_aggregate_csv(const std::string& path,
                         const std::vector<ResultRecord>& records);

}  // namespace pnprl::harness
