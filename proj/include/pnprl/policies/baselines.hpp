// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "pnprl/env/env.hpp"

namespace pnprl::policies {

enum class PolicyKind { kFixed, kHandcrafted, kFixedOptimal, kOracle, kLearned };
const char* to_string(PolicyKind k);
PolicyKind policy_kind_from_string(const std::string& s);

struct PolicySpec {
  PolicyKind kind = PolicyKind::kFixed;
  double sigma = 15.0 / 255.0;  // fixed policy, normalized units
  double mu = 0.1;
  double hc_lambda = 0.23;      // handcrafted schedule coupling
  double hc_sigma_start = 35.0; // 8-bit units
  std::string snapshot_path;    // learned policy
  int max_inner_iterations = 30;
};

struct Trajectory {
  std::vector<double> psnr_trace;  // one entry per inner iteration
  CImage final_x;
  std::vector<double> sigmas_used;
  std::vector<double> mus_used;

  double final_psnr() const { return psnr_trace.back(); }
};

Trajectory run_fixed(const env::ProblemInstance& problem,
                     const den::DenoiserHandle& prior, double sigma, double mu,
                     int iterations, std::uint64_t obs_seed);

// IRCNN-style schedule: sigma log-spaced from hc_sigma_start down to
// max(sigma_n, 1) (8-bit units), mu coupled as lambda*(sigma_n/(255 sigma_k))^2
// with sigma_n floored at 1.
Trajectory run_handcrafted(const env::ProblemInstance& problem,
                           const den::DenoiserHandle& prior, int iterations,
                           std::uint64_t obs_seed, double lambda = 0.23,
                           double sigma_start = 35.0);

std::vector<double> default_sigma_grid();  // {1,3,5,7,10,15,20,25,30,40,50}/255
std::vector<double> default_mu_grid();     // {.01,.03,.05,.1,.2,.3,.5,1}

struct FixedOptimalResult {
  double sigma = 0.0;
  double mu = 0.0;
  double mean_final_psnr = 0.0;
  std::vector<Trajectory> traces;           // winner pair, one per problem
  std::vector<std::vector<double>> grid_mean_psnr;  // [sigma][mu]
};

FixedOptimalResult search_fixed_optimal(
    const std::vector<env::ProblemInstance>& problems,
    const den::DenoiserHandle& prior, const std::vector<double>& sigma_grid,
    const std::vector<double>& mu_grid, int iterations,
    const std::vector<std::uint64_t>& obs_seeds);

struct OracleResult {
  double sigma = 0.0;
  double mu = 0.0;
  Trajectory trace;
};

std::vector<OracleResult> search_oracle(
    const std::vector<env::ProblemInstance>& problems,
    const den::DenoiserHandle& prior, const std::vector<double>& sigma_grid,
    const std::vector<double>& mu_grid, int iterations,
    const std::vector<std::uint64_t>& obs_seeds);

// Both searches share one exhaustive grid evaluation.
struct GridSearchOutput {
  FixedOptimalResult fixed_optimal;
  std::vector<OracleResult> oracle;
};
GridSearchOutput search_grid_shared(
    const std::vector<env::ProblemInstance>& problems,
    const den::DenoiserHandle& prior, const std::vector<double>& sigma_grid,
    const std::vector<double>& mu_grid, int iterations,
    const std::vector<std::uint64_t>& obs_seeds);

// Best PSNR over the trace; ties break toward the earliest iteration.
// Returned iteration index is 1-based.
std::pair<double, int> optimal_early_stop(const std::vector<double>& trace);

// Persisted search records {problem id, sigma*, mu*, psnr trace} for reuse.
void save_search_results(const std::string& path,
                         const std::vector<std::string>& problem_ids,
                         const std::vector<OracleResult>& results);
std::vector<OracleResult> load_search_results(const std::string& path);

}  // namespace pnprl::policies
