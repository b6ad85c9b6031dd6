// SPDX-License-Identifier: Apache-2.0
#include "pnprl/policies/baselines.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "pnprl/core/parallel.hpp"

namespace pnprl::policies {

const char* to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::kFixed: return "fixed";
    case PolicyKind::kHandcrafted: return "handcrafted";
    case PolicyKind::kFixedOptimal: return "fixed_optimal";
    case PolicyKind::kOracle: return "oracle";
    case PolicyKind::kLearned: return "learned";
  }
  return "?";
}

PolicyKind policy_kind_from_string(const std::string& s) {
  if (s == "fixed") return PolicyKind::kFixed;
  if (s == "handcrafted") return PolicyKind::kHandcrafted;
  if (s == "fixed_optimal") return PolicyKind::kFixedOptimal;
  if (s == "oracle") return PolicyKind::kOracle;
  if (s == "learned") return PolicyKind::kLearned;
  throw std::invalid_argument("unknown policy kind: " + s);
}

namespace {

Trajectory run_schedule(const env::ProblemInstance& problem,
                        const den::DenoiserHandle& prior,
                        const std::vector<double>& sigmas,
                        const std::vector<double>& mus,
                        std::uint64_t obs_seed) {
  const fm::Observation obs =
      fm::synthesize_measurement(problem.x_gt, problem.model, obs_seed);
  prox::OptState s = prox::init_state(obs, problem.model);
  Trajectory out;
  out.sigmas_used = sigmas;
  out.mus_used = mus;
  out.psnr_trace.reserve(sigmas.size());
  for (std::size_t k = 0; k < sigmas.size(); ++k) {
    s = prox::admm_iterate(s, sigmas[k], mus[k], obs, problem.model, prior);
    out.psnr_trace.push_back(fm::psnr(s.x, problem.x_gt));
  }
  out.final_x = s.x;
  return out;
}

}  // namespace

Trajectory run_fixed(const env::ProblemInstance& problem,
                     const den::DenoiserHandle& prior, double sigma, double mu,
                     int iterations, std::uint64_t obs_seed) {
  if (!(sigma > 0.0) || !(mu > 0.0))
    throw std::invalid_argument("run_fixed: nonpositive parameters");
  const std::vector<double> sigmas(static_cast<std::size_t>(iterations), sigma);
  const std::vector<double> mus(static_cast<std::size_t>(iterations), mu);
  return run_schedule(problem, prior, sigmas, mus, obs_seed);
}

Trajectory run_handcrafted(const env::ProblemInstance& problem,
                           const den::DenoiserHandle& prior, int iterations,
                           std::uint64_t obs_seed, double lambda,
                           double sigma_start) {
  const double sigma_n8 = std::max(fm::model_sigma_n(problem.model), 1.0);
  const double a = sigma_start;  // schedule endpoints in 8-bit units
  const double b = sigma_n8;
  std::vector<double> sigmas, mus;
  for (int k = 0; k < iterations; ++k) {
    const double frac =
        iterations == 1 ? 1.0 : static_cast<double>(k) / (iterations - 1);
    const double s8 = std::exp(std::log(a) + (std::log(b) - std::log(a)) * frac);
    sigmas.push_back(s8 / 255.0);
    mus.push_back(lambda * (sigma_n8 / s8) * (sigma_n8 / s8));
  }
  return run_schedule(problem, prior, sigmas, mus, obs_seed);
}

std::vector<double> default_sigma_grid() {
  std::vector<double> g{1, 3, 5, 7, 10, 15, 20, 25, 30, 40, 50};
  for (double& v : g) v /= 255.0;
  return g;
}

std::vector<double> default_mu_grid() {
  return {0.01, 0.03, 0.05, 0.1, 0.2, 0.3, 0.5, 1.0};
}

namespace {

// All (problem x grid point) runs, parallel over cells with deterministic
// placement: traces[p][si][mi].
std::vector<std::vector<std::vector<Trajectory>>> run_grid(
    const std::vector<env::ProblemInstance>& problems,
    const den::DenoiserHandle& prior, const std::vector<double>& sigma_grid,
    const std::vector<double>& mu_grid, int iterations,
    const std::vector<std::uint64_t>& obs_seeds) {
  if (problems.empty()) throw std::invalid_argument("search: no problems");
  if (obs_seeds.size() != problems.size())
    throw std::invalid_argument("search: one observation seed per problem");
  if (sigma_grid.empty() || mu_grid.empty())
    throw std::invalid_argument("search: empty grids");
  const std::size_t ns = sigma_grid.size(), nm = mu_grid.size();
  std::vector<std::vector<std::vector<Trajectory>>> traces(
      problems.size(),
      std::vector<std::vector<Trajectory>>(ns, std::vector<Trajectory>(nm)));
  const std::size_t cells = problems.size() * ns * nm;
  parallel_for(cells, [&](std::size_t c) {
    const std::size_t p = c / (ns * nm);
    const std::size_t si = (c / nm) % ns;
    const std::size_t mi = c % nm;
    traces[p][si][mi] = run_fixed(problems[p], prior, sigma_grid[si],
                                  mu_grid[mi], iterations, obs_seeds[p]);
  });
  return traces;
}

}  // namespace

namespace {

FixedOptimalResult fixed_optimal_from_traces(
    std::vector<std::vector<std::vector<Trajectory>>>& traces,
    const std::vector<double>& sigma_grid, const std::vector<double>& mu_grid,
    std::size_t nproblems) {
  const std::size_t ns = sigma_grid.size(), nm = mu_grid.size();
  FixedOptimalResult out;
  out.grid_mean_psnr.assign(ns, std::vector<double>(nm, 0.0));
  double best = -1e300;
  std::size_t bsi = 0, bmi = 0;
  for (std::size_t si = 0; si < ns; ++si) {
    for (std::size_t mi = 0; mi < nm; ++mi) {
      double mean = 0.0;
      for (std::size_t p = 0; p < nproblems; ++p)
        mean += traces[p][si][mi].final_psnr();
      mean /= static_cast<double>(nproblems);
      out.grid_mean_psnr[si][mi] = mean;
      if (mean > best) {
        best = mean;
        bsi = si;
        bmi = mi;
      }
    }
  }
  out.sigma = sigma_grid[bsi];
  out.mu = mu_grid[bmi];
  out.mean_final_psnr = best;
  for (std::size_t p = 0; p < nproblems; ++p)
    out.traces.push_back(traces[p][bsi][bmi]);
  return out;
}

std::vector<OracleResult> oracle_from_traces(
    std::vector<std::vector<std::vector<Trajectory>>>& traces,
    const std::vector<double>& sigma_grid, const std::vector<double>& mu_grid,
    std::size_t nproblems) {
  const std::size_t ns = sigma_grid.size(), nm = mu_grid.size();
  std::vector<OracleResult> out(nproblems);
  for (std::size_t p = 0; p < nproblems; ++p) {
    double best = -1e300;
    std::size_t bsi = 0, bmi = 0;
    for (std::size_t si = 0; si < ns; ++si)
      for (std::size_t mi = 0; mi < nm; ++mi)
        if (traces[p][si][mi].final_psnr() > best) {
          best = traces[p][si][mi].final_psnr();
          bsi = si;
          bmi = mi;
        }
    out[p].sigma = sigma_grid[bsi];
    out[p].mu = mu_grid[bmi];
    out[p].trace = traces[p][bsi][bmi];
  }
  return out;
}

}  // namespace

FixedOptimalResult search_fixed_optimal(
    const std::vector<env::ProblemInstance>& problems,
    const den::DenoiserHandle& prior, const std::vector<double>& sigma_grid,
    const std::vector<double>& mu_grid, int iterations,
    const std::vector<std::uint64_t>& obs_seeds) {
  auto traces =
      run_grid(problems, prior, sigma_grid, mu_grid, iterations, obs_seeds);
  return fixed_optimal_from_traces(traces, sigma_grid, mu_grid, problems.size());
}

std::vector<OracleResult> search_oracle(
    const std::vector<env::ProblemInstance>& problems,
    const den::DenoiserHandle& prior, const std::vector<double>& sigma_grid,
    const std::vector<double>& mu_grid, int iterations,
    const std::vector<std::uint64_t>& obs_seeds) {
  auto traces =
      run_grid(problems, prior, sigma_grid, mu_grid, iterations, obs_seeds);
  return oracle_from_traces(traces, sigma_grid, mu_grid, problems.size());
}

GridSearchOutput search_grid_shared(
    const std::vector<env::ProblemInstance>& problems,
    const den::DenoiserHandle& prior, const std::vector<double>& sigma_grid,
    const std::vector<double>& mu_grid, int iterations,
    const std::vector<std::uint64_t>& obs_seeds) {
  auto traces =
      run_grid(problems, prior, sigma_grid, mu_grid, iterations, obs_seeds);
  GridSearchOutput out;
  out.fixed_optimal =
      fixed_optimal_from_traces(traces, sigma_grid, mu_grid, problems.size());
  out.oracle = oracle_from_traces(traces, sigma_grid, mu_grid, problems.size());
  return out;
}

std::pair<double, int> optimal_early_stop(const std::vector<double>& trace) {
  if (trace.empty()) throw std::invalid_argument("optimal_early_stop: empty");
  std::size_t best = 0;
  for (std::size_t i = 1; i < trace.size(); ++i)
    if (trace[i] > trace[best]) best = i;
  return {trace[best], static_cast<int>(best) + 1};
}

void save_search_results(const std::string& path,
                         const std::vector<std::string>& problem_ids,
                         const std::vector<OracleResult>& results) {
  if (problem_ids.size() != results.size())
    throw std::invalid_argument("save_search_results: id/result count mismatch");
  nlohmann::json arr = nlohmann::json::array();
  for (std::size_t i = 0; i < results.size(); ++i) {
    nlohmann::json rec;
    rec["id"] = problem_ids[i];
    rec["sigma"] = results[i].sigma;
    rec["mu"] = results[i].mu;
    rec["psnr_trace"] = results[i].trace.psnr_trace;
    arr.push_back(std::move(rec));
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("save_search_results: cannot open " + path);
  f << arr.dump(2) << "\n";
}

std::vector<OracleResult> load_search_results(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("load_search_results: cannot open " + path);
  nlohmann::json arr = nlohmann::json::parse(f);
  std::vector<OracleResult> out;
  for (const auto& rec : arr) {
    OracleResult r;
    r.sigma = rec.at("sigma");
    r.mu = rec.at("mu");
    r.trace.psnr_trace = rec.at("psnr_trace").get<std::vector<double>>();
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace pnprl::policies
