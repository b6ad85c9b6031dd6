// SPDX-License-Identifier: Apache-2.0
#include "pnprl/harness/evaluate.hpp"

#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>

#include "pnprl/core/image_io.hpp"
#include "pnprl/core/parallel.hpp"

namespace pnprl::harness {

namespace fs = std::filesystem;

std::size_t eval_setting_count(const ExperimentConfig& cfg) {
  return cfg.task == "csmri" ? cfg.accels.size() * cfg.sigma_ns.size()
                             : cfg.alphas.size();
}

double setting_accel_or_alpha(const ExperimentConfig& cfg, std::size_t s) {
  return cfg.task == "csmri" ? cfg.accels[s / cfg.sigma_ns.size()]
                             : cfg.alphas[s];
}

double setting_sigma_n(const ExperimentConfig& cfg, std::size_t s) {
  return cfg.task == "csmri" ? cfg.sigma_ns[s % cfg.sigma_ns.size()] : 0.0;
}

fm::MeasurementModel eval_setting_model(const ExperimentConfig& cfg, int h,
                                        int w, std::size_t s) {
  if (cfg.task == "csmri") {
    const std::size_t ai = s / cfg.sigma_ns.size();
    fm::CsmriModel m;
    m.mask = fm::make_mask(h, w, fm::mask_pattern_from_string(cfg.mask_pattern),
                           fm::accel_to_rate(cfg.accels[ai]),
                           Rng::child(cfg.mask_seed, {ai}).u64());
    m.sigma_n = setting_sigma_n(cfg, s);
    return m;
  }
  return fm::make_cdp_model(h, w, cfg.cdp_patterns, cfg.alphas[s], cfg.cdp_seed);
}

std::uint64_t row_obs_seed(std::uint64_t config_seed, std::size_t image_index,
                           std::size_t setting_index) {
  return Rng::child(config_seed, {image_index, setting_index}).u64();
}

den::DenoiserHandle load_denoiser_or_identity(const std::string& path) {
  if (path.empty() || path == "identity") return den::make_identity_handle();
  return den::load_denoiser(path);
}

namespace {

std::string fmt(double v, int prec = 6) {
  std::ostringstream os;
  os.setf(std::ios::fixed);
  os.precision(prec);
  os << v;
  return os.str();
}

struct CurveData {
  std::vector<int> iterations;
  std::vector<double> psnr;
};

struct CellResult {
  ResultRecord record;
  CurveData curve;
  CImage reconstruction;
};

// Shared per-policy context (search results, learned snapshots).
struct PolicyContext {
  // (setting, seed) -> searched fixed-optimal pair
  std::map<std::pair<std::size_t, std::uint64_t>, std::pair<double, double>>
      fixed_optimal;
  // (setting, seed, image) -> oracle pair
  std::map<std::tuple<std::size_t, std::uint64_t, std::size_t>,
           std::pair<double, double>>
      oracle;
  std::map<std::string, std::shared_ptr<agent::PolicySnapshot>> snapshots;
};

CellResult eval_cell(const ExperimentConfig& cfg, const Tensor& image,
                     const std::string& image_id,
                     const fm::MeasurementModel& model, std::size_t setting,
                     const PolicyEntry& policy, std::uint64_t obs_seed,
                     const den::DenoiserHandle& prior, PolicyContext& ctx,
                     std::uint64_t config_seed, std::size_t image_index) {
  using clock = std::chrono::steady_clock;
  env::ProblemInstance problem;
  problem.x_gt = CImage::from_real(image);
  problem.model = model;
  problem.has_gt = true;

  CellResult out;
  out.record.image_id = image_id;
  out.record.task = cfg.task;
  out.record.accel_or_alpha = setting_accel_or_alpha(cfg, setting);
  out.record.sigma_n = setting_sigma_n(cfg, setting);
  out.record.policy = policy.name;
  out.record.seed = obs_seed;

  const auto t0 = clock::now();
  switch (policy.spec.kind) {
    case policies::PolicyKind::kFixed: {
      const auto traj =
          policies::run_fixed(problem, prior, policy.spec.sigma, policy.spec.mu,
                              policy.spec.max_inner_iterations, obs_seed);
      out.record.psnr_db = traj.final_psnr();
      out.record.iterations = static_cast<int>(traj.psnr_trace.size());
      out.curve.psnr = traj.psnr_trace;
      out.reconstruction = traj.final_x;
      break;
    }
    case policies::PolicyKind::kHandcrafted: {
      const auto traj = policies::run_handcrafted(
          problem, prior, policy.spec.max_inner_iterations, obs_seed,
          policy.spec.hc_lambda, policy.spec.hc_sigma_start);
      out.record.psnr_db = traj.final_psnr();
      out.record.iterations = static_cast<int>(traj.psnr_trace.size());
      out.curve.psnr = traj.psnr_trace;
      out.reconstruction = traj.final_x;
      break;
    }
    case policies::PolicyKind::kFixedOptimal: {
      const auto key = std::make_pair(setting, config_seed);
      const auto [sg, mu] = ctx.fixed_optimal.at(key);
      const auto traj = policies::run_fixed(
          problem, prior, sg, mu, policy.spec.max_inner_iterations, obs_seed);
      out.record.psnr_db = traj.final_psnr();
      out.record.iterations = static_cast<int>(traj.psnr_trace.size());
      out.curve.psnr = traj.psnr_trace;
      out.reconstruction = traj.final_x;
      break;
    }
    case policies::PolicyKind::kOracle: {
      const auto key = std::make_tuple(setting, config_seed, image_index);
      const auto [sg, mu] = ctx.oracle.at(key);
      const auto traj = policies::run_fixed(
          problem, prior, sg, mu, policy.spec.max_inner_iterations, obs_seed);
      out.record.psnr_db = traj.final_psnr();
      out.record.iterations = static_cast<int>(traj.psnr_trace.size());
      out.curve.psnr = traj.psnr_trace;
      out.reconstruction = traj.final_x;
      break;
    }
    case policies::PolicyKind::kLearned: {
      auto snap = ctx.snapshots.at(policy.spec.snapshot_path);
      auto prior_ptr = std::make_shared<den::DenoiserHandle>(prior);
      const env::EnvState start =
          env::reset(problem, snap->env, prior_ptr, obs_seed);
      const agent::Rollout roll =
          agent::run_policy_episode(snap->policy, start, false, nullptr);
      out.record.psnr_db = env::state_psnr(roll.final_state);
      out.record.iterations = roll.inner_iterations;
      // per-block curve, annotated with true inner iteration counts
      for (std::size_t b = 1; b < roll.psnr_trace.size(); ++b) {
        out.curve.iterations.push_back(static_cast<int>(b) * snap->env.m);
        out.curve.psnr.push_back(roll.psnr_trace[b]);
      }
      out.reconstruction = roll.final_state.opt.x;
      break;
    }
  }
  out.record.wall_time_s =
      std::chrono::duration<double>(clock::now() - t0).count();
  if (out.curve.iterations.empty())
    for (std::size_t i = 0; i < out.curve.psnr.size(); ++i)
      out.curve.iterations.push_back(static_cast<int>(i) + 1);
  return out;
}

void write_curve(const std::string& path, const CurveData& c) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_curve: cannot open " + path);
  f << "iteration,psnr_db\n";
  for (std::size_t i = 0; i < c.psnr.size(); ++i)
    f << c.iterations[i] << "," << fmt(c.psnr[i]) << "\n";
}

}  // namespace

EvalOutput evaluate_policy(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string outdir = cfg.resolved_output_dir();
  fs::create_directories(outdir);
  if (cfg.write_curves) fs::create_directories(outdir + "/curves");
  if (cfg.write_images) fs::create_directories(outdir + "/images");

  {
    std::ofstream echo(outdir + "/config_echo.json");
    echo << cfg.to_json().dump(2) << "\n";
  }

  const Dataset ds = ingest_dataset(cfg.dataset_path, cfg.resize, cfg.limit);
  const den::DenoiserHandle prior =
      load_denoiser_or_identity(cfg.denoiser_checkpoint);
  const int h = ds.images[0].dim(0), w = ds.images[0].dim(1);

  const std::size_t nset = eval_setting_count(cfg);
  std::vector<fm::MeasurementModel> models;
  for (std::size_t s = 0; s < nset; ++s)
    models.push_back(eval_setting_model(cfg, h, w, s));

  PolicyContext ctx;
  const std::vector<double> sgrid = cfg.sigma8_grid.empty()
                                        ? policies::default_sigma_grid()
                                        : [&] {
                                            std::vector<double> g = cfg.sigma8_grid;
                                            for (double& v : g) v /= 255.0;
                                            return g;
                                          }();
  const std::vector<double> mgrid =
      cfg.mu_grid.empty() ? policies::default_mu_grid() : cfg.mu_grid;

  bool need_fixed_optimal = false, need_oracle = false;
  for (const PolicyEntry& p : cfg.policies) {
    if (p.spec.kind == policies::PolicyKind::kFixedOptimal)
      need_fixed_optimal = true;
    if (p.spec.kind == policies::PolicyKind::kOracle) need_oracle = true;
    if (p.spec.kind == policies::PolicyKind::kLearned &&
        !ctx.snapshots.contains(p.spec.snapshot_path))
      ctx.snapshots[p.spec.snapshot_path] = std::make_shared<agent::PolicySnapshot>(
          agent::load_snapshot(p.spec.snapshot_path));
  }

  // Shared exhaustive searches per (setting, seed).
  if (need_fixed_optimal || need_oracle) {
    for (std::size_t s = 0; s < nset; ++s) {
      for (const std::uint64_t seed : cfg.seeds) {
        std::vector<env::ProblemInstance> problems;
        std::vector<std::uint64_t> obs_seeds;
        for (std::size_t i = 0; i < ds.images.size(); ++i) {
          env::ProblemInstance p;
          p.x_gt = CImage::from_real(ds.images[i]);
          p.model = models[s];
          p.has_gt = true;
          problems.push_back(std::move(p));
          obs_seeds.push_back(row_obs_seed(seed, i, s));
        }
        const int iters = cfg.policies.front().spec.max_inner_iterations;
        const auto shared = policies::search_grid_shared(
            problems, prior, sgrid, mgrid, iters, obs_seeds);
        ctx.fixed_optimal[{s, seed}] = {shared.fixed_optimal.sigma,
                                        shared.fixed_optimal.mu};
        for (std::size_t i = 0; i < ds.images.size(); ++i)
          ctx.oracle[{s, seed, i}] = {shared.oracle[i].sigma,
                                      shared.oracle[i].mu};
      }
    }
  }

  // Cell grid in deterministic (image, setting, policy, seed) order.
  struct Cell {
    std::size_t img, set, pol, seed_idx;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < ds.images.size(); ++i)
    for (std::size_t s = 0; s < nset; ++s)
      for (std::size_t p = 0; p < cfg.policies.size(); ++p)
        for (std::size_t k = 0; k < cfg.seeds.size(); ++k)
          cells.push_back({i, s, p, k});

  std::vector<CellResult> results(cells.size());
  parallel_for(cells.size(), [&](std::size_t c) {
    const Cell& cell = cells[c];
    results[c] = eval_cell(
        cfg, ds.images[cell.img], ds.ids[cell.img], models[cell.set], cell.set,
        cfg.policies[cell.pol],
        row_obs_seed(cfg.seeds[cell.seed_idx], cell.img, cell.set), prior, ctx,
        cfg.seeds[cell.seed_idx], cell.img);
  });

  EvalOutput out;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    out.records.push_back(results[c].record);
    if (cfg.write_curves) {
      const Cell& cell = cells[c];
      std::ostringstream name;
      name << outdir << "/curves/" << ds.ids[cell.img] << "_s" << cell.set
           << "_" << cfg.policies[cell.pol].name << "_seed"
           << cfg.seeds[cell.seed_idx] << ".csv";
      write_curve(name.str(), results[c].curve);
    }
    if (cfg.write_images) {
      const Cell& cell = cells[c];
      std::ostringstream name;
      name << outdir << "/images/" << ds.ids[cell.img] << "_s" << cell.set
           << "_" << cfg.policies[cell.pol].name << "_seed"
           << cfg.seeds[cell.seed_idx] << ".png";
      save_png(name.str(), results[c].reconstruction.magnitude());
    }
  }

  out.records_csv = outdir + "/records.csv";
  out.aggregate_csv = outdir + "/aggregate.csv";
  write_records_csv(out.records_csv, out.records);
  write_aggregate_csv(out.aggregate_csv, out.records);
  return out;
}

RunOutput run_single(const ExperimentConfig& cfg, const Tensor& image,
                     const std::string& image_id, std::size_t setting_index,
                     const PolicyEntry& policy, std::uint64_t obs_seed) {
  const den::DenoiserHandle prior =
      load_denoiser_or_identity(cfg.denoiser_checkpoint);
  const fm::MeasurementModel model =
      eval_setting_model(cfg, image.dim(0), image.dim(1), setting_index);

  PolicyContext ctx;
  if (policy.spec.kind == policies::PolicyKind::kLearned)
    ctx.snapshots[policy.spec.snapshot_path] =
        std::make_shared<agent::PolicySnapshot>(
            agent::load_snapshot(policy.spec.snapshot_path));
  if (policy.spec.kind == policies::PolicyKind::kFixedOptimal ||
      policy.spec.kind == policies::PolicyKind::kOracle)
    throw std::invalid_argument(
        "run_single: searched policies need the full eval path");

  CellResult cell = eval_cell(cfg, image, image_id, model, setting_index,
                              policy, obs_seed, prior, ctx, 0, 0);
  RunOutput out;
  out.record = cell.record;
  out.psnr_trace = cell.curve.psnr;
  out.trace_iterations = cell.curve.iterations;
  out.reconstruction = cell.reconstruction;
  return out;
}

void write_records_csv(const std::string& path,
                       const std::vector<ResultRecord>& records) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_records_csv: cannot open " + path);
  f << "image_id,task,accel_or_alpha,sigma_n,policy,seed,psnr_db,iterations,"
       "wall_time_s\n";
  for (const ResultRecord& r : records)
    f << r.image_id << "," << r.task << "," << r.accel_or_alpha << ","
      << r.sigma_n << "," << r.policy << "," << r.seed << ","
      << fmt(r.psnr_db) << "," << r.iterations << "," << fmt(r.wall_time_s, 4)
      << "\n";
}

std::vector<ResultRecord> read_records_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw std::runtime_error("read_records_csv: cannot open " + path);
  std::string line;
  std::getline(f, line);  // header
  std::vector<ResultRecord> out;
  while (std::getline(f, line)) {
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string field;
    ResultRecord r;
    std::getline(ss, r.image_id, ',');
    std::getline(ss, r.task, ',');
    std::getline(ss, field, ',');
    r.accel_or_alpha = std::stod(field);
    std::getline(ss, field, ',');
    r.sigma_n = std::stod(field);
    std::getline(ss, r.policy, ',');
    std::getline(ss, field, ',');
    r.seed = std::stoull(field);
    std::getline(ss, field, ',');
    r.psnr_db = std::stod(field);
    std::getline(ss, field, ',');
    r.iterations = std::stoi(field);
    std::getline(ss, field, ',');
    r.wall_time_s = std::stod(field);
    out.push_back(std::move(r));
  }
  return out;
}

void write_aggregate_csv(const std::string& path,
                         const std::vector<ResultRecord>& records) {
  if (records.empty())
    throw std::invalid_argument("write_aggregate_csv: empty results");
  struct Acc {
    double psnr = 0.0;
    double iters = 0.0;
    int n = 0;
  };
  std::map<std::tuple<std::string, double, double, std::string>, Acc> cells;
  for (const ResultRecord& r : records) {
    Acc& a = cells[{r.task, r.accel_or_alpha, r.sigma_n, r.policy}];
    a.psnr += r.psnr_db;
    a.iters += r.iterations;
    ++a.n;
  }
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_aggregate_csv: cannot open " + path);
  f << "task,accel_or_alpha,sigma_n,policy,mean_psnr_db,mean_iterations,count\n";
  for (const auto& [key, a] : cells) {
    const auto& [task, accel, sn, pol] = key;
    f << task << "," << accel << "," << sn << "," << pol << ","
      << fmt(a.psnr / a.n) << "," << fmt(a.iters / a.n, 2) << "," << a.n
      << "\n";
  }
}

}  // namespace pnprl::harness
