// SPDX-License-Identifier: Apache-2.0
//
// pnprl command line: mask generation, denoiser/policy training, evaluation
// campaigns, reports, and single-image reconstruction.

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>

#include "pnprl/core/image_io.hpp"
#include "pnprl/denoiser/denoiser.hpp"
#include "pnprl/harness/report.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

json load_json_with_overrides(const std::string& path,
                              const std::vector<std::string>& sets) {
  json j;
  if (!path.empty()) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open config " + path);
    j = json::parse(f);
  }
  for (const std::string& s : sets) pnprl::harness::apply_override(j, s);
  return j;
}

pnprl::agent::TrainPolicyConfig policy_config_from_json(const json& j) {
  pnprl::agent::TrainPolicyConfig c;
  c.task = j.value("task", c.task);
  if (j.contains("problems")) {
    const auto& p = j["problems"];
    if (p.contains("accels")) c.accels = p["accels"].get<std::vector<double>>();
    if (p.contains("sigma_ns"))
      c.sigma_ns = p["sigma_ns"].get<std::vector<double>>();
    if (p.contains("alphas")) c.alphas = p["alphas"].get<std::vector<double>>();
    c.mask_pattern = pnprl::fm::mask_pattern_from_string(
        p.value("mask_pattern", std::string("radial")));
    c.mask_seed = p.value("mask_seed", c.mask_seed);
    c.cdp_patterns = p.value("cdp_patterns", c.cdp_patterns);
    c.cdp_seed = p.value("cdp_seed", c.cdp_seed);
  }
  if (j.contains("env")) {
    const auto& e = j["env"];
    c.env.m = e.value("m", c.env.m);
    c.env.N = e.value("N", c.env.N);
    c.env.eta = e.value("eta", c.env.eta);
    c.env.gamma = e.value("gamma", c.env.gamma);
    c.env.shared_pair = e.value("shared_pair", c.env.shared_pair);
  }
  if (j.contains("rl")) {
    const auto& r = j["rl"];
    if (r.contains("trunk_widths"))
      c.trunk.widths = r["trunk_widths"].get<std::vector<int>>();
    c.trunk.feat = r.value("feat", c.trunk.feat);
    c.batch = r.value("batch", c.batch);
    c.outer_iterations = r.value("outer_iterations", c.outer_iterations);
    c.grad_steps = r.value("grad_steps", c.grad_steps);
    c.lr_policy = r.value("lr_policy", c.lr_policy);
    c.lr_value = r.value("lr_value", c.lr_value);
    c.lr_decay_at = r.value("lr_decay_at", c.lr_decay_at);
    c.lr_policy_after = r.value("lr_policy_after", c.lr_policy_after);
    c.lr_value_after = r.value("lr_value_after", c.lr_value_after);
    c.ema_rate = r.value("ema_rate", c.ema_rate);
    c.buffer_capacity = r.value("buffer_capacity", c.buffer_capacity);
    c.warmup_episodes = r.value("warmup_episodes", c.warmup_episodes);
    c.episodes_per_iteration =
        r.value("episodes_per_iteration", c.episodes_per_iteration);
    c.collect_noise = r.value("collect_noise", c.collect_noise);
    c.model_free_pi2 = r.value("model_free_pi2", c.model_free_pi2);
    c.seed = r.value("seed", c.seed);
    c.checkpoint_every = r.value("checkpoint_every", c.checkpoint_every);
  }
  c.trunk.in_ch = pnprl::env::kObservationPlanes;
  return c;
}

int cmd_make_masks(const std::string& out_dir, int size,
                   const std::string& pattern, std::vector<double> rates,
                   std::uint64_t seed) {
  fs::create_directories(out_dir);
  for (double rate : rates) {
    const auto m = pnprl::fm::make_mask(
        size, size, pnprl::fm::mask_pattern_from_string(pattern), rate, seed);
    std::ostringstream name;
    name << out_dir << "/mask_" << pattern << "_r" << rate << "_s" << seed
         << ".npy";
    pnprl::fm::save_mask(name.str(), m);
    std::printf("%s  measured_rate=%.4f\n", name.str().c_str(),
                m.measured_rate());
  }
  return 0;
}

int cmd_train_denoiser(const json& j) {
  const std::string data = j.at("dataset").at("path");
  const int resize = j["dataset"].value("resize", 0);
  const int limit = j["dataset"].value("limit", 0);
  const std::string outdir = j.value("output_dir", std::string("out/denoiser"));
  fs::create_directories(outdir);

  pnprl::den::TrainDenoiserConfig cfg;
  if (j.contains("denoiser")) {
    const auto& d = j["denoiser"];
    if (d.contains("widths")) cfg.widths = d["widths"].get<std::vector<int>>();
    cfg.epochs = d.value("epochs", cfg.epochs);
    cfg.batch = d.value("batch", cfg.batch);
    cfg.lr = d.value("lr", cfg.lr);
    cfg.lr_half_epoch = d.value("lr_half_epoch", cfg.lr_half_epoch);
    cfg.lr_final_epoch = d.value("lr_final_epoch", cfg.lr_final_epoch);
    cfg.lr_final = d.value("lr_final", cfg.lr_final);
    cfg.sigma_lo = d.value("sigma8_lo", 1.0) / 255.0;
    cfg.sigma_hi = d.value("sigma8_hi", 50.0) / 255.0;
    cfg.patch = d.value("patch", cfg.patch);
    cfg.stride = d.value("stride", cfg.stride);
    cfg.max_patches = d.value("max_patches", cfg.max_patches);
    cfg.seed = d.value("seed", cfg.seed);
  }
  cfg.checkpoint_dir = outdir + "/checkpoints";
  cfg.verbose = true;

  const auto ds = pnprl::harness::ingest_dataset(data, resize, limit);
  const auto patches = pnprl::den::extract_patches(ds.images, cfg.patch,
                                                   cfg.stride, cfg.max_patches,
                                                   cfg.seed);
  std::printf("training on %zu patches of %dx%d\n", patches.size(), cfg.patch,
              cfg.patch);
  auto result = pnprl::den::train_denoiser(patches, cfg);
  pnprl::den::save_denoiser(outdir + "/denoiser.ckpt", result.handle,
                            json{{"epochs", cfg.epochs},
                                 {"batch", cfg.batch},
                                 {"patches", patches.size()},
                                 {"seed", cfg.seed}});
  std::printf("saved %s\n", (outdir + "/denoiser.ckpt").c_str());
  return 0;
}

int cmd_train_policy(const json& j) {
  const std::string data = j.at("dataset").at("path");
  const int resize = j["dataset"].value("resize", 0);
  const int limit = j["dataset"].value("limit", 0);
  const std::string outdir = j.value("output_dir", std::string("out/policy"));
  fs::create_directories(outdir);

  pnprl::agent::TrainPolicyConfig cfg = policy_config_from_json(j);
  cfg.checkpoint_dir = outdir;
  cfg.verbose = true;

  const auto ds = pnprl::harness::ingest_dataset(data, resize, limit);
  const auto prior = pnprl::harness::load_denoiser_or_identity(
      j.value("denoiser", std::string()));
  auto result = pnprl::agent::train_policy(ds.images, prior, cfg);
  pnprl::agent::write_train_log(outdir + "/train_log.jsonl", result.log);
  std::printf("saved %s\n", (outdir + "/policy_final.ckpt").c_str());
  return 0;
}

int cmd_eval(const json& j) {
  const auto cfg = pnprl::harness::ExperimentConfig::from_json(j);
  const auto out = pnprl::harness::evaluate_policy(cfg);
  std::printf("wrote %s (%zu records)\n", out.records_csv.c_str(),
              out.records.size());
  std::printf("wrote %s\n", out.aggregate_csv.c_str());
  return 0;
}

int cmd_report(const std::string& eval_dir, const std::string& kind) {
  if (kind == "table") {
    const auto records =
        pnprl::harness::read_records_csv(eval_dir + "/records.csv");
    const std::string txt =
        pnprl::harness::report_table(records, eval_dir + "/table.csv");
    std::fputs(txt.c_str(), stdout);
    std::printf("wrote %s\n", (eval_dir + "/table.csv").c_str());
    return 0;
  }
  if (kind == "curves") {
    const int n = pnprl::harness::report_curves(eval_dir);
    std::printf("rendered %d curve plots under %s/curves\n", n,
                eval_dir.c_str());
    return 0;
  }
  std::fprintf(stderr, "unknown report kind: %s (table|curves)\n", kind.c_str());
  return 1;
}

int cmd_run(const json& j, const std::string& image_path,
            const std::string& policy_name, std::size_t setting,
            std::uint64_t obs_seed, const std::string& trace_path) {
  auto cfg = pnprl::harness::ExperimentConfig::from_json(j);
  pnprl::Tensor img = pnprl::load_gray(image_path);
  if (cfg.resize > 0)
    img = pnprl::resize_bilinear(img, cfg.resize, cfg.resize);

  const pnprl::harness::PolicyEntry* entry = nullptr;
  for (const auto& p : cfg.policies)
    if (p.name == policy_name) entry = &p;
  if (entry == nullptr) {
    std::fprintf(stderr, "policy '%s' not present in config\n",
                 policy_name.c_str());
    return 1;
  }

  const auto out = pnprl::harness::run_single(
      cfg, img, fs::path(image_path).stem().string(), setting, *entry,
      obs_seed);
  std::printf("image=%s policy=%s setting=%zu seed=%llu\n",
              out.record.image_id.c_str(), out.record.policy.c_str(), setting,
              static_cast<unsigned long long>(out.record.seed));
  std::printf("psnr_db=%.6f iterations=%d\n", out.record.psnr_db,
              out.record.iterations);

  if (!trace_path.empty() &&
      entry->spec.kind == pnprl::policies::PolicyKind::kLearned) {
    // re-run through the env to export transition records
    const auto prior = pnprl::harness::load_denoiser_or_identity(
        cfg.denoiser_checkpoint);
    auto snap = pnprl::agent::load_snapshot(entry->spec.snapshot_path);
    pnprl::env::ProblemInstance problem;
    problem.x_gt = pnprl::CImage::from_real(img);
    problem.model =
        pnprl::harness::eval_setting_model(cfg, img.dim(0), img.dim(1), setting);
    problem.has_gt = true;
    const auto start = pnprl::env::reset(
        problem, snap.env,
        std::make_shared<pnprl::den::DenoiserHandle>(prior), obs_seed);
    const auto roll =
        pnprl::agent::run_policy_episode(snap.policy, start, false, nullptr);
    pnprl::env::write_trace_jsonl(trace_path, roll.records);
    std::printf("trace written to %s\n", trace_path.c_str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PnP-ADMM inverse imaging with learned parameter policies"};
  app.require_subcommand(1);

  std::string config_path;
  std::vector<std::string> overrides;

  auto add_config_opts = [&](CLI::App* cmd, bool required) {
    cmd->add_option("--config", config_path, "JSON config file")
        ->required(required);
    cmd->add_option("--set", overrides,
                    "dotted-path config override, e.g. env.m=5 (repeatable; "
                    "mirrors every config key)");
  };

  // make-masks
  auto* mk = app.add_subcommand("make-masks", "generate k-space sampling masks");
  std::string mk_out = "out/masks", mk_pattern = "radial";
  int mk_size = 128;
  std::vector<double> mk_rates{0.5, 0.25, 0.125};
  std::uint64_t mk_seed = 0;
  mk->add_option("--out", mk_out, "output directory");
  mk->add_option("--size", mk_size, "grid size");
  mk->add_option("--pattern", mk_pattern, "radial|uniform-random");
  mk->add_option("--rates", mk_rates, "target sampling rates");
  mk->add_option("--seed", mk_seed, "mask seed");

  auto* td = app.add_subcommand("train-denoiser", "train the U-Net prior");
  add_config_opts(td, true);
  auto* tp = app.add_subcommand("train-policy", "train the parameter policy");
  add_config_opts(tp, true);
  auto* ev = app.add_subcommand("eval", "run an evaluation campaign");
  add_config_opts(ev, true);

  auto* rp = app.add_subcommand("report", "render tables/curves from an eval");
  std::string rp_dir, rp_kind = "table";
  rp->add_option("--eval-dir", rp_dir, "evaluation output directory")
      ->required();
  rp->add_option("--kind", rp_kind, "table|curves");

  auto* rn = app.add_subcommand("run", "single-image reconstruction");
  add_config_opts(rn, true);
  std::string rn_image, rn_policy = "fixed", rn_trace;
  std::size_t rn_setting = 0;
  std::uint64_t rn_seed = 0;
  rn->add_option("--image", rn_image, "grayscale image path")->required();
  rn->add_option("--policy", rn_policy, "policy name from the config");
  rn->add_option("--setting", rn_setting, "setting index in the config grid");
  rn->add_option("--obs-seed", rn_seed, "observation seed (CSV seed column)");
  rn->add_option("--trace", rn_trace, "write episode trace JSONL here");

  CLI11_PARSE(app, argc, argv);

  try {
    if (mk->parsed())
      return cmd_make_masks(mk_out, mk_size, mk_pattern, mk_rates, mk_seed);
    const json j = load_json_with_overrides(config_path, overrides);
    if (td->parsed()) return cmd_train_denoiser(j);
    if (tp->parsed()) return cmd_train_policy(j);
    if (ev->parsed()) return cmd_eval(j);
    if (rp->parsed()) return cmd_report(rp_dir, rp_kind);
    if (rn->parsed())
      return cmd_run(j, rn_image, rn_policy, rn_setting, rn_seed, rn_trace);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
