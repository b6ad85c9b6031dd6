// SPDX-License-Identifier: Apache-2.0
#include "pnprl/agent/trainer.hpp"

#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>

#include "pnprl/nn/checkpoint.hpp"

namespace pnprl::agent {

nlohmann::json TrainPolicyConfig::to_json() const {
  nlohmann::json j;
  j["task"] = task;
  j["accels"] = accels;
  j["sigma_ns"] = sigma_ns;
  j["alphas"] = alphas;
  j["mask_pattern"] = fm::to_string(mask_pattern);
  j["mask_seed"] = mask_seed;
  j["cdp_patterns"] = cdp_patterns;
  j["cdp_seed"] = cdp_seed;
  j["env"] = {{"m", env.m},       {"N", env.N},
              {"eta", env.eta},   {"gamma", env.gamma},
              {"shared_pair", env.shared_pair},
              {"sigma_scale", env.sigma_scale}};
  j["trunk"] = {{"in_ch", trunk.in_ch}, {"widths", trunk.widths},
                {"feat", trunk.feat}};
  j["batch"] = batch;
  j["outer_iterations"] = outer_iterations;
  j["grad_steps"] = grad_steps;
  j["lr_policy"] = lr_policy;
  j["lr_value"] = lr_value;
  j["lr_decay_at"] = lr_decay_at;
  j["lr_policy_after"] = lr_policy_after;
  j["lr_value_after"] = lr_value_after;
  j["ema_rate"] = ema_rate;
  j["buffer_capacity"] = buffer_capacity;
  j["warmup_episodes"] = warmup_episodes;
  j["episodes_per_iteration"] = episodes_per_iteration;
  j["collect_noise"] = collect_noise;
  j["model_free_pi2"] = model_free_pi2;
  j["seed"] = seed;
  return j;
}

std::size_t setting_count(const TrainPolicyConfig& cfg) {
  return cfg.task == "csmri" ? cfg.accels.size() * cfg.sigma_ns.size()
                             : cfg.alphas.size();
}

fm::MeasurementModel make_setting_model(const TrainPolicyConfig& cfg, int h,
                                        int w, std::size_t setting_index) {
  if (cfg.task == "csmri") {
    const std::size_t ai = setting_index / cfg.sigma_ns.size();
    const std::size_t si = setting_index % cfg.sigma_ns.size();
    fm::CsmriModel m;
    m.mask = fm::make_mask(h, w, cfg.mask_pattern,
                           fm::accel_to_rate(cfg.accels[ai]),
                           Rng::child(cfg.mask_seed, {ai}).u64());
    m.sigma_n = cfg.sigma_ns[si];
    return m;
  }
  return fm::make_cdp_model(h, w, cfg.cdp_patterns, cfg.alphas[setting_index],
                            cfg.cdp_seed);
}

namespace {

struct EpisodeStats {
  double total_reward = 0.0;
  int blocks = 0;
};

// Collects one episode into the buffer; actions come from the policy with
// exploration noise on a2 (or uniformly at random during warmup).
EpisodeStats collect_episode(PolicyNet& policy, StateBuffer& buffer,
                             const env::EnvState& start, double noise,
                             bool random_actions, Rng& rng) {
  EpisodeStats stats;
  env::EnvState s = start;
  while (!s.done) {
    buffer.push(s);
    env::Action a;
    if (random_actions) {
      a.a1 = (s.t > 0 && rng.uniform() < 0.1) ? 1 : 0;
      const int dim = s.cfg.shared_pair ? 2 : 2 * s.cfg.m;
      a.a2.resize(static_cast<std::size_t>(dim));
      for (double& v : a.a2) v = rng.uniform(1e-3, 1.0 - 1e-3);
    } else {
      const Tensor obs = env::observe(s);
      nn::Tape tape;
      policy.freeze_all(tape);
      const PolicyOutputs outs = policy.forward(tape, tape.constant(obs));
      a.a1 = (s.t > 0 && rng.uniform() < outs.p_terminate()) ? 1 : 0;
      a.a2 = outs.params_vec();
      for (double& v : a.a2)
        v = std::clamp(v + noise * rng.gaussian(), 1e-3, 1.0 - 1e-3);
    }
    const env::StepResult res = env::step(s, a);
    if (res.reward) stats.total_reward += *res.reward;
    if (a.a1 == 1) break;
    s = res.next;
    ++stats.blocks;
  }
  return stats;
}

}  // namespace

TrainPolicyResult train_policy(const std::vector<Tensor>& train_images,
                               const den::DenoiserHandle& prior,
                               const TrainPolicyConfig& cfg) {
  if (train_images.empty())
    throw std::invalid_argument("train_policy: empty dataset");
  const int h = train_images[0].dim(0), w = train_images[0].dim(1);
  for (const Tensor& img : train_images)
    if (img.dim(0) != h || img.dim(1) != w)
      throw std::invalid_argument("train_policy: images must share one shape");

  // Pre-build the setting grid (masks are deterministic per setting).
  std::vector<fm::MeasurementModel> models;
  for (std::size_t i = 0; i < setting_count(cfg); ++i)
    models.push_back(make_setting_model(cfg, h, w, i));

  auto prior_ptr = std::make_shared<den::DenoiserHandle>(prior);

  TrainPolicyResult result;
  Rng init_rng = Rng::child(cfg.seed, {0x1417});
  PolicyNetConfig pcfg{cfg.trunk, cfg.env.m, cfg.env.shared_pair};
  result.snapshot.policy = PolicyNet(pcfg, init_rng);
  result.snapshot.value = ValueNet(cfg.trunk, init_rng);
  result.snapshot.target = ValueNet(cfg.trunk, init_rng);
  // Target starts as an exact copy of the critic.
  copy_params(result.snapshot.value.params(), result.snapshot.target.params());
  result.snapshot.env = cfg.env;
  result.snapshot.config_hash = nn::config_hash(cfg.to_json());

  PolicyNet& policy = result.snapshot.policy;
  ValueNet& value = result.snapshot.value;
  ValueNet& target = result.snapshot.target;

  std::vector<Tensor*> value_ptrs, pi1_ptrs, pi2_ptrs;
  for (auto& [n, p] : value.params()) value_ptrs.push_back(p);
  for (auto& [n, p] : policy.params_theta1()) pi1_ptrs.push_back(p);
  for (auto& [n, p] : policy.params_theta2()) pi2_ptrs.push_back(p);
  nn::Adam opt_value(value_ptrs, {cfg.lr_value, 0.9, 0.999, 1e-8});
  nn::Adam opt_pi1(pi1_ptrs, {cfg.lr_policy, 0.9, 0.999, 1e-8});
  nn::Adam opt_pi2(pi2_ptrs, {cfg.lr_policy, 0.9, 0.999, 1e-8});

  // Optional model-free route for the continuous head.
  QNet qnet, qtarget;
  nn::Adam opt_q;
  if (cfg.model_free_pi2) {
    PolicyNetConfig qc = pcfg;
    qnet = QNet(cfg.trunk, qc.param_dim(), init_rng);
    qtarget = QNet(cfg.trunk, qc.param_dim(), init_rng);
    copy_params(qnet.params(), qtarget.params());
    std::vector<Tensor*> q_ptrs;
    for (auto& [n, p] : qnet.params()) q_ptrs.push_back(p);
    opt_q = nn::Adam(q_ptrs, {cfg.lr_value, 0.9, 0.999, 1e-8});
  }

  const std::size_t capacity =
      cfg.buffer_capacity > 0 ? cfg.buffer_capacity
                              : static_cast<std::size_t>(10) * cfg.batch;
  StateBuffer buffer(capacity);

  auto sample_problem = [&](Rng& rng) {
    env::ProblemInstance p;
    const std::size_t img = rng.index(train_images.size());
    const std::size_t setting = rng.index(models.size());
    p.x_gt = CImage::from_real(train_images[img]);
    p.model = models[setting];
    p.has_gt = true;
    return p;
  };

  // Warmup: seed the buffer with randomly acted episodes.
  for (int e = 0; e < cfg.warmup_episodes; ++e) {
    Rng rng = Rng::child(cfg.seed, {0x3a31, static_cast<std::uint64_t>(e)});
    const env::ProblemInstance problem = sample_problem(rng);
    const env::EnvState start =
        env::reset(problem, cfg.env, prior_ptr, rng.u64());
    collect_episode(policy, buffer, start, 0.0, /*random_actions=*/true, rng);
  }

  for (long it = 0; it < cfg.outer_iterations; ++it) {
    if (it == cfg.lr_decay_at) {
      opt_value.set_lr(cfg.lr_value_after);
      opt_pi1.set_lr(cfg.lr_policy_after);
      opt_pi2.set_lr(cfg.lr_policy_after);
      if (cfg.model_free_pi2) opt_q.set_lr(cfg.lr_value_after);
    }

    double reward_sum = 0.0;
    double length_sum = 0.0;
    for (int e = 0; e < cfg.episodes_per_iteration; ++e) {
      Rng rng = Rng::child(cfg.seed, {0xc011, static_cast<std::uint64_t>(it),
                                      static_cast<std::uint64_t>(e)});
      const env::ProblemInstance problem = sample_problem(rng);
      const env::EnvState start =
          env::reset(problem, cfg.env, prior_ptr, rng.u64());
      const EpisodeStats stats = collect_episode(policy, buffer, start,
                                                 cfg.collect_noise, false, rng);
      reward_sum += stats.total_reward;
      length_sum += stats.blocks;
    }

    double value_loss = 0.0;
    for (int g = 0; g < cfg.grad_steps; ++g) {
      Rng rng = Rng::child(cfg.seed, {0x96ad, static_cast<std::uint64_t>(it),
                                      static_cast<std::uint64_t>(g)});
      const std::vector<env::EnvState> batch =
          buffer.sample(rng, static_cast<std::size_t>(cfg.batch));
      Rng rng_v(rng.u64()), rng_p1(rng.u64()), rng_q(rng.u64());
      const GradStepRecord vrec =
          value_update(policy, value, target, opt_value, batch, cfg.env.gamma,
                       rng_v);
      value_loss = vrec.objective;
      policy_update_pi1(policy, value, target, opt_pi1, batch, cfg.env.gamma,
                        rng_p1);
      if (cfg.model_free_pi2) {
        q_update(policy, qnet, qtarget, opt_q, batch, cfg.env.gamma, rng_q);
        policy_update_pi2_modelfree(policy, qnet, opt_pi2, batch);
        ema_update(qnet.params(), qtarget.params(), cfg.ema_rate);
      } else {
        policy_update_pi2(policy, value, opt_pi2, batch, cfg.env.gamma);
      }
      ema_update(value.params(), target.params(), cfg.ema_rate);
      ++result.snapshot.train_step;
    }

    IterationLog log;
    log.iteration = it + 1;
    log.mean_reward = reward_sum / cfg.episodes_per_iteration;
    log.value_loss = value_loss;
    log.mean_episode_length = length_sum / cfg.episodes_per_iteration;
    result.log.push_back(log);
    if (cfg.verbose && ((it + 1) % 10 == 0 || it == 0))
      std::fprintf(stderr,
                   "[pnprl] policy iter %ld/%ld  reward %.3f  vloss %.4f  "
                   "len %.2f\n",
                   it + 1, cfg.outer_iterations, log.mean_reward,
                   log.value_loss, log.mean_episode_length);

    if (!cfg.checkpoint_dir.empty() && cfg.checkpoint_every > 0 &&
        (it + 1) % cfg.checkpoint_every == 0) {
      std::filesystem::create_directories(cfg.checkpoint_dir);
      save_snapshot(cfg.checkpoint_dir + "/policy_iter" +
                        std::to_string(it + 1) + ".ckpt",
                    result.snapshot);
    }
  }

  if (!cfg.checkpoint_dir.empty()) {
    std::filesystem::create_directories(cfg.checkpoint_dir);
    save_snapshot(cfg.checkpoint_dir + "/policy_final.ckpt", result.snapshot);
  }
  return result;
}

void save_snapshot(const std::string& path, PolicySnapshot& snap) {
  nn::ParamList arrays = snap.policy.params();
  for (auto& item : snap.value.params()) arrays.push_back(item);
  for (auto& item : snap.target.params("target")) arrays.push_back(item);

  nlohmann::json meta;
  meta["kind"] = "policy_snapshot";
  meta["train_step"] = snap.train_step;
  meta["config_hash"] = snap.config_hash;
  meta["env"] = {{"m", snap.env.m},     {"N", snap.env.N},
                 {"eta", snap.env.eta}, {"gamma", snap.env.gamma},
                 {"shared_pair", snap.env.shared_pair},
                 {"sigma_scale", snap.env.sigma_scale}};
  const auto& tc = snap.value.config();
  meta["trunk"] = {{"in_ch", tc.in_ch}, {"widths", tc.widths}, {"feat", tc.feat}};
  nn::save_checkpoint(path, arrays, meta);
}

PolicySnapshot load_snapshot(const std::string& path) {
  const nlohmann::json meta = nn::read_checkpoint_meta(path);
  if (meta.value("kind", "") != "policy_snapshot")
    throw std::runtime_error("load_snapshot: not a policy snapshot: " + path);

  PolicySnapshot snap;
  snap.env.m = meta["env"]["m"];
  snap.env.N = meta["env"]["N"];
  snap.env.eta = meta["env"]["eta"];
  snap.env.gamma = meta["env"]["gamma"];
  snap.env.shared_pair = meta["env"]["shared_pair"];
  snap.env.sigma_scale = meta["env"]["sigma_scale"];
  snap.train_step = meta.value("train_step", 0L);
  snap.config_hash = meta.value("config_hash", "");

  nn::TrunkConfig tc;
  tc.in_ch = meta["trunk"]["in_ch"];
  tc.widths = meta["trunk"]["widths"].get<std::vector<int>>();
  tc.feat = meta["trunk"]["feat"];

  Rng rng(0);
  snap.policy = PolicyNet(PolicyNetConfig{tc, snap.env.m, snap.env.shared_pair},
                          rng);
  snap.value = ValueNet(tc, rng);
  snap.target = ValueNet(tc, rng);

  nn::ParamList arrays = snap.policy.params();
  for (auto& item : snap.value.params()) arrays.push_back(item);
  for (auto& item : snap.target.params("target")) arrays.push_back(item);
  nn::load_checkpoint(path, arrays);
  return snap;
}

void write_train_log(const std::string& path,
                     const std::vector<IterationLog>& log) {
  std::ofstream f(path);
  if (!f) throw std::runtime_error("write_train_log: cannot open " + path);
  for (const IterationLog& l : log) {
    nlohmann::json j;
    j["iteration"] = l.iteration;
    j["mean_reward"] = l.mean_reward;
    j["value_loss"] = l.value_loss;
    j["mean_episode_length"] = l.mean_episode_length;
    f << j.dump() << "\n";
  }
}

}  // namespace pnprl::agent
