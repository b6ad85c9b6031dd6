// SPDX-License-Identifier: Apache-2.0
#include "pnprl/agent/updates.hpp"

#include <cmath>

#include "pnprl/core/kernels.hpp"
#include "pnprl/core/parallel.hpp"

namespace pnprl::agent {

namespace {

std::vector<Tensor> extract_grads(const nn::Tape& tape,
                                  const nn::ParamList& params) {
  std::vector<Tensor> out;
  out.reserve(params.size());
  for (const auto& [name, w] : params) {
    const Tensor* g = tape.grad_of(*w);
    out.push_back(g != nullptr ? *g : Tensor::zeros(w->shape()));
  }
  return out;
}

std::vector<Tensor> mean_grads(std::vector<std::vector<Tensor>>& per_sample) {
  std::vector<Tensor> acc = std::move(per_sample[0]);
  for (std::size_t s = 1; s < per_sample.size(); ++s)
    for (std::size_t p = 0; p < acc.size(); ++p)
      kern::k().add(acc[p].data(), per_sample[s][p].data(), acc[p].data(),
                    acc[p].numel());
  const double inv = 1.0 / static_cast<double>(per_sample.size());
  for (Tensor& g : acc) kern::k().scal(inv, g.data(), g.numel());
  return acc;
}

double grad_norm(const std::vector<Tensor>& grads) {
  double acc = 0.0;
  for (const Tensor& g : grads) acc += kern::k().dot(g.data(), g.data(), g.numel());
  return std::sqrt(acc);
}

// Frozen policy evaluation on a plain tape.
PolicyOutputs policy_eval(PolicyNet& policy, nn::Tape& tape, const Tensor& obs) {
  policy.freeze_all(tape);
  return policy.forward(tape, tape.constant(obs));
}

struct ContinuePieces {
  double r = 0.0;
  bool next_done = false;
  Tensor obs_next;
};

// Continue-branch transition on the plain (non-autodiff) engine.
ContinuePieces continue_transition(const env::EnvState& s,
                                   const std::vector<double>& a2) {
  env::Action a;
  a.a1 = 0;
  a.a2 = a2;
  const env::StepResult res = env::step(s, a);
  ContinuePieces out;
  out.r = res.reward.value();
  out.next_done = res.done;
  out.obs_next = env::observe(res.next);
  return out;
}

// Shared graph construction for the model-based continuous objective
// Q_c = r + gamma*(1-done')*V(p(s,a2)); a2_var must be a (0,1)-valued vector.
nn::Var build_q_continue(nn::Tape& tape, const ValueNet& value,
                         const env::EnvState& s, nn::Var a2_var, double gamma) {
  const env::EnvConfig& cfg = s.cfg;
  std::vector<nn::Var> sigmas, mus;
  if (cfg.shared_pair) {
    nn::Var sg = nn::mul_const(tape, nn::pick(tape, a2_var, 0), cfg.sigma_scale);
    nn::Var mu = nn::pick(tape, a2_var, 1);
    for (int j = 0; j < cfg.m; ++j) {
      sigmas.push_back(sg);
      mus.push_back(mu);
    }
  } else {
    for (int j = 0; j < cfg.m; ++j) {
      sigmas.push_back(nn::mul_const(
          tape, nn::pick(tape, a2_var, static_cast<std::size_t>(j)),
          cfg.sigma_scale));
      mus.push_back(
          nn::pick(tape, a2_var, static_cast<std::size_t>(cfg.m + j)));
    }
  }

  s.prior->impl->freeze_params(tape);
  prox::DiffState d = prox::to_diff(tape, s.opt);
  d = prox::run_block_diff(tape, d, sigmas, mus, *s.obs, *s.model, *s.prior);
  nn::Var q = env::reward_diff(tape, d, s);
  const bool next_done = s.t + 1 >= cfg.N;
  if (!next_done) {
    nn::Var obs_next = env::observe_diff(tape, d, s, s.t + 1);
    nn::Var v_next = value.forward(tape, obs_next);
    q = nn::add(tape, q, nn::mul_const(tape, nn::reshape(tape, v_next, {1}), gamma));
  }
  return q;
}

}  // namespace

GradStepRecord value_update(PolicyNet& policy, ValueNet& value,
                            const ValueNet& target, nn::Adam& opt,
                            const std::vector<env::EnvState>& batch,
                            double gamma, Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("value_update: empty batch");
  const std::size_t n = batch.size();
  std::vector<std::uint64_t> seeds(n);
  for (auto& sd : seeds) sd = rng.u64();

  const nn::ParamList params = value.params();
  std::vector<std::vector<Tensor>> grads(n);
  std::vector<double> losses(n, 0.0);

  parallel_for(n, [&](std::size_t i) {
    const env::EnvState& s = batch[i];
    const Tensor obs = env::observe(s);
    nn::Tape peval;
    const PolicyOutputs outs = policy_eval(policy, peval, obs);
    Rng srng(seeds[i]);
    const int a1 = (s.t > 0 && srng.uniform() < outs.p_terminate()) ? 1 : 0;

    double target_v = 0.0;  // termination ends the return
    if (a1 == 0) {
      const ContinuePieces cp = continue_transition(s, outs.params_vec());
      target_v = cp.r;
      if (!cp.next_done) target_v += gamma * target.evaluate(cp.obs_next);
    }

    nn::Tape tape;
    nn::Var v = value.forward(tape, tape.constant(obs));
    nn::Var diff = nn::sub(tape, tape.constant_scalar(target_v), v);
    nn::Var loss = nn::mul_const(tape, nn::square(tape, diff), 0.5);
    tape.backward(loss);
    losses[i] = loss->scalar();
    grads[i] = extract_grads(tape, params);
  });

  std::vector<Tensor> g = mean_grads(grads);
  GradStepRecord rec;
  rec.grad_norm = grad_norm(g);
  for (double l : losses) rec.objective += l;
  rec.objective /= static_cast<double>(n);
  opt.step(g);
  return rec;
}

namespace {

// Core of the likelihood-ratio update; the advantage may depend on the
// sampled a1 and the policy's own a2 (via the closure).
GradStepRecord pi1_core(PolicyNet& policy, nn::Adam& opt_pi1,
                        const std::vector<env::EnvState>& batch,
                        const std::function<double(const env::EnvState&, int,
                                                   const std::vector<double>&)>&
                            advantage,
                        Rng& rng) {
  if (batch.empty()) throw std::invalid_argument("policy_update_pi1: empty batch");
  const std::size_t n = batch.size();
  std::vector<std::uint64_t> seeds(n);
  for (auto& sd : seeds) sd = rng.u64();

  const nn::ParamList params = policy.params_theta1();
  std::vector<std::vector<Tensor>> grads(n);
  std::vector<double> advantages(n, 0.0);

  parallel_for(n, [&](std::size_t i) {
    const env::EnvState& s = batch[i];
    const Tensor obs = env::observe(s);

    nn::Tape tape;  // trainable policy pass; only theta1 is reachable below
    const PolicyOutputs outs = policy.forward(tape, tape.constant(obs));
    Rng srng(seeds[i]);
    const int a1 = (s.t > 0 && srng.uniform() < outs.p_terminate()) ? 1 : 0;

    const double adv = advantage(s, a1, outs.params_vec());
    advantages[i] = adv;

    nn::Var logp = nn::pick(tape, outs.log_probs, static_cast<std::size_t>(a1));
    nn::Var loss = nn::mul_const(tape, logp, -adv);  // gradient ascent
    tape.backward(loss);
    grads[i] = extract_grads(tape, params);
  });

  std::vector<Tensor> g = mean_grads(grads);
  GradStepRecord rec;
  rec.grad_norm = grad_norm(g);
  for (double a : advantages) rec.objective += a;
  rec.objective /= static_cast<double>(n);
  opt_pi1.step(g);
  return rec;
}

}  // namespace

GradStepRecord policy_update_pi1(PolicyNet& policy, ValueNet& value,
                                 const ValueNet& target, nn::Adam& opt_pi1,
                                 const std::vector<env::EnvState>& batch,
                                 double gamma, Rng& rng) {
  auto advantage = [&](const env::EnvState& s, int a1,
                       const std::vector<double>& a2) {
    const double v_s = value.evaluate(env::observe(s));
    if (a1 == 1) return -v_s;  // Q(s, terminate) = 0
    const ContinuePieces cp = continue_transition(s, a2);
    double adv = cp.r - v_s;
    if (!cp.next_done) adv += gamma * target.evaluate(cp.obs_next);
    return adv;
  };
  return pi1_core(policy, opt_pi1, batch, advantage, rng);
}

GradStepRecord policy_update_pi1_custom(PolicyNet& policy, nn::Adam& opt_pi1,
                                        const std::vector<env::EnvState>& batch,
                                        const AdvantageFn& advantage, Rng& rng) {
  auto adv = [&](const env::EnvState& s, int a1, const std::vector<double>&) {
    return advantage(s, a1);
  };
  return pi1_core(policy, opt_pi1, batch, adv, rng);
}

GradStepRecord policy_update_pi2_custom(PolicyNet& policy, nn::Adam& opt_pi2,
                                        const std::vector<env::EnvState>& batch,
                                        const ContinuousObjective& objective) {
  if (batch.empty()) throw std::invalid_argument("policy_update_pi2: empty batch");
  const std::size_t n = batch.size();
  const nn::ParamList params = policy.params_theta2();
  std::vector<std::vector<Tensor>> grads(n);
  std::vector<double> qvals(n, 0.0);

  parallel_for(n, [&](std::size_t i) {
    const env::EnvState& s = batch[i];
    const Tensor obs = env::observe(s);
    nn::Tape tape;
    const PolicyOutputs outs = policy.forward(tape, tape.constant(obs));
    nn::Var q = objective(tape, outs.raw_params, s);
    nn::Var loss = nn::neg(tape, q);
    tape.backward(loss);
    qvals[i] = q->scalar();
    grads[i] = extract_grads(tape, params);
  });

  std::vector<Tensor> g = mean_grads(grads);
  GradStepRecord rec;
  rec.grad_norm = grad_norm(g);
  for (double q : qvals) rec.objective += q;
  rec.objective /= static_cast<double>(n);
  opt_pi2.step(g);
  return rec;
}

GradStepRecord policy_update_pi2(PolicyNet& policy, ValueNet& value,
                                 nn::Adam& opt_pi2,
                                 const std::vector<env::EnvState>& batch,
                                 double gamma) {
  auto objective = [&](nn::Tape& tape, nn::Var a2, const env::EnvState& s) {
    value.freeze_all(tape);
    return build_q_continue(tape, value, s, std::move(a2), gamma);
  };
  return policy_update_pi2_custom(policy, opt_pi2, batch, objective);
}

GradStepRecord policy_update_pi2_modelfree(
    PolicyNet& policy, QNet& q, nn::Adam& opt_pi2,
    const std::vector<env::EnvState>& batch) {
  const std::size_t n = batch.size();
  const nn::ParamList params = policy.params_theta2();
  std::vector<std::vector<Tensor>> grads(n);
  std::vector<double> qvals(n, 0.0);

  parallel_for(n, [&](std::size_t i) {
    const env::EnvState& s = batch[i];
    const Tensor obs = env::observe(s);
    nn::Tape tape;
    q.freeze_all(tape);
    const PolicyOutputs outs = policy.forward(tape, tape.constant(obs));
    nn::Var qv = q.forward(tape, tape.constant(obs), outs.raw_params);
    nn::Var loss = nn::neg(tape, nn::reshape(tape, qv, {1}));
    tape.backward(loss);
    qvals[i] = qv->scalar();
    grads[i] = extract_grads(tape, params);
  });

  std::vector<Tensor> g = mean_grads(grads);
  GradStepRecord rec;
  rec.grad_norm = grad_norm(g);
  for (double v : qvals) rec.objective += v;
  rec.objective /= static_cast<double>(n);
  opt_pi2.step(g);
  return rec;
}

GradStepRecord q_update(PolicyNet& policy, QNet& q, const QNet& q_target,
                        nn::Adam& opt_q,
                        const std::vector<env::EnvState>& batch, double gamma,
                        Rng& rng) {
  const std::size_t n = batch.size();
  std::vector<std::uint64_t> seeds(n);
  for (auto& sd : seeds) sd = rng.u64();
  const nn::ParamList params = q.params();
  std::vector<std::vector<Tensor>> grads(n);
  std::vector<double> losses(n, 0.0);

  parallel_for(n, [&](std::size_t i) {
    const env::EnvState& s = batch[i];
    const Tensor obs = env::observe(s);
    nn::Tape peval;
    const PolicyOutputs outs = policy_eval(policy, peval, obs);
    std::vector<double> a2 = outs.params_vec();

    const ContinuePieces cp = continue_transition(s, a2);
    double target_v = cp.r;
    if (!cp.next_done) {
      nn::Tape pnext;
      const PolicyOutputs onext = policy_eval(policy, pnext, cp.obs_next);
      Tensor a2n({static_cast<int>(onext.params_vec().size())});
      for (std::size_t j = 0; j < a2n.numel(); ++j)
        a2n[j] = onext.params_vec()[j];
      target_v += gamma * q_target.evaluate(cp.obs_next, a2n);
    }

    Tensor a2t({static_cast<int>(a2.size())});
    for (std::size_t j = 0; j < a2.size(); ++j) a2t[j] = a2[j];
    nn::Tape tape;
    nn::Var qv = q.forward(tape, tape.constant(obs), tape.constant(a2t));
    nn::Var diff = nn::sub(tape, tape.constant_scalar(target_v),
                           nn::reshape(tape, qv, {1}));
    nn::Var loss = nn::mul_const(tape, nn::square(tape, diff), 0.5);
    tape.backward(loss);
    losses[i] = loss->scalar();
    grads[i] = extract_grads(tape, params);
  });

  std::vector<Tensor> g = mean_grads(grads);
  GradStepRecord rec;
  rec.grad_norm = grad_norm(g);
  for (double l : losses) rec.objective += l;
  rec.objective /= static_cast<double>(n);
  opt_q.step(g);
  return rec;
}

void ema_update(nn::ParamList value_params, nn::ParamList target_params,
                double rate) {
  if (value_params.size() != target_params.size())
    throw std::invalid_argument("ema_update: parameter lists differ");
  for (std::size_t i = 0; i < value_params.size(); ++i) {
    Tensor* src = value_params[i].second;
    Tensor* dst = target_params[i].second;
    if (!src->same_shape(*dst))
      throw std::invalid_argument("ema_update: shape mismatch at " +
                                  value_params[i].first);
    kern::k().ema(dst->data(), src->data(), rate, dst->numel());
  }
}

QContinue q_continue(ValueNet& value, const env::EnvState& s,
                     const std::vector<double>& a2_raw, double gamma,
                     bool want_grad) {
  Tensor a2t({static_cast<int>(a2_raw.size())});
  for (std::size_t j = 0; j < a2_raw.size(); ++j) a2t[j] = a2_raw[j];
  nn::Tape tape;
  value.freeze_all(tape);
  nn::Var a2 = tape.leaf(a2t, /*requires_grad=*/true);
  nn::Var q = build_q_continue(tape, value, s, a2, gamma);
  QContinue out;
  out.value = q->scalar();
  if (want_grad) {
    tape.backward(q);
    const Tensor* g = tape.grad_of(a2t);
    out.grad_a2.assign(a2_raw.size(), 0.0);
    if (g != nullptr)
      for (std::size_t j = 0; j < a2_raw.size(); ++j) out.grad_a2[j] = (*g)[j];
  }
  return out;
}

std::vector<Tensor> pi1_logprob_grad(PolicyNet& policy, const Tensor& obs,
                                     int a1) {
  nn::Tape tape;
  const PolicyOutputs outs = policy.forward(tape, tape.constant(obs));
  nn::Var logp = nn::pick(tape, outs.log_probs, static_cast<std::size_t>(a1));
  tape.backward(logp);
  return extract_grads(tape, policy.params_theta1());
}

Rollout run_policy_episode(PolicyNet& policy, const env::EnvState& start,
                           bool stochastic, Rng* rng) {
  Rollout out;
  env::EnvState s = start;
  if (s.x_gt) out.psnr_trace.push_back(env::state_psnr(s));
  while (!s.done) {
    const Tensor obs = env::observe(s);
    nn::Tape tape;
    const PolicyOutputs outs = policy_eval(policy, tape, obs);
    int a1 = 0;
    if (s.t > 0) {
      const double p = outs.p_terminate();
      a1 = stochastic ? (rng != nullptr && rng->uniform() < p ? 1 : 0)
                      : (p >= 0.5 ? 1 : 0);
    }
    env::Action a;
    a.a1 = a1;
    a.a2 = outs.params_vec();
    const env::StepResult res = env::step(s, a);

    env::TransitionRecord rec;
    rec.t = s.t;
    rec.a = a;
    rec.done = res.done;
    rec.has_reward = res.reward.has_value();
    rec.r = res.reward.value_or(0.0);
    if (s.x_gt) {
      rec.psnr_before = env::state_psnr(s);
      rec.psnr_after = env::state_psnr(res.next);
    }
    out.records.push_back(std::move(rec));

    if (a1 == 1) {
      s.done = true;
      break;
    }
    s = res.next;
    ++out.blocks;
    if (s.x_gt) out.psnr_trace.push_back(env::state_psnr(s));
  }
  out.final_state = std::move(s);
  out.inner_iterations = out.final_state.opt.k;
  return out;
}

}  // namespace pnprl::agent
