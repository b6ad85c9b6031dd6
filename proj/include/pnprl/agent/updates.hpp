// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pnprl/agent/nets.hpp"
#include "pnprl/env/env.hpp"
#include "pnprl/nn/adam.hpp"

namespace pnprl::agent {

struct GradStepRecord {
  double objective = 0.0;  // mean loss (value) or mean estimated Q / score
  double grad_norm = 0.0;  // l2 norm of the applied mean gradient
};

// Bootstrapped regression on the critic:
//   L = 1/2 (r(s,a) + gamma * V_target(p(s,a)) - V(s))^2,
// with target 0 for sampled terminations and no bootstrap past t = N.
// Actions are drawn from the current policy; one optimizer step.
GradStepRecord value_update(PolicyNet& policy, ValueNet& value,
                            const ValueNet& target, nn::Adam& opt,
                            const std::vector<env::EnvState>& batch,
                            double gamma, Rng& rng);

// Likelihood-ratio update of the termination policy with one-step advantage
// A = r + gamma * V_target(s') - V(s); only the trunk and termination head move.
GradStepRecord policy_update_pi1(PolicyNet& policy, ValueNet& value,
                                 const ValueNet& target, nn::Adam& opt_pi1,
                                 const std::vector<env::EnvState>& batch,
                                 double gamma, Rng& rng);

// Deterministic continuous-parameter update: ascends
//   r(s, a) + gamma * V(p(s, a))
// by backpropagating through the reward, the critic input, and the unrolled
// solver transition; only the trunk and parameter head move.
GradStepRecord policy_update_pi2(PolicyNet& policy, ValueNet& value,
                                 nn::Adam& opt_pi2,
                                 const std::vector<env::EnvState>& batch,
                                 double gamma);

// Test seams: the same update machinery with an injected objective or
// advantage in place of the environment-backed ones.
using ContinuousObjective =
    std::function<nn::Var(nn::Tape&, nn::Var a2, const env::EnvState&)>;
GradStepRecord policy_update_pi2_custom(PolicyNet& policy, nn::Adam& opt_pi2,
                                        const std::vector<env::EnvState>& batch,
                                        const ContinuousObjective& objective);

using AdvantageFn = std::function<double(const env::EnvState&, int a1)>;
GradStepRecord policy_update_pi1_custom(PolicyNet& policy, nn::Adam& opt_pi1,
                                        const std::vector<env::EnvState>& batch,
                                        const AdvantageFn& advantage, Rng& rng);

// Model-free alternative for the continuous update (DDPG-style): ascends a
// learned Q(s, a2), no environment backprop.
GradStepRecord policy_update_pi2_modelfree(PolicyNet& policy, QNet& q,
                                           nn::Adam& opt_pi2,
                                           const std::vector<env::EnvState>& batch);
GradStepRecord q_update(PolicyNet& policy, QNet& q, const QNet& q_target,
                        nn::Adam& opt_q,
                        const std::vector<env::EnvState>& batch, double gamma,
                        Rng& rng);

// target <- (1-rate)*target + rate*value, elementwise over matching params.
void ema_update(nn::ParamList value_params, nn::ParamList target_params,
                double rate);

// --- lower-level pieces shared with the verification suites ---

// Value and gradient of Q_c(s, a2) = r(s, a2) + gamma*(1-done')*V(p(s, a2))
// with respect to the raw a2 coordinates (continue branch).
struct QContinue {
  double value = 0.0;
  std::vector<double> grad_a2;
};
QContinue q_continue(ValueNet& value, const env::EnvState& s,
                     const std::vector<double>& a2_raw, double gamma,
                     bool want_grad);

// d log pi1(a1|s) / d theta1 at fixed weights, as a flat list matching
// params_theta1() order.
std::vector<Tensor> pi1_logprob_grad(PolicyNet& policy, const Tensor& obs,
                                     int a1);

// One greedy (argmax-termination) policy rollout; returns the visited PSNR
// trace (one entry per block, including the initial state), the transition
// records, and the final state.
struct Rollout {
  std::vector<double> psnr_trace;
  std::vector<env::TransitionRecord> records;
  env::EnvState final_state;
  int blocks = 0;
  int inner_iterations = 0;
};
Rollout run_policy_episode(PolicyNet& policy, const env::EnvState& start,
                           bool stochastic, Rng* rng);

}  // namespace pnprl::agent
