// SPDX-License-Identifier: Apache-2.0
#include "pnprl/agent/nets.hpp"

#include <cmath>
#include <stdexcept>

namespace pnprl::agent {

double PolicyOutputs::p_terminate() const {
  return std::exp(log_probs->val[1]);
}

PolicyNet::PolicyNet(PolicyNetConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  trunk_ = nn::ConvTrunk(cfg_.trunk, rng);
  term_head_.init(2, cfg_.trunk.feat, rng);
  param_head_.init(cfg_.param_dim(), cfg_.trunk.feat, rng);
  // Start biased toward continuing so early episodes explore the solver.
  term_head_.b[0] = 1.5;
  term_head_.b[1] = 0.0;
}

PolicyOutputs PolicyNet::forward(nn::Tape& t, nn::Var obs) const {
  nn::Var feat = trunk_.forward(t, std::move(obs));
  PolicyOutputs out;
  out.log_probs = nn::log_softmax(t, term_head_(t, feat));
  out.raw_params = nn::sigmoid(t, param_head_(t, feat));
  return out;
}

nn::ParamList PolicyNet::params() {
  nn::ParamList out = trunk_.params("policy.trunk");
  term_head_.collect(out, "policy.term");
  param_head_.collect(out, "policy.param");
  return out;
}

nn::ParamList PolicyNet::params_theta1() {
  nn::ParamList out = trunk_.params("policy.trunk");
  term_head_.collect(out, "policy.term");
  return out;
}

nn::ParamList PolicyNet::params_theta2() {
  nn::ParamList out = trunk_.params("policy.trunk");
  param_head_.collect(out, "policy.param");
  return out;
}

void PolicyNet::freeze_all(nn::Tape& t) {
  for (auto& [name, w] : params()) t.freeze(*w);
}

ValueNet::ValueNet(nn::TrunkConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  trunk_ = nn::ConvTrunk(cfg_, rng);
  head_.init(1, cfg_.feat, rng);
}

nn::Var ValueNet::forward(nn::Tape& t, nn::Var obs) const {
  return nn::reshape(t, head_(t, trunk_.forward(t, std::move(obs))), {1});
}

double ValueNet::evaluate(const Tensor& obs) const {
  nn::Tape t;
  for (auto& [name, w] : const_cast<ValueNet*>(this)->params()) t.freeze(*w);
  return forward(t, t.constant(obs))->scalar();
}

nn::ParamList ValueNet::params(const std::string& prefix) {
  nn::ParamList out = trunk_.params(prefix + ".trunk");
  head_.collect(out, prefix + ".head");
  return out;
}

void ValueNet::freeze_all(nn::Tape& t) {
  for (auto& [name, w] : params()) t.freeze(*w);
}

QNet::QNet(nn::TrunkConfig cfg, int action_dim, Rng& rng)
    : cfg_(std::move(cfg)), action_dim_(action_dim) {
  trunk_ = nn::ConvTrunk(cfg_, rng);
  fc1_.init(cfg_.feat, cfg_.feat + action_dim, rng);
  fc2_.init(1, cfg_.feat, rng);
}

nn::Var QNet::forward(nn::Tape& t, nn::Var obs, nn::Var a2) const {
  if (a2->val.numel() != static_cast<std::size_t>(action_dim_))
    throw std::invalid_argument("QNet::forward: action size mismatch");
  nn::Var feat = trunk_.forward(t, std::move(obs));
  nn::Var joint = nn::concat_vec(t, feat, std::move(a2));
  return nn::reshape(t, fc2_(t, nn::silu(t, fc1_(t, joint))), {1});
}

double QNet::evaluate(const Tensor& obs, const Tensor& a2) const {
  nn::Tape t;
  for (auto& [name, w] : const_cast<QNet*>(this)->params()) t.freeze(*w);
  return forward(t, t.constant(obs), t.constant(a2))->scalar();
}

nn::ParamList QNet::params(const std::string& prefix) {
  nn::ParamList out = trunk_.params(prefix + ".trunk");
  fc1_.collect(out, prefix + ".fc1");
  fc2_.collect(out, prefix + ".fc2");
  return out;
}

void QNet::freeze_all(nn::Tape& t) {
  for (auto& [name, w] : params()) t.freeze(*w);
}

void copy_params(nn::ParamList src, nn::ParamList dst) {
  if (src.size() != dst.size())
    throw std::invalid_argument("copy_params: size mismatch");
  for (std::size_t i = 0; i < src.size(); ++i) *dst[i].second = *src[i].second;
}

}  // namespace pnprl::agent
