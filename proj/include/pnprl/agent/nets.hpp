// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pnprl/nn/trunk.hpp"

namespace pnprl::agent {

struct PolicyNetConfig {
  nn::TrunkConfig trunk;
  int m = 5;
  bool shared_pair = false;

  int param_dim() const { return shared_pair ? 2 : 2 * m; }
};

struct PolicyOutputs {
  nn::Var log_probs;   // [2]; index 0 = continue, 1 = terminate
  nn::Var raw_params;  // [param_dim] in (0,1), sigmoid head

  double p_terminate() const;
  std::vector<double> params_vec() const { return raw_params->val.vec(); }
};

// Actor: shared convolutional trunk, one softmax head for the termination
// decision and one sigmoid head for the continuous parameters.
class PolicyNet {
 public:
  PolicyNet() = default;
  PolicyNet(PolicyNetConfig cfg, Rng& rng);

  PolicyOutputs forward(nn::Tape& t, nn::Var obs) const;

  nn::ParamList params();         // theta
  nn::ParamList params_theta1();  // trunk + termination head
  nn::ParamList params_theta2();  // trunk + parameter head
  void freeze_all(nn::Tape& t);
  const PolicyNetConfig& config() const { return cfg_; }

 private:
  PolicyNetConfig cfg_;
  nn::ConvTrunk trunk_;
  nn::LinearLayer term_head_;
  nn::LinearLayer param_head_;
};

// Critic: same trunk layout with a scalar head.
class ValueNet {
 public:
  ValueNet() = default;
  ValueNet(nn::TrunkConfig cfg, Rng& rng);

  nn::Var forward(nn::Tape& t, nn::Var obs) const;
  double evaluate(const Tensor& obs) const;  // frozen forward

  nn::ParamList params(const std::string& prefix = "value");
  void freeze_all(nn::Tape& t);
  const nn::TrunkConfig& config() const { return cfg_; }

 private:
  nn::TrunkConfig cfg_;
  nn::ConvTrunk trunk_;
  nn::LinearLayer head_;
};

// Q(s, a2) critic for the model-free variant of the continuous update
// (config flag; detaches the environment path).
class QNet {
 public:
  QNet() = default;
  QNet(nn::TrunkConfig cfg, int action_dim, Rng& rng);

  nn::Var forward(nn::Tape& t, nn::Var obs, nn::Var a2) const;
  double evaluate(const Tensor& obs, const Tensor& a2) const;

  nn::ParamList params(const std::string& prefix = "q");
  void freeze_all(nn::Tape& t);

 private:
  nn::TrunkConfig cfg_;
  int action_dim_ = 0;
  nn::ConvTrunk trunk_;
  nn::LinearLayer fc1_;
  nn::LinearLayer fc2_;
};

void copy_params(nn::ParamList src, nn::ParamList dst);

}  // namespace pnprl::agent
