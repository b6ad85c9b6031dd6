// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "pnprl/core/tensor.hpp"

namespace pnprl::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Adam over an explicit parameter list. Gradients are supplied per step so
// callers control batching/accumulation.
class Adam {
 public:
  Adam() = default;
  Adam(std::vector<Tensor*> params, AdamConfig cfg);

  void step(const std::vector<Tensor>& grads);
  void set_lr(double lr) { cfg_.lr = lr; }
  double lr() const { return cfg_.lr; }
  long steps_taken() const { return t_; }

  const std::vector<Tensor*>& params() const { return params_; }
  std::vector<Tensor>& moments1() { return m_; }
  std::vector<Tensor>& moments2() { return v_; }
  void set_steps_taken(long t) { t_ = t; }

 private:
  std::vector<Tensor*> params_;
  std::vector<Tensor> m_, v_;
  AdamConfig cfg_;
  long t_ = 0;
};

}  // namespace pnprl::nn
