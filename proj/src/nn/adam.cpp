// SPDX-License-Identifier: Apache-2.0
#include "pnprl/nn/adam.hpp"

#include <cmath>
#include <stdexcept>

#include "pnprl/core/kernels.hpp"

namespace pnprl::nn {

Adam::Adam(std::vector<Tensor*> params, AdamConfig cfg)
    : params_(std::move(params)), cfg_(cfg) {
  m_.reserve(params_.size());
  v_.reserve(params_.size());
  for (Tensor* p : params_) {
    m_.push_back(Tensor::zeros(p->shape()));
    v_.push_back(Tensor::zeros(p->shape()));
  }
}

void Adam::step(const std::vector<Tensor>& grads) {
  if (grads.size() != params_.size())
    throw std::invalid_argument("Adam::step: gradient count mismatch");
  ++t_;
  const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  for (std::size_t i = 0; i < params_.size(); ++i) {
    if (grads[i].numel() != params_[i]->numel())
      throw std::invalid_argument("Adam::step: gradient shape mismatch");
    kern::k().adam_step(params_[i]->data(), m_[i].data(), v_[i].data(),
                        grads[i].data(), params_[i]->numel(), cfg_.lr,
                        cfg_.beta1, cfg_.beta2, cfg_.eps, bc1, bc2);
  }
}

}  // namespace pnprl::nn
