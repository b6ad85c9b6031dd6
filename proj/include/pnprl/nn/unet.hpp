// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pnprl/nn/layers.hpp"

namespace pnprl::nn {

struct UNetConfig {
  std::vector<int> widths{32, 64, 128, 256};  // 4 resolution scales
};

// Residual U-Net with a noise-level map input channel: the network sees
// [image, sigma_map] and predicts the residual, output = image - residual.
// Spatial sizes are reflect-padded up to a multiple of 8 and cropped back,
// so any H,W >= 8 works. SiLU activations keep the whole map smooth, which
// the backprop-through-solver training path relies on.
class UNet {
 public:
  UNet() = default;
  UNet(UNetConfig cfg, Rng& rng);

  // img and sigma_map are [H,W]; returns the denoised [H,W].
  Var forward(Tape& t, Var img, Var sigma_map) const;

  ParamList params();
  const UNetConfig& config() const { return cfg_; }

 private:
  UNetConfig cfg_;
  ConvLayer enc_[4][2];   // two convs per scale
  ConvLayer down_[3];     // stride-2 transitions
  ConvLayer up_[3];       // post-upsample channel reductions
  ConvLayer dec_[3][2];   // two convs per decoder scale
  ConvLayer out_;         // residual head
};

}  // namespace pnprl::nn
