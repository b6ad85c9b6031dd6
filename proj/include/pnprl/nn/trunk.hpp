// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pnprl/nn/layers.hpp"

namespace pnprl::nn {

struct TrunkConfig {
  int in_ch = 10;
  std::vector<int> widths{16, 32, 64, 128};  // 4 residual stages, stride 2 each
  int feat = 128;
};

// Convolutional feature extractor with residual stages and global average
// pooling; shared layout for the policy and value networks.
class ConvTrunk {
 public:
  ConvTrunk() = default;
  ConvTrunk(TrunkConfig cfg, Rng& rng);

  Var forward(Tape& t, Var obs) const;  // [in_ch,H,W] -> [feat]

  ParamList params(const std::string& prefix);
  const TrunkConfig& config() const { return cfg_; }

 private:
  TrunkConfig cfg_;
  ConvLayer stem_;
  ConvLayer stage_a_[4], stage_b_[4], stage_skip_[4];
  LinearLayer head_;
};

}  // namespace pnprl::nn
