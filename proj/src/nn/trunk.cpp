// SPDX-License-Identifier: Apache-2.0
#include "pnprl/nn/trunk.hpp"

#include <stdexcept>

namespace pnprl::nn {

ConvTrunk::ConvTrunk(TrunkConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  if (cfg_.widths.size() != 4) throw std::invalid_argument("ConvTrunk: 4 widths");
  const auto& w = cfg_.widths;
  stem_.init(w[0], cfg_.in_ch, 3, 3, rng);
  int prev = w[0];
  for (int s = 0; s < 4; ++s) {
    stage_a_[s].init(w[s], prev, 3, 3, rng);
    stage_b_[s].init(w[s], w[s], 3, 3, rng);
    stage_skip_[s].init(w[s], prev, 1, 1, rng);
    prev = w[s];
  }
  head_.init(cfg_.feat, w[3], rng);
}

Var ConvTrunk::forward(Tape& t, Var obs) const {
  if (obs->val.rank() != 3 || obs->val.dim(0) != cfg_.in_ch)
    throw std::invalid_argument("ConvTrunk::forward: observation layout mismatch");
  Var x = silu(t, stem_(t, obs));
  for (int s = 0; s < 4; ++s) {
    Var main = stage_b_[s](t, silu(t, stage_a_[s](t, x, 2)));
    Var skip = stage_skip_[s](t, x, 2, 0);
    x = silu(t, add(t, main, skip));
  }
  return silu(t, head_(t, global_avg_pool(t, x)));
}

ParamList ConvTrunk::params(const std::string& prefix) {
  ParamList out;
  stem_.collect(out, prefix + ".stem");
  for (int s = 0; s < 4; ++s) {
    stage_a_[s].collect(out, prefix + ".s" + std::to_string(s) + "a");
    stage_b_[s].collect(out, prefix + ".s" + std::to_string(s) + "b");
    stage_skip_[s].collect(out, prefix + ".s" + std::to_string(s) + "skip");
  }
  head_.collect(out, prefix + ".head");
  return out;
}

}  // namespace pnprl::nn
