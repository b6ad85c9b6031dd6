// SPDX-License-Identifier: Apache-2.0
#include "pnprl/nn/unet.hpp"

#include <stdexcept>

namespace pnprl::nn {

UNet::UNet(UNetConfig cfg, Rng& rng) : cfg_(std::move(cfg)) {
  if (cfg_.widths.size() != 4) throw std::invalid_argument("UNet: 4 widths");
  const auto& w = cfg_.widths;
  enc_[0][0].init(w[0], 2, 3, 3, rng);
  enc_[0][1].init(w[0], w[0], 3, 3, rng);
  for (int s = 1; s < 4; ++s) {
    down_[s - 1].init(w[s], w[s - 1], 3, 3, rng);
    enc_[s][0].init(w[s], w[s], 3, 3, rng);
    enc_[s][1].init(w[s], w[s], 3, 3, rng);
  }
  for (int s = 2; s >= 0; --s) {
    up_[s].init(w[s], w[s + 1], 3, 3, rng);
    dec_[s][0].init(w[s], 2 * w[s], 3, 3, rng);
    dec_[s][1].init(w[s], w[s], 3, 3, rng);
  }
  out_.init(1, w[0], 3, 3, rng, /*scale_override=*/1e-3);
}

Var UNet::forward(Tape& t, Var img, Var sigma_map) const {
  if (img->val.rank() != 2 || !img->val.same_shape(sigma_map->val))
    throw std::invalid_argument("UNet::forward: image/sigma shape mismatch");
  const int h = img->val.dim(0), w = img->val.dim(1);
  if (h < 8 || w < 8) throw std::invalid_argument("UNet::forward: min size 8");
  const int ph = (8 - h % 8) % 8, pw = (8 - w % 8) % 8;

  Var x = stack0(t, {img, sigma_map});
  if (ph || pw) x = pad_reflect(t, x, 0, ph, 0, pw);

  Var e0 = silu(t, enc_[0][1](t, silu(t, enc_[0][0](t, x))));
  Var e1 = silu(t, enc_[1][1](t, silu(t, enc_[1][0](t, down_[0](t, e0, 2)))));
  Var e2 = silu(t, enc_[2][1](t, silu(t, enc_[2][0](t, down_[1](t, e1, 2)))));
  Var e3 = silu(t, enc_[3][1](t, silu(t, enc_[3][0](t, down_[2](t, e2, 2)))));

  Var d = e3;
  const Var* skips[3] = {&e2, &e1, &e0};
  for (int s = 2; s >= 0; --s) {
    d = up_[s](t, upsample_nearest2(t, d));
    d = concat0(t, d, *skips[2 - s]);
    d = silu(t, dec_[s][0](t, d));
    d = silu(t, dec_[s][1](t, d));
  }
  Var residual = out_(t, d);
  if (ph || pw) residual = crop(t, residual, 0, h, 0, w);
  residual = reshape(t, residual, {h, w});
  return sub(t, img, residual);
}

ParamList UNet::params() {
  ParamList out;
  for (int s = 0; s < 4; ++s)
    for (int c = 0; c < 2; ++c)
      enc_[s][c].collect(out, "enc" + std::to_string(s) + "_" + std::to_string(c));
  for (int s = 0; s < 3; ++s) down_[s].collect(out, "down" + std::to_string(s));
  for (int s = 0; s < 3; ++s) {
    up_[s].collect(out, "up" + std::to_string(s));
    for (int c = 0; c < 2; ++c)
      dec_[s][c].collect(out, "dec" + std::to_string(s) + "_" + std::to_string(c));
  }
  out_.collect(out, "out");
  return out;
}

}  // namespace pnprl::nn
