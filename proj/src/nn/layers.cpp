// SPDX-License-Identifier: Apache-2.0
#include "pnprl/nn/layers.hpp"

#include <cmath>

namespace pnprl::nn {

void ConvLayer::init(int co, int ci, int kh, int kw, Rng& rng,
                     double scale_override) {
  w = Tensor({co, ci, kh, kw});
  b = Tensor({co});
  const double fan_in = static_cast<double>(ci) * kh * kw;
  const double scale =
      scale_override > 0.0 ? scale_override : std::sqrt(2.0 / fan_in);
  for (std::size_t i = 0; i < w.numel(); ++i) w[i] = scale * rng.gaussian();
}

Var ConvLayer::operator()(Tape& t, Var x, int stride, int pad) const {
  return conv2d(t, std::move(x), t.leaf(w), t.leaf(b), stride, pad);
}

void ConvLayer::collect(ParamList& out, const std::string& prefix) {
  out.emplace_back(prefix + ".w", &w);
  out.emplace_back(prefix + ".b", &b);
}

void LinearLayer::init(int m, int n, Rng& rng) {
  w = Tensor({m, n});
  b = Tensor({m});
  const double scale = std::sqrt(2.0 / static_cast<double>(n));
  for (std::size_t i = 0; i < w.numel(); ++i) w[i] = scale * rng.gaussian();
}

Var LinearLayer::operator()(Tape& t, Var x) const {
  return linear(t, std::move(x), t.leaf(w), t.leaf(b));
}

void LinearLayer::collect(ParamList& out, const std::string& prefix) {
  out.emplace_back(prefix + ".w", &w);
  out.emplace_back(prefix + ".b", &b);
}

}  // namespace pnprl::nn
