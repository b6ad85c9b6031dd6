// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "pnprl/core/rng.hpp"
#include "pnprl/nn/ops.hpp"

namespace pnprl::nn {

using ParamList = std::vector<std::pair<std::string, Tensor*>>;

struct ConvLayer {
  Tensor w;  // [Co,Ci,kh,kw]
  Tensor b;  // [Co]

  void init(int co, int ci, int kh, int kw, Rng& rng, double scale_override = 0.0);
  Var operator()(Tape& t, Var x, int stride = 1, int pad = 1) const;
  void collect(ParamList& out, const std::string& prefix);
};

struct LinearLayer {
  Tensor w;  // [m,n]
  Tensor b;  // [m]

  void init(int m, int n, Rng& rng);
  Var operator()(Tape& t, Var x) const;
  void collect(ParamList& out, const std::string& prefix);
};

}  // namespace pnprl::nn
