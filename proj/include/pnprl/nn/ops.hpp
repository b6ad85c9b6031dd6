// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "pnprl/nn/tape.hpp"

namespace pnprl::nn {

// Elementwise arithmetic; a scalar (numel==1) operand broadcasts.
Var add(Tape& t, Var a, Var b);
Var sub(Tape& t, Var a, Var b);
Var mul(Tape& t, Var a, Var b);
Var neg(Tape& t, Var a);
Var add_const(Tape& t, Var a, double c);
Var mul_const(Tape& t, Var a, double c);
Var square(Tape& t, Var a);
Var max_const(Tape& t, Var a, double c);
Var min_const(Tape& t, Var a, double c);

// Activations.
Var silu(Tape& t, Var a);
Var sigmoid(Tape& t, Var a);
Var log_softmax(Tape& t, Var logits);  // 1-D

// Reductions, losses, indexing.
Var sum(Tape& t, Var a);
Var mean(Tape& t, Var a);
Var pick(Tape& t, Var a, std::size_t i);
Var l1_loss(Tape& t, Var a, Var b);
Var mse_loss(Tape& t, Var a, Var b);

// Shape plumbing.
Var reshape(Tape& t, Var a, std::vector<int> shape);
Var concat_vec(Tape& t, Var a, Var b);                   // 1-D concatenation
Var stack0(Tape& t, const std::vector<Var>& planes);     // k x [H,W] -> [k,H,W]
Var slice0(Tape& t, Var a, int c0, int count);           // [C,H,W] channels
Var concat0(Tape& t, Var a, Var b);
Var broadcast_plane(Tape& t, Var s, int h, int w);       // scalar -> [H,W]
Var pad_reflect(Tape& t, Var x, int top, int bottom, int left, int right);
Var crop(Tape& t, Var x, int top, int h, int left, int w);

// Network layers.
Var linear(Tape& t, Var x, Var w, Var b);                // [n],[m,n],[m]->[m]
Var conv2d(Tape& t, Var x, Var w, Var b, int stride, int pad);
Var upsample_nearest2(Tape& t, Var x);
Var global_avg_pool(Tape& t, Var x);                     // [C,H,W]->[C]

}  // namespace pnprl::nn
