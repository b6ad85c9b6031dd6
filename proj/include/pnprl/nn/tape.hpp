// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <memory>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "pnprl/core/tensor.hpp"

namespace pnprl::nn {

struct Node;
using Var = std::shared_ptr<Node>;

struct Node {
  Tensor val;
  Tensor grad;  // allocated on demand during backward
  bool requires_grad = false;
  bool needed = false;  // reachable from the backward root
  std::vector<Var> inputs;
  std::function<void(Node&)> backward_fn;
  const char* op = "leaf";

  double scalar() const { return val[0]; }
  void accum_grad(const Tensor& g);
  void accum_grad_at(std::size_t i, double g);
  bool has_grad() const { return !grad.empty(); }
};

// Reverse-mode tape. Nodes are recorded in creation order, which is a valid
// topological order; backward() walks it in reverse from the root. One tape
// per forward pass; weight tensors are deduplicated so reuse of the same
// parameter (e.g. across unrolled iterations) accumulates into one leaf.
class Tape {
 public:
  // Leaf for an external parameter tensor (deduplicated by address).
  Var leaf(const Tensor& w, bool requires_grad = true);
  // Frozen tensors never receive gradients on this tape (their leaves are
  // created with requires_grad=false), which skips their backward gemms.
  void freeze(const Tensor& w) { frozen_.insert(&w); }
  // Leaf for a constant value (no gradient).
  Var constant(Tensor v);
  Var constant_scalar(double v) { return constant(Tensor::scalar(v)); }

  Var make(const char* op, Tensor val, std::vector<Var> inputs,
           std::function<void(Node&)> backward_fn);

  // Backpropagates from a scalar root. Gradients accumulate into Node::grad.
  void backward(const Var& root);

  // Gradient of a parameter leaf after backward (nullptr if absent/unused).
  const Tensor* grad_of(const Tensor& w) const;

  std::size_t size() const { return order_.size(); }

 private:
  std::vector<Var> order_;
  std::unordered_map<const Tensor*, Var> leaves_;
  std::unordered_set<const Tensor*> frozen_;
};

}  // namespace pnprl::nn
