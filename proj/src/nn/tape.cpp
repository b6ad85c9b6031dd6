// SPDX-License-Identifier: Apache-2.0
#include "pnprl/nn/tape.hpp"

#include <stdexcept>

#include "pnprl/core/kernels.hpp"

namespace pnprl::nn {

void Node::accum_grad(const Tensor& g) {
  if (!g.same_shape(val)) throw std::logic_error("accum_grad: shape mismatch");
  if (grad.empty()) grad = Tensor::zeros(val.shape());
  kern::k().add(grad.data(), g.data(), grad.data(), grad.numel());
}

void Node::accum_grad_at(std::size_t i, double g) {
  if (grad.empty()) grad = Tensor::zeros(val.shape());
  grad[i] += g;
}

Var Tape::leaf(const Tensor& w, bool requires_grad) {
  auto it = leaves_.find(&w);
  if (it != leaves_.end()) return it->second;
  auto node = std::make_shared<Node>();
  node->val = w;
  node->requires_grad = requires_grad && !frozen_.contains(&w);
  node->op = "param";
  leaves_.emplace(&w, node);
  order_.push_back(node);
  return node;
}

Var Tape::constant(Tensor v) {
  auto node = std::make_shared<Node>();
  node->val = std::move(v);
  node->requires_grad = false;
  node->op = "const";
  order_.push_back(node);
  return node;
}

Var Tape::make(const char* op, Tensor val, std::vector<Var> inputs,
               std::function<void(Node&)> backward_fn) {
  auto node = std::make_shared<Node>();
  node->val = std::move(val);
  node->op = op;
  for (const auto& in : inputs)
    if (in->requires_grad) node->requires_grad = true;
  node->inputs = std::move(inputs);
  if (node->requires_grad) node->backward_fn = std::move(backward_fn);
  order_.push_back(node);
  return node;
}

void Tape::backward(const Var& root) {
  if (root->val.numel() != 1)
    throw std::invalid_argument("backward: root must be scalar");

  // Mark the subgraph that actually feeds the root.
  for (auto& n : order_) n->needed = false;
  std::vector<Node*> stack{root.get()};
  root->needed = true;
  while (!stack.empty()) {
    Node* n = stack.back();
    stack.pop_back();
    for (const auto& in : n->inputs) {
      if (!in->needed && in->requires_grad) {
        in->needed = true;
        stack.push_back(in.get());
      }
    }
  }

  root->grad = Tensor::full({1}, 1.0);
  for (auto it = order_.rbegin(); it != order_.rend(); ++it) {
    Node* n = it->get();
    if (!n->needed || !n->backward_fn || !n->has_grad()) continue;
    n->backward_fn(*n);
  }
}

const Tensor* Tape::grad_of(const Tensor& w) const {
  auto it = leaves_.find(&w);
  if (it == leaves_.end() || it->second->grad.empty()) return nullptr;
  return &it->second->grad;
}

}  // namespace pnprl::nn
