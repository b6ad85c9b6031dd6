// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <deque>

#include "pnprl/env/env.hpp"

namespace pnprl::agent {

// Bounded FIFO store of environment states visited during training; batches
// are sampled uniformly with replacement.
class StateBuffer {
 public:
  explicit StateBuffer(std::size_t capacity) : capacity_(capacity) {}

  void push(env::EnvState s) {
    if (states_.size() == capacity_) states_.pop_front();
    states_.push_back(std::move(s));
  }

  std::size_t size() const { return states_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return states_.empty(); }
  const env::EnvState& at(std::size_t i) const { return states_[i]; }

  std::vector<env::EnvState> sample(Rng& rng, std::size_t count) const {
    if (states_.empty()) throw std::logic_error("StateBuffer::sample: empty");
    std::vector<env::EnvState> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i)
      out.push_back(states_[rng.index(states_.size())]);
    return out;
  }

 private:
  std::size_t capacity_;
  std::deque<env::EnvState> states_;
};

}  // namespace pnprl::agent
