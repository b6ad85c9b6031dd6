// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>

namespace pnprl {

// Number of worker threads (PNPRL_THREADS env override, else hardware).
int thread_count();

// Runs fn(i) for i in [0, n). Work is split into contiguous chunks; results
// must be written to disjoint locations. Calls made from inside a worker run
// inline to avoid deadlock. Deterministic given deterministic fn(i).
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& fn);

}  // namespace pnprl
