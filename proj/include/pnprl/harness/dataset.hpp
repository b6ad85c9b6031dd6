// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <vector>

#include "pnprl/core/tensor.hpp"

namespace pnprl::harness {

struct Dataset {
  std::vector<std::string> ids;  // file stems, sorted
  std::vector<Tensor> images;   // normalized grayscale
  int skipped = 0;              // unreadable files
};

// Loads every readable grayscale image under `path` (non-recursive) in
// lexicographic filename order. resize > 0 bilinearly resizes to a square.
Dataset ingest_dataset(const std::string& path, int resize, int limit = 0);

}  // namespace pnprl::harness
