// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "pnprl/core/tensor.hpp"

namespace pnprl {

// Minimal NPY v1.0 I/O for 2-D arrays (little-endian '<f8' and '|u1').
void npy_save(const std::string& path, const Tensor& t2d);
void npy_save_u8(const std::string& path, const std::vector<std::uint8_t>& data,
                 int h, int w);
Tensor npy_load(const std::string& path);  // returns doubles for either dtype

}  // namespace pnprl
