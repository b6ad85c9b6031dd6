// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "pnprl/core/tensor.hpp"

namespace pnprl {

// Grayscale image I/O. Loading returns values normalized to [0, 1]; PNG and
// PGM (P2/P5, 8/16-bit) are supported, RGB PNGs are converted to luma.
Tensor load_gray(const std::string& path);
void save_pgm(const std::string& path, const Tensor& img);       // 8-bit
void save_pgm16(const std::string& path, const Tensor& img);     // 16-bit
void save_png(const std::string& path, const Tensor& img);       // 8-bit gray

// Bilinear resize and center crop, used by dataset ingestion.
Tensor resize_bilinear(const Tensor& img, int oh, int ow);
Tensor center_crop(const Tensor& img, int oh, int ow);

}  // namespace pnprl
