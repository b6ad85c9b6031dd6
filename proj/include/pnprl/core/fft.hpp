// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pnprl/core/cimage.hpp"

namespace pnprl {

// Unitary 2-D DFT (1/sqrt(HW) both directions), so ifft2(fft2(x)) == x and
// the adjoint of fft2 is ifft2. Thread-safe; plans are cached per shape.
CImage fft2(const CImage& x);
CImage ifft2(const CImage& x);

}  // namespace pnprl
