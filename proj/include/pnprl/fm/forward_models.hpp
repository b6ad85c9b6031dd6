// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <variant>
#include <vector>

#include "pnprl/core/cimage.hpp"
#include "pnprl/fm/mask.hpp"

namespace pnprl::fm {

// y = F_p x + noise, with F_p the mask-restricted unitary Fourier transform.
// sigma_n is quoted in 8-bit units (5/10/15) and applied as sigma_n/255 on
// normalized images, per component of the complex k-space noise.
struct CsmriModel {
  KSpaceMask mask;
  double sigma_n = 0.0;
};

// Coded diffraction patterns: A_i = F D_i with unit-modulus diagonal D_i.
// alpha follows the same 8-bit convention (applied as alpha/255); the shot
// noise acts on the squared amplitudes with variance (alpha/255)^2 |Ax|^2.
struct CdpModel {
  int h = 0;
  int w = 0;
  std::vector<CImage> patterns;  // D_i entries, |D_i[j]| = 1
  double alpha = 0.0;

  int num_patterns() const { return static_cast<int>(patterns.size()); }
};

CdpModel make_cdp_model(int h, int w, int num_patterns, double alpha,
                        std::uint64_t pattern_seed);

using MeasurementModel = std::variant<CsmriModel, CdpModel>;

// Measured data: masked k-space for CS-MRI, amplitude stack |A_i x| for CDP.
struct Observation {
  CImage kspace;               // CS-MRI only
  std::vector<Tensor> amps;    // CDP only, one [H,W] per pattern
  bool is_csmri = true;
};

int model_height(const MeasurementModel& m);
int model_width(const MeasurementModel& m);
double model_sigma_n(const MeasurementModel& m);  // 0 for CDP

CImage csmri_forward(const CImage& x, const CsmriModel& m);
CImage csmri_adjoint(const CImage& y, const CsmriModel& m);

std::vector<Tensor> cdp_forward(const CImage& x, const CdpModel& m);
// Adjoint of A_i applied to a complex field (used by init and gradients).
CImage cdp_adjoint_single(const CImage& y, const CdpModel& m, int i);

Observation synthesize_measurement(const CImage& x, const MeasurementModel& m,
                                   std::uint64_t seed);

// PSNR in dB on magnitudes with peak 1.0, capped at 100 dB (MSE < 1e-10).
double psnr(const CImage& x_hat, const CImage& x_gt);
double psnr(const Tensor& x_hat, const Tensor& x_gt);

}  // namespace pnprl::fm
