// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pnprl/denoiser/denoiser.hpp"
#include "pnprl/fm/forward_models.hpp"

namespace pnprl::prox {

// ADMM working set: denoised estimate x, data-consistent estimate z, scaled
// dual u, and the inner iteration counter.
struct OptState {
  CImage x, z, u;
  int k = 0;
};

// Per-block parameter schedule: m (sigma, mu) pairs.
struct ParamBlock {
  std::vector<double> sigmas;
  std::vector<double> mus;

  ParamBlock() = default;
  ParamBlock(std::vector<double> s, std::vector<double> m);
  int size() const { return static_cast<int>(sigmas.size()); }
};

constexpr double kPrAmplitudeEps = 1e-12;

// x-step: H_sigma(z - u), complex inputs denoised per plane.
CImage denoiser_step(const OptState& s, double sigma,
                     const den::DenoiserHandle& prior);

// Closed-form z-step for CS-MRI: argmin_z 1/2||y - F_p z||^2 + mu/2||z - v||^2.
CImage data_prox_csmri(const CImage& v, const fm::Observation& obs,
                       const fm::CsmriModel& m, double mu);

// Amplitude-loss objective and gradient for PR, D(z) = sum_i 1/2|||A_i z|-y_i||^2.
// w_cache, when given, receives the unmodified fields A_i v (used by the
// differentiable twin to apply the Hessian in its backward pass).
double pr_data_objective(const CImage& v, const fm::Observation& obs,
                         const fm::CdpModel& m);
CImage pr_data_grad(const CImage& v, const fm::Observation& obs,
                    const fm::CdpModel& m,
                    std::vector<CImage>* w_cache = nullptr);

// Inexact z-step for PR: one gradient step from the anchor, v - (1/mu) grad D(v).
CImage data_prox_pr(const CImage& v, const fm::Observation& obs,
                    const fm::CdpModel& m, double mu);

OptState admm_iterate(const OptState& s, double sigma, double mu,
                      const fm::Observation& obs,
                      const fm::MeasurementModel& model,
                      const den::DenoiserHandle& prior);

OptState run_block(OptState s, const ParamBlock& params,
                   const fm::Observation& obs,
                   const fm::MeasurementModel& model,
                   const den::DenoiserHandle& prior);

// Standard initialization: zero-filled adjoint for CS-MRI, mean adjoint
// magnitude for PR; z0 = x0, u0 = 0.
OptState init_state(const fm::Observation& obs,
                    const fm::MeasurementModel& model);

}  // namespace pnprl::prox
