// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "pnprl/prox/admm.hpp"

namespace pnprl::prox {

// Differentiable twin of the ADMM block. Complex fields are [2,H,W] plane
// tensors; forward values are computed by the exact same code paths as the
// plain engine, so both routes agree bit for bit.
struct DiffState {
  nn::Var x, z, u;
};

DiffState to_diff(nn::Tape& t, const OptState& s);
OptState from_diff(const DiffState& d, int k);

nn::Var csmri_prox_node(nn::Tape& t, nn::Var v, nn::Var mu,
                        const fm::Observation& obs, const fm::CsmriModel& model);
nn::Var pr_gradstep_node(nn::Tape& t, nn::Var v, nn::Var mu,
                         const fm::Observation& obs, const fm::CdpModel& model);

// PSNR of the plane-pair magnitude against a fixed ground truth; gradient is
// zero in the capped (>=100 dB) regime.
nn::Var psnr_node(nn::Tape& t, nn::Var x, const CImage& gt);

nn::Var denoise_complex_node(nn::Tape& t, nn::Var img2, nn::Var sigma,
                             const den::DenoiserHandle& prior);

DiffState admm_iterate_diff(nn::Tape& t, const DiffState& s, nn::Var sigma,
                            nn::Var mu, const fm::Observation& obs,
                            const fm::MeasurementModel& model,
                            const den::DenoiserHandle& prior);

DiffState run_block_diff(nn::Tape& t, DiffState s,
                         const std::vector<nn::Var>& sigmas,
                         const std::vector<nn::Var>& mus,
                         const fm::Observation& obs,
                         const fm::MeasurementModel& model,
                         const den::DenoiserHandle& prior);

}  // namespace pnprl::prox
