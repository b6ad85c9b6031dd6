// SPDX-License-Identifier: Apache-2.0
#include "pnprl/prox/admm.hpp"

#include <cmath>
#include <stdexcept>

#include "pnprl/core/fft.hpp"

namespace pnprl::prox {

ParamBlock::ParamBlock(std::vector<double> s, std::vector<double> m)
    : sigmas(std::move(s)), mus(std::move(m)) {
  if (sigmas.size() != mus.size() || sigmas.empty())
    throw std::invalid_argument("ParamBlock: need equal, nonempty lists");
  for (double v : sigmas)
    if (!(v > 0.0)) throw std::invalid_argument("ParamBlock: sigma <= 0");
  for (double v : mus)
    if (!(v > 0.0)) throw std::invalid_argument("ParamBlock: mu <= 0");
}

CImage denoiser_step(const OptState& s, double sigma,
                     const den::DenoiserHandle& prior) {
  CImage v(s.z.h, s.z.w);
  for (std::size_t i = 0; i < v.v.size(); ++i) v.v[i] = s.z.v[i] - s.u.v[i];
  return den::denoise_complex(v, sigma, prior);
}

CImage data_prox_csmri(const CImage& v, const fm::Observation& obs,
                       const fm::CsmriModel& m, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("data_prox_csmri: mu <= 0");
  if (v.h != m.mask.h || v.w != m.mask.w)
    throw std::invalid_argument("data_prox_csmri: shape mismatch");
  CImage vf = fft2(v);
  CImage zf(v.h, v.w);
  for (std::size_t i = 0; i < zf.v.size(); ++i) {
    const double mk = m.mask.mask[i];
    zf.v[i] = (mk * obs.kspace.v[i] + mu * vf.v[i]) / (mk + mu);
  }
  return ifft2(zf);
}

double pr_data_objective(const CImage& v, const fm::Observation& obs,
                         const fm::CdpModel& m) {
  const auto amps = fm::cdp_forward(v, m);
  double acc = 0.0;
  for (std::size_t i = 0; i < amps.size(); ++i) {
    const Tensor& y = obs.amps[i];
    for (std::size_t j = 0; j < y.numel(); ++j) {
      const double d = amps[i][j] - y[j];
      acc += 0.5 * d * d;
    }
  }
  return acc;
}

CImage pr_data_grad(const CImage& v, const fm::Observation& obs,
                    const fm::CdpModel& m, std::vector<CImage>* w_cache) {
  if (v.h != m.h || v.w != m.w)
    throw std::invalid_argument("pr_data_grad: shape mismatch");
  if (w_cache != nullptr) w_cache->clear();
  CImage grad(v.h, v.w);
  CImage modulated(v.h, v.w);
  for (int i = 0; i < m.num_patterns(); ++i) {
    const CImage& d = m.patterns[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < v.v.size(); ++j)
      modulated.v[j] = d.v[j] * v.v[j];
    CImage w = fft2(modulated);
    if (w_cache != nullptr) w_cache->push_back(w);
    const Tensor& y = obs.amps[static_cast<std::size_t>(i)];
    for (std::size_t j = 0; j < w.v.size(); ++j) {
      const double aw = std::abs(w.v[j]);
      w.v[j] *= (aw - y[j]) / std::max(aw, kPrAmplitudeEps);
    }
    CImage back = ifft2(w);
    for (std::size_t j = 0; j < grad.v.size(); ++j)
      grad.v[j] += std::conj(d.v[j]) * back.v[j];
  }
  return grad;
}

CImage data_prox_pr(const CImage& v, const fm::Observation& obs,
                    const fm::CdpModel& m, double mu) {
  if (!(mu > 0.0)) throw std::invalid_argument("data_prox_pr: mu <= 0");
  CImage g = pr_data_grad(v, obs, m);
  CImage out(v.h, v.w);
  const double step = 1.0 / mu;
  for (std::size_t j = 0; j < out.v.size(); ++j)
    out.v[j] = v.v[j] - step * g.v[j];
  return out;
}

OptState admm_iterate(const OptState& s, double sigma, double mu,
                      const fm::Observation& obs,
                      const fm::MeasurementModel& model,
                      const den::DenoiserHandle& prior) {
  OptState next;
  next.x = denoiser_step(s, sigma, prior);

  CImage v(next.x.h, next.x.w);
  for (std::size_t i = 0; i < v.v.size(); ++i) v.v[i] = next.x.v[i] + s.u.v[i];
  if (std::holds_alternative<fm::CsmriModel>(model)) {
    next.z = data_prox_csmri(v, obs, std::get<fm::CsmriModel>(model), mu);
  } else {
    next.z = data_prox_pr(v, obs, std::get<fm::CdpModel>(model), mu);
  }

  next.u = CImage(next.x.h, next.x.w);
  for (std::size_t i = 0; i < next.u.v.size(); ++i)
    next.u.v[i] = s.u.v[i] + next.x.v[i] - next.z.v[i];
  next.k = s.k + 1;
  return next;
}

OptState run_block(OptState s, const ParamBlock& params,
                   const fm::Observation& obs,
                   const fm::MeasurementModel& model,
                   const den::DenoiserHandle& prior) {
  for (int j = 0; j < params.size(); ++j)
    s = admm_iterate(s, params.sigmas[static_cast<std::size_t>(j)],
                     params.mus[static_cast<std::size_t>(j)], obs, model, prior);
  return s;
}

OptState init_state(const fm::Observation& obs,
                    const fm::MeasurementModel& model) {
  OptState s;
  if (std::holds_alternative<fm::CsmriModel>(model)) {
    s.x = csmri_adjoint(obs.kspace, std::get<fm::CsmriModel>(model));
  } else {
    const fm::CdpModel& cdp = std::get<fm::CdpModel>(model);
    Tensor mean_mag({cdp.h, cdp.w});
    for (int i = 0; i < cdp.num_patterns(); ++i) {
      const CImage back = fm::cdp_adjoint_single(
          CImage::from_real(obs.amps[static_cast<std::size_t>(i)]), cdp, i);
      for (std::size_t j = 0; j < mean_mag.numel(); ++j)
        mean_mag[j] += std::abs(back.v[j]);
    }
    const double inv = 1.0 / cdp.num_patterns();
    for (std::size_t j = 0; j < mean_mag.numel(); ++j) mean_mag[j] *= inv;
    s.x = CImage::from_real(mean_mag);
  }
  s.z = s.x;
  s.u = CImage(s.x.h, s.x.w);
  s.k = 0;
  return s;
}

}  // namespace pnprl::prox
