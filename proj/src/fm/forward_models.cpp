// SPDX-License-Identifier: Apache-2.0
#include "pnprl/fm/forward_models.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>

#include "pnprl/core/fft.hpp"
#include "pnprl/core/kernels.hpp"
#include "pnprl/core/rng.hpp"

namespace pnprl::fm {

namespace {

void check_shape(const CImage& x, int h, int w, const char* who) {
  if (x.h != h || x.w != w)
    throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

}  // namespace

CdpModel make_cdp_model(int h, int w, int num_patterns, double alpha,
                        std::uint64_t pattern_seed) {
  CdpModel m;
  m.h = h;
  m.w = w;
  m.alpha = alpha;
  m.patterns.reserve(static_cast<std::size_t>(num_patterns));
  for (int i = 0; i < num_patterns; ++i) {
    Rng rng = Rng::child(pattern_seed, {static_cast<std::uint64_t>(i)});
    CImage d(h, w);
    for (auto& z : d.v) {
      const double phase = rng.uniform() * 2.0 * std::numbers::pi;
      z = {std::cos(phase), std::sin(phase)};
    }
    m.patterns.push_back(std::move(d));
  }
  return m;
}

int model_height(const MeasurementModel& m) {
  return std::holds_alternative<CsmriModel>(m) ? std::get<CsmriModel>(m).mask.h
                                               : std::get<CdpModel>(m).h;
}
int model_width(const MeasurementModel& m) {
  return std::holds_alternative<CsmriModel>(m) ? std::get<CsmriModel>(m).mask.w
                                               : std::get<CdpModel>(m).w;
}
double model_sigma_n(const MeasurementModel& m) {
  return std::holds_alternative<CsmriModel>(m) ? std::get<CsmriModel>(m).sigma_n
                                               : 0.0;
}

CImage csmri_forward(const CImage& x, const CsmriModel& m) {
  check_shape(x, m.mask.h, m.mask.w, "csmri_forward");
  CImage y = fft2(x);
  for (std::size_t i = 0; i < y.v.size(); ++i)
    if (m.mask.mask[i] == 0) y.v[i] = 0.0;
  return y;
}

CImage csmri_adjoint(const CImage& y, const CsmriModel& m) {
  check_shape(y, m.mask.h, m.mask.w, "csmri_adjoint");
  CImage masked = y;
  for (std::size_t i = 0; i < masked.v.size(); ++i)
    if (m.mask.mask[i] == 0) masked.v[i] = 0.0;
  return ifft2(masked);
}

std::vector<Tensor> cdp_forward(const CImage& x, const CdpModel& m) {
  check_shape(x, m.h, m.w, "cdp_forward");
  std::vector<Tensor> amps;
  amps.reserve(m.patterns.size());
  CImage modulated(m.h, m.w);
  for (const CImage& d : m.patterns) {
    for (std::size_t j = 0; j < x.v.size(); ++j) modulated.v[j] = d.v[j] * x.v[j];
    const CImage f = fft2(modulated);
    Tensor a({m.h, m.w});
    kern::k().zabs(f.v.data(), a.data(), f.v.size());
    amps.push_back(std::move(a));
  }
  return amps;
}

CImage cdp_adjoint_single(const CImage& y, const CdpModel& m, int i) {
  check_shape(y, m.h, m.w, "cdp_adjoint_single");
  CImage img = ifft2(y);
  const CImage& d = m.patterns.at(static_cast<std::size_t>(i));
  for (std::size_t j = 0; j < img.v.size(); ++j)
    img.v[j] *= std::conj(d.v[j]);
  return img;
}

Observation synthesize_measurement(const CImage& x, const MeasurementModel& m,
                                   std::uint64_t seed) {
  Observation obs;
  if (std::holds_alternative<CsmriModel>(m)) {
    const CsmriModel& cs = std::get<CsmriModel>(m);
    obs.is_csmri = true;
    obs.kspace = csmri_forward(x, cs);
    if (cs.sigma_n > 0.0) {
      Rng rng(seed);
      const double s = cs.sigma_n / 255.0;
      for (std::size_t i = 0; i < obs.kspace.v.size(); ++i) {
        // noise drawn for every entry to keep the stream mask-independent
        const std::complex<double> n = rng.complex_gaussian();
        if (cs.mask.mask[i] != 0) obs.kspace.v[i] += s * n;
      }
    }
  } else {
    const CdpModel& cdp = std::get<CdpModel>(m);
    obs.is_csmri = false;
    obs.amps = cdp_forward(x, cdp);
    if (cdp.alpha > 0.0) {
      const double a = cdp.alpha / 255.0;
      for (std::size_t p = 0; p < obs.amps.size(); ++p) {
        Rng rng = Rng::child(seed, {static_cast<std::uint64_t>(p)});
        Tensor& amp = obs.amps[p];
        for (std::size_t i = 0; i < amp.numel(); ++i) {
          const double intensity =
              amp[i] * amp[i] + a * amp[i] * rng.gaussian();
          amp[i] = std::sqrt(std::max(intensity, 0.0));
        }
      }
    }
  }
  return obs;
}

double psnr(const CImage& x_hat, const CImage& x_gt) {
  if (!x_hat.same_shape(x_gt)) throw std::invalid_argument("psnr: shape mismatch");
  double se = 0.0;
  for (std::size_t i = 0; i < x_hat.v.size(); ++i) {
    const double d = std::abs(x_hat.v[i]) - std::abs(x_gt.v[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(x_hat.v.size());
  if (mse < 1e-10) return 100.0;
  return 10.0 * std::log10(1.0 / mse);
}

double psnr(const Tensor& x_hat, const Tensor& x_gt) {
  if (!x_hat.same_shape(x_gt)) throw std::invalid_argument("psnr: shape mismatch");
  double se = 0.0;
  for (std::size_t i = 0; i < x_hat.numel(); ++i) {
    const double d = std::abs(x_hat[i]) - std::abs(x_gt[i]);
    se += d * d;
  }
  const double mse = se / static_cast<double>(x_hat.numel());
  if (mse < 1e-10) return 100.0;
  return 10.0 * std::log10(1.0 / mse);
}

}  // namespace pnprl::fm
