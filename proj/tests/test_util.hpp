// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>

#include "pnprl/env/env.hpp"

namespace testutil {

using namespace pnprl;

inline Tensor random_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  Tensor img({h, w});
  for (std::size_t i = 0; i < img.numel(); ++i) img[i] = rng.uniform();
  return img;
}

inline CImage random_cimage(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  CImage img(h, w);
  for (auto& z : img.v) z = {rng.gaussian(), rng.gaussian()};
  return img;
}

// Smooth synthetic scene in [0,1]; nicer than white noise for PnP tests.
inline Tensor smooth_image(int h, int w, std::uint64_t seed) {
  Rng rng(seed);
  const double fx = rng.uniform(1.0, 3.0), fy = rng.uniform(1.0, 3.0);
  const double px = rng.uniform(0.0, 6.28), py = rng.uniform(0.0, 6.28);
  Tensor img({h, w});
  for (int i = 0; i < h; ++i)
    for (int j = 0; j < w; ++j)
      img.at(i, j) = 0.5 + 0.25 * std::sin(fx * 6.28 * i / h + px) *
                               std::cos(fy * 6.28 * j / w + py) +
                     0.15 * ((i > h / 3 && i < 2 * h / 3) ? 1.0 : 0.0);
  return img;
}

inline fm::CsmriModel csmri_model(int h, int w, double rate, double sigma_n,
                                  std::uint64_t seed = 1) {
  fm::CsmriModel m;
  m.mask = fm::make_mask(h, w, fm::MaskPattern::kRadial, rate, seed);
  m.sigma_n = sigma_n;
  return m;
}

inline env::ProblemInstance csmri_problem(int h, int w, double rate,
                                          double sigma_n, std::uint64_t seed) {
  env::ProblemInstance p;
  p.x_gt = CImage::from_real(smooth_image(h, w, seed));
  p.model = csmri_model(h, w, rate, sigma_n, seed + 17);
  p.has_gt = true;
  return p;
}

inline double rel_err(double a, double b, double floor = 1e-12) {
  return std::abs(a - b) / std::max(std::abs(b), floor);
}

inline double vec_rel_err(const std::vector<double>& a,
                          const std::vector<double>& b) {
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += (a[i] - b[i]) * (a[i] - b[i]);
    den += b[i] * b[i];
  }
  return std::sqrt(num) / std::max(std::sqrt(den), 1e-300);
}

}  // namespace testutil
