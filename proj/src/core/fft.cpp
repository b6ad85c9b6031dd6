// SPDX-License-Identifier: Apache-2.0
#include "pnprl/core/fft.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>

namespace pnprl {

namespace {

std::mutex plan_mutex;

fftw_plan get_plan(int h, int w, int sign) {
  static std::map<std::tuple<int, int, int>, fftw_plan> cache;
  std::lock_guard lk(plan_mutex);
  const auto key = std::make_tuple(h, w, sign);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  // Plan once on scratch buffers; FFTW_UNALIGNED lets us execute on any
  // caller buffer via fftw_execute_dft.
  std::vector<std::complex<double>> in(static_cast<std::size_t>(h) * w);
  std::vector<std::complex<double>> out(in.size());
  fftw_plan p = fftw_plan_dft_2d(
      h, w, reinterpret_cast<fftw_complex*>(in.data()),
      reinterpret_cast<fftw_complex*>(out.data()), sign,
      FFTW_ESTIMATE | FFTW_UNALIGNED | FFTW_PRESERVE_INPUT);
  cache.emplace(key, p);
  return p;
}

CImage run(const CImage& x, int sign) {
  CImage out(x.h, x.w);
  fftw_plan p = get_plan(x.h, x.w, sign);
  fftw_execute_dft(
      p,
      reinterpret_cast<fftw_complex*>(
          const_cast<std::complex<double>*>(x.v.data())),
      reinterpret_cast<fftw_complex*>(out.v.data()));
  const double scale = 1.0 / std::sqrt(static_cast<double>(x.numel()));
  for (auto& z : out.v) z *= scale;
  return out;
}

}  // namespace

CImage fft2(const CImage& x) { return run(x, FFTW_FORWARD); }
CImage ifft2(const CImage& x) { return run(x, FFTW_BACKWARD); }

}  // namespace pnprl
