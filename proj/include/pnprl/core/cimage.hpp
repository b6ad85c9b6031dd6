// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <stdexcept>
#include <vector>

#include "pnprl/core/tensor.hpp"

namespace pnprl {

// Complex 2-D field, row-major interleaved storage.
struct CImage {
  int h = 0;
  int w = 0;
  std::vector<std::complex<double>> v;

  CImage() = default;
  CImage(int h_, int w_) : h(h_), w(w_), v(static_cast<std::size_t>(h_) * w_) {}

  std::size_t numel() const { return v.size(); }
  std::complex<double>& at(int i, int j) {
    return v[static_cast<std::size_t>(i) * w + j];
  }
  std::complex<double> at(int i, int j) const {
    return v[static_cast<std::size_t>(i) * w + j];
  }
  bool same_shape(const CImage& o) const { return h == o.h && w == o.w; }

  static CImage from_real(const Tensor& t) {
    if (t.rank() != 2) throw std::invalid_argument("from_real: rank-2 expected");
    CImage img(t.dim(0), t.dim(1));
    for (std::size_t i = 0; i < img.v.size(); ++i) img.v[i] = t[i];
    return img;
  }

  Tensor real() const {
    Tensor t({h, w});
    for (std::size_t i = 0; i < v.size(); ++i) t[i] = v[i].real();
    return t;
  }
  Tensor imag() const {
    Tensor t({h, w});
    for (std::size_t i = 0; i < v.size(); ++i) t[i] = v[i].imag();
    return t;
  }
  Tensor magnitude() const {
    Tensor t({h, w});
    for (std::size_t i = 0; i < v.size(); ++i) t[i] = std::abs(v[i]);
    return t;
  }

  // Two-plane (re, im) tensor of shape [2, h, w].
  Tensor planes() const {
    Tensor t({2, h, w});
    const std::size_t n = v.size();
    for (std::size_t i = 0; i < n; ++i) {
      t[i] = v[i].real();
      t[n + i] = v[i].imag();
    }
    return t;
  }
  static CImage from_planes(const Tensor& t) {
    if (t.rank() != 3 || t.dim(0) != 2)
      throw std::invalid_argument("from_planes: [2,H,W] expected");
    CImage img(t.dim(1), t.dim(2));
    const std::size_t n = img.v.size();
    for (std::size_t i = 0; i < n; ++i) img.v[i] = {t[i], t[n + i]};
    return img;
  }
};

inline std::complex<double> inner(const CImage& a, const CImage& b) {
  std::complex<double> acc = 0.0;
  for (std::size_t i = 0; i < a.v.size(); ++i) acc += a.v[i] * std::conj(b.v[i]);
  return acc;
}

}  // namespace pnprl
