// SPDX-License-Identifier: Apache-2.0
#include "pnprl/core/kernels.hpp"

#include <cmath>
#include <cstdlib>
#include <cstring>
#include <string>

namespace pnprl::kern {

namespace {

void gemm_scalar(int m, int n, int k, double alpha, const double* a, int lda,
                 const double* b, int ldb, double beta, double* c, int ldc) {
  for (int i = 0; i < m; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * ldc;
    if (beta == 0.0) {
      std::memset(crow, 0, sizeof(double) * n);
    } else if (beta != 1.0) {
      for (int j = 0; j < n; ++j) crow[j] *= beta;
    }
    for (int p = 0; p < k; ++p) {
      const double av = alpha * a[static_cast<std::size_t>(i) * lda + p];
      if (av == 0.0) continue;
      const double* brow = b + static_cast<std::size_t>(p) * ldb;
      for (int j = 0; j < n; ++j) crow[j] += av * brow[j];
    }
  }
}

void add_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] + y[i];
}
void sub_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] - y[i];
}
void mul_scalar(const double* x, const double* y, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = x[i] * y[i];
}
void axpy_scalar(double a, const double* x, double* y, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) y[i] += a * x[i];
}
void scal_scalar(double a, double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] *= a;
}
double dot_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i] * y[i];
  return acc;
}
double sum_scalar(const double* x, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += x[i];
  return acc;
}
double sumsq_diff_scalar(const double* x, const double* y, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = x[i] - y[i];
    acc += d * d;
  }
  return acc;
}

void silu_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double s = 1.0 / (1.0 + std::exp(-x[i]));
    out[i] = x[i] * s;
  }
}
void silu_bwd_scalar(const double* x, const double* gy, double* gx,
                     std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double s = 1.0 / (1.0 + std::exp(-x[i]));
    gx[i] += gy[i] * (s * (1.0 + x[i] * (1.0 - s)));
  }
}
void sigmoid_scalar(const double* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = 1.0 / (1.0 + std::exp(-x[i]));
}

void adam_step_scalar(double* w, double* mom, double* vel, const double* g,
                      std::size_t n, double lr, double beta1, double beta2,
                      double eps, double bc1, double bc2) {
  for (std::size_t i = 0; i < n; ++i) {
    mom[i] = beta1 * mom[i] + (1.0 - beta1) * g[i];
    vel[i] = beta2 * vel[i] + (1.0 - beta2) * g[i] * g[i];
    const double mhat = mom[i] / bc1;
    const double vhat = vel[i] / bc2;
    w[i] -= lr * mhat / (std::sqrt(vhat) + eps);
  }
}
void ema_scalar(double* target, const double* src, double rate,
                std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    target[i] = (1.0 - rate) * target[i] + rate * src[i];
}

void zscale_real_scalar(const std::complex<double>* x, const double* s,
                        std::complex<double>* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = s[i] * x[i];
}
void zabs_scalar(const std::complex<double>* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(x[i]);
}

}  // namespace

const Kernels& scalar_kernels() {
  static const Kernels table = {
      "scalar",        gemm_scalar,      add_scalar,     sub_scalar,
      mul_scalar,      axpy_scalar,      scal_scalar,    dot_scalar,
      sum_scalar,      sumsq_diff_scalar, silu_scalar,   silu_bwd_scalar,
      sigmoid_scalar,  adam_step_scalar, ema_scalar,     zscale_real_scalar,
      zabs_scalar,
  };
  return table;
}

bool cpu_has_avx2() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const Kernels& k() {
  static const Kernels* selected = [] {
    const char* env = std::getenv("PNPRL_KERNELS");
    if (env != nullptr) {
      const std::string want(env);
      if (want == "scalar") return &scalar_kernels();
      if (want == "avx2" && cpu_has_avx2()) return &avx2_kernels();
    }
    return cpu_has_avx2() ? &avx2_kernels() : &scalar_kernels();
  }();
  return *selected;
}

}  // namespace pnprl::kern
