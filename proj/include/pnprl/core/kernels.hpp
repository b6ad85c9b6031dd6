// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>

namespace pnprl::kern {

// Flat table of the arithmetic inner-loop kernels. Every entry has a scalar
// reference implementation and (on x86-64 with AVX2+FMA) a vectorized variant;
// the active table is picked once at startup from cpuid, overridable with
// PNPRL_KERNELS=scalar|avx2.
struct Kernels {
  const char* name;

  // Row-major C[MxN] = alpha * A[MxK] * B[KxN] + beta * C.
  void (*gemm)(int m, int n, int k, double alpha, const double* a, int lda,
               const double* b, int ldb, double beta, double* c, int ldc);

  void (*add)(const double* x, const double* y, double* out, std::size_t n);
  void (*sub)(const double* x, const double* y, double* out, std::size_t n);
  void (*mul)(const double* x, const double* y, double* out, std::size_t n);
  void (*axpy)(double a, const double* x, double* y, std::size_t n);  // y += a*x
  void (*scal)(double a, double* x, std::size_t n);
  double (*dot)(const double* x, const double* y, std::size_t n);
  double (*sum)(const double* x, std::size_t n);
  double (*sumsq_diff)(const double* x, const double* y, std::size_t n);

  void (*silu)(const double* x, double* out, std::size_t n);
  // gx += gy * silu'(x)
  void (*silu_bwd)(const double* x, const double* gy, double* gx, std::size_t n);
  void (*sigmoid)(const double* x, double* out, std::size_t n);

  // Fused Adam update; bc1/bc2 are the bias-correction factors 1-beta^t.
  void (*adam_step)(double* w, double* mom, double* vel, const double* g,
                    std::size_t n, double lr, double beta1, double beta2,
                    double eps, double bc1, double bc2);
  void (*ema)(double* target, const double* src, double rate, std::size_t n);

  // Complex helpers (interleaved std::complex<double> layout).
  void (*zscale_real)(const std::complex<double>* x, const double* s,
                      std::complex<double>* out, std::size_t n);  // out = s .* x
  void (*zabs)(const std::complex<double>* x, double* out, std::size_t n);
};

const Kernels& scalar_kernels();
const Kernels& avx2_kernels();   // valid only if cpu_has_avx2()
bool cpu_has_avx2();

// Active table (runtime-selected, cached).
const Kernels& k();

}  // namespace pnprl::kern
