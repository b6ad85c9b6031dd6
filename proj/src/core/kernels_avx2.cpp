// SPDX-License-Identifier: Apache-2.0
#include "pnprl/core/kernels.hpp"

#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstring>
#include <vector>

namespace pnprl::kern {

namespace {

inline double hsum(__m256d v) {
  __m128d lo = _mm256_castpd256_pd128(v);
  __m128d hi = _mm256_extractf128_pd(v, 1);
  lo = _mm_add_pd(lo, hi);
  return _mm_cvtsd_f64(_mm_hadd_pd(lo, lo));
}

// 4x8 FMA microkernel over a packed B panel (K x 8, contiguous per k).
inline void micro_4x8(int kc, const double* a, int lda, const double* bp,
                      double alpha, double beta, double* c, int ldc) {
  __m256d acc[4][2];
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 2; ++j) acc[i][j] = _mm256_setzero_pd();
  for (int p = 0; p < kc; ++p) {
    const __m256d b0 = _mm256_loadu_pd(bp + 8 * p);
    const __m256d b1 = _mm256_loadu_pd(bp + 8 * p + 4);
    for (int i = 0; i < 4; ++i) {
      const __m256d av = _mm256_set1_pd(a[static_cast<std::size_t>(i) * lda + p]);
      acc[i][0] = _mm256_fmadd_pd(av, b0, acc[i][0]);
      acc[i][1] = _mm256_fmadd_pd(av, b1, acc[i][1]);
    }
  }
  const __m256d valpha = _mm256_set1_pd(alpha);
  for (int i = 0; i < 4; ++i) {
    double* crow = c + static_cast<std::size_t>(i) * ldc;
    __m256d r0 = _mm256_mul_pd(valpha, acc[i][0]);
    __m256d r1 = _mm256_mul_pd(valpha, acc[i][1]);
    if (beta != 0.0) {
      const __m256d vbeta = _mm256_set1_pd(beta);
      r0 = _mm256_fmadd_pd(vbeta, _mm256_loadu_pd(crow), r0);
      r1 = _mm256_fmadd_pd(vbeta, _mm256_loadu_pd(crow + 4), r1);
    }
    _mm256_storeu_pd(crow, r0);
    _mm256_storeu_pd(crow + 4, r1);
  }
}

inline void micro_1x8(int kc, const double* a, const double* bp, double alpha,
                      double beta, double* c) {
  __m256d a0 = _mm256_setzero_pd(), a1 = _mm256_setzero_pd();
  for (int p = 0; p < kc; ++p) {
    const __m256d av = _mm256_set1_pd(a[p]);
    a0 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 8 * p), a0);
    a1 = _mm256_fmadd_pd(av, _mm256_loadu_pd(bp + 8 * p + 4), a1);
  }
  const __m256d valpha = _mm256_set1_pd(alpha);
  __m256d r0 = _mm256_mul_pd(valpha, a0);
  __m256d r1 = _mm256_mul_pd(valpha, a1);
  if (beta != 0.0) {
    const __m256d vbeta = _mm256_set1_pd(beta);
    r0 = _mm256_fmadd_pd(vbeta, _mm256_loadu_pd(c), r0);
    r1 = _mm256_fmadd_pd(vbeta, _mm256_loadu_pd(c + 4), r1);
  }
  _mm256_storeu_pd(c, r0);
  _mm256_storeu_pd(c + 4, r1);
}

void gemm_avx2(int m, int n, int k, double alpha, const double* a, int lda,
               const double* b, int ldb, double beta, double* c, int ldc) {
  thread_local std::vector<double> bpack;
  const int nblk = n / 8 * 8;
  if (nblk > 0) bpack.resize(static_cast<std::size_t>(k) * 8);

  for (int j = 0; j < nblk; j += 8) {
    double* bp = bpack.data();
    for (int p = 0; p < k; ++p)
      std::memcpy(bp + 8 * p, b + static_cast<std::size_t>(p) * ldb + j,
                  8 * sizeof(double));
    int i = 0;
    for (; i + 4 <= m; i += 4)
      micro_4x8(k, a + static_cast<std::size_t>(i) * lda, lda, bp, alpha, beta,
                c + static_cast<std::size_t>(i) * ldc + j, ldc);
    for (; i < m; ++i)
      micro_1x8(k, a + static_cast<std::size_t>(i) * lda, bp, alpha, beta,
                c + static_cast<std::size_t>(i) * ldc + j);
  }

  // Column tail.
  if (nblk < n) {
    for (int i = 0; i < m; ++i) {
      const double* arow = a + static_cast<std::size_t>(i) * lda;
      for (int j = nblk; j < n; ++j) {
        double acc = 0.0;
        for (int p = 0; p < k; ++p)
          acc += arow[p] * b[static_cast<std::size_t>(p) * ldb + j];
        double& cv = c[static_cast<std::size_t>(i) * ldc + j];
        cv = alpha * acc + (beta == 0.0 ? 0.0 : beta * cv);
      }
    }
  }
}

#define ELEMWISE_LOOP(head, body_vec, body_tail)          \
  std::size_t i = 0;                                      \
  for (; i + 4 <= n; i += 4) {                            \
    body_vec;                                             \
  }                                                       \
  for (; i < n; ++i) {                                    \
    body_tail;                                            \
  }

void add_avx2(const double* x, const double* y, double* out, std::size_t n) {
  ELEMWISE_LOOP(, _mm256_storeu_pd(out + i, _mm256_add_pd(_mm256_loadu_pd(x + i),
                                                          _mm256_loadu_pd(y + i))),
                out[i] = x[i] + y[i])
}
void sub_avx2(const double* x, const double* y, double* out, std::size_t n) {
  ELEMWISE_LOOP(, _mm256_storeu_pd(out + i, _mm256_sub_pd(_mm256_loadu_pd(x + i),
                                                          _mm256_loadu_pd(y + i))),
                out[i] = x[i] - y[i])
}
void mul_avx2(const double* x, const double* y, double* out, std::size_t n) {
  ELEMWISE_LOOP(, _mm256_storeu_pd(out + i, _mm256_mul_pd(_mm256_loadu_pd(x + i),
                                                          _mm256_loadu_pd(y + i))),
                out[i] = x[i] * y[i])
}
void axpy_avx2(double a, const double* x, double* y, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  ELEMWISE_LOOP(, _mm256_storeu_pd(y + i, _mm256_fmadd_pd(va, _mm256_loadu_pd(x + i),
                                                          _mm256_loadu_pd(y + i))),
                y[i] += a * x[i])
}
void scal_avx2(double a, double* x, std::size_t n) {
  const __m256d va = _mm256_set1_pd(a);
  ELEMWISE_LOOP(, _mm256_storeu_pd(x + i, _mm256_mul_pd(va, _mm256_loadu_pd(x + i))),
                x[i] *= a)
}
double dot_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i), acc);
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i] * y[i];
  return r;
}
double sum_avx2(const double* x, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) acc = _mm256_add_pd(acc, _mm256_loadu_pd(x + i));
  double r = hsum(acc);
  for (; i < n; ++i) r += x[i];
  return r;
}
double sumsq_diff_avx2(const double* x, const double* y, std::size_t n) {
  __m256d acc = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d = _mm256_sub_pd(_mm256_loadu_pd(x + i), _mm256_loadu_pd(y + i));
    acc = _mm256_fmadd_pd(d, d, acc);
  }
  double r = hsum(acc);
  for (; i < n; ++i) {
    const double d = x[i] - y[i];
    r += d * d;
  }
  return r;
}

void adam_step_avx2(double* w, double* mom, double* vel, const double* g,
                    std::size_t n, double lr, double beta1, double beta2,
                    double eps, double bc1, double bc2) {
  const __m256d vb1 = _mm256_set1_pd(beta1);
  const __m256d vb1c = _mm256_set1_pd(1.0 - beta1);
  const __m256d vb2 = _mm256_set1_pd(beta2);
  const __m256d vb2c = _mm256_set1_pd(1.0 - beta2);
  const __m256d veps = _mm256_set1_pd(eps);
  const __m256d vlr = _mm256_set1_pd(lr);
  const __m256d vibc1 = _mm256_set1_pd(1.0 / bc1);
  const __m256d vibc2 = _mm256_set1_pd(1.0 / bc2);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(g + i);
    __m256d mv = _mm256_loadu_pd(mom + i);
    __m256d vv = _mm256_loadu_pd(vel + i);
    mv = _mm256_fmadd_pd(vb1, mv, _mm256_mul_pd(vb1c, gv));
    vv = _mm256_fmadd_pd(vb2, vv, _mm256_mul_pd(vb2c, _mm256_mul_pd(gv, gv)));
    _mm256_storeu_pd(mom + i, mv);
    _mm256_storeu_pd(vel + i, vv);
    const __m256d mhat = _mm256_mul_pd(mv, vibc1);
    const __m256d vhat = _mm256_mul_pd(vv, vibc2);
    const __m256d denom = _mm256_add_pd(_mm256_sqrt_pd(vhat), veps);
    const __m256d step = _mm256_div_pd(_mm256_mul_pd(vlr, mhat), denom);
    _mm256_storeu_pd(w + i, _mm256_sub_pd(_mm256_loadu_pd(w + i), step));
  }
  for (; i < n; ++i) {
    mom[i] = beta1 * mom[i] + (1.0 - beta1) * g[i];
    vel[i] = beta2 * vel[i] + (1.0 - beta2) * g[i] * g[i];
    w[i] -= lr * (mom[i] / bc1) / (std::sqrt(vel[i] / bc2) + eps);
  }
}

void ema_avx2(double* target, const double* src, double rate, std::size_t n) {
  const __m256d vr = _mm256_set1_pd(rate);
  const __m256d vq = _mm256_set1_pd(1.0 - rate);
  ELEMWISE_LOOP(,
                _mm256_storeu_pd(target + i,
                                 _mm256_fmadd_pd(vq, _mm256_loadu_pd(target + i),
                                                 _mm256_mul_pd(vr, _mm256_loadu_pd(src + i)))),
                target[i] = (1.0 - rate) * target[i] + rate * src[i])
}

void zscale_real_avx2(const std::complex<double>* x, const double* s,
                      std::complex<double>* out, std::size_t n) {
  const double* xs = reinterpret_cast<const double*>(x);
  double* os = reinterpret_cast<double*>(out);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    // Two complex values per vector; duplicate each scale across re/im.
    const __m128d s2 = _mm_loadu_pd(s + i);
    const __m256d sv = _mm256_permute4x64_pd(_mm256_castpd128_pd256(s2), 0x50);
    _mm256_storeu_pd(os + 2 * i, _mm256_mul_pd(sv, _mm256_loadu_pd(xs + 2 * i)));
  }
  for (; i < n; ++i) out[i] = s[i] * x[i];
}
void zabs_avx2(const std::complex<double>* x, double* out, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) out[i] = std::abs(x[i]);
}

// Transcendental activations reuse the scalar path; the gemm above is where
// the cycles go.
void silu_fallback(const double* x, double* out, std::size_t n) {
  scalar_kernels().silu(x, out, n);
}
void silu_bwd_fallback(const double* x, const double* gy, double* gx,
                       std::size_t n) {
  scalar_kernels().silu_bwd(x, gy, gx, n);
}
void sigmoid_fallback(const double* x, double* out, std::size_t n) {
  scalar_kernels().sigmoid(x, out, n);
}

}  // namespace

const Kernels& avx2_kernels() {
  static const Kernels table = {
      "avx2",          gemm_avx2,      add_avx2,     sub_avx2,
      mul_avx2,        axpy_avx2,      scal_avx2,    dot_avx2,
      sum_avx2,        sumsq_diff_avx2, silu_fallback, silu_bwd_fallback,
      sigmoid_fallback, adam_step_avx2, ema_avx2,    zscale_real_avx2,
      zabs_avx2,
  };
  return table;
}

}  // namespace pnprl::kern

#else  // non-x86: the "avx2" table aliases the scalar one.

namespace pnprl::kern {
const Kernels& avx2_kernels() { return scalar_kernels(); }
}  // namespace pnprl::kern

#endif
