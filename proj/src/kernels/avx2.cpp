// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <vector>

#include "vfm/kernels/kernels.hpp"

namespace vfm::kernels {

namespace {

// Accumulates p in [p0, p1) into c. When init is set the accumulators start
// from bias (or zero), otherwise from the partial sums already in c, so a
// k-blocked product performs the same fma sequence as an unblocked one.
template <int Rows>
void gemm_rows(std::size_t i, std::size_t p0, std::size_t p1, std::size_t m, const double* a, std::size_t lda,
               const double* b, std::size_t ldb, const double* bias, bool init, double* c, std::size_t ldc) {
  auto start = [&](std::size_t r, std::size_t j) {
    if (!init) return _mm256_loadu_pd(c + (i + r) * ldc + j);
    return bias ? _mm256_loadu_pd(bias + j) : _mm256_setzero_pd();
  };
  std::size_t j = 0;
  for (; j + 8 <= m; j += 8) {
    __m256d acc[Rows][2];
    for (int r = 0; r < Rows; ++r) {
      acc[r][0] = start(r, j);
      acc[r][1] = start(r, j + 4);
    }
    for (std::size_t p = p0; p < p1; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * ldb + j);
      const __m256d b1 = _mm256_loadu_pd(b + p * ldb + j + 4);
      for (int r = 0; r < Rows; ++r) {
        const __m256d av = _mm256_broadcast_sd(a + (i + r) * lda + p);
        acc[r][0] = _mm256_fmadd_pd(av, b0, acc[r][0]);
        acc[r][1] = _mm256_fmadd_pd(av, b1, acc[r][1]);
      }
    }
    for (int r = 0; r < Rows; ++r) {
      _mm256_storeu_pd(c + (i + r) * ldc + j, acc[r][0]);
      _mm256_storeu_pd(c + (i + r) * ldc + j + 4, acc[r][1]);
    }
  }
  for (; j + 4 <= m; j += 4) {
    __m256d acc[Rows];
    for (int r = 0; r < Rows; ++r) acc[r] = start(r, j);
    for (std::size_t p = p0; p < p1; ++p) {
      const __m256d b0 = _mm256_loadu_pd(b + p * ldb + j);
      for (int r = 0; r < Rows; ++r) acc[r] = _mm256_fmadd_pd(_mm256_broadcast_sd(a + (i + r) * lda + p), b0, acc[r]);
    }
    for (int r = 0; r < Rows; ++r) _mm256_storeu_pd(c + (i + r) * ldc + j, acc[r]);
  }
  for (; j < m; ++j) {
    for (int r = 0; r < Rows; ++r) {
      double s = init ? (bias ? bias[j] : 0.0) : c[(i + r) * ldc + j];
      for (std::size_t p = p0; p < p1; ++p) s = std::fma(a[(i + r) * lda + p], b[p * ldb + j], s);
      c[(i + r) * ldc + j] = s;
    }
  }
}

void gemm_avx2(std::size_t n, std::size_t k, std::size_t m, const double* a, std::size_t lda, const double* b,
               std::size_t ldb, const double* bias, double* c, std::size_t ldc) {
  // Keep a k-panel of b resident in L2 while all rows of a stream past it.
  constexpr std::size_t kc = 256;
  for (std::size_t p0 = 0; p0 < k || p0 == 0; p0 += kc) {
    const std::size_t p1 = std::min(k, p0 + kc);
    const bool init = p0 == 0;
    std::size_t i = 0;
    for (; i + 4 <= n; i += 4) gemm_rows<4>(i, p0, p1, m, a, lda, b, ldb, bias, init, c, ldc);
    for (; i < n; ++i) gemm_rows<1>(i, p0, p1, m, a, lda, b, ldb, bias, init, c, ldc);
    if (k == 0) break;
  }
}

inline __m256d poly(__m256d x, double c0, double c1, double c2) {
  return _mm256_fmadd_pd(_mm256_fmadd_pd(_mm256_set1_pd(c0), x, _mm256_set1_pd(c1)), x, _mm256_set1_pd(c2));
}

// exp for arguments in roughly [0, 45]; Cephes-style range reduction.
inline __m256d exp_pd(__m256d x) {
  const __m256d n = _mm256_round_pd(_mm256_mul_pd(x, _mm256_set1_pd(1.4426950408889634073599)),
                                    _MM_FROUND_TO_NEAREST_INT | _MM_FROUND_NO_EXC);
  __m256d r = _mm256_fnmadd_pd(n, _mm256_set1_pd(6.93145751953125E-1), x);
  r = _mm256_fnmadd_pd(n, _mm256_set1_pd(1.42860682030941723212E-6), r);
  const __m256d rr = _mm256_mul_pd(r, r);
  const __m256d px = _mm256_mul_pd(r, poly(rr, 1.26177193074810590878E-4, 3.02994407707441961300E-2,
                                           9.99999999999999999910E-1));
  const __m256d qx = _mm256_fmadd_pd(
      poly(rr, 3.00198505138664455042E-6, 2.52448340349684104192E-3, 2.27265548208155028766E-1), rr,
      _mm256_set1_pd(2.00000000000000000009E0));
  __m256d e = _mm256_div_pd(px, _mm256_sub_pd(qx, px));
  e = _mm256_fmadd_pd(_mm256_set1_pd(2.0), e, _mm256_set1_pd(1.0));
  // 2^n from the integer bits of n + 1023 + 2^52.
  const __m256d biased = _mm256_add_pd(n, _mm256_set1_pd(4503599627370496.0 + 1023.0));
  const __m256d pow2 = _mm256_castsi256_pd(_mm256_slli_epi64(_mm256_castpd_si256(biased), 52));
  return _mm256_mul_pd(e, pow2);
}

inline __m256d tanh_pd(__m256d x) {
  const __m256d sign_mask = _mm256_set1_pd(-0.0);
  const __m256d ax = _mm256_min_pd(_mm256_andnot_pd(sign_mask, x), _mm256_set1_pd(22.0));
  // small |x|: rational approximation
  const __m256d z = _mm256_mul_pd(x, x);
  const __m256d p = poly(z, -9.64399179425052238628E-1, -9.92877231001918586564E1, -1.61468768441708447952E3);
  const __m256d q = _mm256_fmadd_pd(
      _mm256_fmadd_pd(_mm256_add_pd(z, _mm256_set1_pd(1.12811678491632931402E2)), z,
                      _mm256_set1_pd(2.23548839060100448583E3)),
      z, _mm256_set1_pd(4.84406305325125486048E3));
  const __m256d small = _mm256_fmadd_pd(_mm256_mul_pd(ax, z), _mm256_div_pd(p, q), ax);
  // large |x|: 1 - 2 / (exp(2|x|) + 1)
  const __m256d s = exp_pd(_mm256_add_pd(ax, ax));
  const __m256d large = _mm256_sub_pd(_mm256_set1_pd(1.0),
                                      _mm256_div_pd(_mm256_set1_pd(2.0), _mm256_add_pd(s, _mm256_set1_pd(1.0))));
  const __m256d use_small = _mm256_cmp_pd(ax, _mm256_set1_pd(0.625), _CMP_LT_OQ);
  // Sign restored last so that -0 stays -0.
  return _mm256_or_pd(_mm256_blendv_pd(large, small, use_small), _mm256_and_pd(sign_mask, x));
}

void tanh_avx2(double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(x + i, tanh_pd(_mm256_loadu_pd(x + i)));
  if (i < n) {
    // Pad the tail so every element goes through the same formula.
    double buf[4] = {0.0, 0.0, 0.0, 0.0};
    std::memcpy(buf, x + i, (n - i) * sizeof(double));
    _mm256_storeu_pd(buf, tanh_pd(_mm256_loadu_pd(buf)));
    std::memcpy(x + i, buf, (n - i) * sizeof(double));
  }
}

double pair_distance_sum_avx2(const double* a, std::size_t na, const double* b, std::size_t nb, std::size_t d) {
  // Columns of b, contiguous.
  std::vector<double> bt(d * nb);
  for (std::size_t j = 0; j < nb; ++j)
    for (std::size_t q = 0; q < d; ++q) bt[q * nb + j] = b[j * d + q];
  double total = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * d;
    __m256d acc = _mm256_setzero_pd();
    std::size_t j = 0;
    for (; j + 4 <= nb; j += 4) {
      __m256d s = _mm256_setzero_pd();
      for (std::size_t q = 0; q < d; ++q) {
        const __m256d diff = _mm256_sub_pd(_mm256_set1_pd(ai[q]), _mm256_loadu_pd(bt.data() + q * nb + j));
        s = _mm256_fmadd_pd(diff, diff, s);
      }
      acc = _mm256_add_pd(acc, _mm256_sqrt_pd(s));
    }
    alignas(32) double lanes[4];
    _mm256_store_pd(lanes, acc);
    double row = (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
    for (; j < nb; ++j) {
      double s = 0.0;
      for (std::size_t q = 0; q < d; ++q) {
        const double diff = ai[q] - bt[q * nb + j];
        s = std::fma(diff, diff, s);
      }
      row += std::sqrt(s);
    }
    total += row;
  }
  return total;
}

}  // namespace

const KernelSet* avx2_kernels() {
  static const KernelSet set{"avx2", gemm_avx2, tanh_avx2, pair_distance_sum_avx2};
  return &set;
}

}  // namespace vfm::kernels
