// AArch64 only; Advanced SIMD is part of the base ISA there.
#include <arm_neon.h>

#include <cmath>
#include <cstring>
#include <vector>

#include "vfm/kernels/kernels.hpp"

namespace vfm::kernels {

namespace {

template <int Rows>
void gemm_rows(std::size_t i, std::size_t k, std::size_t m, const double* a, std::size_t lda, const double* b,
               std::size_t ldb, const double* bias, double* c, std::size_t ldc) {
  std::size_t j = 0;
  for (; j + 4 <= m; j += 4) {
    float64x2_t acc[Rows][2];
    for (int r = 0; r < Rows; ++r) {
      acc[r][0] = bias ? vld1q_f64(bias + j) : vdupq_n_f64(0.0);
      acc[r][1] = bias ? vld1q_f64(bias + j + 2) : vdupq_n_f64(0.0);
    }
    for (std::size_t p = 0; p < k; ++p) {
      const float64x2_t b0 = vld1q_f64(b + p * ldb + j);
      const float64x2_t b1 = vld1q_f64(b + p * ldb + j + 2);
      for (int r = 0; r < Rows; ++r) {
        const float64x2_t av = vdupq_n_f64(a[(i + r) * lda + p]);
        acc[r][0] = vfmaq_f64(acc[r][0], av, b0);
        acc[r][1] = vfmaq_f64(acc[r][1], av, b1);
      }
    }
    for (int r = 0; r < Rows; ++r) {
      vst1q_f64(c + (i + r) * ldc + j, acc[r][0]);
      vst1q_f64(c + (i + r) * ldc + j + 2, acc[r][1]);
    }
  }
  for (; j < m; ++j) {
    for (int r = 0; r < Rows; ++r) {
      double s = bias ? bias[j] : 0.0;
      for (std::size_t p = 0; p < k; ++p) s = std::fma(a[(i + r) * lda + p], b[p * ldb + j], s);
      c[(i + r) * ldc + j] = s;
    }
  }
}

void gemm_neon(std::size_t n, std::size_t k, std::size_t m, const double* a, std::size_t lda, const double* b,
               std::size_t ldb, const double* bias, double* c, std::size_t ldc) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) gemm_rows<4>(i, k, m, a, lda, b, ldb, bias, c, ldc);
  for (; i < n; ++i) gemm_rows<1>(i, k, m, a, lda, b, ldb, bias, c, ldc);
}

inline float64x2_t poly(float64x2_t x, double c0, double c1, double c2) {
  return vfmaq_f64(vdupq_n_f64(c2), vfmaq_f64(vdupq_n_f64(c1), vdupq_n_f64(c0), x), x);
}

inline float64x2_t exp_pd(float64x2_t x) {
  const float64x2_t n = vrndnq_f64(vmulq_n_f64(x, 1.4426950408889634073599));
  float64x2_t r = vfmsq_f64(x, n, vdupq_n_f64(6.93145751953125E-1));
  r = vfmsq_f64(r, n, vdupq_n_f64(1.42860682030941723212E-6));
  const float64x2_t rr = vmulq_f64(r, r);
  const float64x2_t px =
      vmulq_f64(r, poly(rr, 1.26177193074810590878E-4, 3.02994407707441961300E-2, 9.99999999999999999910E-1));
  const float64x2_t qx = vfmaq_f64(vdupq_n_f64(2.00000000000000000009E0),
                                   poly(rr, 3.00198505138664455042E-6, 2.52448340349684104192E-3,
                                        2.27265548208155028766E-1),
                                   rr);
  float64x2_t e = vdivq_f64(px, vsubq_f64(qx, px));
  e = vfmaq_f64(vdupq_n_f64(1.0), vdupq_n_f64(2.0), e);
  const int64x2_t bits = vshlq_n_s64(vaddq_s64(vcvtq_s64_f64(n), vdupq_n_s64(1023)), 52);
  return vmulq_f64(e, vreinterpretq_f64_s64(bits));
}

inline float64x2_t tanh_pd(float64x2_t x) {
  const float64x2_t ax = vminq_f64(vabsq_f64(x), vdupq_n_f64(22.0));
  const float64x2_t z = vmulq_f64(x, x);
  const float64x2_t p = poly(z, -9.64399179425052238628E-1, -9.92877231001918586564E1, -1.61468768441708447952E3);
  const float64x2_t q =
      vfmaq_f64(vdupq_n_f64(4.84406305325125486048E3),
                vfmaq_f64(vdupq_n_f64(2.23548839060100448583E3), vaddq_f64(z, vdupq_n_f64(1.12811678491632931402E2)), z),
                z);
  const float64x2_t small = vfmaq_f64(ax, vmulq_f64(ax, z), vdivq_f64(p, q));
  const float64x2_t s = exp_pd(vaddq_f64(ax, ax));
  const float64x2_t large =
      vsubq_f64(vdupq_n_f64(1.0), vdivq_f64(vdupq_n_f64(2.0), vaddq_f64(s, vdupq_n_f64(1.0))));
  const float64x2_t mag = vbslq_f64(vcltq_f64(ax, vdupq_n_f64(0.625)), small, large);
  const uint64x2_t sign = vandq_u64(vreinterpretq_u64_f64(x), vdupq_n_u64(0x8000000000000000ULL));
  return vreinterpretq_f64_u64(vorrq_u64(vreinterpretq_u64_f64(mag), sign));
}

void tanh_neon(double* x, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(x + i, tanh_pd(vld1q_f64(x + i)));
  if (i < n) {
    double buf[2] = {x[i], 0.0};
    vst1q_f64(buf, tanh_pd(vld1q_f64(buf)));
    x[i] = buf[0];
  }
}

double pair_distance_sum_neon(const double* a, std::size_t na, const double* b, std::size_t nb, std::size_t d) {
  std::vector<double> bt(d * nb);
  for (std::size_t j = 0; j < nb; ++j)
    for (std::size_t q = 0; q < d; ++q) bt[q * nb + j] = b[j * d + q];
  double total = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * d;
    float64x2_t acc = vdupq_n_f64(0.0);
    std::size_t j = 0;
    for (; j + 2 <= nb; j += 2) {
      float64x2_t s = vdupq_n_f64(0.0);
      for (std::size_t q = 0; q < d; ++q) {
        const float64x2_t diff = vsubq_f64(vdupq_n_f64(ai[q]), vld1q_f64(bt.data() + q * nb + j));
        s = vfmaq_f64(s, diff, diff);
      }
      acc = vaddq_f64(acc, vsqrtq_f64(s));
    }
    double row = vgetq_lane_f64(acc, 0) + vgetq_lane_f64(acc, 1);
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

const KernelSet* neon_kernels() {
  static const KernelSet set{"neon", gemm_neon, tanh_neon, pair_distance_sum_neon};
  return &set;
}

}  // namespace vfm::kernels
