#include "vfm/kernels/kernels.hpp"

#include <cmath>

namespace vfm::kernels {

namespace {

void gemm_scalar(std::size_t n, std::size_t k, std::size_t m, const double* a, std::size_t lda, const double* b,
                 std::size_t ldb, const double* bias, double* c, std::size_t ldc) {
  for (std::size_t i = 0; i < n; ++i) {
    double* crow = c + i * ldc;
    for (std::size_t j = 0; j < m; ++j) crow[j] = bias ? bias[j] : 0.0;
    for (std::size_t p = 0; p < k; ++p) {
      const double av = a[i * lda + p];
      const double* brow = b + p * ldb;
      for (std::size_t j = 0; j < m; ++j) crow[j] = std::fma(av, brow[j], crow[j]);
    }
  }
}

void tanh_scalar(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) x[i] = std::tanh(x[i]);
}

double pair_distance_sum_scalar(const double* a, std::size_t na, const double* b, std::size_t nb, std::size_t d) {
  double total = 0.0;
  for (std::size_t i = 0; i < na; ++i) {
    const double* ai = a + i * d;
    double row = 0.0;
    for (std::size_t j = 0; j < nb; ++j) {
      const double* bj = b + j * d;
      double s = 0.0;
      for (std::size_t q = 0; q < d; ++q) {
        const double diff = ai[q] - bj[q];
        s += diff * diff;
      }
      row += std::sqrt(s);
    }
    total += row;
  }
  return total;
}

}  // namespace

const KernelSet& scalar_kernels() {
  static const KernelSet set{"scalar", gemm_scalar, tanh_scalar, pair_distance_sum_scalar};
  return set;
}

}  // namespace vfm::kernels
