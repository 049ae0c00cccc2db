#pragma once

#include <cstddef>
#include <string_view>
#include <vector>

// Hot loops shared by the MLP and the metrics. Every routine has a scalar
// reference and optional SIMD variants picked at runtime.
namespace vfm::kernels {

// C[n x m] = bias + A[n x k] * B[k x m], all row-major with leading
// dimensions. bias has m entries or is null. Each output is accumulated
// with fused multiply-adds in increasing k, so variants agree bit for bit.
using GemmFn = void (*)(std::size_t n, std::size_t k, std::size_t m, const double* a, std::size_t lda,
                        const double* b, std::size_t ldb, const double* bias, double* c, std::size_t ldc);

// In-place tanh over a contiguous array.
using TanhFn = void (*)(double* x, std::size_t n);

// Sum of Euclidean distances over all pairs (rows of a) x (rows of b).
using PairDistanceSumFn = double (*)(const double* a, std::size_t na, const double* b, std::size_t nb,
                                     std::size_t d);

struct KernelSet {
  const char* name;
  GemmFn gemm;
  TanhFn tanh;
  PairDistanceSumFn pair_distance_sum;
};

const KernelSet& scalar_kernels();
// Null when the variant was not compiled into this build.
const KernelSet* avx2_kernels();
const KernelSet* neon_kernels();

// Compiled variants the running CPU supports, scalar first.
std::vector<const KernelSet*> available_kernels();

// Best supported variant, chosen once. VFM_KERNELS=scalar|avx2|neon in the
// environment overrides the choice when that variant is available.
const KernelSet& active();

const KernelSet* find_kernels(std::string_view name);

}  // namespace vfm::kernels
