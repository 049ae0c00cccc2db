#include <cstdlib>
#include <string_view>

#include "vfm/kernels/kernels.hpp"

namespace vfm::kernels {

#ifndef VFM_HAVE_AVX2
const KernelSet* avx2_kernels() { return nullptr; }
#endif
#ifndef VFM_HAVE_NEON
const KernelSet* neon_kernels() { return nullptr; }
#endif

namespace {

bool cpu_has_avx2() {
#if defined(VFM_HAVE_AVX2) && (defined(__GNUC__) || defined(__clang__))
  __builtin_cpu_init();
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelSet& choose() {
  const auto avail = available_kernels();
  if (const char* env = std::getenv("VFM_KERNELS")) {
    for (const auto* k : avail)
      if (std::string_view(k->name) == env) return *k;
  }
  return *avail.back();
}

}  // namespace

std::vector<const KernelSet*> available_kernels() {
  std::vector<const KernelSet*> out{&scalar_kernels()};
  if (neon_kernels()) out.push_back(neon_kernels());
  if (avx2_kernels() && cpu_has_avx2()) out.push_back(avx2_kernels());
  return out;
}

const KernelSet& active() {
  static const KernelSet& set = choose();
  return set;
}

const KernelSet* find_kernels(std::string_view name) {
  for (const auto* k : available_kernels())
    if (name == k->name) return k;
  return nullptr;
}

}  // namespace vfm::kernels
