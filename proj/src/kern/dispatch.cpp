#include "corrmap/kern/kernels.hpp"

#include <cstdlib>
#include <cstring>

namespace corrmap::kern {

#if defined(CORRMAP_HAVE_AVX2_TU)
const KernelTable* avx2_kernels_impl();  // defined in kernels_avx2.cpp
#endif

bool cpu_has_avx2_fma() {
#if defined(__x86_64__) || defined(_M_X64)
  return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
#else
  return false;
#endif
}

const KernelTable* avx2_kernels() {
#if defined(CORRMAP_HAVE_AVX2_TU)
  if (cpu_has_avx2_fma()) return avx2_kernels_impl();
#endif
  return nullptr;
}

const KernelTable& kernels() {
  static const KernelTable* active = [] {
    const char* force = std::getenv("CORRMAP_KERNELS");
    if (force && std::strcmp(force, "scalar") == 0) return &scalar_kernels();
    const KernelTable* v = avx2_kernels();
    if (force && std::strcmp(force, "avx2") == 0 && v) return v;
    if (force && std::strcmp(force, "avx2") == 0) return &scalar_kernels();
    return v ? v : &scalar_kernels();
  }();
  return *active;
}

}  // namespace corrmap::kern
