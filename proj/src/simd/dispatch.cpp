#include <cstdlib>
#include <string_view>

#include "kernels_internal.hpp"

namespace mapkit::simd {

const KernelTable* avx2_kernels() noexcept {
#if defined(MAPKIT_HAVE_AVX2_KERNELS)
  static const bool supported = __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
  return supported ? &detail::avx2_table() : nullptr;
#else
  return nullptr;
#endif
}

const KernelTable* neon_kernels() noexcept {
#if defined(MAPKIT_HAVE_NEON_KERNELS)
  return &detail::neon_table();
#else
  return nullptr;
#endif
}

std::vector<const KernelTable*> available_kernels() {
  std::vector<const KernelTable*> out{&scalar_kernels()};
  if (const auto* k = avx2_kernels()) out.push_back(k);
  if (const auto* k = neon_kernels()) out.push_back(k);
  return out;
}

const KernelTable& active_kernels() noexcept {
  static const KernelTable& chosen = []() -> const KernelTable& {
    if (const char* env = std::getenv("MAPKIT_ISA"); env && std::string_view(env) == "scalar") {
      return scalar_kernels();
    }
    if (const auto* k = avx2_kernels()) return *k;
    if (const auto* k = neon_kernels()) return *k;
    return scalar_kernels();
  }();
  return chosen;
}

}  // namespace mapkit::simd
