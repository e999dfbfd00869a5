#pragma once

#include "mapkit/simd/kernels.hpp"

namespace mapkit::simd::detail {

// Defined only in the translation unit compiled for the matching ISA.
const KernelTable& avx2_table() noexcept;
const KernelTable& neon_table() noexcept;

}  // namespace mapkit::simd::detail
