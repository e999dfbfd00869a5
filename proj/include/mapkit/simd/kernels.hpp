#pragma once

// Element-wise kernels behind the tensor store and the merge engine.
//
// Every variant must be bit-identical to the scalar reference: the operations
// are plain IEEE-754 adds, subtracts, divides, fused multiply-adds and format
// conversions, each correctly rounded, and no variant reassociates across
// elements. Source buffers are raw little-endian bytes with no alignment
// guarantee.
//
// Accumulation keeps a running double-double sum (hi, lo) per element using
// Knuth's TwoSum, so the mean of identical members is exact and every mean
// lies between the member minimum and maximum.

#include <cstddef>
#include <string_view>
#include <vector>

namespace mapkit::simd {

enum class Isa { Scalar, Avx2, Neon };

struct KernelTable {
  Isa isa;
  std::string_view name;

  // dst[i] = widen(src[i])
  void (*widen_f32)(const std::byte* src, double* dst, std::size_t n);
  void (*widen_bf16)(const std::byte* src, double* dst, std::size_t n);
  // dst[i] = round_to_nearest_even_f32(src[i]), written little-endian.
  void (*narrow_f32)(const double* src, std::byte* dst, std::size_t n);

  // (hi[i], lo[i]) += src[i] as a double-double TwoSum step.
  void (*accumulate_f64)(const std::byte* src, double* hi, double* lo, std::size_t n);
  void (*accumulate_f32)(const std::byte* src, double* hi, double* lo, std::size_t n);
  void (*accumulate_bf16)(const std::byte* src, double* hi, double* lo, std::size_t n);

  // out[i] = (hi[i] + lo[i]) / divisor, rounded once from the double-double
  // value: q = hi/d, r = fma(-q, d, hi) + lo, out = q + r/d (q when r/d is 0
  // or NaN, so signed zeros and infinities pass through unchanged).
  void (*finalize_mean)(const double* hi, const double* lo, double divisor, double* out,
                        std::size_t n);
};

[[nodiscard]] const KernelTable& scalar_kernels() noexcept;

// nullptr when the variant was not compiled in or the CPU lacks the ISA.
[[nodiscard]] const KernelTable* avx2_kernels() noexcept;
[[nodiscard]] const KernelTable* neon_kernels() noexcept;

/// Best variant for this CPU, chosen once. Setting MAPKIT_ISA=scalar in the
/// environment forces the reference path.
[[nodiscard]] const KernelTable& active_kernels() noexcept;

/// All variants usable on this machine, scalar first.
[[nodiscard]] std::vector<const KernelTable*> available_kernels();

}  // namespace mapkit::simd
