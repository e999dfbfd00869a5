// AArch64 variant; Advanced SIMD is part of the base ISA there.
#include <arm_neon.h>

#include "kernels_internal.hpp"

namespace mapkit::simd {
namespace {

inline float64x2_t load_f64x2(const std::byte* p) {
  return vld1q_f64(reinterpret_cast<const double*>(p));
}

inline float64x2_t load_f32x2(const std::byte* p) {
  return vcvt_f64_f32(vld1_f32(reinterpret_cast<const float*>(p)));
}

inline float64x2_t load_bf16x2(const std::byte* p) {
  const uint16x4_t raw = vreinterpret_u16_u32(vld1_dup_u32(reinterpret_cast<const uint32_t*>(p)));
  const uint32x2_t bits = vshl_n_u32(vget_low_u32(vmovl_u16(raw)), 16);
  return vcvt_f64_f32(vreinterpret_f32_u32(bits));
}

inline void two_sum_step(float64x2_t x, double* hi_p, double* lo_p) {
  const float64x2_t hi = vld1q_f64(hi_p);
  const float64x2_t t = vaddq_f64(hi, x);
  const float64x2_t bp = vsubq_f64(t, hi);
  const float64x2_t err = vaddq_f64(vsubq_f64(hi, vsubq_f64(t, bp)), vsubq_f64(x, bp));
  vst1q_f64(hi_p, t);
  vst1q_f64(lo_p, vaddq_f64(vld1q_f64(lo_p), err));
}

void widen_f32(const std::byte* src, double* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, load_f32x2(src + 4 * i));
  scalar_kernels().widen_f32(src + 4 * i, dst + i, n - i);
}

void widen_bf16(const std::byte* src, double* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) vst1q_f64(dst + i, load_bf16x2(src + 2 * i));
  scalar_kernels().widen_bf16(src + 2 * i, dst + i, n - i);
}

void narrow_f32(const double* src, std::byte* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    vst1_f32(reinterpret_cast<float*>(dst + 4 * i), vcvt_f32_f64(vld1q_f64(src + i)));
  }
  scalar_kernels().narrow_f32(src + i, dst + 4 * i, n - i);
}

void accumulate_f64(const std::byte* src, double* hi, double* lo, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) two_sum_step(load_f64x2(src + 8 * i), hi + i, lo + i);
  scalar_kernels().accumulate_f64(src + 8 * i, hi + i, lo + i, n - i);
}

void accumulate_f32(const std::byte* src, double* hi, double* lo, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) two_sum_step(load_f32x2(src + 4 * i), hi + i, lo + i);
  scalar_kernels().accumulate_f32(src + 4 * i, hi + i, lo + i, n - i);
}

void accumulate_bf16(const std::byte* src, double* hi, double* lo, std::size_t n) {
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) two_sum_step(load_bf16x2(src + 2 * i), hi + i, lo + i);
  scalar_kernels().accumulate_bf16(src + 2 * i, hi + i, lo + i, n - i);
}

void finalize_mean(const double* hi, const double* lo, double divisor, double* out,
                   std::size_t n) {
  const float64x2_t d = vdupq_n_f64(divisor);
  std::size_t i = 0;
  for (; i + 2 <= n; i += 2) {
    const float64x2_t h = vld1q_f64(hi + i);
    const float64x2_t q = vdivq_f64(h, d);
    // vfmsq_f64(a, b, c) = a - b*c, fused.
    const float64x2_t r = vaddq_f64(vfmsq_f64(h, q, d), vld1q_f64(lo + i));
    const float64x2_t c = vdivq_f64(r, d);
    const uint64x2_t is_zero = vceqzq_f64(c);
    const uint64x2_t is_nan =
        vreinterpretq_u64_u32(vmvnq_u32(vreinterpretq_u32_u64(vceqq_f64(c, c))));
    const uint64x2_t keep_q = vorrq_u64(is_zero, is_nan);
    vst1q_f64(out + i, vbslq_f64(keep_q, q, vaddq_f64(q, c)));
  }
  scalar_kernels().finalize_mean(hi + i, lo + i, divisor, out + i, n - i);
}

}  // namespace

namespace detail {

const KernelTable& neon_table() noexcept {
  static const KernelTable table{
      Isa::Neon,      "neon",         widen_f32,       widen_bf16,    narrow_f32,
      accumulate_f64, accumulate_f32, accumulate_bf16, finalize_mean,
  };
  return table;
}

}  // namespace detail
}  // namespace mapkit::simd
