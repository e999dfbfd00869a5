// Compiled with -mavx2 -mfma; only reached after a runtime CPU check.
#include <immintrin.h>

#include "kernels_internal.hpp"

namespace mapkit::simd {
namespace {

inline __m256d load_f64x4(const std::byte* p) {
  return _mm256_loadu_pd(reinterpret_cast<const double*>(p));
}

inline __m256d load_f32x4(const std::byte* p) {
  return _mm256_cvtps_pd(_mm_loadu_ps(reinterpret_cast<const float*>(p)));
}

inline __m256d load_bf16x4(const std::byte* p) {
  const __m128i raw = _mm_loadl_epi64(reinterpret_cast<const __m128i*>(p));
  const __m128i bits = _mm_slli_epi32(_mm_cvtepu16_epi32(raw), 16);
  return _mm256_cvtps_pd(_mm_castsi128_ps(bits));
}

inline void two_sum_step(__m256d x, double* hi_p, double* lo_p) {
  const __m256d hi = _mm256_loadu_pd(hi_p);
  const __m256d t = _mm256_add_pd(hi, x);
  const __m256d bp = _mm256_sub_pd(t, hi);
  const __m256d err =
      _mm256_add_pd(_mm256_sub_pd(hi, _mm256_sub_pd(t, bp)), _mm256_sub_pd(x, bp));
  _mm256_storeu_pd(hi_p, t);
  _mm256_storeu_pd(lo_p, _mm256_add_pd(_mm256_loadu_pd(lo_p), err));
}

void widen_f32(const std::byte* src, double* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(dst + i, load_f32x4(src + 4 * i));
  scalar_kernels().widen_f32(src + 4 * i, dst + i, n - i);
}

void widen_bf16(const std::byte* src, double* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) _mm256_storeu_pd(dst + i, load_bf16x4(src + 2 * i));
  scalar_kernels().widen_bf16(src + 2 * i, dst + i, n - i);
}

void narrow_f32(const double* src, std::byte* dst, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    _mm_storeu_ps(reinterpret_cast<float*>(dst + 4 * i), _mm256_cvtpd_ps(_mm256_loadu_pd(src + i)));
  }
  scalar_kernels().narrow_f32(src + i, dst + 4 * i, n - i);
}

void accumulate_f64(const std::byte* src, double* hi, double* lo, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) two_sum_step(load_f64x4(src + 8 * i), hi + i, lo + i);
  scalar_kernels().accumulate_f64(src + 8 * i, hi + i, lo + i, n - i);
}

void accumulate_f32(const std::byte* src, double* hi, double* lo, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) two_sum_step(load_f32x4(src + 4 * i), hi + i, lo + i);
  scalar_kernels().accumulate_f32(src + 4 * i, hi + i, lo + i, n - i);
}

void accumulate_bf16(const std::byte* src, double* hi, double* lo, std::size_t n) {
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) two_sum_step(load_bf16x4(src + 2 * i), hi + i, lo + i);
  scalar_kernels().accumulate_bf16(src + 2 * i, hi + i, lo + i, n - i);
}

void finalize_mean(const double* hi, const double* lo, double divisor, double* out,
                   std::size_t n) {
  const __m256d d = _mm256_set1_pd(divisor);
  const __m256d zero = _mm256_setzero_pd();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d h = _mm256_loadu_pd(hi + i);
    const __m256d q = _mm256_div_pd(h, d);
    const __m256d r = _mm256_add_pd(_mm256_fnmadd_pd(q, d, h), _mm256_loadu_pd(lo + i));
    const __m256d c = _mm256_div_pd(r, d);
    const __m256d keep_q =
        _mm256_or_pd(_mm256_cmp_pd(c, zero, _CMP_EQ_OQ), _mm256_cmp_pd(c, c, _CMP_UNORD_Q));
    _mm256_storeu_pd(out + i, _mm256_blendv_pd(_mm256_add_pd(q, c), q, keep_q));
  }
  scalar_kernels().finalize_mean(hi + i, lo + i, divisor, out + i, n - i);
}

}  // namespace

namespace detail {

const KernelTable& avx2_table() noexcept {
  static const KernelTable table{
      Isa::Avx2,      "avx2",         widen_f32,       widen_bf16,    narrow_f32,
      accumulate_f64, accumulate_f32, accumulate_bf16, finalize_mean,
  };
  return table;
}

}  // namespace detail
}  // namespace mapkit::simd
