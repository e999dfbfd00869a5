#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>

#include "kernels_internal.hpp"
#include "mapkit/simd/kernels.hpp"

namespace mapkit::simd {

static_assert(std::endian::native == std::endian::little,
              "tensor payloads are decoded in place as little-endian");

namespace {

inline double load_f64(const std::byte* p) {
  double v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

inline double load_f32(const std::byte* p) {
  float v;
  std::memcpy(&v, p, sizeof v);
  return static_cast<double>(v);
}

inline double load_bf16(const std::byte* p) {
  std::uint16_t bits;
  std::memcpy(&bits, p, sizeof bits);
  return static_cast<double>(std::bit_cast<float>(static_cast<std::uint32_t>(bits) << 16));
}

inline void two_sum_step(double x, double& hi, double& lo) {
  const double t = hi + x;
  const double bp = t - hi;
  const double err = (hi - (t - bp)) + (x - bp);
  hi = t;
  lo += err;
}

void widen_f32(const std::byte* src, double* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = load_f32(src + 4 * i);
}

void widen_bf16(const std::byte* src, double* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) dst[i] = load_bf16(src + 2 * i);
}

void narrow_f32(const double* src, std::byte* dst, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const float v = static_cast<float>(src[i]);
    std::memcpy(dst + 4 * i, &v, sizeof v);
  }
}

void accumulate_f64(const std::byte* src, double* hi, double* lo, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) two_sum_step(load_f64(src + 8 * i), hi[i], lo[i]);
}

void accumulate_f32(const std::byte* src, double* hi, double* lo, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) two_sum_step(load_f32(src + 4 * i), hi[i], lo[i]);
}

void accumulate_bf16(const std::byte* src, double* hi, double* lo, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) two_sum_step(load_bf16(src + 2 * i), hi[i], lo[i]);
}

void finalize_mean(const double* hi, const double* lo, double divisor, double* out,
                   std::size_t n) {
  for (std::size_t i = 0; i < n; ++i) {
    const double q = hi[i] / divisor;
    const double r = std::fma(-q, divisor, hi[i]) + lo[i];
    const double c = r / divisor;
    out[i] = (c == 0.0 || std::isnan(c)) ? q : q + c;
  }
}

}  // namespace

const KernelTable& scalar_kernels() noexcept {
  static const KernelTable table{
      Isa::Scalar,    "scalar",       widen_f32,       widen_bf16,    narrow_f32,
      accumulate_f64, accumulate_f32, accumulate_bf16, finalize_mean,
  };
  return table;
}

}  // namespace mapkit::simd
