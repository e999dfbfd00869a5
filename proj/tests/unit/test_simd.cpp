#include <gtest/gtest.h>

#include <cmath>
#include <cstring>
#include <limits>
#include <random>

#include "mapkit/simd/kernels.hpp"
#include "support/fixtures.hpp"

using namespace mapkit::simd;

namespace {

bool same_bits(double a, double b) {
  if (std::isnan(a) && std::isnan(b)) return true;
  return testing_support::bits(a) == testing_support::bits(b);
}

std::vector<double> sample(std::mt19937_64& rng, std::size_t n) {
  static const double specials[] = {0.0,
                                    -0.0,
                                    std::numeric_limits<double>::infinity(),
                                    -std::numeric_limits<double>::infinity(),
                                    std::numeric_limits<double>::quiet_NaN(),
                                    std::numeric_limits<double>::denorm_min(),
                                    -std::numeric_limits<double>::denorm_min() * 3,
                                    std::numeric_limits<double>::max(),
                                    std::numeric_limits<double>::min(),
                                    1e300,
                                    -1e-300};
  std::vector<double> v(n);
  for (auto& x : v) {
    x = rng() % 8 == 0 ? specials[rng() % std::size(specials)] : testing_support::random_value(rng);
  }
  return v;
}

template <typename T>
std::vector<std::byte> as_bytes(const std::vector<T>& v) {
  std::vector<std::byte> b(v.size() * sizeof(T));
  if (!v.empty()) std::memcpy(b.data(), v.data(), b.size());
  return b;
}

std::vector<const KernelTable*> vector_tables() {
  std::vector<const KernelTable*> out;
  for (const auto* t : available_kernels()) {
    if (t->isa != Isa::Scalar) out.push_back(t);
  }
  return out;
}

}  // namespace

TEST(SimdDispatch, ScalarAlwaysAvailable) {
  const auto all = available_kernels();
  ASSERT_FALSE(all.empty());
  EXPECT_EQ(all.front()->isa, Isa::Scalar);
#if defined(MAPKIT_HAVE_AVX2_KERNELS)
  if (__builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma")) {
    EXPECT_NE(avx2_kernels(), nullptr);
    EXPECT_EQ(all.size(), 2u);
  }
#endif
  const char* forced = std::getenv("MAPKIT_ISA");
  if (forced && std::string(forced) == "scalar") {
    EXPECT_EQ(active_kernels().isa, Isa::Scalar);
  }
}

TEST(SimdEquivalence, ConversionsMatchScalar) {
  const auto& ref = scalar_kernels();
  std::mt19937_64 rng(11);
  for (const auto* t : vector_tables()) {
    SCOPED_TRACE(std::string(t->name));
    for (std::size_t n = 0; n < 70; ++n) {
      const auto values = sample(rng, n);
      std::vector<float> f(n);
      std::vector<std::uint16_t> h(n);
      for (std::size_t i = 0; i < n; ++i) {
        f[i] = static_cast<float>(values[i]);
        h[i] = static_cast<std::uint16_t>(rng());
      }
      std::vector<double> a(n), b(n);
      ref.widen_f32(as_bytes(f).data(), a.data(), n);
      t->widen_f32(as_bytes(f).data(), b.data(), n);
      for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(same_bits(a[i], b[i])) << "f32 " << i;
      ref.widen_bf16(as_bytes(h).data(), a.data(), n);
      t->widen_bf16(as_bytes(h).data(), b.data(), n);
      for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(same_bits(a[i], b[i])) << "bf16 " << i;

      std::vector<std::byte> na(n * 4), nb(n * 4);
      ref.narrow_f32(values.data(), na.data(), n);
      t->narrow_f32(values.data(), nb.data(), n);
      for (std::size_t i = 0; i < n; ++i) {
        float x, y;
        std::memcpy(&x, na.data() + 4 * i, 4);
        std::memcpy(&y, nb.data() + 4 * i, 4);
        ASSERT_TRUE(same_bits(x, y)) << "narrow " << i;
      }
    }
  }
}

TEST(SimdEquivalence, AccumulateAndFinalizeMatchScalar) {
  const auto& ref = scalar_kernels();
  std::mt19937_64 rng(12);
  for (const auto* t : vector_tables()) {
    SCOPED_TRACE(std::string(t->name));
    for (std::size_t n : {0u, 1u, 3u, 4u, 5u, 7u, 8u, 9u, 31u, 64u, 67u, 1001u}) {
      for (int members = 1; members <= 6; ++members) {
        std::vector<double> hi_a = sample(rng, n), lo_a(n, 0.0);
        auto hi_b = hi_a, lo_b = lo_a;
        for (int m = 1; m < members; ++m) {
          const auto d = sample(rng, n);
          std::vector<float> f(n);
          std::vector<std::uint16_t> h(n);
          for (std::size_t i = 0; i < n; ++i) {
            f[i] = static_cast<float>(d[i]);
            h[i] = static_cast<std::uint16_t>(rng());
          }
          switch (m % 3) {
            case 0:
              ref.accumulate_f64(as_bytes(d).data(), hi_a.data(), lo_a.data(), n);
              t->accumulate_f64(as_bytes(d).data(), hi_b.data(), lo_b.data(), n);
              break;
            case 1:
              ref.accumulate_f32(as_bytes(f).data(), hi_a.data(), lo_a.data(), n);
              t->accumulate_f32(as_bytes(f).data(), hi_b.data(), lo_b.data(), n);
              break;
            default:
              ref.accumulate_bf16(as_bytes(h).data(), hi_a.data(), lo_a.data(), n);
              t->accumulate_bf16(as_bytes(h).data(), hi_b.data(), lo_b.data(), n);
          }
        }
        for (std::size_t i = 0; i < n; ++i) {
          ASSERT_TRUE(same_bits(hi_a[i], hi_b[i])) << "hi " << i;
          ASSERT_TRUE(same_bits(lo_a[i], lo_b[i])) << "lo " << i;
        }
        std::vector<double> out_a(n), out_b(n);
        ref.finalize_mean(hi_a.data(), lo_a.data(), members, out_a.data(), n);
        t->finalize_mean(hi_b.data(), lo_b.data(), members, out_b.data(), n);
        for (std::size_t i = 0; i < n; ++i) ASSERT_TRUE(same_bits(out_a[i], out_b[i])) << "mean " << i;
      }
    }
  }
}

TEST(SimdScalar, FinalizeIsCorrectlyRoundedForRepeatedValue) {
  // x + x + x divided by 3 must return x even where the plain quotient does not.
  const auto& k = scalar_kernels();
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 10000; ++trial) {
    const double x = testing_support::random_value(rng);
    for (int members : {3, 5, 6, 7, 11}) {
      double hi = x, lo = 0.0;
      for (int m = 1; m < members; ++m) {
        k.accumulate_f64(reinterpret_cast<const std::byte*>(&x), &hi, &lo, 1);
      }
      double out;
      k.finalize_mean(&hi, &lo, members, &out, 1);
      ASSERT_EQ(testing_support::bits(out), testing_support::bits(x)) << x << " x" << members;
    }
  }
}
