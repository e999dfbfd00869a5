#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "mapkit/error.hpp"
#include "mapkit/format.hpp"

using namespace mapkit;

TEST(Format, RealsRoundTrip) {
  EXPECT_EQ(format_real(15.0), "15.0");
  EXPECT_EQ(format_real(0.0), "0.0");
  EXPECT_EQ(format_real(172.5), "172.5");
  EXPECT_EQ(format_real(0.1), "0.10000000000000001");
  std::mt19937_64 rng(1);
  for (int i = 0; i < 10000; ++i) {
    const double v = std::ldexp(std::uniform_real_distribution<double>(-1, 1)(rng), int(rng() % 200) - 100);
    EXPECT_EQ(std::stod(format_real(v)), v);
  }
}

TEST(Format, IntLists) {
  EXPECT_EQ(parse_int_list("1,2,4"), (std::vector<std::int64_t>{1, 2, 4}));
  EXPECT_EQ(parse_int_list("16"), std::vector<std::int64_t>{16});
  EXPECT_THROW((void)parse_int_list(""), Error);
  EXPECT_THROW((void)parse_int_list("1,,2"), Error);
  EXPECT_THROW((void)parse_int_list("1,x"), Error);
}
