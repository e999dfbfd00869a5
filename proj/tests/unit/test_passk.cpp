#include <gtest/gtest.h>

#include <cmath>

#include "mapkit/error.hpp"
#include "mapkit/passk.hpp"
#include "oracles/binomial_exact.hpp"

using namespace mapkit;

namespace {

OutcomeMatrix matrix(std::vector<std::pair<std::int64_t, std::int64_t>> sn) {
  OutcomeMatrix m;
  m.checkpoint_id = "c";
  m.benchmark = "b";
  int i = 0;
  for (auto [s, n] : sn) m.problems.push_back({"p" + std::to_string(i++), s, n});
  return m;
}

}  // namespace

TEST(PassK, ProblemExamples) {
  EXPECT_EQ(passk_problem(4, 0, 2), 0.0);
  EXPECT_EQ(passk_problem(10, 8, 4), 1.0);
  EXPECT_NEAR(passk_problem(4, 2, 2), 5.0 / 6.0, 1e-15);
}

TEST(PassK, ProductFormMatchesDefinition) {
  for (std::int64_t n = 1; n <= 30; ++n) {
    for (std::int64_t s = 0; s <= n; ++s) {
      for (std::int64_t k = 1; k <= n; ++k) {
        const double want = oracle::to_double(oracle::passk_definition(n, s, k));
        ASSERT_NEAR(passk_problem(n, s, k), want, 1e-12) << n << "," << s << "," << k;
      }
    }
  }
}

TEST(PassK, ProblemDomain) {
  EXPECT_THROW((void)passk_problem(4, 5, 1), Error);
  EXPECT_THROW((void)passk_problem(4, 1, 0), Error);
  EXPECT_THROW((void)passk_problem(4, -1, 1), Error);
}

TEST(PassK, BenchmarkExamples) {
  EXPECT_NEAR(passk_benchmark(matrix({{2, 4}}), 2).benchmark_value, 5.0 / 6.0, 1e-15);
  const auto all = passk_benchmark(matrix({{4, 4}, {16, 16}}), 4);
  EXPECT_EQ(all.benchmark_value, 1.0);
  EXPECT_EQ(all.variance_estimate, 0.0);
  const auto k1 = passk_benchmark(matrix({{1, 4}, {3, 8}, {0, 2}}), 1);
  EXPECT_NEAR(k1.benchmark_value, (0.25 + 0.375 + 0.0) / 3.0, 1e-15);
}

TEST(PassK, InsufficientSamplesNamesProblems) {
  try {
    (void)passk_benchmark(matrix({{1, 16}, {1, 4}}), 8);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::InsufficientSamples);
    EXPECT_NE(std::string(e.what()).find("p1"), std::string::npos);
  }
}

TEST(PassK, DeltaVarianceExamples) {
  EXPECT_EQ(variance_delta(10, 0.0, 3), 0.0);
  EXPECT_EQ(variance_delta(10, 1.0, 3), 0.0);
  EXPECT_NEAR(variance_delta(20, 0.3, 1), 0.3 * 0.7 / 20, 1e-18);
  const double want = 16 * std::pow(0.7, 6) * 0.21 / 100;
  EXPECT_NEAR(variance_delta(100, 0.3, 4), want, 1e-15);
  EXPECT_LE(std::abs(exact_variance({0.3, 100, 4}) - want) / exact_variance({0.3, 100, 4}), 0.05);
}

TEST(PassK, ExactMomentsExamples) {
  EXPECT_EQ(exact_expectation({0.0, 10, 3}), 0.0);
  EXPECT_NEAR(exact_expectation({0.37, 1, 1}), 0.37, 1e-15);
  EXPECT_NEAR(exact_expectation({0.3, 10, 2}), 0.51, 1e-12);
  EXPECT_EQ(exact_variance({0.0, 10, 2}), 0.0);
  EXPECT_NEAR(exact_variance({0.3, 1, 1}), 0.21, 1e-15);
  const double ev = exact_variance({0.3, 200, 4});
  EXPECT_LE(std::abs(ev - variance_delta(200, 0.3, 4)) / ev, 0.05);
}

TEST(PassK, ExactMomentsAgreeWithRationalOracle) {
  for (double p : {0.05, 0.3, 0.5, 0.93}) {
    for (std::int64_t n : {1, 4, 9, 20}) {
      for (std::int64_t k = 1; k <= n; k += 2) {
        const auto pr = oracle::exact_value(p);
        const double e = oracle::to_double(oracle::expectation(n, pr, k));
        const double v = oracle::to_double(oracle::variance(n, pr, k));
        EXPECT_NEAR(exact_expectation({p, n, k}), e, 1e-13);
        EXPECT_NEAR(exact_variance({p, n, k}), v, 1e-13 + 1e-10 * v);
      }
    }
  }
}

TEST(PassK, VarianceRatioExamples) {
  EXPECT_NEAR(variance_ratio(20, 0.4, 1), 1.0 / 20, 1e-15);
  EXPECT_NEAR(variance_ratio(16, 0.5, 4), 0.015625, 1e-15);
  EXPECT_NEAR(variance_ratio(16, 1e-12, 4), 1.0, 1e-9);
  EXPECT_THROW((void)variance_ratio(16, 0.0, 4), Error);
  EXPECT_THROW((void)variance_ratio(16, 1.0, 4), Error);
}

TEST(PassK, BinomialPmfSumsToOne) {
  for (std::int64_t n : {1, 7, 200, 5000}) {
    for (double p : {0.0, 0.01, 0.5, 0.99, 1.0}) {
      const auto pmf = binomial_pmf(n, p);
      ASSERT_EQ(pmf.size(), static_cast<std::size_t>(n + 1));
      double sum = 0;
      for (double x : pmf) {
        EXPECT_GE(x, 0.0);
        sum += x;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
  const auto pmf = binomial_pmf(4, 0.5);
  EXPECT_NEAR(pmf[2], 6.0 / 16.0, 1e-15);
}
