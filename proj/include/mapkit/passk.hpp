#pragma once

// Unbiased Pass@k estimation and the exact / first-order variance of the
// estimator under a Binomial(n, p) success count.

#include <cstdint>
#include <string>
#include <vector>

#include "mapkit/eval_log.hpp"

namespace mapkit {

inline const std::vector<std::int64_t> kDefaultKGrid{1, 2, 4, 8, 16};
inline constexpr std::int64_t kDefaultSamples = 16;

struct ProblemEstimate {
  std::string problem_id;
  double value = 0.0;
};

struct PassKEstimate {
  std::int64_t k = 1;
  double benchmark_value = 0.0;  // mean of per_problem, summed in problem-id order
  std::vector<ProblemEstimate> per_problem;
  double variance_estimate = 0.0;  // sum of per-problem delta variances / M^2
};

struct LatentSuccessModel {
  double p = 0.0;
  std::int64_t n = 1;
  std::int64_t k = 1;
};

/// 1 - C(n-S, k) / C(n, k), evaluated as 1 - prod_{i=n-S+1}^{n} (1 - k/i).
/// Exactly 1 when n - S < k. Throws DomainError.
[[nodiscard]] double passk_problem(std::int64_t n, std::int64_t s, std::int64_t k);

/// Throws InsufficientSamples listing every problem with n < k.
[[nodiscard]] PassKEstimate passk_benchmark(const OutcomeMatrix& matrix, std::int64_t k);

/// k^2 (1-p)^(2(k-1)) p (1-p) / n.
[[nodiscard]] double variance_delta(std::int64_t n, double p, std::int64_t k);

/// E[q_hat] by enumerating S ~ Binomial(n, p); n <= 10^4.
[[nodiscard]] double exact_expectation(const LatentSuccessModel& model);
/// Var[q_hat] by the same enumeration.
[[nodiscard]] double exact_variance(const LatentSuccessModel& model);

/// k^2 (1-p)^(2(k-1)) / n, the estimator variance relative to one Bernoulli
/// draw. Undefined (DomainError) at p = 0 or 1.
[[nodiscard]] double variance_ratio(std::int64_t n, double p, std::int64_t k);

/// Binomial(n, p) probabilities for S = 0..n.
[[nodiscard]] std::vector<double> binomial_pmf(std::int64_t n, double p);

}  // namespace mapkit
