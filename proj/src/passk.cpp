#include "mapkit/passk.hpp"

#include <cmath>

#include "mapkit/error.hpp"

namespace mapkit {
namespace {

constexpr std::int64_t kMaxEnumeration = 10'000;

void check_nk(std::int64_t n, std::int64_t k) {
  if (n < 1) throw Error(ErrorCode::DomainError, "n must be >= 1, got " + std::to_string(n));
  if (k < 1 || k > n) {
    throw Error(ErrorCode::DomainError,
                "k must lie in [1, n] (n=" + std::to_string(n) + ", k=" + std::to_string(k) + ")");
  }
}

void check_p(double p) {
  if (!(p >= 0.0 && p <= 1.0)) {
    throw Error(ErrorCode::DomainError, "p must lie in [0, 1]");
  }
}

void check_model(const LatentSuccessModel& m) {
  check_nk(m.n, m.k);
  check_p(m.p);
  if (m.n > kMaxEnumeration) {
    throw Error(ErrorCode::DomainError, "n too large to enumerate (max 10^4)");
  }
}

// C(n-S, k) / C(n, k), the probability that k draws are all failures.
double all_fail_ratio(std::int64_t n, std::int64_t s, std::int64_t k) {
  if (n - s < k) return 0.0;
  double prod = 1.0;
  for (std::int64_t i = n - s + 1; i <= n; ++i) {
    prod *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  }
  return prod;
}

}  // namespace

double passk_problem(std::int64_t n, std::int64_t s, std::int64_t k) {
  check_nk(n, k);
  if (s < 0 || s > n) {
    throw Error(ErrorCode::DomainError, "S must lie in [0, n] (n=" + std::to_string(n) +
                                            ", S=" + std::to_string(s) + ")");
  }
  if (n - s < k) return 1.0;
  return 1.0 - all_fail_ratio(n, s, k);
}

PassKEstimate passk_benchmark(const OutcomeMatrix& matrix, std::int64_t k) {
  if (k < 1) throw Error(ErrorCode::DomainError, "k must be >= 1");
  std::string short_problems;
  for (const auto& p : matrix.problems) {
    if (p.samples < k) {
      if (!short_problems.empty()) short_problems += ", ";
      short_problems += p.problem_id + " (n=" + std::to_string(p.samples) + ")";
    }
  }
  if (!short_problems.empty()) {
    throw Error(ErrorCode::InsufficientSamples,
                "k=" + std::to_string(k) + " exceeds the sample count of: " + short_problems);
  }
  if (matrix.problems.empty()) {
    throw Error(ErrorCode::NoMatchingRecords, "outcome matrix has no problems");
  }

  PassKEstimate est;
  est.k = k;
  double sum = 0.0;
  double var_sum = 0.0;
  for (const auto& p : matrix.problems) {
    const double q = passk_problem(p.samples, p.successes, k);
    est.per_problem.push_back({p.problem_id, q});
    sum += q;
    const double p_hat = static_cast<double>(p.successes) / static_cast<double>(p.samples);
    var_sum += variance_delta(p.samples, p_hat, k);
  }
  const auto m = static_cast<double>(matrix.problems.size());
  est.benchmark_value = sum / m;
  est.variance_estimate = var_sum / (m * m);
  return est;
}

double variance_delta(std::int64_t n, double p, std::int64_t k) {
  check_nk(n, k);
  check_p(p);
  const double kk = static_cast<double>(k);
  return kk * kk * std::pow(1.0 - p, 2.0 * (kk - 1.0)) * p * (1.0 - p) / static_cast<double>(n);
}

std::vector<double> binomial_pmf(std::int64_t n, double p) {
  check_p(p);
  if (n < 0) throw Error(ErrorCode::DomainError, "n must be >= 0");
  std::vector<double> pmf(static_cast<std::size_t>(n) + 1, 0.0);
  if (p == 0.0) {
    pmf.front() = 1.0;
    return pmf;
  }
  if (p == 1.0) {
    pmf.back() = 1.0;
    return pmf;
  }
  // Unnormalised ratios walked outwards from the mode keep every term in
  // range; normalising at the end absorbs the scale.
  const auto mode = static_cast<std::int64_t>(std::floor(static_cast<double>(n + 1) * p));
  const auto top = std::min(mode, n);
  const double odds = p / (1.0 - p);
  pmf[static_cast<std::size_t>(top)] = 1.0;
  for (std::int64_t s = top; s < n; ++s) {
    pmf[s + 1] = pmf[s] * odds * static_cast<double>(n - s) / static_cast<double>(s + 1);
  }
  for (std::int64_t s = top; s > 0; --s) {
    pmf[s - 1] = pmf[s] / odds * static_cast<double>(s) / static_cast<double>(n - s + 1);
  }
  double total = 0.0;
  for (double v : pmf) total += v;
  for (double& v : pmf) v /= total;
  return pmf;
}

double exact_expectation(const LatentSuccessModel& model) {
  check_model(model);
  const auto pmf = binomial_pmf(model.n, model.p);
  // E[1 - q_hat] first; complementing once avoids summing terms near 1.
  double fail = 0.0;
  for (std::int64_t s = 0; s <= model.n; ++s) fail += pmf[s] * all_fail_ratio(model.n, s, model.k);
  return 1.0 - fail;
}

double exact_variance(const LatentSuccessModel& model) {
  check_model(model);
  const auto pmf = binomial_pmf(model.n, model.p);
  std::vector<double> ratio(pmf.size());
  double mean = 0.0;
  for (std::int64_t s = 0; s <= model.n; ++s) {
    ratio[s] = all_fail_ratio(model.n, s, model.k);
    mean += pmf[s] * ratio[s];
  }
  // Var(q_hat) = Var(1 - q_hat); two-pass form keeps tiny variances accurate.
  double var = 0.0;
  for (std::size_t s = 0; s < pmf.size(); ++s) {
    const double d = ratio[s] - mean;
    var += pmf[s] * d * d;
  }
  return var;
}

double variance_ratio(std::int64_t n, double p, std::int64_t k) {
  check_nk(n, k);
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::DomainError, "variance ratio is undefined unless 0 < p < 1");
  }
  const double kk = static_cast<double>(k);
  return kk * kk * std::pow(1.0 - p, 2.0 * (kk - 1.0)) / static_cast<double>(n);
}

}  // namespace mapkit
