#include "oracles/binomial_exact.hpp"

#include <cmath>
#include <vector>

namespace oracle {

BigInt choose(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  BigInt r = 1;
  for (std::int64_t i = 1; i <= k; ++i) {
    r *= n - k + i;
    r /= i;
  }
  return r;
}

Rational passk_definition(std::int64_t n, std::int64_t s, std::int64_t k) {
  return Rational(1) - Rational(choose(n - s, k), choose(n, k));
}

Rational exact_value(double p) {
  int exp = 0;
  const double m = std::frexp(p, &exp);
  // m * 2^53 is an integer for any double in [0.5, 1).
  Rational r(BigInt(static_cast<std::int64_t>(std::ldexp(m, 53))));
  exp -= 53;
  const BigInt scale = BigInt(1) << std::abs(exp);
  return exp >= 0 ? Rational(r * scale) : Rational(r / scale);
}

namespace {

Rational power(const Rational& x, std::int64_t e) {
  Rational r = 1;
  for (std::int64_t i = 0; i < e; ++i) r *= x;
  return r;
}

// Returns the distribution of q_hat: weight of each S and its estimator value.
void distribution(std::int64_t n, const Rational& p, std::int64_t k, std::vector<Rational>& w,
                  std::vector<Rational>& q) {
  w.assign(n + 1, 0);
  q.assign(n + 1, 0);
  const Rational one_minus = 1 - p;
  for (std::int64_t s = 0; s <= n; ++s) {
    w[s] = Rational(choose(n, s)) * power(p, s) * power(one_minus, n - s);
    q[s] = passk_definition(n, s, k);
  }
}

}  // namespace

Rational expectation(std::int64_t n, const Rational& p, std::int64_t k) {
  std::vector<Rational> w, q;
  distribution(n, p, k, w, q);
  Rational e = 0;
  for (std::int64_t s = 0; s <= n; ++s) e += w[s] * q[s];
  return e;
}

Rational variance(std::int64_t n, const Rational& p, std::int64_t k) {
  std::vector<Rational> w, q;
  distribution(n, p, k, w, q);
  Rational e = 0, e2 = 0;
  for (std::int64_t s = 0; s <= n; ++s) {
    e += w[s] * q[s];
    e2 += w[s] * q[s] * q[s];
  }
  return e2 - e * e;
}

Rational population_passk(const Rational& p, std::int64_t k) { return 1 - power(1 - p, k); }

Rational delta_variance(std::int64_t n, const Rational& p, std::int64_t k) {
  return Rational(k * k) * power(1 - p, 2 * (k - 1)) * p * (1 - p) / n;
}

double to_double(const Rational& r) { return static_cast<double>(r); }

}  // namespace oracle
