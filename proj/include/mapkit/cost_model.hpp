#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

namespace mapkit {

/// Per-unit prices and token ratios for sampling n completions of one prompt.
/// Defaults are the reference API-style pricing (abstract cost units).
struct CostParams {
  double input_cost_cache_not_hit = 1.25;
  double input_cost_cache_hit = 0.125;
  double output_cost = 10.0;
  double input_tokens = 4.0;
  double output_tokens = 1.0;

  void validate() const;  // DomainError on a negative field
};

/// miss * in_tok + hit * in_tok * (n - 1) + out * out_tok * n
[[nodiscard]] double estimate_cost(const CostParams& params, std::int64_t n);

struct AffineCost {
  double intercept = 0.0;  // in_tok * (miss - hit)
  double slope = 0.0;      // hit * in_tok + out * out_tok
  [[nodiscard]] double at(std::int64_t n) const { return intercept + slope * static_cast<double>(n); }
};

[[nodiscard]] AffineCost affine_form(const CostParams& params);

[[nodiscard]] std::vector<std::pair<std::int64_t, double>> cost_curve(
    const CostParams& params, std::span<const std::int64_t> n_values);

}  // namespace mapkit
