#include "mapkit/cost_model.hpp"

#include <string>

#include "mapkit/error.hpp"

namespace mapkit {

void CostParams::validate() const {
  const double fields[] = {input_cost_cache_not_hit, input_cost_cache_hit, output_cost,
                           input_tokens, output_tokens};
  for (double f : fields) {
    if (!(f >= 0.0)) throw Error(ErrorCode::DomainError, "cost parameters must be >= 0");
  }
}

double estimate_cost(const CostParams& params, std::int64_t n) {
  params.validate();
  if (n < 1) throw Error(ErrorCode::DomainError, "n must be >= 1, got " + std::to_string(n));
  const double nn = static_cast<double>(n);
  return params.input_cost_cache_not_hit * params.input_tokens +
         params.input_cost_cache_hit * params.input_tokens * (nn - 1.0) +
         params.output_cost * params.output_tokens * nn;
}

AffineCost affine_form(const CostParams& params) {
  params.validate();
  return {params.input_tokens * (params.input_cost_cache_not_hit - params.input_cost_cache_hit),
          params.input_cost_cache_hit * params.input_tokens +
              params.output_cost * params.output_tokens};
}

std::vector<std::pair<std::int64_t, double>> cost_curve(const CostParams& params,
                                                        std::span<const std::int64_t> n_values) {
  if (n_values.empty()) throw Error(ErrorCode::DomainError, "n list must not be empty");
  std::vector<std::pair<std::int64_t, double>> out;
  for (auto n : n_values) out.emplace_back(n, estimate_cost(params, n));
  return out;
}

}  // namespace mapkit
