#pragma once

// Seeded Monte Carlo and exact-enumeration checks of the statistical claims
// behind merging and Pass@k, plus a synthetic training-run generator.
//
// Every routine is a pure function of its config. Work is split across
// threads by trial (or checkpoint), each with its own Philox stream keyed by
// (seed, index), and partial results are combined in index order, so the
// thread count never changes the output.

#include <cstdint>
#include <string>
#include <vector>

#include "mapkit/eval_log.hpp"
#include "mapkit/passk.hpp"

namespace mapkit {

struct ParamNoiseConfig {
  std::int64_t dim = 1000;
  double sigma2 = 1.0;
  std::int64_t window = 5;
  std::int64_t trials = 200;
  std::uint64_t seed = 0;
  unsigned threads = 0;  // 0 = hardware concurrency
};

struct NoiseReductionReport {
  std::int64_t window = 0;
  std::int64_t dim = 0;
  std::int64_t trials = 0;
  double sigma2 = 0.0;
  double empirical_var = 0.0;  // mean square of window-averaged noise over dim x trials
  double predicted_var = 0.0;  // sigma2 / window
  double relative_error = 0.0;
};

/// Throws ConfigError on an invalid config.
[[nodiscard]] NoiseReductionReport validate_noise_reduction(const ParamNoiseConfig& config);

/// Cartesian grid with k > n combinations dropped and duplicates removed.
[[nodiscard]] std::vector<LatentSuccessModel> make_grid(const std::vector<double>& ps,
                                                        const std::vector<std::int64_t>& ns,
                                                        const std::vector<std::int64_t>& ks);

inline constexpr double kUnbiasednessTolerance = 1e-12;

struct UnbiasednessRow {
  LatentSuccessModel model;
  double expectation = 0.0;  // E[q_hat] by enumeration
  double target = 0.0;       // 1 - (1-p)^k
  double abs_deviation = 0.0;
};

struct UnbiasednessReport {
  std::vector<UnbiasednessRow> rows;
  double tolerance = kUnbiasednessTolerance;
  [[nodiscard]] bool pass() const;
};

[[nodiscard]] UnbiasednessReport validate_passk_unbiased(
    const std::vector<LatentSuccessModel>& grid, double tolerance = kUnbiasednessTolerance);

struct DeltaAccuracyRow {
  LatentSuccessModel model;
  double exact_variance = 0.0;
  double delta_variance = 0.0;
  double relative_error = 0.0;  // |exact - delta| / exact; 0 when both vanish
  bool flagged = false;         // relative_error > tolerance
};

[[nodiscard]] std::vector<DeltaAccuracyRow> delta_accuracy_report(
    const std::vector<LatentSuccessModel>& grid, double tolerance);

struct SyntheticRunConfig {
  std::int64_t steps = 54;
  // Latent capability f(t) = asymptote * (1 - exp(-t / time_constant)), t = 1..steps.
  double asymptote = 0.8;
  double time_constant = 18.0;
  // Per-checkpoint perturbation eta_t ~ N(0, sd^2) of the success probability.
  double param_noise_sd = 0.05;
  std::int64_t problems = 200;
  std::int64_t samples_per_problem = 16;
  std::int64_t window = 5;  // merge window applied to eta
  std::int64_t k = 16;
  // Problem j succeeds with probability p_t * u_j, u_j ~ U(difficulty_min, difficulty_max).
  double difficulty_min = 0.02;
  double difficulty_max = 0.3;
  std::string benchmark = "synthetic";
  std::uint64_t seed = 0;
  unsigned threads = 0;

  void validate() const;  // throws ConfigError
};

inline const std::vector<std::string> kProtocols{"raw-greedy", "raw-passk", "merged-greedy",
                                                 "merged-passk"};

struct ProtocolSeries {
  std::string protocol;
  std::vector<double> scores;  // one per checkpoint
};

struct SimulatedRun {
  std::vector<std::int64_t> steps;
  std::vector<double> capability;     // f(t)
  std::vector<double> latent_raw;     // clamp(f(t) + eta_t)
  std::vector<double> latent_merged;  // clamp(f(t) + window mean of eta)
  std::vector<ProtocolSeries> protocols;  // in kProtocols order
  std::vector<OutcomeRecord> records;     // protocol-major, then step, then problem

  [[nodiscard]] const ProtocolSeries& series(const std::string& protocol) const;
  [[nodiscard]] double tau(const std::string& protocol) const;
};

[[nodiscard]] SimulatedRun simulate_run(const SyntheticRunConfig& config);

/// One JSON object per line, in record order.
[[nodiscard]] std::string records_to_jsonl(const std::vector<OutcomeRecord>& records);

/// Checkpoint ids look like "<protocol>/<step>"; the protocol is the part
/// before the first '/', or "default" when there is none.
[[nodiscard]] std::string protocol_of(const std::string& checkpoint_id);

}  // namespace mapkit
