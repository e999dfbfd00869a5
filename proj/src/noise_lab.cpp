#include "mapkit/noise_lab.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <set>
#include <thread>
#include <tuple>

#include "mapkit/error.hpp"
#include "mapkit/random.hpp"
#include "mapkit/stability.hpp"

namespace mapkit {
namespace {

// Stream purposes; each (purpose, index) pair is an independent stream.
constexpr std::uint32_t kNoiseTrial = 1;
constexpr std::uint32_t kCheckpointNoise = 2;
constexpr std::uint32_t kDifficulty = 3;
constexpr std::uint32_t kOutcomesBase = 16;

template <typename Fn>
void parallel_for(std::size_t count, unsigned threads, Fn&& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = static_cast<unsigned>(std::min<std::size_t>(threads, std::max<std::size_t>(count, 1)));
  if (threads <= 1) {
    for (std::size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::jthread> pool;
  for (unsigned t = 0; t < threads; ++t) {
    pool.emplace_back([&] {
      for (std::size_t i = next++; i < count; i = next++) fn(i);
    });
  }
}

[[noreturn]] void bad_config(const std::string& what) { throw Error(ErrorCode::ConfigError, what); }

std::string zero_pad(std::int64_t value, int width) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%0*lld", width, static_cast<long long>(value));
  return buf;
}

int digits(std::int64_t value) {
  int d = 1;
  while (value >= 10) {
    value /= 10;
    ++d;
  }
  return d;
}

}  // namespace

NoiseReductionReport validate_noise_reduction(const ParamNoiseConfig& config) {
  if (config.dim < 1) bad_config("dim must be >= 1");
  if (!(config.sigma2 > 0.0)) bad_config("sigma2 must be > 0");
  if (config.window < 1) bad_config("window must be >= 1");
  if (config.trials < 1) bad_config("trials must be >= 1");

  const auto dim = static_cast<std::size_t>(config.dim);
  const double sd = std::sqrt(config.sigma2);
  const double n = static_cast<double>(config.window);
  std::vector<double> trial_sq(static_cast<std::size_t>(config.trials));

  parallel_for(trial_sq.size(), config.threads, [&](std::size_t t) {
    RandomStream rng(config.seed, stream_id(kNoiseTrial, static_cast<std::uint32_t>(t)));
    std::vector<double> sum(dim, 0.0);
    for (std::int64_t member = 0; member < config.window; ++member) {
      for (auto& s : sum) s += sd * rng.normal();
    }
    double sq = 0.0;
    for (double s : sum) {
      const double avg = s / n;
      sq += avg * avg;
    }
    trial_sq[t] = sq;
  });

  double total = 0.0;
  for (double sq : trial_sq) total += sq;

  NoiseReductionReport r;
  r.window = config.window;
  r.dim = config.dim;
  r.trials = config.trials;
  r.sigma2 = config.sigma2;
  r.empirical_var = total / (static_cast<double>(config.dim) * static_cast<double>(config.trials));
  r.predicted_var = config.sigma2 / n;
  r.relative_error = std::abs(r.empirical_var - r.predicted_var) / r.predicted_var;
  return r;
}

std::vector<LatentSuccessModel> make_grid(const std::vector<double>& ps,
                                          const std::vector<std::int64_t>& ns,
                                          const std::vector<std::int64_t>& ks) {
  std::vector<LatentSuccessModel> grid;
  std::set<std::tuple<double, std::int64_t, std::int64_t>> seen;
  for (double p : ps) {
    for (auto n : ns) {
      for (auto k : ks) {
        if (k < 1 || k > n) continue;
        if (seen.emplace(p, n, k).second) grid.push_back({p, n, k});
      }
    }
  }
  return grid;
}

bool UnbiasednessReport::pass() const {
  return std::all_of(rows.begin(), rows.end(),
                     [&](const UnbiasednessRow& r) { return r.abs_deviation <= tolerance; });
}

UnbiasednessReport validate_passk_unbiased(const std::vector<LatentSuccessModel>& grid,
                                           double tolerance) {
  UnbiasednessReport report;
  report.tolerance = tolerance;
  for (const auto& m : grid) {
    UnbiasednessRow row{m, exact_expectation(m), 0.0, 0.0};
    row.target = 1.0 - std::pow(1.0 - m.p, static_cast<double>(m.k));
    row.abs_deviation = std::abs(row.expectation - row.target);
    report.rows.push_back(row);
  }
  return report;
}

std::vector<DeltaAccuracyRow> delta_accuracy_report(const std::vector<LatentSuccessModel>& grid,
                                                    double tolerance) {
  std::vector<DeltaAccuracyRow> rows;
  for (const auto& m : grid) {
    DeltaAccuracyRow row{m, exact_variance(m), variance_delta(m.n, m.p, m.k), 0.0, false};
    if (row.exact_variance > 0.0) {
      row.relative_error = std::abs(row.exact_variance - row.delta_variance) / row.exact_variance;
    } else {
      row.relative_error = row.delta_variance == 0.0 ? 0.0 : INFINITY;
    }
    row.flagged = row.relative_error > tolerance;
    rows.push_back(row);
  }
  return rows;
}

void SyntheticRunConfig::validate() const {
  if (steps < 1) bad_config("steps must be >= 1");
  if (!(asymptote > 0.0 && asymptote <= 1.0)) bad_config("asymptote must lie in (0, 1]");
  if (!(time_constant > 0.0)) bad_config("time_constant must be > 0");
  if (!(param_noise_sd >= 0.0)) bad_config("param_noise_sd must be >= 0");
  if (problems < 1) bad_config("problems must be >= 1");
  if (samples_per_problem < 1) bad_config("samples_per_problem must be >= 1");
  if (window < 1) bad_config("window must be >= 1");
  if (k < 1 || k > samples_per_problem) bad_config("k must lie in [1, samples_per_problem]");
  if (!(difficulty_min >= 0.0 && difficulty_min <= difficulty_max && difficulty_max <= 1.0)) {
    bad_config("difficulty range must satisfy 0 <= min <= max <= 1");
  }
  if (benchmark.empty()) bad_config("benchmark name must not be empty");
}

const ProtocolSeries& SimulatedRun::series(const std::string& protocol) const {
  for (const auto& p : protocols) {
    if (p.protocol == protocol) return p;
  }
  throw Error(ErrorCode::DomainError, "no protocol '" + protocol + "' in run");
}

double SimulatedRun::tau(const std::string& protocol) const {
  const auto& s = series(protocol);
  std::vector<TrajectoryPoint> pts;
  for (std::size_t i = 0; i < steps.size(); ++i) pts.push_back({steps[i], s.scores[i]});
  return kendall_tau(TrajectorySeries(std::move(pts)));
}

SimulatedRun simulate_run(const SyntheticRunConfig& config) {
  config.validate();
  const auto steps = static_cast<std::size_t>(config.steps);
  const auto problems = static_cast<std::size_t>(config.problems);

  SimulatedRun run;
  RandomStream eta_rng(config.seed, stream_id(kCheckpointNoise, 0));
  std::vector<double> eta(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    run.steps.push_back(static_cast<std::int64_t>(t + 1));
    const double time = static_cast<double>(t + 1);
    run.capability.push_back(config.asymptote * (1.0 - std::exp(-time / config.time_constant)));
    eta[t] = config.param_noise_sd * eta_rng.normal();
  }
  for (std::size_t t = 0; t < steps; ++t) {
    // Partial windows at the start of the run.
    const std::size_t first = t + 1 >= static_cast<std::size_t>(config.window)
                                  ? t + 1 - static_cast<std::size_t>(config.window)
                                  : 0;
    double sum = 0.0;
    for (std::size_t i = first; i <= t; ++i) sum += eta[i];
    const double eta_bar = sum / static_cast<double>(t + 1 - first);
    run.latent_raw.push_back(std::clamp(run.capability[t] + eta[t], 0.0, 1.0));
    run.latent_merged.push_back(std::clamp(run.capability[t] + eta_bar, 0.0, 1.0));
  }

  RandomStream difficulty_rng(config.seed, stream_id(kDifficulty, 0));
  std::vector<double> difficulty(problems);
  for (auto& u : difficulty) u = difficulty_rng.uniform(config.difficulty_min, config.difficulty_max);

  const int step_width = std::max(4, digits(config.steps));
  const int problem_width = std::max(4, digits(config.problems - 1));
  std::vector<std::string> problem_ids;
  for (std::size_t j = 0; j < problems; ++j) {
    problem_ids.push_back("p" + zero_pad(static_cast<std::int64_t>(j), problem_width));
  }

  const std::size_t cells = kProtocols.size() * steps;
  std::vector<std::vector<OutcomeRecord>> cell_records(cells);
  std::vector<double> cell_scores(cells);

  parallel_for(cells, config.threads, [&](std::size_t cell) {
    const std::size_t proto = cell / steps;
    const std::size_t t = cell % steps;
    const bool merged = proto >= 2;
    const bool sampled = proto % 2 == 1;
    const double p = merged ? run.latent_merged[t] : run.latent_raw[t];
    const std::int64_t n = sampled ? config.samples_per_problem : 1;

    RandomStream rng(config.seed, stream_id(kOutcomesBase + static_cast<std::uint32_t>(proto),
                                            static_cast<std::uint32_t>(t)));
    OutcomeMatrix matrix;
    matrix.checkpoint_id = kProtocols[proto] + "/" + zero_pad(run.steps[t], step_width);
    matrix.benchmark = config.benchmark;
    matrix.step = run.steps[t];
    matrix.mode = sampled ? DecodeMode::Sampled : DecodeMode::Greedy;
    auto& records = cell_records[cell];
    for (std::size_t j = 0; j < problems; ++j) {
      OutcomeRecord rec;
      rec.checkpoint_id = matrix.checkpoint_id;
      rec.step = run.steps[t];
      rec.benchmark = config.benchmark;
      rec.problem_id = problem_ids[j];
      rec.mode = matrix.mode;
      std::int64_t s = 0;
      for (std::int64_t i = 0; i < n; ++i) {
        const bool ok = rng.bernoulli(p * difficulty[j]);
        rec.outcomes.push_back(ok);
        s += ok;
      }
      matrix.problems.push_back({rec.problem_id, s, n});
      records.push_back(std::move(rec));
    }
    cell_scores[cell] = passk_benchmark(matrix, sampled ? config.k : 1).benchmark_value;
  });

  for (std::size_t proto = 0; proto < kProtocols.size(); ++proto) {
    ProtocolSeries series{kProtocols[proto], {}};
    for (std::size_t t = 0; t < steps; ++t) {
      series.scores.push_back(cell_scores[proto * steps + t]);
      auto& recs = cell_records[proto * steps + t];
      std::move(recs.begin(), recs.end(), std::back_inserter(run.records));
    }
    run.protocols.push_back(std::move(series));
  }
  return run;
}

std::string records_to_jsonl(const std::vector<OutcomeRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    out += serialize_record(r);
    out += '\n';
  }
  return out;
}

std::string protocol_of(const std::string& checkpoint_id) {
  const auto slash = checkpoint_id.find('/');
  return slash == std::string::npos ? std::string("default") : checkpoint_id.substr(0, slash);
}

}  // namespace mapkit
