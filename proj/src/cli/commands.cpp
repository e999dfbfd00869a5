#include "commands.hpp"

#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <map>
#include <set>

#include <json.hpp>

#include "mapkit/cost_model.hpp"
#include "mapkit/error.hpp"
#include "mapkit/eval_log.hpp"
#include "mapkit/format.hpp"
#include "mapkit/merge_engine.hpp"
#include "mapkit/noise_lab.hpp"
#include "mapkit/passk.hpp"
#include "mapkit/report.hpp"
#include "mapkit/stability.hpp"

namespace mapkit::cli {
namespace {

using json = nlohmann::json;

[[noreturn]] void config_error(const std::string& what) {
  throw Error(ErrorCode::ConfigError, what);
}

json load_config(const std::optional<std::filesystem::path>& path) {
  if (!path) return json::object();
  try {
    auto j = json::parse(read_text_file(*path));
    if (!j.is_object()) config_error(path->string() + ": config must be a JSON object");
    return j;
  } catch (const json::exception& e) {
    config_error(path->string() + ": " + e.what());
  }
}

// Reads known keys out of a config object; leftovers are reported as typos.
class ConfigReader {
 public:
  explicit ConfigReader(json j) : j_(std::move(j)) {}

  void read(const char* key, double& v) {
    if (auto* x = take(key)) {
      if (!x->is_number()) config_error(std::string("'") + key + "' must be a number");
      v = x->get<double>();
    }
  }
  void read(const char* key, std::int64_t& v) {
    if (auto* x = take(key)) {
      if (!x->is_number_integer()) config_error(std::string("'") + key + "' must be an integer");
      v = x->get<std::int64_t>();
    }
  }
  void read(const char* key, std::uint64_t& v) {
    if (auto* x = take(key)) {
      if (!x->is_number_unsigned()) {
        config_error(std::string("'") + key + "' must be a non-negative integer");
      }
      v = x->get<std::uint64_t>();
    }
  }
  void read(const char* key, unsigned& v) {
    std::uint64_t wide = v;
    read(key, wide);
    v = static_cast<unsigned>(wide);
  }
  void read(const char* key, std::string& v) {
    if (auto* x = take(key)) {
      if (!x->is_string()) config_error(std::string("'") + key + "' must be a string");
      v = x->get<std::string>();
    }
  }
  // Accepts a scalar or an array.
  template <typename T>
  void read_list(const char* key, std::vector<T>& v) {
    if (auto* x = take(key)) {
      const json arr = x->is_array() ? *x : json::array({*x});
      v.clear();
      for (const auto& e : arr) {
        if (!e.is_number() || (std::is_integral_v<T> && !e.is_number_integer())) {
          config_error(std::string("'") + key + "' entries must be numbers");
        }
        v.push_back(e.get<T>());
      }
    }
  }
  bool has(const char* key) const { return j_.contains(key); }
  void finish() const {
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) config_error("unknown config key '" + key + "'");
    }
  }

 private:
  const json* take(const char* key) {
    used_.insert(key);
    return j_.contains(key) ? &j_[key] : nullptr;
  }
  json j_;
  std::set<std::string> used_;
};

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& flag, ConfigReader& config) {
  std::uint64_t seed = 0;
  if (const char* env = std::getenv("MAP_SEED")) {
    const std::string_view s(env);
    const auto res = std::from_chars(s.data(), s.data() + s.size(), seed);
    if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
      config_error("MAP_SEED must be a non-negative integer");
    }
  }
  config.read("seed", seed);
  if (flag) seed = *flag;
  return seed;
}

std::vector<CheckpointRef> checkpoint_series(const std::vector<std::filesystem::path>& paths) {
  std::vector<CheckpointRef> series;
  std::size_t with_step = 0;
  for (const auto& p : paths) {
    const auto meta = peek_meta(p);
    if (meta.step) ++with_step;
    series.push_back({p, meta.step.value_or(0)});
  }
  if (with_step == 0) {
    // No recorded steps: command-line order is chronological order.
    for (std::size_t i = 0; i < series.size(); ++i) series[i].step = static_cast<std::int64_t>(i + 1);
  } else if (with_step != series.size()) {
    throw Error(ErrorCode::InvalidSeries, "some checkpoints record meta.step and some do not");
  }
  std::stable_sort(series.begin(), series.end(),
                   [](const auto& a, const auto& b) { return a.step < b.step; });
  return series;
}

std::string join_steps(const std::vector<std::int64_t>& steps) {
  std::string s;
  for (std::size_t i = 0; i < steps.size(); ++i) s += (i ? ";" : "") + std::to_string(steps[i]);
  return s;
}

MergeOptions merge_options(const MergeArgs& args) {
  MergeOptions o;
  o.history = args.partial ? HistoryPolicy::Partial : HistoryPolicy::Strict;
  o.threads = args.threads;
  return o;
}

double parse_real(const std::string& cell, const std::string& what) {
  double v = 0.0;
  const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (cell.empty() || res.ec != std::errc{} || res.ptr != cell.data() + cell.size()) {
    throw Error(ErrorCode::SchemaMismatch, what + ": '" + cell + "' is not a number");
  }
  return v;
}

void emit_warnings(const GroupResult& g, std::ostream& err) {
  for (auto w : g.warnings) {
    if (w == GroupWarning::RaggedSampleCounts) {
      err << "WARNING[RaggedSampleCounts]: checkpoint '" << g.matrix.checkpoint_id
          << "' on '" << g.matrix.benchmark << "' has differing sample counts\n";
    }
  }
}

void emit_csv(const std::filesystem::path& dir, const std::string& name, const std::string& text) {
  write_file_atomic(dir / name, text);
}

}  // namespace

void cmd_merge(const MergeArgs& args, std::ostream& out) {
  const auto series = checkpoint_series(args.checkpoints);
  const auto anchor = args.anchor.value_or(series.back().step);
  const auto window = plan_window(series, anchor, args.window, merge_options(args).history);
  const auto merged = merge(window, merge_options(args));
  save_archive(args.out, merged.archive);
  out << "anchor,window,member_steps,path\n"
      << anchor << "," << merged.provenance.window << ","
      << join_steps(merged.provenance.member_steps) << "," << args.out.generic_string() << "\n";
}

void cmd_rolling_merge(const MergeArgs& args, std::ostream& out) {
  const auto series = checkpoint_series(args.checkpoints);
  const auto anchors = parse_int_list(args.every);
  const auto merged = rolling_merge(series, args.window, anchors, merge_options(args));
  std::filesystem::create_directories(args.out);
  out << "anchor,window,member_steps,path\n";
  for (std::size_t i = 0; i < merged.size(); ++i) {
    const auto path = args.out / ("merged-" + std::to_string(anchors[i]) + ".mapckpt");
    save_archive(path, merged[i].archive);
    out << anchors[i] << "," << merged[i].provenance.window << ","
        << join_steps(merged[i].provenance.member_steps) << "," << path.generic_string() << "\n";
  }
}

void cmd_passk(const PassKArgs& args, std::ostream& out, std::ostream& err) {
  const auto dataset = ingest_jsonl(args.log);
  const auto ks = parse_int_list(args.k_list);
  std::vector<std::string> ids;
  if (args.checkpoint) {
    ids.push_back(*args.checkpoint);
  } else {
    ids = dataset.checkpoints(args.benchmark);
    if (ids.empty()) {
      throw Error(ErrorCode::NoMatchingRecords, "no records for benchmark '" + args.benchmark + "'");
    }
  }
  std::string csv = "checkpoint,benchmark,k,value,variance\n";
  for (const auto& id : ids) {
    const auto g = group(dataset, id, args.benchmark);
    emit_warnings(g, err);
    for (auto k : ks) {
      const auto est = passk_benchmark(g.matrix, k);
      csv += id + "," + args.benchmark + "," + std::to_string(k) + "," +
             format_real(est.benchmark_value) + "," + format_real(est.variance_estimate) + "\n";
    }
  }
  out << csv;
}

void cmd_trajectory(const TrajectoryArgs& args, std::ostream& out, std::ostream& err) {
  if (args.metric != "passk" && args.metric != "mean") {
    throw Error(ErrorCode::UsageError, "--metric must be 'passk' or 'mean'");
  }
  const auto dataset = ingest_jsonl(args.log);
  std::vector<std::string> benchmarks;
  if (args.benchmark) {
    benchmarks.push_back(*args.benchmark);
  } else {
    benchmarks = dataset.benchmarks();
  }
  std::string csv = args.with_tau_b ? "benchmark,protocol,tau,tau_b\n" : "benchmark,protocol,tau\n";
  for (const auto& b : benchmarks) {
    const auto ids = dataset.checkpoints(b);
    if (ids.empty()) throw Error(ErrorCode::NoMatchingRecords, "no records for benchmark '" + b + "'");
    std::map<std::string, std::vector<TrajectoryPoint>> by_protocol;
    for (const auto& id : ids) {
      const auto g = group(dataset, id, b);
      emit_warnings(g, err);
      // Greedy logs carry one sample per problem, so they are scored as Pass@1.
      const std::int64_t k =
          args.metric == "mean" || g.matrix.mode == DecodeMode::Greedy ? 1 : args.k;
      by_protocol[protocol_of(id)].push_back(
          {g.matrix.step, passk_benchmark(g.matrix, k).benchmark_value});
    }
    for (auto& [protocol, points] : by_protocol) {
      const TrajectorySeries series(std::move(points));
      csv += b + "," + protocol + "," + format_real(kendall_tau(series));
      if (args.with_tau_b) csv += "," + format_real(kendall_tau_b(series));
      csv += "\n";
    }
  }
  out << csv;
}

void cmd_prr(const PrrArgs& args, std::ostream& out) {
  const auto source = args.table.generic_string();
  const auto doc = parse_csv(read_text_file(args.table), source);
  if (doc.header != std::vector<std::string>{"model", "score_pt", "score_sft"}) {
    throw Error(ErrorCode::SchemaMismatch, source + ": expected header model,score_pt,score_sft");
  }
  std::vector<RankEntry> entries;
  for (const auto& row : doc.rows) {
    entries.push_back({row[0], parse_real(row[1], source), parse_real(row[2], source)});
  }
  const RankTable table(entries);
  const auto r = prr_detail(table);
  if (args.pairs_out) {
    std::string csv = "model,score_pt,score_sft,rank_pt,rank_sft\n";
    for (std::size_t i = 0; i < entries.size(); ++i) {
      csv += entries[i].model_id + "," + format_real(entries[i].score_pt) + "," +
             format_real(entries[i].score_sft) + "," + format_real(r.rank_pt[i]) + "," +
             format_real(r.rank_sft[i]) + "\n";
    }
    write_file_atomic(*args.pairs_out, csv);
  }
  out << "models,pairs,reversed,prr\n"
      << entries.size() << "," << r.pairs << "," << r.reversed << "," << format_real(r.rate)
      << "\n";
}

void cmd_simulate(const SimulateArgs& args, std::ostream& out) {
  ConfigReader config(load_config(args.config));
  std::filesystem::create_directories(args.out);

  if (args.mode == "noise-reduction") {
    ParamNoiseConfig base;
    std::vector<std::int64_t> windows{2, 5, 10};
    config.read("dim", base.dim);
    config.read("sigma2", base.sigma2);
    config.read("trials", base.trials);
    config.read_list("window", windows);
    config.read("threads", base.threads);
    base.seed = resolve_seed(args.seed, config);
    if (args.threads) base.threads = *args.threads;
    config.finish();

    std::string csv = "window,dim,trials,sigma2,empirical_var,predicted_var,relative_error\n";
    for (auto w : windows) {
      auto c = base;
      c.window = w;
      const auto r = validate_noise_reduction(c);
      csv += std::to_string(r.window) + "," + std::to_string(r.dim) + "," +
             std::to_string(r.trials) + "," + format_real(r.sigma2) + "," +
             format_real(r.empirical_var) + "," + format_real(r.predicted_var) + "," +
             format_real(r.relative_error) + "\n";
      out << "window " << r.window << ": empirical variance " << format_real(r.empirical_var)
          << ", predicted " << format_real(r.predicted_var) << ", relative error "
          << format_real(r.relative_error) << "\n";
    }
    emit_csv(args.out, "noise_reduction.csv", csv);
  } else if (args.mode == "unbiased" || args.mode == "delta") {
    const bool delta = args.mode == "delta";
    std::vector<double> ps = delta ? std::vector<double>{0.1, 0.3, 0.5, 0.7, 0.9}
                                   : std::vector<double>{0.05, 0.1, 0.3, 0.5, 0.7, 0.95};
    std::vector<std::int64_t> ns = delta ? std::vector<std::int64_t>{200}
                                         : std::vector<std::int64_t>{4, 10, 50};
    std::vector<std::int64_t> ks{1, 2, 4, 8};
    double tolerance = delta ? 0.05 : kUnbiasednessTolerance;
    config.read_list("p", ps);
    config.read_list("n", ns);
    config.read_list("k", ks);
    config.read("tolerance", tolerance);
    resolve_seed(args.seed, config);  // accepted for a uniform interface; unused
    config.finish();
    const auto grid = make_grid(ps, ns, ks);

    if (!delta) {
      const auto report = validate_passk_unbiased(grid, tolerance);
      std::string csv = "n,p,k,expectation,target,abs_deviation,pass\n";
      for (const auto& r : report.rows) {
        csv += std::to_string(r.model.n) + "," + format_real(r.model.p) + "," +
               std::to_string(r.model.k) + "," + format_real(r.expectation) + "," +
               format_real(r.target) + "," + format_real(r.abs_deviation) + "," +
               (r.abs_deviation <= tolerance ? "1" : "0") + "\n";
      }
      emit_csv(args.out, "unbiased.csv", csv);
      out << report.rows.size() << " grid points, tolerance " << format_real(tolerance) << ": "
          << (report.pass() ? "PASS" : "FAIL") << "\n";
    } else {
      const auto rows = delta_accuracy_report(grid, tolerance);
      std::string csv = "n,p,k,exact_variance,delta_variance,relative_error,flagged\n";
      std::size_t flagged = 0;
      for (const auto& r : rows) {
        flagged += r.flagged;
        csv += std::to_string(r.model.n) + "," + format_real(r.model.p) + "," +
               std::to_string(r.model.k) + "," + format_real(r.exact_variance) + "," +
               format_real(r.delta_variance) + "," + format_real(r.relative_error) + "," +
               (r.flagged ? "1" : "0") + "\n";
      }
      emit_csv(args.out, "delta.csv", csv);
      out << rows.size() << " grid points, " << flagged << " above relative tolerance "
          << format_real(tolerance) << "\n";
    }
  } else if (args.mode == "run") {
    SyntheticRunConfig c;
    config.read("steps", c.steps);
    config.read("asymptote", c.asymptote);
    config.read("time_constant", c.time_constant);
    config.read("param_noise_sd", c.param_noise_sd);
    config.read("problems", c.problems);
    config.read("samples_per_problem", c.samples_per_problem);
    config.read("window", c.window);
    config.read("k", c.k);
    config.read("difficulty_min", c.difficulty_min);
    config.read("difficulty_max", c.difficulty_max);
    config.read("benchmark", c.benchmark);
    config.read("threads", c.threads);
    c.seed = resolve_seed(args.seed, config);
    if (args.threads) c.threads = *args.threads;
    config.finish();

    const auto run = simulate_run(c);
    emit_csv(args.out, "run.jsonl", records_to_jsonl(run.records));

    std::string scores = "step,protocol,score\n";
    for (const auto& s : run.protocols) {
      for (std::size_t t = 0; t < run.steps.size(); ++t) {
        scores += std::to_string(run.steps[t]) + "," + s.protocol + "," + format_real(s.scores[t]) + "\n";
      }
    }
    emit_csv(args.out, "scores.csv", scores);

    std::string latent = "step,capability,latent_raw,latent_merged\n";
    for (std::size_t t = 0; t < run.steps.size(); ++t) {
      latent += std::to_string(run.steps[t]) + "," + format_real(run.capability[t]) + "," +
                format_real(run.latent_raw[t]) + "," + format_real(run.latent_merged[t]) + "\n";
    }
    emit_csv(args.out, "latent.csv", latent);

    std::string tau = "benchmark,protocol,tau\n";
    out << "seed " << c.seed << ", " << run.steps.size() << " checkpoints, " << c.problems
        << " problems\n";
    // Rows sorted by protocol name to match `trajectory` output.
    std::map<std::string, double> taus;
    if (run.steps.size() >= 2) {
      for (const auto& p : kProtocols) taus[p] = run.tau(p);
    }
    for (const auto& [p, t] : taus) {
      tau += c.benchmark + "," + p + "," + format_real(t) + "\n";
      out << "  tau[" << p << "] = " << format_real(t) << "\n";
    }
    emit_csv(args.out, "tau.csv", tau);
  } else {
    throw Error(ErrorCode::UsageError,
                "simulate mode must be one of noise-reduction, unbiased, delta, run");
  }
}

void cmd_cost(const CostArgs& args, std::ostream& out) {
  CostParams params;
  ConfigReader config(load_config(args.params));
  config.read("input_cost_cache_not_hit", params.input_cost_cache_not_hit);
  config.read("input_cost_cache_hit", params.input_cost_cache_hit);
  config.read("output_cost", params.output_cost);
  config.read("input_tokens", params.input_tokens);
  config.read("output_tokens", params.output_tokens);
  config.finish();
  const auto ns = parse_int_list(args.n_list);
  std::string csv = "n,cost\n";
  for (const auto& [n, cost] : cost_curve(params, ns)) {
    csv += std::to_string(n) + "," + format_real(cost) + "\n";
  }
  out << csv;
}

void cmd_report(const ReportArgs& args, std::ostream& out) {
  ReportOptions options{args.baseline, args.candidate};
  const auto report = build_report(args.inputs, options);
  write_report(report, args.out);
  out << report.table("summary").to_csv();
}

}  // namespace mapkit::cli
