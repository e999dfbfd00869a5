#include "mapkit/cli.hpp"

#include <ostream>

#include <CLI11.hpp>

#include "commands.hpp"
#include "mapkit/error.hpp"

namespace mapkit::cli {
namespace {

using CommandFn = std::function<void()>;

void add_merge_flags(CLI::App* cmd, MergeArgs& a) {
  cmd->add_option("--window", a.window, "checkpoints per merge window")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  cmd->add_flag("--partial", a.partial, "merge fewer checkpoints at the start of a run");
  cmd->add_option("--threads", a.threads, "worker threads (0 = all cores)");
  cmd->add_option("checkpoints", a.checkpoints, "checkpoint archives")
      ->required()
      ->check(CLI::ExistingFile);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Merge checkpoints and evaluate training-run stability", "mapkit"};
  app.require_subcommand(1);
  app.fallthrough(false);

  CommandFn action;

  MergeArgs merge;
  auto* merge_cmd = app.add_subcommand("merge", "average the last N checkpoints up to an anchor");
  add_merge_flags(merge_cmd, merge);
  merge_cmd->add_option("--anchor", merge.anchor, "anchor step (default: latest)");
  merge_cmd->add_option("--out", merge.out, "output archive")->required();
  merge_cmd->callback([&] { action = [&] { cmd_merge(merge, out); }; });

  MergeArgs rolling;
  auto* rolling_cmd = app.add_subcommand("rolling-merge", "merge at every listed anchor step");
  add_merge_flags(rolling_cmd, rolling);
  rolling_cmd->add_option("--every", rolling.every, "comma-separated anchor steps")->required();
  rolling_cmd->add_option("--out", rolling.out, "output directory")->required();
  rolling_cmd->callback([&] { action = [&] { cmd_rolling_merge(rolling, out); }; });

  PassKArgs passk;
  auto* passk_cmd = app.add_subcommand("passk", "Pass@k per checkpoint");
  passk_cmd->add_option("--log", passk.log, "JSONL outcome log")->required()->check(CLI::ExistingFile);
  passk_cmd->add_option("--benchmark", passk.benchmark)->required();
  passk_cmd->add_option("--k", passk.k_list, "comma-separated k values")->capture_default_str();
  passk_cmd->add_option("--checkpoint", passk.checkpoint, "single checkpoint id");
  passk_cmd->callback([&] { action = [&] { cmd_passk(passk, out, err); }; });

  TrajectoryArgs traj;
  auto* traj_cmd = app.add_subcommand("trajectory", "Kendall tau of score against step");
  traj_cmd->add_option("--log", traj.log, "JSONL outcome log")->required()->check(CLI::ExistingFile);
  traj_cmd->add_option("--benchmark", traj.benchmark, "benchmark (default: all)");
  traj_cmd->add_option("--metric", traj.metric, "passk or mean")->capture_default_str();
  traj_cmd->add_option("--k", traj.k)->capture_default_str()->check(CLI::PositiveNumber);
  traj_cmd->add_flag("--tau-b", traj.with_tau_b, "add the tie-corrected tau-b column");
  traj_cmd->callback([&] { action = [&] { cmd_trajectory(traj, out, err); }; });

  PrrArgs prr;
  auto* prr_cmd = app.add_subcommand("prr", "pairwise rank reversal rate");
  prr_cmd->add_option("--table", prr.table, "CSV with model,score_pt,score_sft")
      ->required()
      ->check(CLI::ExistingFile);
  prr_cmd->add_option("--pairs-out", prr.pairs_out, "write per-model ranks here");
  prr_cmd->callback([&] { action = [&] { cmd_prr(prr, out); }; });

  SimulateArgs sim;
  auto* sim_cmd = app.add_subcommand("simulate", "seeded validation experiments");
  sim_cmd->add_option("mode", sim.mode, "noise-reduction | unbiased | delta | run")
      ->required()
      ->check(CLI::IsMember({"noise-reduction", "unbiased", "delta", "run"}));
  sim_cmd->add_option("--config", sim.config, "JSON config")->check(CLI::ExistingFile);
  sim_cmd->add_option("--seed", sim.seed, "overrides config and MAP_SEED");
  sim_cmd->add_option("--out", sim.out, "output directory")->required();
  sim_cmd->add_option("--threads", sim.threads, "worker threads (0 = all cores)");
  sim_cmd->callback([&] { action = [&] { cmd_simulate(sim, out); }; });

  CostArgs cost;
  auto* cost_cmd = app.add_subcommand("cost", "sampling cost for n completions");
  cost_cmd->add_option("--n", cost.n_list, "comma-separated sample counts")->required();
  cost_cmd->add_option("--params", cost.params, "JSON price overrides")->check(CLI::ExistingFile);
  cost_cmd->callback([&] { action = [&] { cmd_cost(cost, out); }; });

  ReportArgs report;
  auto* report_cmd = app.add_subcommand("report", "consolidate metric CSVs");
  report_cmd->add_option("--out", report.out, "output directory")->required();
  report_cmd->add_option("--baseline", report.baseline)->capture_default_str();
  report_cmd->add_option("--candidate", report.candidate)->capture_default_str();
  report_cmd->add_option("inputs", report.inputs, "metric CSV files")->check(CLI::ExistingFile);
  report_cmd->callback([&] { action = [&] { cmd_report(report, out); }; });

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "ERROR[UsageError]: " << e.what() << "\n" << app.help();
    return kExitUsage;
  }

  try {
    action();
    return kExitOk;
  } catch (const Error& e) {
    err << "ERROR[" << error_code_name(e.code()) << "]: " << e.what() << "\n";
    return e.code() == ErrorCode::UsageError ? kExitUsage : kExitDomainError;
  } catch (const std::exception& e) {
    err << "ERROR[IoFailure]: " << e.what() << "\n";
    return kExitDomainError;
  }
}

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run(args, out, err);
}

}  // namespace mapkit::cli
