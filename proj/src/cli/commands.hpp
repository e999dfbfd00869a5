#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace mapkit::cli {

struct MergeArgs {
  std::size_t window = 5;
  std::optional<std::int64_t> anchor;
  std::string every;  // rolling-merge anchors, comma separated
  std::filesystem::path out;
  bool partial = false;
  unsigned threads = 0;
  std::vector<std::filesystem::path> checkpoints;
};

struct PassKArgs {
  std::filesystem::path log;
  std::string benchmark;
  std::string k_list = "1,2,4,8,16";
  std::optional<std::string> checkpoint;
};

struct TrajectoryArgs {
  std::filesystem::path log;
  std::optional<std::string> benchmark;
  std::string metric = "passk";
  std::int64_t k = 16;
  bool with_tau_b = false;
};

struct PrrArgs {
  std::filesystem::path table;
  std::optional<std::filesystem::path> pairs_out;
};

struct SimulateArgs {
  std::string mode;
  std::optional<std::filesystem::path> config;
  std::optional<std::uint64_t> seed;
  std::filesystem::path out;
  std::optional<unsigned> threads;
};

struct CostArgs {
  std::string n_list;
  std::optional<std::filesystem::path> params;
};

struct ReportArgs {
  std::filesystem::path out;
  std::string baseline = "raw-greedy";
  std::string candidate = "merged-passk";
  std::vector<std::filesystem::path> inputs;
};

void cmd_merge(const MergeArgs& args, std::ostream& out);
void cmd_rolling_merge(const MergeArgs& args, std::ostream& out);
void cmd_passk(const PassKArgs& args, std::ostream& out, std::ostream& err);
void cmd_trajectory(const TrajectoryArgs& args, std::ostream& out, std::ostream& err);
void cmd_prr(const PrrArgs& args, std::ostream& out);
void cmd_simulate(const SimulateArgs& args, std::ostream& out);
void cmd_cost(const CostArgs& args, std::ostream& out);
void cmd_report(const ReportArgs& args, std::ostream& out);

}  // namespace mapkit::cli
