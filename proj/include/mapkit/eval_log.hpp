#pragma once

// Per-problem evaluation outcomes, one JSON object per line:
//   {"checkpoint": str, "step": int, "benchmark": str, "problem": str,
//    "mode": "greedy"|"sampled", "outcomes": [bool, ...]}
// Any further keys (sampling temperature and so on) are kept as opaque
// metadata.

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

namespace mapkit {

enum class DecodeMode { Greedy, Sampled };

[[nodiscard]] std::string_view decode_mode_name(DecodeMode mode) noexcept;

struct OutcomeRecord {
  std::string checkpoint_id;
  std::int64_t step = 0;
  std::string benchmark;
  std::string problem_id;
  DecodeMode mode = DecodeMode::Sampled;
  std::vector<bool> outcomes;
  std::string metadata;  // compact JSON of unrecognised keys, "" when none

  friend bool operator==(const OutcomeRecord&, const OutcomeRecord&) = default;
};

/// Records sorted by (checkpoint, benchmark, problem); the order of input
/// lines does not matter.
class EvalDataset {
 public:
  EvalDataset() = default;
  // Throws DuplicateRecord, GreedyArityViolation, MalformedLine.
  explicit EvalDataset(std::vector<OutcomeRecord> records);

  [[nodiscard]] const std::vector<OutcomeRecord>& records() const noexcept { return records_; }
  [[nodiscard]] bool empty() const noexcept { return records_.empty(); }

  // Distinct checkpoint ids for a benchmark, ordered by (step, id).
  [[nodiscard]] std::vector<std::string> checkpoints(std::string_view benchmark) const;
  [[nodiscard]] std::vector<std::string> benchmarks() const;

  friend bool operator==(const EvalDataset&, const EvalDataset&) = default;

 private:
  std::vector<OutcomeRecord> records_;
};

[[nodiscard]] OutcomeRecord parse_record(std::string_view line, std::size_t line_number);
[[nodiscard]] std::string serialize_record(const OutcomeRecord& record);

[[nodiscard]] EvalDataset ingest_jsonl_text(std::string_view text);
[[nodiscard]] EvalDataset ingest_jsonl(const std::filesystem::path& path);

struct ProblemOutcome {
  std::string problem_id;
  std::int64_t successes = 0;  // S
  std::int64_t samples = 0;    // n

  friend bool operator==(const ProblemOutcome&, const ProblemOutcome&) = default;
};

struct OutcomeMatrix {
  std::string checkpoint_id;
  std::string benchmark;
  std::int64_t step = 0;
  DecodeMode mode = DecodeMode::Sampled;  // Greedy only if every record is greedy
  std::vector<ProblemOutcome> problems;   // sorted by problem_id

  friend bool operator==(const OutcomeMatrix&, const OutcomeMatrix&) = default;
};

enum class GroupWarning { RaggedSampleCounts };

struct GroupResult {
  OutcomeMatrix matrix;
  std::vector<GroupWarning> warnings;
};

/// Throws NoMatchingRecords.
[[nodiscard]] GroupResult group(const EvalDataset& dataset, std::string_view checkpoint_id,
                                std::string_view benchmark);

/// CSV with header `problem,S,n`.
[[nodiscard]] std::string matrix_to_csv(const OutcomeMatrix& matrix);

}  // namespace mapkit
