#include "mapkit/eval_log.hpp"

#include <algorithm>
#include <map>
#include <set>
#include <tuple>

#include <json.hpp>

#include "mapkit/error.hpp"
#include "mapkit/format.hpp"

namespace mapkit {
namespace {

using ojson = nlohmann::ordered_json;

auto record_key(const OutcomeRecord& r) {
  return std::tie(r.checkpoint_id, r.benchmark, r.problem_id);
}

[[noreturn]] void bad_line(std::size_t line, const std::string& what) {
  throw Error(ErrorCode::MalformedLine, "line " + std::to_string(line) + ": " + what);
}

std::string required_string(const ojson& j, const char* key, std::size_t line) {
  if (!j.contains(key) || !j[key].is_string()) {
    bad_line(line, std::string("'") + key + "' must be a string");
  }
  return j[key].get<std::string>();
}

void check_greedy(const OutcomeRecord& r, std::size_t line) {
  if (r.mode == DecodeMode::Greedy && r.outcomes.size() != 1) {
    throw Error(ErrorCode::GreedyArityViolation,
                "line " + std::to_string(line) + ": greedy record '" + r.problem_id + "' has " +
                    std::to_string(r.outcomes.size()) + " outcomes");
  }
}

}  // namespace

std::string_view decode_mode_name(DecodeMode mode) noexcept {
  return mode == DecodeMode::Greedy ? "greedy" : "sampled";
}

OutcomeRecord parse_record(std::string_view line, std::size_t line_number) {
  ojson j;
  try {
    j = ojson::parse(line);
  } catch (const nlohmann::json::exception& e) {
    bad_line(line_number, std::string("invalid JSON: ") + e.what());
  }
  if (!j.is_object()) bad_line(line_number, "record is not an object");

  OutcomeRecord r;
  r.checkpoint_id = required_string(j, "checkpoint", line_number);
  r.benchmark = required_string(j, "benchmark", line_number);
  r.problem_id = required_string(j, "problem", line_number);
  if (!j.contains("step") || !j["step"].is_number_integer()) {
    bad_line(line_number, "'step' must be an integer");
  }
  r.step = j["step"].get<std::int64_t>();
  const auto mode = required_string(j, "mode", line_number);
  if (mode == "greedy") {
    r.mode = DecodeMode::Greedy;
  } else if (mode == "sampled") {
    r.mode = DecodeMode::Sampled;
  } else {
    bad_line(line_number, "'mode' must be \"greedy\" or \"sampled\"");
  }
  if (!j.contains("outcomes") || !j["outcomes"].is_array() || j["outcomes"].empty()) {
    bad_line(line_number, "'outcomes' must be a non-empty array");
  }
  for (const auto& o : j["outcomes"]) {
    if (!o.is_boolean()) bad_line(line_number, "'outcomes' entries must be booleans");
    r.outcomes.push_back(o.get<bool>());
  }
  check_greedy(r, line_number);

  ojson extra = ojson::object();
  for (const auto& [key, value] : j.items()) {
    if (key != "checkpoint" && key != "step" && key != "benchmark" && key != "problem" &&
        key != "mode" && key != "outcomes") {
      extra[key] = value;
    }
  }
  if (!extra.empty()) r.metadata = extra.dump();
  return r;
}

std::string serialize_record(const OutcomeRecord& record) {
  ojson j = ojson::object();
  j["checkpoint"] = record.checkpoint_id;
  j["step"] = record.step;
  j["benchmark"] = record.benchmark;
  j["problem"] = record.problem_id;
  j["mode"] = decode_mode_name(record.mode);
  j["outcomes"] = ojson::array();
  for (bool b : record.outcomes) j["outcomes"].push_back(b);
  if (!record.metadata.empty()) {
    const auto extra = ojson::parse(record.metadata);
    for (const auto& [key, value] : extra.items()) j[key] = value;
  }
  return j.dump();
}

EvalDataset::EvalDataset(std::vector<OutcomeRecord> records) : records_(std::move(records)) {
  for (const auto& r : records_) check_greedy(r, 0);
  std::stable_sort(records_.begin(), records_.end(),
                   [](const auto& a, const auto& b) { return record_key(a) < record_key(b); });
  std::map<std::string_view, std::int64_t> steps;
  for (std::size_t i = 0; i < records_.size(); ++i) {
    if (i > 0 && record_key(records_[i - 1]) == record_key(records_[i])) {
      throw Error(ErrorCode::DuplicateRecord,
                  "duplicate record (" + records_[i].checkpoint_id + ", " +
                      records_[i].benchmark + ", " + records_[i].problem_id + ")");
    }
    const auto [it, inserted] = steps.emplace(records_[i].checkpoint_id, records_[i].step);
    if (!inserted && it->second != records_[i].step) {
      throw Error(ErrorCode::MalformedLine,
                  "checkpoint '" + records_[i].checkpoint_id + "' appears with steps " +
                      std::to_string(it->second) + " and " + std::to_string(records_[i].step));
    }
  }
}

std::vector<std::string> EvalDataset::checkpoints(std::string_view benchmark) const {
  std::set<std::pair<std::int64_t, std::string>> seen;
  for (const auto& r : records_) {
    if (r.benchmark == benchmark) seen.emplace(r.step, r.checkpoint_id);
  }
  std::vector<std::string> out;
  for (const auto& [step, id] : seen) out.push_back(id);
  return out;
}

std::vector<std::string> EvalDataset::benchmarks() const {
  std::set<std::string> seen;
  for (const auto& r : records_) seen.insert(r.benchmark);
  return {seen.begin(), seen.end()};
}

EvalDataset ingest_jsonl_text(std::string_view text) {
  std::vector<OutcomeRecord> records;
  // Key -> first line it was seen on, so duplicates name both lines.
  std::map<std::tuple<std::string, std::string, std::string>, std::size_t> first_seen;
  std::size_t line_number = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    auto line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_number;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    auto r = parse_record(line, line_number);
    const auto [it, inserted] =
        first_seen.emplace(std::make_tuple(r.checkpoint_id, r.benchmark, r.problem_id), line_number);
    if (!inserted) {
      throw Error(ErrorCode::DuplicateRecord,
                  "line " + std::to_string(line_number) + ": duplicates line " +
                      std::to_string(it->second) + " (" + r.checkpoint_id + ", " + r.benchmark +
                      ", " + r.problem_id + ")");
    }
    records.push_back(std::move(r));
  }
  return EvalDataset(std::move(records));
}

EvalDataset ingest_jsonl(const std::filesystem::path& path) {
  return ingest_jsonl_text(read_text_file(path));
}

GroupResult group(const EvalDataset& dataset, std::string_view checkpoint_id,
                  std::string_view benchmark) {
  GroupResult result;
  auto& m = result.matrix;
  m.checkpoint_id = checkpoint_id;
  m.benchmark = benchmark;
  bool all_greedy = true;
  const auto& records = dataset.records();
  auto it = std::lower_bound(records.begin(), records.end(), std::pair(checkpoint_id, benchmark),
                             [](const OutcomeRecord& r, const auto& key) {
                               return std::pair<std::string_view, std::string_view>(
                                          r.checkpoint_id, r.benchmark) < key;
                             });
  for (; it != records.end() && it->checkpoint_id == checkpoint_id && it->benchmark == benchmark;
       ++it) {
    const auto& r = *it;
    m.step = r.step;
    all_greedy = all_greedy && r.mode == DecodeMode::Greedy;
    const auto s = std::count(r.outcomes.begin(), r.outcomes.end(), true);
    m.problems.push_back({r.problem_id, s, static_cast<std::int64_t>(r.outcomes.size())});
  }
  if (m.problems.empty()) {
    throw Error(ErrorCode::NoMatchingRecords, "no records for checkpoint '" +
                                                  std::string(checkpoint_id) + "' on benchmark '" +
                                                  std::string(benchmark) + "'");
  }
  m.mode = all_greedy ? DecodeMode::Greedy : DecodeMode::Sampled;
  // Dataset order already sorts problems within a (checkpoint, benchmark).
  const auto n0 = m.problems.front().samples;
  if (std::any_of(m.problems.begin(), m.problems.end(),
                  [&](const ProblemOutcome& p) { return p.samples != n0; })) {
    result.warnings.push_back(GroupWarning::RaggedSampleCounts);
  }
  return result;
}

std::string matrix_to_csv(const OutcomeMatrix& matrix) {
  std::string out = "problem,S,n\n";
  for (const auto& p : matrix.problems) {
    out += p.problem_id + "," + std::to_string(p.successes) + "," + std::to_string(p.samples) +
           "\n";
  }
  return out;
}

}  // namespace mapkit
