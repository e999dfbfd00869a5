#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mapkit {

struct TrajectoryPoint {
  std::int64_t step = 0;
  double score = 0.0;
};

/// Chronological (step, score) series; steps strictly increasing, >= 2 points.
class TrajectorySeries {
 public:
  // Throws TooFewPoints, InvalidSeries.
  explicit TrajectorySeries(std::vector<TrajectoryPoint> points);
  static TrajectorySeries from_scores(std::span<const double> scores);

  [[nodiscard]] const std::vector<TrajectoryPoint>& points() const noexcept { return points_; }
  [[nodiscard]] std::vector<double> scores() const;

 private:
  std::vector<TrajectoryPoint> points_;
};

struct PairCounts {
  std::int64_t improving = 0;  // later score strictly higher
  std::int64_t worsening = 0;  // later score strictly lower
  std::int64_t tied = 0;
};

/// Counts in O(n log n) by merge sort.
[[nodiscard]] PairCounts count_pairs(std::span<const double> scores);

/// 4P / (n(n-1)) - 1 where P counts strictly improving pairs. Ties count
/// against the trajectory, so a constant series scores -1.
[[nodiscard]] double kendall_tau(const TrajectorySeries& series);

/// Tie-corrected tau-b of score against step. Throws AllTied when every
/// score is equal.
[[nodiscard]] double kendall_tau_b(const TrajectorySeries& series);

struct RankEntry {
  std::string model_id;
  double score_pt = 0.0;
  double score_sft = 0.0;
};

class RankTable {
 public:
  // Throws TooFewModels, DomainError (duplicate model id).
  explicit RankTable(std::vector<RankEntry> entries);

  [[nodiscard]] const std::vector<RankEntry>& entries() const noexcept { return entries_; }

 private:
  std::vector<RankEntry> entries_;
};

/// 1-based ranks, highest score = rank 1, ties share their average rank.
[[nodiscard]] std::vector<double> descending_ranks(std::span<const double> scores);

struct PrrResult {
  double rate = 0.0;
  std::int64_t reversed = 0;
  std::int64_t pairs = 0;
  std::vector<double> rank_pt;
  std::vector<double> rank_sft;
};

/// Share of model pairs whose pre/post ranks strictly disagree in order.
[[nodiscard]] PrrResult prr_detail(const RankTable& table);
[[nodiscard]] double prr(const RankTable& table);

}  // namespace mapkit
