#include "mapkit/stability.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>

#include "mapkit/error.hpp"

namespace mapkit {
namespace {

// Counts pairs i < j with v[i] < v[j] while sorting v ascending.
std::int64_t count_strict_ascents(std::vector<double>& v, std::vector<double>& scratch,
                                  std::size_t lo, std::size_t hi) {
  if (hi - lo < 2) return 0;
  const std::size_t mid = lo + (hi - lo) / 2;
  std::int64_t count = count_strict_ascents(v, scratch, lo, mid) +
                       count_strict_ascents(v, scratch, mid, hi);
  // Every right element is later than every left element; it forms an
  // ascent with each left element strictly below it.
  std::size_t i = lo;
  for (std::size_t j = mid; j < hi; ++j) {
    while (i < mid && v[i] < v[j]) ++i;
    count += static_cast<std::int64_t>(i - lo);
  }
  std::merge(v.begin() + lo, v.begin() + mid, v.begin() + mid, v.begin() + hi,
             scratch.begin() + lo);
  std::copy(scratch.begin() + lo, scratch.begin() + hi, v.begin() + lo);
  return count;
}

std::int64_t count_tied_pairs(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  std::int64_t tied = 0;
  for (std::size_t i = 0; i < v.size();) {
    std::size_t j = i;
    while (j < v.size() && v[j] == v[i]) ++j;
    const auto run = static_cast<std::int64_t>(j - i);
    tied += run * (run - 1) / 2;
    i = j;
  }
  return tied;
}

}  // namespace

TrajectorySeries::TrajectorySeries(std::vector<TrajectoryPoint> points)
    : points_(std::move(points)) {
  if (points_.size() < 2) {
    throw Error(ErrorCode::TooFewPoints,
                "a trajectory needs at least 2 points, got " + std::to_string(points_.size()));
  }
  for (std::size_t i = 1; i < points_.size(); ++i) {
    if (points_[i].step <= points_[i - 1].step) {
      throw Error(ErrorCode::InvalidSeries, "trajectory steps must be strictly increasing");
    }
  }
  for (const auto& p : points_) {
    if (std::isnan(p.score)) throw Error(ErrorCode::DomainError, "NaN score in trajectory");
  }
}

TrajectorySeries TrajectorySeries::from_scores(std::span<const double> scores) {
  std::vector<TrajectoryPoint> pts;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    pts.push_back({static_cast<std::int64_t>(i), scores[i]});
  }
  return TrajectorySeries(std::move(pts));
}

std::vector<double> TrajectorySeries::scores() const {
  std::vector<double> out;
  out.reserve(points_.size());
  for (const auto& p : points_) out.push_back(p.score);
  return out;
}

PairCounts count_pairs(std::span<const double> scores) {
  std::vector<double> v(scores.begin(), scores.end());
  std::vector<double> scratch(v.size());
  const auto n = static_cast<std::int64_t>(v.size());
  PairCounts c;
  c.tied = count_tied_pairs(v);
  c.improving = count_strict_ascents(v, scratch, 0, v.size());
  c.worsening = n * (n - 1) / 2 - c.improving - c.tied;
  return c;
}

double kendall_tau(const TrajectorySeries& series) {
  const auto scores = series.scores();
  const auto n = static_cast<double>(scores.size());
  const auto c = count_pairs(scores);
  return 4.0 * static_cast<double>(c.improving) / (n * (n - 1.0)) - 1.0;
}

double kendall_tau_b(const TrajectorySeries& series) {
  const auto scores = series.scores();
  const auto n = static_cast<std::int64_t>(scores.size());
  const auto c = count_pairs(scores);
  const std::int64_t total = n * (n - 1) / 2;
  // Steps never tie, so only the score side carries a tie correction.
  if (c.tied == total) throw Error(ErrorCode::AllTied, "every score is equal; tau-b undefined");
  // Both counts are far below 2^53, so the product is exact.
  const double denom =
      std::sqrt(static_cast<double>(total) * static_cast<double>(total - c.tied));
  return static_cast<double>(c.improving - c.worsening) / denom;
}

RankTable::RankTable(std::vector<RankEntry> entries) : entries_(std::move(entries)) {
  if (entries_.size() < 2) {
    throw Error(ErrorCode::TooFewModels,
                "PRR needs at least 2 models, got " + std::to_string(entries_.size()));
  }
  std::set<std::string> ids;
  for (const auto& e : entries_) {
    if (!ids.insert(e.model_id).second) {
      throw Error(ErrorCode::DomainError, "duplicate model id '" + e.model_id + "'");
    }
    if (std::isnan(e.score_pt) || std::isnan(e.score_sft)) {
      throw Error(ErrorCode::DomainError, "NaN score for model '" + e.model_id + "'");
    }
  }
}

std::vector<double> descending_ranks(std::span<const double> scores) {
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::size_t a, std::size_t b) { return scores[a] > scores[b]; });
  std::vector<double> ranks(scores.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // Positions i..j-1 hold ranks i+1..j; each gets their mean.
    const double avg = (static_cast<double>(i + 1) + static_cast<double>(j)) / 2.0;
    for (std::size_t t = i; t < j; ++t) ranks[order[t]] = avg;
    i = j;
  }
  return ranks;
}

PrrResult prr_detail(const RankTable& table) {
  const auto& e = table.entries();
  std::vector<double> pt, sft;
  for (const auto& row : e) {
    pt.push_back(row.score_pt);
    sft.push_back(row.score_sft);
  }
  PrrResult r;
  r.rank_pt = descending_ranks(pt);
  r.rank_sft = descending_ranks(sft);
  const auto m = static_cast<std::int64_t>(e.size());
  r.pairs = m * (m - 1) / 2;
  for (std::size_t i = 0; i < e.size(); ++i) {
    for (std::size_t j = i + 1; j < e.size(); ++j) {
      if ((r.rank_pt[i] - r.rank_pt[j]) * (r.rank_sft[i] - r.rank_sft[j]) < 0.0) ++r.reversed;
    }
  }
  r.rate = static_cast<double>(r.reversed) / static_cast<double>(r.pairs);
  return r;
}

double prr(const RankTable& table) { return prr_detail(table).rate; }

}  // namespace mapkit
