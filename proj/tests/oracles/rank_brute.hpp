#pragma once

#include <cstdint>
#include <vector>

namespace oracle {

struct PairTally {
  std::int64_t concordant = 0;  // later checkpoint strictly better
  std::int64_t discordant = 0;
  std::int64_t tied = 0;
};

// Every pair (i < j) of a series already ordered by step.
PairTally enumerate_pairs(const std::vector<double>& scores);

// 4P / (n(n-1)) - 1 from the enumerated count.
double tau_strict(const std::vector<double>& scores);

// (C - D) / sqrt((n0 - n1)(n0 - n2)); steps are distinct so n2 = 0.
double tau_b(const std::vector<double>& scores);

// Rank = 1 + #strictly higher + (#equal others) / 2.
std::vector<double> average_ranks_desc(const std::vector<double>& scores);

struct PrrTally {
  std::int64_t reversed = 0;
  std::int64_t pairs = 0;
};

PrrTally prr_pairs(const std::vector<double>& score_pt, const std::vector<double>& score_sft);

}  // namespace oracle
