#pragma once

// Sliding-window checkpoint merging: the merged model at anchor step T is the
// element-wise mean of the N most recent checkpoints ending at T.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "mapkit/simd/kernels.hpp"
#include "mapkit/tensor_store.hpp"

namespace mapkit {

inline constexpr std::size_t kDefaultMergeWindow = 5;

struct CheckpointRef {
  std::filesystem::path path;
  std::int64_t step = 0;
};

enum class HistoryPolicy {
  Strict,   // fewer than N checkpoints up to the anchor is an error
  Partial,  // merge whatever is available (M < N members)
};

struct MergeWindow {
  std::vector<CheckpointRef> members;  // chronological, last one is the anchor
  std::int64_t anchor_step = 0;
  std::size_t requested = 0;
};

struct MergedModel {
  TensorArchive archive;
  Provenance provenance;
};

struct MergeOptions {
  HistoryPolicy history = HistoryPolicy::Strict;
  unsigned threads = 0;  // 0 = hardware concurrency; parallelism is across tensors only
  const simd::KernelTable* kernels = nullptr;  // nullptr = simd::active_kernels()
};

/// Throws InvalidSeries (steps not strictly increasing), AnchorNotFound,
/// InsufficientHistory, DomainError (window == 0).
[[nodiscard]] MergeWindow plan_window(std::span<const CheckpointRef> series,
                                      std::int64_t anchor_step, std::size_t window,
                                      HistoryPolicy policy = HistoryPolicy::Strict);

/// Opens every member and averages it. Throws IncompatibleArchives plus
/// whatever open_archive throws.
[[nodiscard]] MergedModel merge(const MergeWindow& window, const MergeOptions& options = {});

/// Averages already-opened archives given oldest first. `steps` must be
/// parallel to `members`; the last step becomes the output's meta.step.
///
/// Each output element is the double-double sum of its members, taken in
/// chronological order, divided by the member count and rounded once to
/// 64 bits (then to F32 for F32/BF16 inputs).
[[nodiscard]] MergedModel merge_archives(std::span<const TensorArchive* const> members,
                                         std::span<const std::int64_t> steps,
                                         const MergeOptions& options = {});

/// One independent merge per anchor; no state is carried between windows.
[[nodiscard]] std::vector<MergedModel> rolling_merge(std::span<const CheckpointRef> series,
                                                     std::size_t window,
                                                     std::span<const std::int64_t> eval_steps,
                                                     const MergeOptions& options = {});

}  // namespace mapkit
