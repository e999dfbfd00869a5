#include "mapkit/merge_engine.hpp"

#include <algorithm>
#include <atomic>
#include <cstring>
#include <map>
#include <memory>
#include <thread>

#include "mapkit/error.hpp"

namespace mapkit {
namespace {

// Elements processed per pass; keeps the hi/lo accumulators cache resident.
constexpr std::size_t kBlock = 1 << 14;

Dtype output_dtype(Dtype input) { return input == Dtype::F64 ? Dtype::F64 : Dtype::F32; }

void init_block(const simd::KernelTable& k, Dtype dtype, const std::byte* src, double* hi,
                std::size_t n) {
  switch (dtype) {
    case Dtype::F64: std::memcpy(hi, src, n * sizeof(double)); break;
    case Dtype::F32: k.widen_f32(src, hi, n); break;
    case Dtype::BF16: k.widen_bf16(src, hi, n); break;
  }
}

void accumulate_block(const simd::KernelTable& k, Dtype dtype, const std::byte* src, double* hi,
                      double* lo, std::size_t n) {
  switch (dtype) {
    case Dtype::F64: k.accumulate_f64(src, hi, lo, n); break;
    case Dtype::F32: k.accumulate_f32(src, hi, lo, n); break;
    case Dtype::BF16: k.accumulate_bf16(src, hi, lo, n); break;
  }
}

void merge_tensor(const simd::KernelTable& k, std::span<const TensorArchive* const> members,
                  const TensorMeta& in_meta, const TensorMeta& out_meta, std::byte* out) {
  const std::size_t count = in_meta.element_count();
  const std::size_t in_width = dtype_size(in_meta.dtype);
  const double divisor = static_cast<double>(members.size());

  std::vector<std::span<const std::byte>> sources;
  sources.reserve(members.size());
  for (const auto* m : members) sources.push_back(m->payload(m->at(in_meta.name)));

  const std::size_t block = std::min(count, kBlock);
  std::vector<double> hi(block), lo(block), mean(block);
  for (std::size_t start = 0; start < count; start += kBlock) {
    const std::size_t n = std::min(kBlock, count - start);
    init_block(k, in_meta.dtype, sources[0].data() + start * in_width, hi.data(), n);
    std::fill_n(lo.begin(), n, 0.0);
    for (std::size_t m = 1; m < sources.size(); ++m) {
      accumulate_block(k, in_meta.dtype, sources[m].data() + start * in_width, hi.data(),
                       lo.data(), n);
    }
    k.finalize_mean(hi.data(), lo.data(), divisor, mean.data(), n);
    if (out_meta.dtype == Dtype::F64) {
      std::memcpy(out + start * sizeof(double), mean.data(), n * sizeof(double));
    } else {
      k.narrow_f32(mean.data(), out + start * sizeof(float), n);
    }
  }
}

}  // namespace

MergeWindow plan_window(std::span<const CheckpointRef> series, std::int64_t anchor_step,
                        std::size_t window, HistoryPolicy policy) {
  if (window == 0) throw Error(ErrorCode::DomainError, "merge window must be at least 1");
  for (std::size_t i = 1; i < series.size(); ++i) {
    if (series[i].step <= series[i - 1].step) {
      throw Error(ErrorCode::InvalidSeries,
                  "checkpoint steps must be strictly increasing (" +
                      std::to_string(series[i - 1].step) + " then " +
                      std::to_string(series[i].step) + ")");
    }
  }
  const auto it = std::find_if(series.begin(), series.end(),
                               [&](const CheckpointRef& c) { return c.step == anchor_step; });
  if (it == series.end()) {
    throw Error(ErrorCode::AnchorNotFound,
                "no checkpoint at step " + std::to_string(anchor_step));
  }
  const auto available = static_cast<std::size_t>(it - series.begin()) + 1;
  if (available < window && policy == HistoryPolicy::Strict) {
    throw Error(ErrorCode::InsufficientHistory,
                "window " + std::to_string(window) + " needs " + std::to_string(window) +
                    " checkpoints up to step " + std::to_string(anchor_step) + ", have " +
                    std::to_string(available));
  }
  const auto take = std::min(available, window);
  MergeWindow w;
  w.members.assign(it + 1 - static_cast<std::ptrdiff_t>(take), it + 1);
  w.anchor_step = anchor_step;
  w.requested = window;
  return w;
}

MergedModel merge_archives(std::span<const TensorArchive* const> members,
                           std::span<const std::int64_t> steps, const MergeOptions& options) {
  if (members.empty()) throw Error(ErrorCode::DomainError, "nothing to merge");
  if (steps.size() != members.size()) {
    throw Error(ErrorCode::DomainError, "steps and members differ in length");
  }
  const auto report = validate_compat(members);
  if (!report.ok()) throw Error(ErrorCode::IncompatibleArchives, report.describe());

  const auto& k = options.kernels ? *options.kernels : simd::active_kernels();
  const auto& ref = *members.front();

  std::vector<TensorMeta> out_manifest;
  std::uint64_t total = 0;
  for (const auto& t : ref.manifest()) {
    TensorMeta o{t.name, output_dtype(t.dtype), t.shape, total, 0};
    o.byte_len = o.element_count() * dtype_size(o.dtype);
    total += o.byte_len;
    out_manifest.push_back(std::move(o));
  }
  std::vector<std::byte> data(total);

  const std::size_t tensors = out_manifest.size();
  unsigned threads = options.threads ? options.threads : std::thread::hardware_concurrency();
  threads = static_cast<unsigned>(std::clamp<std::size_t>(threads, 1, std::max<std::size_t>(tensors, 1)));

  std::atomic<std::size_t> next{0};
  auto work = [&] {
    for (std::size_t i = next++; i < tensors; i = next++) {
      merge_tensor(k, members, ref.manifest()[i], out_manifest[i],
                   data.data() + out_manifest[i].offset);
    }
  };
  if (threads == 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    for (unsigned t = 0; t < threads; ++t) pool.emplace_back(work);
  }

  Provenance prov{std::vector<std::int64_t>(steps.begin(), steps.end()),
                  static_cast<std::int64_t>(members.size())};
  ArchiveMeta meta;
  meta.step = steps.back();
  meta.tokens = members.back()->meta().tokens;
  meta.provenance = prov;
  return {TensorArchive(std::move(out_manifest), std::move(data), std::move(meta)),
          std::move(prov)};
}

MergedModel merge(const MergeWindow& window, const MergeOptions& options) {
  std::vector<TensorArchive> archives;
  std::vector<std::int64_t> steps;
  for (const auto& m : window.members) {
    archives.push_back(open_archive(m.path));
    steps.push_back(m.step);
  }
  std::vector<const TensorArchive*> ptrs;
  for (const auto& a : archives) ptrs.push_back(&a);
  return merge_archives(ptrs, steps, options);
}

std::vector<MergedModel> rolling_merge(std::span<const CheckpointRef> series, std::size_t window,
                                       std::span<const std::int64_t> eval_steps,
                                       const MergeOptions& options) {
  std::vector<MergeWindow> plans;
  for (auto anchor : eval_steps) plans.push_back(plan_window(series, anchor, window, options.history));

  // Opened archives are shared between overlapping windows; each window's
  // sum is still computed from scratch.
  std::map<std::filesystem::path, std::unique_ptr<const TensorArchive>> cache;
  std::vector<MergedModel> out;
  out.reserve(plans.size());
  for (const auto& plan : plans) {
    std::vector<const TensorArchive*> ptrs;
    std::vector<std::int64_t> steps;
    for (const auto& m : plan.members) {
      auto& slot = cache[m.path];
      if (!slot) slot = std::make_unique<const TensorArchive>(open_archive(m.path));
      ptrs.push_back(slot.get());
      steps.push_back(m.step);
    }
    out.push_back(merge_archives(ptrs, steps, options));
  }
  return out;
}

}  // namespace mapkit
