#pragma once

// Checkpoint container.
//
// Layout: the 8-byte magic "MAPCKPT1", a little-endian u64 manifest length,
// that many bytes of UTF-8 JSON manifest, then the concatenated tensor
// payloads. Manifest offsets are relative to the start of the payload section.
//
//   {"tensors": [{"name", "dtype", "shape", "offset", "byte_len"}, ...],
//    "meta": {"step"?, "tokens"?, "merge_window"?, "merge_steps"?, ...}}

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

namespace mapkit {

inline constexpr std::string_view kArchiveMagic = "MAPCKPT1";

enum class Dtype { F32, F64, BF16 };

[[nodiscard]] std::size_t dtype_size(Dtype dtype) noexcept;
[[nodiscard]] std::string_view dtype_name(Dtype dtype) noexcept;
// Throws UnsupportedDtype.
[[nodiscard]] Dtype parse_dtype(std::string_view name);
[[nodiscard]] constexpr bool dtype_writable(Dtype dtype) noexcept { return dtype != Dtype::BF16; }

struct TensorMeta {
  std::string name;
  Dtype dtype = Dtype::F64;
  std::vector<std::uint64_t> shape;
  std::uint64_t offset = 0;
  std::uint64_t byte_len = 0;

  [[nodiscard]] std::uint64_t element_count() const;

  friend bool operator==(const TensorMeta&, const TensorMeta&) = default;
};

struct Provenance {
  std::vector<std::int64_t> member_steps;  // chronological
  std::int64_t window = 0;                 // number of members actually merged

  friend bool operator==(const Provenance&, const Provenance&) = default;
};

struct ArchiveMeta {
  std::optional<std::int64_t> step;
  std::optional<std::int64_t> tokens;
  std::optional<Provenance> provenance;
  // Unrecognised keys, kept verbatim.
  nlohmann::ordered_json extra = nlohmann::ordered_json::object();

  friend bool operator==(const ArchiveMeta&, const ArchiveMeta&) = default;
};

/// An opened (or freshly built) checkpoint. Immutable once constructed.
class TensorArchive {
 public:
  TensorArchive() = default;
  // Validates every manifest invariant; throws MalformedManifest.
  TensorArchive(std::vector<TensorMeta> manifest, std::vector<std::byte> data, ArchiveMeta meta);

  [[nodiscard]] const std::vector<TensorMeta>& manifest() const noexcept { return manifest_; }
  [[nodiscard]] const ArchiveMeta& meta() const noexcept { return meta_; }
  [[nodiscard]] std::span<const std::byte> data() const noexcept { return data_; }

  [[nodiscard]] const TensorMeta* find(std::string_view name) const noexcept;
  // Throws NameNotFound.
  [[nodiscard]] const TensorMeta& at(std::string_view name) const;
  [[nodiscard]] std::span<const std::byte> payload(const TensorMeta& tensor) const noexcept;

  [[nodiscard]] TensorArchive with_meta(ArchiveMeta meta) const;

  friend bool operator==(const TensorArchive&, const TensorArchive&) = default;

 private:
  std::vector<TensorMeta> manifest_;
  std::vector<std::byte> data_;
  ArchiveMeta meta_;
};

/// Input to write_archive. Values are rounded to nearest-even for F32.
struct TensorData {
  std::string name;
  Dtype dtype = Dtype::F64;
  std::vector<std::uint64_t> shape;
  std::vector<double> values;
};

[[nodiscard]] TensorArchive open_archive(const std::filesystem::path& path);
[[nodiscard]] TensorArchive decode_archive(std::span<const std::byte> bytes);
/// Reads only the header and manifest.
[[nodiscard]] ArchiveMeta peek_meta(const std::filesystem::path& path);

/// Widens every element to double; F32 and BF16 conversions are exact.
[[nodiscard]] std::vector<double> read_tensor(const TensorArchive& archive, std::string_view name);

/// Packs tensors contiguously in the given order. Throws UnwritableDtype,
/// MalformedManifest (count/shape mismatch, duplicate names).
[[nodiscard]] TensorArchive build_archive(std::span<const TensorData> tensors, ArchiveMeta meta);

void write_archive(const std::filesystem::path& path, std::span<const TensorData> tensors,
                   const ArchiveMeta& meta);
void save_archive(const std::filesystem::path& path, const TensorArchive& archive);
[[nodiscard]] std::vector<std::byte> encode_archive(const TensorArchive& archive);

enum class MismatchKind { MissingTensor, ShapeMismatch, DtypeMismatch };

struct CompatIssue {
  std::size_t archive_index = 0;  // compared against archive 0
  std::string tensor;
  MismatchKind kind = MismatchKind::MissingTensor;
  std::string detail;
};

struct CompatReport {
  std::vector<CompatIssue> issues;

  [[nodiscard]] bool ok() const noexcept { return issues.empty(); }
  [[nodiscard]] std::string describe() const;
};

[[nodiscard]] CompatReport validate_compat(std::span<const TensorArchive> archives);
[[nodiscard]] CompatReport validate_compat(std::span<const TensorArchive* const> archives);

}  // namespace mapkit
