#include "mapkit/tensor_store.hpp"

#include <algorithm>
#include <cstring>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>

#include "mapkit/error.hpp"
#include "mapkit/format.hpp"
#include "mapkit/simd/kernels.hpp"

namespace mapkit {

using ojson = nlohmann::ordered_json;

namespace {

constexpr std::size_t kHeaderPrefix = kArchiveMagic.size() + sizeof(std::uint64_t);

[[noreturn]] void malformed(const std::string& what) {
  throw Error(ErrorCode::MalformedManifest, what);
}

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b, const std::string& tensor) {
  if (a != 0 && b > std::numeric_limits<std::uint64_t>::max() / a) {
    malformed("tensor '" + tensor + "': element count overflows");
  }
  return a * b;
}

std::string shape_string(const std::vector<std::uint64_t>& shape) {
  std::string s = "[";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ",";
    s += std::to_string(shape[i]);
  }
  return s + "]";
}

void validate_manifest(const std::vector<TensorMeta>& manifest, std::uint64_t data_len) {
  std::set<std::string_view> names;
  for (const auto& t : manifest) {
    if (t.name.empty()) malformed("tensor with empty name");
    if (!names.insert(t.name).second) malformed("duplicate tensor name '" + t.name + "'");
    const auto expected = checked_mul(t.element_count(), dtype_size(t.dtype), t.name);
    if (t.byte_len != expected) {
      malformed("tensor '" + t.name + "': byte_len " + std::to_string(t.byte_len) +
                " does not match shape " + shape_string(t.shape) + " x " +
                std::to_string(dtype_size(t.dtype)));
    }
    if (t.offset > data_len || t.byte_len > data_len - t.offset) {
      malformed("tensor '" + t.name + "' extends past the data section");
    }
  }
  std::vector<const TensorMeta*> order;
  order.reserve(manifest.size());
  for (const auto& t : manifest) {
    if (t.byte_len > 0) order.push_back(&t);
  }
  std::sort(order.begin(), order.end(),
            [](const TensorMeta* a, const TensorMeta* b) { return a->offset < b->offset; });
  for (std::size_t i = 1; i < order.size(); ++i) {
    if (order[i - 1]->offset + order[i - 1]->byte_len > order[i]->offset) {
      malformed("tensors '" + order[i - 1]->name + "' and '" + order[i]->name + "' overlap");
    }
  }
}

std::uint64_t json_u64(const ojson& j, const char* key, const std::string& ctx) {
  if (!j.contains(key) || !j[key].is_number_unsigned()) {
    malformed(ctx + ": '" + key + "' must be a non-negative integer");
  }
  return j[key].get<std::uint64_t>();
}

TensorMeta parse_tensor(const ojson& j) {
  if (!j.is_object()) malformed("tensor entry is not an object");
  if (!j.contains("name") || !j["name"].is_string()) malformed("tensor entry without a name");
  TensorMeta t;
  t.name = j["name"].get<std::string>();
  const std::string ctx = "tensor '" + t.name + "'";
  if (!j.contains("dtype") || !j["dtype"].is_string()) malformed(ctx + ": missing dtype");
  t.dtype = parse_dtype(j["dtype"].get<std::string>());
  if (!j.contains("shape") || !j["shape"].is_array()) malformed(ctx + ": missing shape");
  for (const auto& d : j["shape"]) {
    if (!d.is_number_unsigned()) malformed(ctx + ": shape entries must be non-negative integers");
    t.shape.push_back(d.get<std::uint64_t>());
  }
  t.offset = json_u64(j, "offset", ctx);
  t.byte_len = json_u64(j, "byte_len", ctx);
  return t;
}

std::int64_t meta_int(const ojson& v, const char* key) {
  if (!v.is_number_integer()) malformed(std::string("meta.") + key + " must be an integer");
  return v.get<std::int64_t>();
}

ArchiveMeta parse_meta(const ojson& j) {
  ArchiveMeta meta;
  if (j.is_null()) return meta;
  if (!j.is_object()) malformed("meta must be an object");
  std::optional<std::int64_t> window;
  std::optional<std::vector<std::int64_t>> steps;
  for (const auto& [key, value] : j.items()) {
    if (key == "step") {
      meta.step = meta_int(value, "step");
    } else if (key == "tokens") {
      meta.tokens = meta_int(value, "tokens");
    } else if (key == "merge_window") {
      window = meta_int(value, "merge_window");
    } else if (key == "merge_steps") {
      if (!value.is_array()) malformed("meta.merge_steps must be an array");
      steps.emplace();
      for (const auto& s : value) steps->push_back(meta_int(s, "merge_steps"));
    } else {
      meta.extra[key] = value;
    }
  }
  if (window.has_value() != steps.has_value()) {
    malformed("meta.merge_window and meta.merge_steps must appear together");
  }
  if (window) meta.provenance = Provenance{std::move(*steps), *window};
  return meta;
}

ojson meta_json(const ArchiveMeta& meta) {
  ojson j = ojson::object();
  if (meta.step) j["step"] = *meta.step;
  if (meta.tokens) j["tokens"] = *meta.tokens;
  if (meta.provenance) {
    j["merge_window"] = meta.provenance->window;
    j["merge_steps"] = meta.provenance->member_steps;
  }
  for (const auto& [key, value] : meta.extra.items()) j[key] = value;
  return j;
}

}  // namespace

std::size_t dtype_size(Dtype dtype) noexcept {
  switch (dtype) {
    case Dtype::F32: return 4;
    case Dtype::F64: return 8;
    case Dtype::BF16: return 2;
  }
  return 0;
}

std::string_view dtype_name(Dtype dtype) noexcept {
  switch (dtype) {
    case Dtype::F32: return "F32";
    case Dtype::F64: return "F64";
    case Dtype::BF16: return "BF16";
  }
  return "?";
}

Dtype parse_dtype(std::string_view name) {
  if (name == "F32") return Dtype::F32;
  if (name == "F64") return Dtype::F64;
  if (name == "BF16") return Dtype::BF16;
  throw Error(ErrorCode::UnsupportedDtype, "unsupported dtype '" + std::string(name) + "'");
}

std::uint64_t TensorMeta::element_count() const {
  std::uint64_t n = 1;
  for (auto d : shape) n = checked_mul(n, d, name);
  return n;
}

TensorArchive::TensorArchive(std::vector<TensorMeta> manifest, std::vector<std::byte> data,
                             ArchiveMeta meta)
    : manifest_(std::move(manifest)), data_(std::move(data)), meta_(std::move(meta)) {
  validate_manifest(manifest_, data_.size());
}

const TensorMeta* TensorArchive::find(std::string_view name) const noexcept {
  for (const auto& t : manifest_) {
    if (t.name == name) return &t;
  }
  return nullptr;
}

const TensorMeta& TensorArchive::at(std::string_view name) const {
  if (const auto* t = find(name)) return *t;
  throw Error(ErrorCode::NameNotFound, "no tensor named '" + std::string(name) + "'");
}

std::span<const std::byte> TensorArchive::payload(const TensorMeta& tensor) const noexcept {
  return std::span<const std::byte>(data_).subspan(tensor.offset, tensor.byte_len);
}

TensorArchive TensorArchive::with_meta(ArchiveMeta meta) const {
  TensorArchive copy = *this;
  copy.meta_ = std::move(meta);
  return copy;
}

TensorArchive decode_archive(std::span<const std::byte> bytes) {
  if (bytes.size() < kHeaderPrefix ||
      std::memcmp(bytes.data(), kArchiveMagic.data(), kArchiveMagic.size()) != 0) {
    malformed("missing MAPCKPT1 magic");
  }
  std::uint64_t manifest_len = 0;
  std::memcpy(&manifest_len, bytes.data() + kArchiveMagic.size(), sizeof manifest_len);
  if (manifest_len > bytes.size() - kHeaderPrefix) malformed("manifest length exceeds file size");

  const auto* text = reinterpret_cast<const char*>(bytes.data() + kHeaderPrefix);
  ojson doc;
  try {
    doc = ojson::parse(text, text + manifest_len);
  } catch (const nlohmann::json::exception& e) {
    malformed(std::string("manifest is not valid JSON: ") + e.what());
  }
  if (!doc.is_object() || !doc.contains("tensors") || !doc["tensors"].is_array()) {
    malformed("manifest lacks a 'tensors' array");
  }
  std::vector<TensorMeta> manifest;
  for (const auto& entry : doc["tensors"]) manifest.push_back(parse_tensor(entry));
  auto meta = parse_meta(doc.contains("meta") ? doc["meta"] : ojson());

  const auto data = bytes.subspan(kHeaderPrefix + manifest_len);
  return TensorArchive(std::move(manifest), std::vector<std::byte>(data.begin(), data.end()),
                       std::move(meta));
}

TensorArchive open_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  std::vector<char> raw((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  try {
    return decode_archive(std::as_bytes(std::span<const char>(raw)));
  } catch (const Error& e) {
    throw Error(e.code(), path.string() + ": " + e.what());
  }
}

ArchiveMeta peek_meta(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path.string() + "'");
  char prefix[kHeaderPrefix];
  if (!in.read(prefix, kHeaderPrefix) ||
      std::string_view(prefix, kArchiveMagic.size()) != kArchiveMagic) {
    malformed(path.string() + ": missing MAPCKPT1 magic");
  }
  std::uint64_t manifest_len = 0;
  std::memcpy(&manifest_len, prefix + kArchiveMagic.size(), sizeof manifest_len);
  if (manifest_len > std::filesystem::file_size(path) - kHeaderPrefix) {
    malformed(path.string() + ": manifest length exceeds file size");
  }
  std::string text;
  text.resize(manifest_len);
  if (!in.read(text.data(), static_cast<std::streamsize>(manifest_len))) {
    malformed(path.string() + ": truncated manifest");
  }
  try {
    const auto doc = ojson::parse(text);
    return parse_meta(doc.is_object() && doc.contains("meta") ? doc["meta"] : ojson());
  } catch (const nlohmann::json::exception& e) {
    malformed(path.string() + ": manifest is not valid JSON: " + e.what());
  }
}

std::vector<double> read_tensor(const TensorArchive& archive, std::string_view name) {
  const auto& t = archive.at(name);
  const auto bytes = archive.payload(t);
  std::vector<double> out(t.element_count());
  const auto& k = simd::active_kernels();
  switch (t.dtype) {
    case Dtype::F64: std::memcpy(out.data(), bytes.data(), bytes.size()); break;
    case Dtype::F32: k.widen_f32(bytes.data(), out.data(), out.size()); break;
    case Dtype::BF16: k.widen_bf16(bytes.data(), out.data(), out.size()); break;
  }
  return out;
}

TensorArchive build_archive(std::span<const TensorData> tensors, ArchiveMeta meta) {
  std::vector<TensorMeta> manifest;
  std::uint64_t total = 0;
  for (const auto& t : tensors) {
    if (!dtype_writable(t.dtype)) {
      throw Error(ErrorCode::UnwritableDtype,
                  "tensor '" + t.name + "': " + std::string(dtype_name(t.dtype)) +
                      " is read-only");
    }
    TensorMeta m{t.name, t.dtype, t.shape, total, 0};
    const auto count = m.element_count();
    if (count != t.values.size()) {
      malformed("tensor '" + t.name + "': " + std::to_string(t.values.size()) +
                " values for shape " + shape_string(t.shape));
    }
    m.byte_len = checked_mul(count, dtype_size(t.dtype), t.name);
    total += m.byte_len;
    manifest.push_back(std::move(m));
  }
  std::vector<std::byte> data(total);
  const auto& k = simd::active_kernels();
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto* dst = data.data() + manifest[i].offset;
    const auto& values = tensors[i].values;
    if (tensors[i].dtype == Dtype::F64) {
      std::memcpy(dst, values.data(), values.size() * sizeof(double));
    } else {
      k.narrow_f32(values.data(), dst, values.size());
    }
  }
  return TensorArchive(std::move(manifest), std::move(data), std::move(meta));
}

std::vector<std::byte> encode_archive(const TensorArchive& archive) {
  // Writers always emit offsets in manifest order with no gaps.
  std::uint64_t expected = 0;
  for (const auto& t : archive.manifest()) {
    if (t.offset != expected) malformed("tensor '" + t.name + "' is not contiguous");
    expected += t.byte_len;
  }
  if (expected != archive.data().size()) malformed("data section has uncovered bytes");

  ojson doc = ojson::object();
  doc["tensors"] = ojson::array();
  for (const auto& t : archive.manifest()) {
    ojson e = ojson::object();
    e["name"] = t.name;
    e["dtype"] = dtype_name(t.dtype);
    e["shape"] = t.shape;
    e["offset"] = t.offset;
    e["byte_len"] = t.byte_len;
    doc["tensors"].push_back(std::move(e));
  }
  doc["meta"] = meta_json(archive.meta());
  const std::string manifest = doc.dump();

  std::vector<std::byte> out(kHeaderPrefix + manifest.size() + archive.data().size());
  std::memcpy(out.data(), kArchiveMagic.data(), kArchiveMagic.size());
  const std::uint64_t len = manifest.size();
  std::memcpy(out.data() + kArchiveMagic.size(), &len, sizeof len);
  std::memcpy(out.data() + kHeaderPrefix, manifest.data(), manifest.size());
  if (!archive.data().empty()) {
    std::memcpy(out.data() + kHeaderPrefix + manifest.size(), archive.data().data(),
                archive.data().size());
  }
  return out;
}

void save_archive(const std::filesystem::path& path, const TensorArchive& archive) {
  const auto bytes = encode_archive(archive);
  write_file_atomic(path, std::string_view(reinterpret_cast<const char*>(bytes.data()),
                                           bytes.size()));
}

void write_archive(const std::filesystem::path& path, std::span<const TensorData> tensors,
                   const ArchiveMeta& meta) {
  save_archive(path, build_archive(tensors, meta));
}

std::string CompatReport::describe() const {
  std::ostringstream ss;
  for (std::size_t i = 0; i < issues.size(); ++i) {
    if (i) ss << "; ";
    ss << "archive " << issues[i].archive_index << " tensor '" << issues[i].tensor
       << "': " << issues[i].detail;
  }
  return ss.str();
}

CompatReport validate_compat(std::span<const TensorArchive> archives) {
  std::vector<const TensorArchive*> ptrs;
  ptrs.reserve(archives.size());
  for (const auto& a : archives) ptrs.push_back(&a);
  return validate_compat(std::span<const TensorArchive* const>(ptrs));
}

CompatReport validate_compat(std::span<const TensorArchive* const> archives) {
  CompatReport report;
  if (archives.empty()) return report;
  const auto& ref = *archives.front();
  for (std::size_t a = 1; a < archives.size(); ++a) {
    const auto& other = *archives[a];
    for (const auto& t : ref.manifest()) {
      const auto* o = other.find(t.name);
      if (!o) {
        report.issues.push_back({a, t.name, MismatchKind::MissingTensor, "missing"});
        continue;
      }
      if (o->shape != t.shape) {
        report.issues.push_back({a, t.name, MismatchKind::ShapeMismatch,
                                 "shape " + shape_string(t.shape) + " vs " +
                                     shape_string(o->shape)});
      }
      if (o->dtype != t.dtype) {
        report.issues.push_back({a, t.name, MismatchKind::DtypeMismatch,
                                 "dtype " + std::string(dtype_name(t.dtype)) + " vs " +
                                     std::string(dtype_name(o->dtype))});
      }
    }
    for (const auto& o : other.manifest()) {
      if (!ref.find(o.name)) {
        report.issues.push_back({a, o.name, MismatchKind::MissingTensor, "not in archive 0"});
      }
    }
  }
  return report;
}

}  // namespace mapkit
