#include <gtest/gtest.h>

#include <fstream>

#include "mapkit/error.hpp"
#include "mapkit/tensor_store.hpp"
#include "support/fixtures.hpp"

using namespace mapkit;
using testing_support::container_bytes;
using testing_support::TempDir;

namespace {

ErrorCode decode_error(const std::vector<std::byte>& bytes) {
  try {
    (void)decode_archive(bytes);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "decode succeeded";
  return ErrorCode::UsageError;
}

std::string one_tensor(const std::string& dtype, const std::string& shape, std::uint64_t offset,
                       std::uint64_t len) {
  return R"({"tensors":[{"name":"w","dtype":")" + dtype + R"(","shape":)" + shape +
         R"(,"offset":)" + std::to_string(offset) + R"(,"byte_len":)" + std::to_string(len) + "}]}";
}

}  // namespace

TEST(TensorStore, EmptyArchiveIsValid) {
  const auto a = decode_archive(container_bytes(R"({"tensors":[]})", {}));
  EXPECT_TRUE(a.manifest().empty());
  EXPECT_TRUE(a.data().empty());
}

TEST(TensorStore, DecodesLittleEndianF32) {
  const auto a = decode_archive(
      container_bytes(one_tensor("F32", "[2]", 0, 8), {0x00, 0x00, 0x80, 0x3F, 0x00, 0x00, 0x00, 0x40}));
  EXPECT_EQ(read_tensor(a, "w"), (std::vector<double>{1.0, 2.0}));
}

TEST(TensorStore, DecodesBf16) {
  const auto a = decode_archive(container_bytes(one_tensor("BF16", "[1]", 0, 2), {0x80, 0x3F}));
  EXPECT_EQ(read_tensor(a, "w"), std::vector<double>{1.0});
  const auto b = decode_archive(container_bytes(one_tensor("BF16", "[2]", 0, 4), {0x49, 0x40, 0x80, 0xC0}));
  // 0x4049 -> 3.140625, 0xC080 -> -4
  EXPECT_EQ(read_tensor(b, "w"), (std::vector<double>{3.140625, -4.0}));
}

TEST(TensorStore, ByteLenMismatchIsMalformed) {
  EXPECT_EQ(decode_error(container_bytes(one_tensor("F32", "[2]", 0, 6), {0, 0, 0, 0, 0, 0})),
            ErrorCode::MalformedManifest);
}

TEST(TensorStore, StructuralErrors) {
  EXPECT_EQ(decode_error(container_bytes(one_tensor("F16", "[1]", 0, 2), {0, 0})),
            ErrorCode::UnsupportedDtype);
  EXPECT_EQ(decode_error(container_bytes(one_tensor("F32", "[2]", 4, 8), {0, 0, 0, 0, 0, 0, 0, 0})),
            ErrorCode::MalformedManifest);  // out of bounds
  EXPECT_EQ(decode_error(container_bytes("{not json", {})), ErrorCode::MalformedManifest);
  EXPECT_EQ(decode_error(container_bytes(R"({"meta":{}})", {})), ErrorCode::MalformedManifest);
  const std::string overlap =
      R"({"tensors":[{"name":"a","dtype":"F32","shape":[2],"offset":0,"byte_len":8},)"
      R"({"name":"b","dtype":"F32","shape":[1],"offset":4,"byte_len":4}]})";
  EXPECT_EQ(decode_error(container_bytes(overlap, std::vector<std::uint8_t>(8))),
            ErrorCode::MalformedManifest);
  const std::string dup =
      R"({"tensors":[{"name":"a","dtype":"F32","shape":[1],"offset":0,"byte_len":4},)"
      R"({"name":"a","dtype":"F32","shape":[1],"offset":4,"byte_len":4}]})";
  EXPECT_EQ(decode_error(container_bytes(dup, std::vector<std::uint8_t>(8))),
            ErrorCode::MalformedManifest);

  auto bad_magic = container_bytes(R"({"tensors":[]})", {});
  bad_magic[0] = std::byte{'X'};
  EXPECT_EQ(decode_error(bad_magic), ErrorCode::MalformedManifest);

  auto truncated = container_bytes(R"({"tensors":[]})", {});
  truncated.resize(truncated.size() - 3);
  EXPECT_EQ(decode_error(truncated), ErrorCode::MalformedManifest);
  EXPECT_EQ(decode_error(std::vector<std::byte>(5)), ErrorCode::MalformedManifest);
}

TEST(TensorStore, GapsBetweenTensorsAreAccepted) {
  const std::string gap =
      R"({"tensors":[{"name":"a","dtype":"F32","shape":[1],"offset":4,"byte_len":4}]})";
  const auto a = decode_archive(container_bytes(gap, {9, 9, 9, 9, 0x00, 0x00, 0x80, 0x3F}));
  EXPECT_EQ(read_tensor(a, "a"), std::vector<double>{1.0});
}

TEST(TensorStore, MissingNameThrows) {
  const auto a = decode_archive(container_bytes(R"({"tensors":[]})", {}));
  try {
    (void)read_tensor(a, "missing");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NameNotFound);
  }
}

TEST(TensorStore, F64RoundTripIsBitExact) {
  TempDir dir("ts");
  std::mt19937_64 rng(7);
  auto tensors = testing_support::random_tensors(rng);
  tensors[0].values[0] = -0.0;
  tensors[0].values[1] = std::numeric_limits<double>::denorm_min();
  tensors[0].values[2] = std::numeric_limits<double>::infinity();
  ArchiveMeta meta;
  meta.step = 1200;
  meta.tokens = 5'000'000'000LL;
  meta.extra["run"] = "alpha";
  write_archive(dir / "a.mapckpt", tensors, meta);

  const auto a = open_archive(dir / "a.mapckpt");
  ASSERT_EQ(a.manifest().size(), tensors.size());
  for (const auto& t : tensors) {
    const auto back = read_tensor(a, t.name);
    ASSERT_EQ(back.size(), t.values.size());
    for (std::size_t i = 0; i < back.size(); ++i) {
      EXPECT_EQ(testing_support::bits(back[i]), testing_support::bits(t.values[i]));
    }
  }
  EXPECT_EQ(a.meta(), meta);
  EXPECT_EQ(peek_meta(dir / "a.mapckpt"), meta);

  // Saving the decoded archive reproduces the file byte for byte.
  save_archive(dir / "b.mapckpt", a);
  EXPECT_EQ(encode_archive(a), encode_archive(open_archive(dir / "b.mapckpt")));
  EXPECT_EQ(a, open_archive(dir / "b.mapckpt"));
}

TEST(TensorStore, WritesF32AsLittleEndian) {
  const std::vector<TensorData> t{{"w", Dtype::F32, {1}, {1.0}}};
  const auto a = build_archive(t, {});
  const auto bytes = a.payload(a.at("w"));
  ASSERT_EQ(bytes.size(), 4u);
  EXPECT_EQ(std::to_integer<int>(bytes[0]), 0x00);
  EXPECT_EQ(std::to_integer<int>(bytes[1]), 0x00);
  EXPECT_EQ(std::to_integer<int>(bytes[2]), 0x80);
  EXPECT_EQ(std::to_integer<int>(bytes[3]), 0x3F);
}

TEST(TensorStore, Bf16IsNotWritable) {
  const std::vector<TensorData> t{{"w", Dtype::BF16, {1}, {1.0}}};
  try {
    (void)build_archive(t, {});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::UnwritableDtype);
  }
}

TEST(TensorStore, ValueCountMustMatchShape) {
  const std::vector<TensorData> t{{"w", Dtype::F64, {3}, {1.0, 2.0}}};
  EXPECT_THROW((void)build_archive(t, {}), Error);
}

TEST(TensorStore, OpenMissingFileIsIoFailure) {
  try {
    (void)open_archive("/nonexistent/x.mapckpt");
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::IoFailure);
  }
}

TEST(TensorStore, CompatibilityReport) {
  const std::vector<TensorData> base{{"w", Dtype::F64, {2, 3}, std::vector<double>(6, 1.0)},
                                     {"b", Dtype::F64, {3}, std::vector<double>(3, 0.0)}};
  auto reshaped = base;
  reshaped[0].shape = {3, 2};
  auto retyped = base;
  retyped[1].dtype = Dtype::F32;
  auto missing = base;
  missing.pop_back();

  const std::vector<TensorArchive> same{build_archive(base, {}), build_archive(base, {})};
  EXPECT_TRUE(validate_compat(same).ok());
  EXPECT_TRUE(validate_compat(std::span(same.data(), 1)).ok());

  const std::vector<TensorArchive> shape{build_archive(base, {}), build_archive(reshaped, {})};
  const auto r = validate_compat(shape);
  ASSERT_EQ(r.issues.size(), 1u);
  EXPECT_EQ(r.issues[0].tensor, "w");
  EXPECT_EQ(r.issues[0].kind, MismatchKind::ShapeMismatch);
  EXPECT_NE(r.describe().find("[2,3]"), std::string::npos);
  EXPECT_NE(r.describe().find("[3,2]"), std::string::npos);

  const std::vector<TensorArchive> dtype{build_archive(base, {}), build_archive(retyped, {})};
  EXPECT_EQ(validate_compat(dtype).issues.at(0).kind, MismatchKind::DtypeMismatch);
  const std::vector<TensorArchive> gone{build_archive(base, {}), build_archive(missing, {})};
  EXPECT_EQ(validate_compat(gone).issues.at(0).kind, MismatchKind::MissingTensor);
  EXPECT_EQ(validate_compat(gone).issues.at(0).tensor, "b");
}
