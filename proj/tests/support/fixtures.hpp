#pragma once

#include <cstdint>
#include <cmath>
#include <cstring>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include <unistd.h>

#include "mapkit/tensor_store.hpp"

namespace testing_support {

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag) {
    static std::uint64_t counter = 0;
    path_ = std::filesystem::temp_directory_path() /
            ("mapkit-" + tag + "-" + std::to_string(::getpid()) + "-" + std::to_string(counter++));
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TempDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

// Raw container bytes: magic, u64 LE manifest length, manifest, payload.
inline std::vector<std::byte> container_bytes(const std::string& manifest,
                                              const std::vector<std::uint8_t>& payload) {
  std::vector<std::byte> out;
  for (char c : std::string("MAPCKPT1")) out.push_back(static_cast<std::byte>(c));
  std::uint64_t len = manifest.size();
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::byte>((len >> (8 * i)) & 0xFF));
  for (char c : manifest) out.push_back(static_cast<std::byte>(c));
  for (auto b : payload) out.push_back(static_cast<std::byte>(b));
  return out;
}

// Values spread over several binades with random signs, no subnormals.
inline double random_value(std::mt19937_64& rng) {
  std::uniform_real_distribution<double> mant(0.5, 1.0);
  std::uniform_int_distribution<int> exp(-30, 30);
  const double v = std::ldexp(mant(rng), exp(rng));
  return rng() & 1 ? -v : v;
}

inline std::vector<mapkit::TensorData> random_tensors(std::mt19937_64& rng,
                                                      mapkit::Dtype dtype = mapkit::Dtype::F64) {
  std::vector<mapkit::TensorData> tensors;
  const std::vector<std::vector<std::uint64_t>> shapes{{3, 5}, {17}, {2, 2, 9}, {1}};
  int i = 0;
  for (const auto& shape : shapes) {
    mapkit::TensorData t{"layer" + std::to_string(i++) + ".weight", dtype, shape, {}};
    std::uint64_t count = 1;
    for (auto d : shape) count *= d;
    for (std::uint64_t j = 0; j < count; ++j) t.values.push_back(random_value(rng));
    tensors.push_back(std::move(t));
  }
  return tensors;
}

inline std::uint64_t bits(double v) {
  std::uint64_t b;
  std::memcpy(&b, &v, sizeof b);
  return b;
}

}  // namespace testing_support
