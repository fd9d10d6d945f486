#pragma once

#include <cstdint>
#include <filesystem>
#include <string_view>
#include <vector>

namespace indl {

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;  // 2051
inline constexpr std::uint32_t kIdxLabelMagic = 0x00000801;  // 2049

struct MnistSet {
  int rows = 0;
  int cols = 0;
  /// count * rows * cols bytes, image-major.
  std::vector<std::uint8_t> pixels;
  std::vector<std::uint8_t> labels;

  std::size_t size() const { return labels.size(); }
  const std::uint8_t* image(std::size_t i) const { return pixels.data() + i * static_cast<std::size_t>(rows) * cols; }
};

/// Bad magic or truncation: MalformedFileError. Count mismatch: ValidationError.
MnistSet load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels);

MnistSet parse_mnist_idx(std::string_view image_bytes, std::string_view label_bytes);

}  // namespace indl
