#include "indl/idx.hpp"

#include <fstream>
#include <sstream>
#include <string>

#include "indl/error.hpp"

namespace indl {
namespace {

std::string slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::uint32_t be32(std::string_view bytes, std::size_t offset, const char* what) {
  if (bytes.size() < offset + 4) throw MalformedFileError(std::string(what) + ": truncated header");
  std::uint32_t v = 0;
  for (std::size_t i = 0; i < 4; ++i) v = (v << 8) | static_cast<std::uint8_t>(bytes[offset + i]);
  return v;
}

}  // namespace

MnistSet parse_mnist_idx(std::string_view image_bytes, std::string_view label_bytes) {
  if (be32(image_bytes, 0, "images") != kIdxImageMagic) throw MalformedFileError("images: bad IDX magic");
  if (be32(label_bytes, 0, "labels") != kIdxLabelMagic) throw MalformedFileError("labels: bad IDX magic");

  const std::uint32_t n_images = be32(image_bytes, 4, "images");
  const std::uint32_t rows = be32(image_bytes, 8, "images");
  const std::uint32_t cols = be32(image_bytes, 12, "images");
  const std::uint32_t n_labels = be32(label_bytes, 4, "labels");
  if (rows == 0 || cols == 0 || rows > 4096 || cols > 4096) throw MalformedFileError("images: bad dimensions");

  const std::size_t image_len = std::size_t{n_images} * rows * cols;
  if (image_bytes.size() - 16 < image_len) throw MalformedFileError("images: truncated payload");
  if (label_bytes.size() - 8 < n_labels) throw MalformedFileError("labels: truncated payload");
  if (n_images != n_labels) {
    throw ValidationError("IDX count mismatch: " + std::to_string(n_images) + " images vs " +
                          std::to_string(n_labels) + " labels");
  }

  MnistSet set;
  set.rows = static_cast<int>(rows);
  set.cols = static_cast<int>(cols);
  set.pixels.assign(image_bytes.begin() + 16, image_bytes.begin() + 16 + static_cast<std::ptrdiff_t>(image_len));
  set.labels.assign(label_bytes.begin() + 8, label_bytes.begin() + 8 + n_labels);
  return set;
}

MnistSet load_mnist_idx(const std::filesystem::path& images, const std::filesystem::path& labels) {
  return parse_mnist_idx(slurp(images), slurp(labels));
}

}  // namespace indl
