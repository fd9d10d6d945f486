#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "indl/geometry.hpp"

namespace indl {

struct RasterConfig {
  int width = 224;
  int height = 224;
  /// Rendered width of a primitive whose canonical stroke is kReferenceStroke.
  double stroke_px = 2.0;
  bool antialias = true;
  std::uint8_t background = 255;
  std::uint8_t foreground = 0;

  /// Throws ValidationError.
  void validate() const;
  bool operator==(const RasterConfig&) const = default;
};

/// 8-bit grayscale, row-major.
struct RasterImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;

  RasterImage() = default;
  RasterImage(int w, int h, std::uint8_t fill) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h, fill) {}

  std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
  std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

  bool operator==(const RasterImage&) const = default;
};

/// Renders each primitive as a capsule (segment dilated by half the stroke).
/// Anti-aliased coverage is a linear ramp one pixel wide centred on the
/// capsule boundary; without anti-aliasing a pixel is inked when its centre
/// lies inside the capsule, boundary ties going to the top/left side.
/// Overlapping strokes keep the larger coverage.
RasterImage rasterize(const VectorScene& scene, const RasterConfig& cfg);

/// PNG, 8-bit grayscale, non-interlaced.
void write_image(const RasterImage& img, const std::filesystem::path& path);

/// Reads PNG (any format libpng can reduce to 8-bit gray) or binary PGM (P5).
/// Throws IoError when the file cannot be opened, MalformedFileError when it
/// cannot be decoded.
RasterImage read_image(const std::filesystem::path& path);

}  // namespace indl
