#include <cctype>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include <png.h>

#include "indl/error.hpp"
#include "indl/raster.hpp"

namespace indl {
namespace {

std::vector<unsigned char> slurp(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

RasterImage decode_png(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  if (!png_image_begin_read_from_memory(&image, bytes.data(), bytes.size())) {
    throw MalformedFileError(path.string() + ": " + image.message);
  }
  image.format = PNG_FORMAT_GRAY;
  RasterImage img(static_cast<int>(image.width), static_cast<int>(image.height), 0);
  if (!png_image_finish_read(&image, nullptr, img.pixels.data(), 0, nullptr)) {
    std::string msg = image.message;
    png_image_free(&image);
    throw MalformedFileError(path.string() + ": " + msg);
  }
  return img;
}

// Binary PGM: "P5" <ws> width <ws> height <ws> maxval <single ws> data.
RasterImage decode_pgm(const std::vector<unsigned char>& bytes, const std::filesystem::path& path) {
  std::size_t pos = 2;
  auto fail = [&](const char* what) { return MalformedFileError(path.string() + ": " + what); };
  auto next_int = [&]() {
    while (pos < bytes.size()) {
      if (bytes[pos] == '#') {
        while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
      } else if (std::isspace(bytes[pos])) {
        ++pos;
      } else {
        break;
      }
    }
    if (pos >= bytes.size() || !std::isdigit(bytes[pos])) throw fail("bad PGM header");
    long value = 0;
    while (pos < bytes.size() && std::isdigit(bytes[pos])) {
      value = value * 10 + (bytes[pos++] - '0');
      if (value > 1 << 20) throw fail("PGM dimension too large");
    }
    return static_cast<int>(value);
  };
  const int w = next_int();
  const int h = next_int();
  const int maxval = next_int();
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 255) throw fail("unsupported PGM header");
  if (pos >= bytes.size() || !std::isspace(bytes[pos])) throw fail("bad PGM header");
  ++pos;
  const std::size_t count = static_cast<std::size_t>(w) * h;
  if (bytes.size() - pos < count) throw fail("truncated PGM data");
  RasterImage img(w, h, 0);
  for (std::size_t i = 0; i < count; ++i) {
    const unsigned v = bytes[pos + i];
    img.pixels[i] = static_cast<std::uint8_t>(maxval == 255 ? v : (std::min<unsigned>(v, maxval) * 255 + maxval / 2) / maxval);
  }
  return img;
}

}  // namespace

void write_image(const RasterImage& img, const std::filesystem::path& path) {
  if (img.width <= 0 || img.height <= 0 || img.pixels.size() != static_cast<std::size_t>(img.width) * img.height) {
    throw ValidationError("image dimensions do not match its pixel buffer");
  }
  png_image image;
  std::memset(&image, 0, sizeof image);
  image.version = PNG_IMAGE_VERSION;
  image.width = static_cast<png_uint_32>(img.width);
  image.height = static_cast<png_uint_32>(img.height);
  image.format = PNG_FORMAT_GRAY;
  if (!png_image_write_to_file(&image, path.c_str(), 0, img.pixels.data(), 0, nullptr)) {
    throw IoError("cannot write " + path.string() + ": " + image.message);
  }
}

RasterImage read_image(const std::filesystem::path& path) {
  const std::vector<unsigned char> bytes = slurp(path);
  static constexpr unsigned char kPngSignature[8] = {0x89, 'P', 'N', 'G', '\r', '\n', 0x1a, '\n'};
  if (bytes.size() >= 8 && std::memcmp(bytes.data(), kPngSignature, 8) == 0) return decode_png(bytes, path);
  if (bytes.size() >= 2 && bytes[0] == 'P' && bytes[1] == '5') return decode_pgm(bytes, path);
  throw MalformedFileError(path.string() + ": not a PNG or binary PGM file");
}

}  // namespace indl
