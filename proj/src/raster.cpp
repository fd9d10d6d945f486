#include "indl/raster.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "indl/error.hpp"

namespace indl {
namespace {

struct Vec {
  double x;
  double y;
};

// Nearest point of segment ab to p, and the offset p - nearest.
Vec offset_from_segment(const Vec& a, const Vec& b, const Vec& p) {
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) {
    t = ((p.x - a.x) * dx + (p.y - a.y) * dy) / len2;
    t = std::clamp(t, 0.0, 1.0);
  }
  const double qx = a.x + t * dx;
  const double qy = a.y + t * dy;
  return {p.x - qx, p.y - qy};
}

double coverage_at(const Vec& a, const Vec& b, const Vec& p, double radius, bool antialias) {
  const Vec n = offset_from_segment(a, b, p);
  const double d2 = n.x * n.x + n.y * n.y;
  if (antialias) {
    const double d = std::sqrt(d2);
    return std::clamp(radius + 0.5 - d, 0.0, 1.0);
  }
  const double r2 = radius * radius;
  if (d2 < r2) return 1.0;
  if (d2 > r2) return 0.0;
  // On the boundary: keep it if the shape lies below or to the right.
  return (n.y < 0.0 || (n.y == 0.0 && n.x < 0.0)) ? 1.0 : 0.0;
}

void draw_segment(std::vector<double>& coverage, int width, int height, const Vec& a, const Vec& b,
                  double radius, bool antialias) {
  const double reach = antialias ? radius + 0.5 : radius;
  const double min_x = std::min(a.x, b.x) - reach;
  const double max_x = std::max(a.x, b.x) + reach;
  const double min_y = std::min(a.y, b.y) - reach;
  const double max_y = std::max(a.y, b.y) + reach;

  const int row_lo = std::max(0, static_cast<int>(std::ceil(min_y - 0.5)) - 1);
  const int row_hi = std::min(height - 1, static_cast<int>(std::floor(max_y - 0.5)) + 1);
  const double dx = b.x - a.x;
  const double dy = b.y - a.y;
  const double len = std::sqrt(dx * dx + dy * dy);

  for (int j = row_lo; j <= row_hi; ++j) {
    const double yc = j + 0.5;
    double lo = min_x;
    double hi = max_x;
    // Clip to the band around the infinite line; the capsule lies inside it.
    if (std::abs(dy) > 1e-12) {
      const double x_on_line = a.x + (yc - a.y) * dx / dy;
      const double half = reach * len / std::abs(dy);
      lo = std::max(lo, x_on_line - half);
      hi = std::min(hi, x_on_line + half);
    }
    if (hi < lo) continue;
    const int col_lo = std::max(0, static_cast<int>(std::ceil(lo - 0.5)) - 1);
    const int col_hi = std::min(width - 1, static_cast<int>(std::floor(hi - 0.5)) + 1);
    double* row = coverage.data() + static_cast<std::size_t>(j) * width;
    for (int i = col_lo; i <= col_hi; ++i) {
      const double c = coverage_at(a, b, {i + 0.5, yc}, radius, antialias);
      if (c > row[i]) row[i] = c;
    }
  }
}

}  // namespace

void RasterConfig::validate() const {
  if (width < 32 || height < 32) throw ValidationError("raster width and height must be >= 32");
  if (!(stroke_px >= 0.5)) throw ValidationError("stroke_px must be >= 0.5");
  if (background == foreground) throw ValidationError("background and foreground must differ");
}

RasterImage rasterize(const VectorScene& scene, const RasterConfig& cfg) {
  cfg.validate();
  std::vector<double> coverage(static_cast<std::size_t>(cfg.width) * cfg.height, 0.0);
  const double sx = cfg.width;
  const double sy = cfg.height;

  for (const Primitive& prim : scene.primitives) {
    if (prim.points.empty()) continue;
    const double radius = 0.5 * cfg.stroke_px * (prim.stroke_width / kReferenceStroke);
    auto to_px = [&](const Point& p) { return Vec{p.x() * sx, p.y() * sy}; };
    if (prim.points.size() == 1) {
      const Vec a = to_px(prim.points.front());
      draw_segment(coverage, cfg.width, cfg.height, a, a, radius, cfg.antialias);
      continue;
    }
    for (std::size_t k = 1; k < prim.points.size(); ++k) {
      draw_segment(coverage, cfg.width, cfg.height, to_px(prim.points[k - 1]), to_px(prim.points[k]), radius,
                   cfg.antialias);
    }
  }

  RasterImage img(cfg.width, cfg.height, cfg.background);
  const double bg = cfg.background;
  const double span = static_cast<double>(cfg.foreground) - bg;
  for (std::size_t i = 0; i < coverage.size(); ++i) {
    if (coverage[i] > 0.0) img.pixels[i] = static_cast<std::uint8_t>(std::floor(bg + span * coverage[i] + 0.5));
  }
  return img;
}

}  // namespace indl
