#include "indl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "indl/error.hpp"
#include "indl/random.hpp"

namespace indl {
namespace {

// Coordinates of the length/collinearity families live on a dyadic grid so
// translations and differences are exact in double precision. Directions and
// lengths use a coarser grid so their products land back on kGrid.
constexpr double kGrid = 0x1.0p-24;
constexpr double kCoarse = 0x1.0p-12;
// Sampled deviations take one of this many evenly spaced values above the floor.
constexpr std::uint64_t kDeviationLevels = 4096;

constexpr double kDegree = std::numbers::pi / 180.0;

double snap(double x, double step) { return std::round(x / step) * step; }
double snap_up(double x, double step) { return std::ceil(x / step) * step; }
double snap_toward_zero(double x, double step) { return std::trunc(x / step) * step; }
double snap_away(double x, double step) {
  return x < 0.0 ? -snap_up(-x, step) : snap_up(x, step);
}

Point grid_point(double x, double y) { return {snap(x, kGrid), snap(y, kGrid)}; }

Primitive segment(const Point& a, const Point& b) {
  return {PrimitiveKind::Segment, {a, b}, kReferenceStroke};
}

double angle_deg(double radians) { return radians / kDegree; }

// Two vertical test lines, either straight or bowed as symmetric circular
// arcs, under a fan of lines radiating from the centre.
VectorScene hering_wundt(const StimulusParams& p) {
  constexpr double kTestHalfGap = 0.15;
  constexpr double kTop = 0.15;
  constexpr double kBottom = 0.85;
  constexpr int kArcPoints = 33;
  constexpr double kFanRadius = 0.40;

  VectorScene scene;
  const double half_chord = (kBottom - kTop) / 2.0;
  const double sagitta = p.deviation > 0.0 ? snap_up(p.deviation, kGrid) : 0.0;
  const double radius = sagitta > 0.0 ? (half_chord * half_chord + sagitta * sagitta) / (2.0 * sagitta) : 0.0;

  for (int side : {-1, 1}) {
    const double chord_x = snap(0.5 + side * kTestHalfGap, kGrid);
    // Positive sign bows both lines away from the centre.
    const double outward = side * p.deviation_sign;
    Primitive line{PrimitiveKind::Polyline, {}, kReferenceStroke};
    line.points.reserve(kArcPoints);
    for (int j = 0; j < kArcPoints; ++j) {
      const double y = snap(kTop + (kBottom - kTop) * j / (kArcPoints - 1), kGrid);
      double offset = 0.0;
      if (sagitta > 0.0 && j != 0 && j != kArcPoints - 1) {
        if (j == kArcPoints / 2) {
          offset = sagitta;
        } else {
          const double dy = (kTop + (kBottom - kTop) * j / (kArcPoints - 1)) - 0.5;
          offset = snap(std::sqrt(radius * radius - dy * dy) - (radius - sagitta), kGrid);
        }
      }
      line.points.emplace_back(chord_x + outward * offset, y);
    }
    scene.primitives.push_back(std::move(line));
  }

  const double strength = strength_of(p);
  const int n = context_line_count(strength);
  const double half_angle = p.strength_raw * kDegree;
  for (int k = 0; k < n; ++k) {
    const double beta = -half_angle + 2.0 * half_angle * k / (n - 1);
    const double dx = kFanRadius * std::cos(beta);
    const double dy = kFanRadius * std::sin(beta);
    scene.primitives.push_back(segment(grid_point(0.5 - dx, 0.5 - dy), grid_point(0.5 + dx, 0.5 + dy)));
  }
  return scene;
}

// Upper shaft carries outward-pointing arrowheads (<-->), lower shaft
// inward-pointing tails (>--<).
VectorScene muller_lyer(const StimulusParams& p) {
  constexpr double kBaseLength = 0.40;
  constexpr double kFinLength = 0.08;
  const double upper_y = snap(0.35, kGrid);
  const double lower_y = snap(0.65, kGrid);

  const double dev = p.deviation > 0.0 ? snap_up(p.deviation, kCoarse) : 0.0;
  const double base = snap(kBaseLength, kCoarse);
  const double upper_len = p.deviation_sign > 0 ? base + dev : base;
  const double lower_len = p.deviation_sign > 0 ? base : base + dev;

  const double theta = p.strength_raw * kDegree;
  const double fx = snap(kFinLength * std::cos(theta), kGrid);
  const double fy = snap(kFinLength * std::sin(theta), kGrid);

  VectorScene scene;
  const Point ul(0.5 - upper_len / 2.0, upper_y), ur(0.5 + upper_len / 2.0, upper_y);
  const Point ll(0.5 - lower_len / 2.0, lower_y), lr(0.5 + lower_len / 2.0, lower_y);
  scene.primitives.push_back(segment(ul, ur));
  scene.primitives.push_back(segment(ll, lr));

  // Fins folding back over the shaft point the arrowheads outward.
  for (double vy : {-fy, fy}) {
    scene.primitives.push_back(segment(ul, ul + Point(fx, vy)));
    scene.primitives.push_back(segment(ur, ur + Point(-fx, vy)));
  }
  for (double vy : {-fy, fy}) {
    scene.primitives.push_back(segment(ll, ll + Point(-fx, vy)));
    scene.primitives.push_back(segment(lr, lr + Point(fx, vy)));
  }
  return scene;
}

// A transversal rising to the right, interrupted by two vertical occluders.
// Every transversal point is centre + s * dir with s and dir on kCoarse, so
// a collinear exit segment has an exactly zero cross product.
VectorScene poggendorff(const StimulusParams& p) {
  constexpr double kOccluderGap = 0.12;
  constexpr double kOuterExtent = 0.28;
  constexpr double kOccluderTop = 0.10;
  constexpr double kOccluderBottom = 0.90;

  const double alpha = p.strength_raw * kDegree;
  const Point dir(snap_away(std::cos(alpha), kCoarse), -snap_away(std::sin(alpha), kCoarse));
  const double half_gap = snap(kOccluderGap / 2.0, kGrid);
  const double inner = snap(half_gap / dir.x(), kCoarse);
  const double outer = snap(kOuterExtent, kCoarse);

  // Shifting the exit segment along the occluder by v moves it a
  // perpendicular distance v * dir.x / |dir| off the entering line.
  double shift = 0.0;
  if (p.deviation > 0.0) {
    shift = snap_up(p.deviation * dir.norm() / dir.x(), kGrid) + kGrid;
  }
  const double exit_shift = p.deviation_sign > 0 ? -shift : shift;
  const Point centre(0.5, snap(0.5 - exit_shift / 2.0, kGrid));
  const Point offset(0.0, exit_shift);

  VectorScene scene;
  scene.primitives.push_back(segment(grid_point(0.5 - half_gap, kOccluderTop), grid_point(0.5 - half_gap, kOccluderBottom)));
  scene.primitives.push_back(segment(grid_point(0.5 + half_gap, kOccluderTop), grid_point(0.5 + half_gap, kOccluderBottom)));
  scene.primitives.push_back(segment(centre - outer * dir, centre - inner * dir));
  scene.primitives.push_back(segment(centre + inner * dir + offset, centre + outer * dir + offset));
  return scene;
}

VectorScene vertical_horizontal(const StimulusParams& p) {
  constexpr double kLength = 0.40;
  const double length = snap(kLength, kCoarse);
  const double left = snap(0.30, kGrid);
  const double baseline = snap(0.72, kGrid);
  const double dev = p.deviation > 0.0 ? snap_up(p.deviation, kCoarse) : 0.0;
  const double vertical_len = length + p.deviation_sign * dev;
  const double joint_x = snap(left + p.strength_raw * length, kGrid);

  VectorScene scene;
  scene.primitives.push_back(segment({left, baseline}, {left + length, baseline}));
  scene.primitives.push_back(segment({joint_x, baseline}, {joint_x, baseline - vertical_len}));
  return scene;
}

// Four long lines with hatches at fixed positions along each line. Not
// grid-snapped: hatch midpoints must stay on their line to 1e-12.
VectorScene zollner(const StimulusParams& p) {
  constexpr int kLines = 4;
  constexpr int kHatches = 9;
  constexpr double kHalfLength = 0.38;
  constexpr double kHatchHalf = 0.05;

  VectorScene scene;
  std::array<Point, kLines> mids;
  std::array<Point, kLines> dirs;
  for (int i = 0; i < kLines; ++i) {
    const double tilt = p.deviation_sign * (i - 1.5) * p.deviation * kDegree;
    mids[i] = Point(0.2 + 0.2 * i, 0.5);
    dirs[i] = Point(std::sin(tilt), std::cos(tilt));
    scene.primitives.push_back(segment(mids[i] - kHalfLength * dirs[i], mids[i] + kHalfLength * dirs[i]));
  }
  const double phi = p.strength_raw * kDegree;
  for (int i = 0; i < kLines; ++i) {
    const double turn = (i % 2 == 0) ? phi : -phi;
    const double c = std::cos(turn), s = std::sin(turn);
    const Point hatch(kHatchHalf * (c * dirs[i].x() - s * dirs[i].y()), kHatchHalf * (s * dirs[i].x() + c * dirs[i].y()));
    for (int j = 0; j < kHatches; ++j) {
      const double along = kHalfLength * (-0.8 + 0.2 * j);
      const Point centre = mids[i] + along * dirs[i];
      scene.primitives.push_back(segment(centre - hatch, centre + hatch));
    }
  }
  return scene;
}

void translate(VectorScene& scene, const Point& by) {
  for (auto& prim : scene.primitives) {
    for (auto& pt : prim.points) pt += by;
  }
}

double cross(const Point& a, const Point& b) { return a.x() * b.y() - a.y() * b.x(); }

double point_line_distance(const Point& a, const Point& b, const Point& q) {
  const Point d = b - a;
  return std::abs(cross(d, q - a)) / d.norm();
}

const Primitive& primitive_at(const VectorScene& scene, std::size_t i) {
  if (i >= scene.primitives.size()) throw ValidationError("scene has too few primitives for its family");
  return scene.primitives[i];
}

}  // namespace

bool Primitive::operator==(const Primitive& other) const {
  if (kind != other.kind || stroke_width != other.stroke_width || points.size() != other.points.size()) return false;
  for (std::size_t i = 0; i < points.size(); ++i) {
    if (points[i] != other.points[i]) return false;
  }
  return true;
}

std::string_view to_string(IllusionFamily family) {
  switch (family) {
    case IllusionFamily::HeringWundt: return "hering-wundt";
    case IllusionFamily::MullerLyer: return "muller-lyer";
    case IllusionFamily::Poggendorff: return "poggendorff";
    case IllusionFamily::VerticalHorizontal: return "vertical-horizontal";
    case IllusionFamily::Zollner: return "zollner";
  }
  return "unknown";
}

std::string_view to_string(ClassLabel label) {
  return label == ClassLabel::Positive ? "positive" : "negative";
}

IllusionFamily parse_family(std::string_view text) {
  std::string key(text);
  std::transform(key.begin(), key.end(), key.begin(), [](unsigned char c) {
    return c == '_' ? '-' : static_cast<char>(std::tolower(c));
  });
  for (IllusionFamily f : kAllFamilies) {
    if (key == to_string(f)) return f;
    if (key == "dataset0" + std::to_string(dataset_index(f))) return f;
  }
  throw ValidationError("unknown illusion family '" + std::string(text) + "'");
}

ClassLabel parse_label(std::string_view text) {
  if (text == "positive") return ClassLabel::Positive;
  if (text == "negative") return ClassLabel::Negative;
  throw ValidationError("unknown label '" + std::string(text) + "'");
}

int dataset_index(IllusionFamily family) { return static_cast<int>(family) + 1; }

const FamilyTraits& traits(IllusionFamily family) {
  static const std::array<FamilyTraits, 5> table = {{
      {{30.0, 80.0}, {0.01, 0.05}, false},  // fan half-angle; test-line sagitta
      {{15.0, 75.0}, {0.02, 0.10}, true},   // fin angle; shaft length difference
      {{20.0, 70.0}, {0.02, 0.10}, true},   // transversal angle; exit offset
      {{0.0, 1.0}, {0.02, 0.10}, false},    // joint position; length difference
      {{10.0, 80.0}, {1.0, 6.0}, true},     // hatch angle; convergence in degrees
  }};
  return table[static_cast<std::size_t>(family)];
}

int context_line_count(double strength) {
  return static_cast<int>(std::lround(8.0 + 40.0 * strength));
}

StimulusParams sample_params(IllusionFamily family, ClassLabel label, std::uint64_t rng_seed) {
  const FamilyTraits& t = traits(family);
  Rng rng(hash64(hash64(rng_seed, static_cast<std::uint64_t>(family)), static_cast<std::uint64_t>(label)));

  StimulusParams p;
  p.family = family;
  p.strength_raw = std::min(rng.uniform(t.strength_raw.lo, t.strength_raw.hi), t.strength_raw.hi);
  const std::uint64_t level = rng.below(kDeviationLevels) + 1;
  const int sign = rng.sign();
  p.nuisance_seed = rng.next();
  if (label == ClassLabel::Negative) {
    const double span = t.deviation.hi - t.deviation.lo;
    p.deviation = std::min(t.deviation.lo + span * static_cast<double>(level) / kDeviationLevels, t.deviation.hi);
    p.deviation_sign = sign;
  }
  return p;
}

void validate(const StimulusParams& p) {
  const FamilyTraits& t = traits(p.family);
  if (!t.strength_raw.contains(p.strength_raw)) {
    throw ValidationError("strength_raw " + std::to_string(p.strength_raw) + " outside the " +
                          std::string(to_string(p.family)) + " interval");
  }
  if (!std::isfinite(p.deviation) || (p.deviation != 0.0 && !t.deviation.contains(p.deviation))) {
    throw ValidationError("deviation " + std::to_string(p.deviation) + " outside the " +
                          std::string(to_string(p.family)) + " floor/ceiling");
  }
  if (p.deviation_sign != 1 && p.deviation_sign != -1) throw ValidationError("deviation_sign must be +1 or -1");
}

VectorScene build_scene(const StimulusParams& params) {
  validate(params);
  VectorScene scene;
  switch (params.family) {
    case IllusionFamily::HeringWundt: scene = hering_wundt(params); break;
    case IllusionFamily::MullerLyer: scene = muller_lyer(params); break;
    case IllusionFamily::Poggendorff: scene = poggendorff(params); break;
    case IllusionFamily::VerticalHorizontal: scene = vertical_horizontal(params); break;
    case IllusionFamily::Zollner: scene = zollner(params); break;
  }
  Rng rng(params.nuisance_seed);
  const double jx = snap_toward_zero(rng.uniform(-kJitter, kJitter), kGrid);
  const double jy = snap_toward_zero(rng.uniform(-kJitter, kJitter), kGrid);
  translate(scene, Point(jx, jy));
  return scene;
}

ClassLabel label_of(const StimulusParams& params) {
  return params.deviation == 0.0 ? ClassLabel::Positive : ClassLabel::Negative;
}

double strength_of(const StimulusParams& params) {
  const FamilyTraits& t = traits(params.family);
  const double span = t.strength_raw.hi - t.strength_raw.lo;
  const double s = t.strength_decreasing ? (t.strength_raw.hi - params.strength_raw) / span
                                         : (params.strength_raw - t.strength_raw.lo) / span;
  return std::clamp(s, 0.0, 1.0);
}

double veridical_violation(const VectorScene& scene, IllusionFamily family) {
  switch (family) {
    case IllusionFamily::HeringWundt: {
      double worst = 0.0;
      for (std::size_t i = 0; i < 2; ++i) {
        const auto& pts = primitive_at(scene, i).points;
        for (const Point& q : pts) worst = std::max(worst, point_line_distance(pts.front(), pts.back(), q));
      }
      return worst;
    }
    case IllusionFamily::MullerLyer: {
      const auto& upper = primitive_at(scene, 0).points;
      const auto& lower = primitive_at(scene, 1).points;
      return std::abs((upper[1] - upper[0]).norm() - (lower[1] - lower[0]).norm());
    }
    case IllusionFamily::Poggendorff: {
      const auto& enter = primitive_at(scene, 2).points;
      const auto& exit = primitive_at(scene, 3).points;
      return std::max(point_line_distance(enter[0], enter[1], exit[0]),
                      point_line_distance(enter[0], enter[1], exit[1]));
    }
    case IllusionFamily::VerticalHorizontal: {
      const auto& h = primitive_at(scene, 0).points;
      const auto& v = primitive_at(scene, 1).points;
      return std::abs((h[1] - h[0]).norm() - (v[1] - v[0]).norm());
    }
    case IllusionFamily::Zollner: {
      double worst = 0.0;
      double previous = 0.0;
      for (std::size_t i = 0; i < 4; ++i) {
        const auto& pts = primitive_at(scene, i).points;
        const Point d = pts[1] - pts[0];
        const double angle = angle_deg(std::atan2(d.x(), d.y()));
        if (i > 0) worst = std::max(worst, std::abs(angle - previous));
        previous = angle;
      }
      return worst;
    }
  }
  return 0.0;
}

VectorScene mirror_x(const VectorScene& scene) {
  VectorScene out = scene;
  for (auto& prim : out.primitives) {
    for (auto& pt : prim.points) pt.x() = 1.0 - pt.x();
  }
  return out;
}

}  // namespace indl
