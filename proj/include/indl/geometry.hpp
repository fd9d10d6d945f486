#pragma once

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include <Eigen/Core>

namespace indl {

enum class IllusionFamily { HeringWundt, MullerLyer, Poggendorff, VerticalHorizontal, Zollner };

inline constexpr std::array<IllusionFamily, 5> kAllFamilies = {
    IllusionFamily::HeringWundt, IllusionFamily::MullerLyer, IllusionFamily::Poggendorff,
    IllusionFamily::VerticalHorizontal, IllusionFamily::Zollner};

enum class ClassLabel { Positive, Negative };

std::string_view to_string(IllusionFamily family);
std::string_view to_string(ClassLabel label);

/// Accepts the canonical names ("hering-wundt", "muller-lyer", "poggendorff",
/// "vertical-horizontal", "zollner"), underscores for dashes, and the
/// benchmark aliases "dataset01".."dataset05". Throws ValidationError.
IllusionFamily parse_family(std::string_view text);
ClassLabel parse_label(std::string_view text);

/// 1-based benchmark column ("dataset01" is 1).
int dataset_index(IllusionFamily family);

struct Interval {
  double lo;
  double hi;
  bool contains(double v) const { return v >= lo && v <= hi; }
};

/// Fixed per-family ranges. Angles are in degrees; lengths in canonical units.
struct FamilyTraits {
  Interval strength_raw;
  Interval deviation;
  /// True when a smaller raw value produces a stronger illusion.
  bool strength_decreasing;
};

const FamilyTraits& traits(IllusionFamily family);

struct StimulusParams {
  IllusionFamily family = IllusionFamily::HeringWundt;
  double strength_raw = 0.0;
  double deviation = 0.0;
  int deviation_sign = 1;
  std::uint64_t nuisance_seed = 0;

  bool operator==(const StimulusParams&) const = default;
};

using Point = Eigen::Vector2d;

enum class PrimitiveKind { Segment, Polyline };

struct Primitive {
  PrimitiveKind kind = PrimitiveKind::Segment;
  std::vector<Point> points;
  double stroke_width = 0.0;

  bool operator==(const Primitive& other) const;
};

/// Stroked primitives on the canonical [0,1]^2 canvas, y pointing down.
///
/// Primitive order is part of the contract and is what veridical_violation
/// relies on:
///   HeringWundt         [0] left test line, [1] right test line, then the fan
///   MullerLyer          [0] upper shaft, [1] lower shaft, then 8 fins
///   Poggendorff         [0] left occluder, [1] right occluder, [2] entering, [3] exiting
///   VerticalHorizontal  [0] horizontal, [1] vertical
///   Zollner             [0..3] long lines, then hatches line by line
struct VectorScene {
  std::vector<Primitive> primitives;

  bool operator==(const VectorScene&) const = default;
};

/// Canonical stroke width written into every built scene (2 px at 224^2).
inline constexpr double kReferenceStroke = 2.0 / 224.0;
/// Construction margin; every scene stays inside [kMargin, 1 - kMargin]^2.
inline constexpr double kMargin = 0.05;
/// Translation jitter bound per axis.
inline constexpr double kJitter = 0.02;

/// Number of fan lines for a HeringWundt stimulus of normalized strength s.
int context_line_count(double strength);

StimulusParams sample_params(IllusionFamily family, ClassLabel label, std::uint64_t rng_seed);

/// Throws ValidationError when params break their interval invariants.
void validate(const StimulusParams& params);

VectorScene build_scene(const StimulusParams& params);

ClassLabel label_of(const StimulusParams& params);

/// Affine map of strength_raw onto [0,1], increasing with illusion strength.
double strength_of(const StimulusParams& params);

/// Measured violation of the family's veridical property, read back from
/// the scene geometry. Zero means the property holds exactly:
///   HeringWundt         max point-to-chord distance over both test lines
///   MullerLyer          |upper shaft length - lower shaft length|
///   Poggendorff         max distance of the exit endpoints from the entering line
///   VerticalHorizontal  |horizontal length - vertical length|
///   Zollner             max angle between successive long lines, degrees
double veridical_violation(const VectorScene& scene, IllusionFamily family);

/// Reflection about x = 0.5.
VectorScene mirror_x(const VectorScene& scene);

}  // namespace indl
