#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

namespace indl {

struct KdeCurve {
  std::vector<double> grid;
  std::vector<double> density;
  double bandwidth = 0.0;
  std::size_t n = 0;
};

inline constexpr std::size_t kKdeGridPoints = 256;

/// 0.9 * min(sd, IQR / 1.34) * n^(-1/5); falls back to 0.1 * (max - min + 0.01)
/// when that is zero. sd uses the n-1 denominator, quartiles interpolate
/// linearly between order statistics.
double silverman_bandwidth(std::span<const double> values);

/// Gaussian KDE evaluated on evenly spaced points over [min - 4h, max + 4h].
/// Throws ValidationError on empty input or a non-positive bandwidth.
KdeCurve kde(std::span<const double> values, std::optional<double> bandwidth = std::nullopt,
             std::size_t grid_points = kKdeGridPoints);

/// Density at arbitrary x for the same estimator.
double kde_at(std::span<const double> values, double bandwidth, double x);

double trapezoid(std::span<const double> x, std::span<const double> y);

/// `x,density` rows.
void write_kde_csv(const KdeCurve& curve, const std::filesystem::path& path);

}  // namespace indl
