#include "indl/kde.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numbers>

#include <Eigen/Core>

#include "indl/error.hpp"

namespace indl {
namespace {

constexpr double kFallbackEpsilon = 0.01;

double quantile_sorted(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  return sorted[lo] + (pos - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

}  // namespace

double silverman_bandwidth(std::span<const double> values) {
  if (values.empty()) throw ValidationError("kde: empty input");
  const Eigen::Map<const Eigen::ArrayXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  const double n = static_cast<double>(values.size());
  const double sd = values.size() > 1 ? std::sqrt((v - v.mean()).square().sum() / (n - 1.0)) : 0.0;
  std::vector<double> sorted(values.begin(), values.end());
  std::sort(sorted.begin(), sorted.end());
  const double iqr = quantile_sorted(sorted, 0.75) - quantile_sorted(sorted, 0.25);
  const double h = 0.9 * std::min(sd, iqr / 1.34) * std::pow(n, -0.2);
  if (h > 0.0) return h;
  return 0.1 * (sorted.back() - sorted.front() + kFallbackEpsilon);
}

double kde_at(std::span<const double> values, double bandwidth, double x) {
  if (values.empty()) throw ValidationError("kde: empty input");
  if (!(bandwidth > 0.0)) throw ValidationError("kde: bandwidth must be > 0");
  const Eigen::Map<const Eigen::ArrayXd> v(values.data(), static_cast<Eigen::Index>(values.size()));
  const double norm = 1.0 / (static_cast<double>(values.size()) * bandwidth * std::sqrt(2.0 * std::numbers::pi));
  return norm * (-0.5 * ((x - v) / bandwidth).square()).exp().sum();
}

KdeCurve kde(std::span<const double> values, std::optional<double> bandwidth, std::size_t grid_points) {
  if (values.empty()) throw ValidationError("kde: empty input");
  if (bandwidth && !(*bandwidth > 0.0)) throw ValidationError("kde: bandwidth must be > 0");
  if (grid_points < 2) throw ValidationError("kde: need at least 2 grid points");

  KdeCurve curve;
  curve.n = values.size();
  curve.bandwidth = bandwidth ? *bandwidth : silverman_bandwidth(values);
  const auto [lo_it, hi_it] = std::minmax_element(values.begin(), values.end());
  const double lo = *lo_it - 4.0 * curve.bandwidth;
  const double hi = *hi_it + 4.0 * curve.bandwidth;
  const Eigen::ArrayXd grid = Eigen::ArrayXd::LinSpaced(static_cast<Eigen::Index>(grid_points), lo, hi);
  curve.grid.assign(grid.data(), grid.data() + grid.size());
  curve.density.resize(grid_points);
  for (std::size_t i = 0; i < grid_points; ++i) curve.density[i] = kde_at(values, curve.bandwidth, curve.grid[i]);
  return curve;
}

double trapezoid(std::span<const double> x, std::span<const double> y) {
  double sum = 0.0;
  for (std::size_t i = 1; i < x.size() && i < y.size(); ++i) sum += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
  return sum;
}

void write_kde_csv(const KdeCurve& curve, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out.precision(17);
  out << "x,density\n";
  for (std::size_t i = 0; i < curve.grid.size(); ++i) out << curve.grid[i] << ',' << curve.density[i] << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace indl
