#pragma once

#include <array>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "indl/metrics.hpp"
#include "json.hpp"

namespace indl {

inline constexpr std::size_t kDatasetCount = 5;

/// One benchmark row. All scores are fractions in [0,1].
struct ModelRecord {
  std::string name;
  std::array<std::optional<double>, kDatasetCount> recall;
  std::optional<double> mean_recall;
  std::optional<double> imagenet_top1;
  std::optional<double> imagenet_top5;
  std::optional<int> year;

  /// Unweighted mean of the five recalls; nullopt if any is missing.
  std::optional<double> arithmetic_mean() const;
};

/// Values above 1 are read as percentages.
double as_fraction(double value);

/// CSV with header `year,model,d01,d02,d03,d04,d05,mean,top1,top5`. Empty
/// cells are missing values; a trailing '%' is allowed.
std::vector<ModelRecord> read_benchmark_csv(const std::filesystem::path& path);
std::vector<ModelRecord> parse_benchmark_csv(std::string_view text);

/// Groups evaluation reports by model name into benchmark rows, one recall
/// column per illusion family. mean_recall is the arithmetic mean when all
/// five are present.
std::vector<ModelRecord> records_from_reports(std::span<const EvalReport> reports);

enum class MeanSource { Reported, Recomputed };

std::string_view to_string(MeanSource source);
MeanSource parse_mean_source(std::string_view text);

struct RankedModel {
  std::size_t rank = 0;
  double mean = 0.0;
  ModelRecord model;
};

struct RankingTable {
  MeanSource source = MeanSource::Reported;
  /// Descending mean, ties by ascending name.
  std::vector<RankedModel> rows;
  /// Discrepancies between reported and arithmetic means (recomputed mode).
  std::vector<std::string> notes;
};

/// Reported means differing from the arithmetic mean by more than this
/// (0.01 percentage points) are noted in recomputed mode.
inline constexpr double kMeanDiscrepancyTolerance = 1e-4;

RankingTable rank_models(std::vector<ModelRecord> records, MeanSource source);

struct TrendPoint {
  std::string name;
  std::optional<int> year;
  double indl_mean = 0.0;
  double imagenet_top1 = 0.0;
};

struct TrendReport {
  /// Sorted by year (missing years last), then name.
  std::vector<TrendPoint> series;
  double spearman_rho = 0.0;
};

/// Ranks with ties sharing their average rank (1-based).
std::vector<double> average_ranks(std::span<const double> values);

/// Pearson correlation of average ranks.
double spearman(std::span<const double> a, std::span<const double> b);

/// Uses the reported mean when present, else the arithmetic mean. Needs at
/// least two models with both an InDL mean and an ImageNet top-1.
TrendReport trend_compare(std::span<const ModelRecord> records);

nlohmann::ordered_json to_json(const RankingTable& table);
nlohmann::ordered_json to_json(const TrendReport& report);
void write_ranking_csv(const RankingTable& table, const std::filesystem::path& path);
void write_trend_csv(const TrendReport& report, const std::filesystem::path& path);

}  // namespace indl
