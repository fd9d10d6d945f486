#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "indl/geometry.hpp"
#include "indl/raster.hpp"
#include "json.hpp"

namespace indl {

enum class Split { Train, Val, Test };

std::string_view to_string(Split split);
Split parse_split(std::string_view text);

struct SplitRatios {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;

  bool operator==(const SplitRatios&) const = default;
};

struct DatasetConfig {
  IllusionFamily family = IllusionFamily::Poggendorff;
  std::size_t total = 10000;
  double positive_ratio = 0.3;
  SplitRatios split;
  std::uint64_t master_seed = 0;
  RasterConfig raster;
  std::filesystem::path out_dir;
  /// Rendering threads. Output does not depend on this value.
  unsigned workers = 1;

  void validate() const;
};

struct SampleRecord {
  std::string id;
  IllusionFamily family = IllusionFamily::Poggendorff;
  ClassLabel label = ClassLabel::Positive;
  double strength = 0.0;
  double deviation = 0.0;
  Split split = Split::Train;
  std::string image_path;
  std::uint64_t seed = 0;

  bool operator==(const SampleRecord&) const = default;
};

struct DatasetManifest {
  /// Present when the config echo was found next to the manifest.
  std::optional<DatasetConfig> config;
  std::vector<SampleRecord> records;
  /// Directory that image_path entries are relative to.
  std::filesystem::path root;

  std::filesystem::path image_file(const SampleRecord& r) const { return root / r.image_path; }
};

/// round(ratio * total) with ties to even.
std::size_t positive_count(std::size_t total, double ratio);

/// Largest-remainder apportionment of total over the three ratios; ties go to
/// the earlier split.
std::array<std::size_t, 3> split_sizes(std::size_t total, const SplitRatios& ratios);

/// Positives per split: each split gets floor(size * ratio) or one more, the
/// extra units going to the largest fractional parts. Sums to `positives`.
std::array<std::size_t, 3> positives_per_split(const std::array<std::size_t, 3>& sizes, double ratio,
                                               std::size_t positives);

/// Seed of sample `index`; any sample can be regenerated in isolation.
std::uint64_t sample_seed(std::uint64_t master_seed, std::size_t index);

/// Ground truth only (labels, seeds, splits, strengths); no files touched.
std::vector<SampleRecord> plan_records(const DatasetConfig& cfg);

/// Samples, renders and writes images/<id>.png, manifest.jsonl and
/// config.json under cfg.out_dir.
DatasetManifest build_dataset(const DatasetConfig& cfg);

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& dir);

/// Accepts a manifest.jsonl path or the directory holding it. Throws
/// ValidationError naming the offending record on invariant violations.
DatasetManifest load_manifest(const std::filesystem::path& path);

nlohmann::ordered_json to_json(const DatasetConfig& cfg);
DatasetConfig config_from_json(const nlohmann::json& j);
nlohmann::ordered_json to_json(const SampleRecord& r);
SampleRecord record_from_json(const nlohmann::json& j);

/// Checks record-level and (when the config echo is present) count invariants.
void validate(const DatasetManifest& manifest);

}  // namespace indl
