#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "indl/dataset.hpp"
#include "indl/idx.hpp"
#include "indl/metrics.hpp"
#include "indl/mlp.hpp"
#include "json.hpp"

namespace indl {

enum class Arch { LogReg, Mlp };

std::string_view to_string(Arch arch);
Arch parse_arch(std::string_view text);

struct BaselineConfig {
  Arch arch = Arch::Mlp;
  int depth = 1;
  int hidden_width = 64;
  int input_side = 32;
  int epochs = 20;
  int batch_size = 64;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;

  /// epochs may be 0 (the model stays at its initialization).
  void validate() const;
  bool operator==(const BaselineConfig&) const = default;
};

nlohmann::ordered_json to_json(const BaselineConfig& cfg);
BaselineConfig baseline_config_from_json(const nlohmann::json& j);

struct BaselineModel {
  BaselineConfig config;
  Mlp<double> net;
};

nlohmann::ordered_json to_json(const BaselineModel& model);

struct EpochStats {
  int epoch = 0;
  double train_loss = 0.0;
  /// nullopt when the validation set is empty or holds no positives.
  std::optional<double> val_recall;

  bool operator==(const EpochStats&) const = default;
};

struct TrainingCurve {
  int depth = 0;
  std::vector<EpochStats> epochs;

  bool operator==(const TrainingCurve&) const = default;
};

using TrainingCurves = std::vector<TrainingCurve>;

/// Feature matrix (one sample per column, values in [0,1], ink = 1) and labels.
struct LabeledSamples {
  Matrix<double> x;
  RowVector<double> y;
  std::vector<std::string> ids;

  std::size_t size() const { return ids.size(); }
};

/// Area-weighted resampling of a w x h 8-bit image to side x side, mapped
/// to 1 - v/255.
Vector<double> image_features(const std::uint8_t* pixels, int width, int height, int side);

/// Loads the images of one split (nullopt: all) in manifest order.
LabeledSamples load_samples(const DatasetManifest& manifest, SplitSelector split, int side);

/// MNIST with digit < 5 as Positive, limited to the first `limit` images.
LabeledSamples mnist_samples(const MnistSet& set, int side, std::size_t limit);

/// Model initialization and per-epoch shuffles derive from hash64(cfg.seed,
/// cfg.depth), so a depth trained alone or inside a sweep is identical.
std::pair<BaselineModel, TrainingCurve> fit(const LabeledSamples& train, const LabeledSamples& val,
                                            const BaselineConfig& cfg);

/// Trains on the train split and records validation recall per epoch.
std::pair<BaselineModel, TrainingCurve> train_baseline(const DatasetManifest& manifest, const BaselineConfig& cfg);

std::vector<double> predict_scores(const BaselineModel& model, const LabeledSamples& samples);
std::vector<PredictionRecord> predict(const BaselineModel& model, const LabeledSamples& samples);
std::vector<PredictionRecord> predict(const BaselineModel& model, const DatasetManifest& manifest,
                                      SplitSelector split);

TrainingCurves depth_sweep(const LabeledSamples& train, const LabeledSamples& val, std::span<const int> depths,
                           const BaselineConfig& tmpl);
TrainingCurves depth_sweep(const DatasetManifest& manifest, std::span<const int> depths, const BaselineConfig& tmpl);

inline constexpr std::size_t kMnistSweepLimit = 5000;

/// Seeded 80/20 train/validation split of the first `limit` images.
TrainingCurves depth_sweep(const MnistSet& mnist, std::span<const int> depths, const BaselineConfig& tmpl,
                           std::size_t limit = kMnistSweepLimit);

/// `depth,epoch,train_loss,val_recall` rows; missing recall is an empty cell.
void write_curves_csv(const TrainingCurves& curves, const std::filesystem::path& path);

/// One chart for loss and one for recall; deeper series are drawn lighter.
void write_curves_svg(const TrainingCurves& curves, const std::string& title, const std::filesystem::path& loss_path,
                      const std::filesystem::path& recall_path);

}  // namespace indl
