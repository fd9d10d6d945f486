#pragma once

#include <cstddef>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "indl/dataset.hpp"
#include "json.hpp"

namespace indl {

struct PredictionRecord {
  std::string id;
  std::optional<ClassLabel> predicted;
  /// Positive-class score in [0,1].
  std::optional<double> score;

  /// The predicted label, or the score thresholded at 0.5 (ties negative).
  ClassLabel resolved() const;
  bool operator==(const PredictionRecord&) const = default;
};

/// Positive iff score > 0.5.
ClassLabel label_from_score(double score);

struct ConfusionCounts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t tn = 0;
  std::size_t fn = 0;

  std::size_t total() const { return tp + fp + tn + fn; }
  bool operator==(const ConfusionCounts&) const = default;
};

/// nullopt selects every split.
using SplitSelector = std::optional<Split>;

/// tp / (tp + fn); throws UndefinedRecallError when tp + fn == 0.
double recall(const ConfusionCounts& c);

/// Every manifest id in the selected split must appear exactly once in
/// preds. Predictions for ids of other splits are ignored; ids absent from
/// the manifest, duplicates and missing ids raise ValidationError.
ConfusionCounts confusion(std::span<const PredictionRecord> preds, const DatasetManifest& manifest,
                          SplitSelector split);

struct NegativeStrengths {
  /// Strengths of positive-truth samples predicted negative.
  std::vector<double> fn;
  /// Strengths of negative-truth samples predicted negative.
  std::vector<double> tn;
};

/// Both lists follow manifest order.
NegativeStrengths stratify_negatives(std::span<const PredictionRecord> preds, const DatasetManifest& manifest,
                                     SplitSelector split);

struct EvalReport {
  std::string model_name;
  std::string dataset;
  std::string split;
  ConfusionCounts counts;
  double recall = 0.0;
  std::vector<double> fn_strengths;
  std::vector<double> tn_strengths;
};

EvalReport evaluate(std::span<const PredictionRecord> preds, const DatasetManifest& manifest, SplitSelector split,
                    std::string model_name);

nlohmann::ordered_json to_json(const EvalReport& report);
EvalReport report_from_json(const nlohmann::json& j);

/// CSV with header `id,predicted,score`; predicted is positive|negative or
/// empty, score is empty or a real in [0,1]. Throws ValidationError with the
/// offending line number.
std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path);
std::vector<PredictionRecord> parse_predictions(std::string_view text);
void write_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> preds);

}  // namespace indl
