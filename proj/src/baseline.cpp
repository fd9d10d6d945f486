#include "indl/baseline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>
#include <sstream>

#include "indl/error.hpp"
#include "indl/random.hpp"
#include "indl/raster.hpp"
#include "indl/svg.hpp"

namespace indl {
namespace {

constexpr std::uint64_t kMnistSplitStream = 0x6d6e697374;  // "mnist"

/// Overlap weights of destination cells [i*s, (i+1)*s) with source cells.
struct AxisWeights {
  std::vector<int> first;
  std::vector<std::vector<double>> w;
};

AxisWeights axis_weights(int src, int dst) {
  AxisWeights a;
  const double scale = static_cast<double>(src) / dst;
  for (int i = 0; i < dst; ++i) {
    const double lo = i * scale;
    const double hi = (i + 1) * scale;
    const int begin = static_cast<int>(std::floor(lo));
    const int end = std::min(src, static_cast<int>(std::ceil(hi)));
    std::vector<double> w;
    for (int s = begin; s < end; ++s) {
      const double overlap = std::min(hi, s + 1.0) - std::max(lo, static_cast<double>(s));
      w.push_back(overlap / scale);
    }
    a.first.push_back(begin);
    a.w.push_back(std::move(w));
  }
  return a;
}

RowVector<double> label_row(std::span<const ClassLabel> labels) {
  RowVector<double> y(static_cast<Eigen::Index>(labels.size()));
  for (std::size_t i = 0; i < labels.size(); ++i) y(static_cast<Eigen::Index>(i)) = labels[i] == ClassLabel::Positive;
  return y;
}

std::optional<double> recall_of(const std::vector<double>& scores, const RowVector<double>& y) {
  ConfusionCounts c;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool truth = y(static_cast<Eigen::Index>(i)) > 0.5;
    const bool pred = label_from_score(scores[i]) == ClassLabel::Positive;
    if (truth) (pred ? c.tp : c.fn)++;
    else (pred ? c.fp : c.tn)++;
  }
  if (c.tp + c.fn == 0) return std::nullopt;
  return recall(c);
}

LabeledSamples select_columns(const LabeledSamples& all, std::span<const std::size_t> cols) {
  LabeledSamples out;
  out.x.resize(all.x.rows(), static_cast<Eigen::Index>(cols.size()));
  out.y.resize(static_cast<Eigen::Index>(cols.size()));
  for (std::size_t k = 0; k < cols.size(); ++k) {
    const auto c = static_cast<Eigen::Index>(cols[k]);
    out.x.col(static_cast<Eigen::Index>(k)) = all.x.col(c);
    out.y(static_cast<Eigen::Index>(k)) = all.y(c);
    out.ids.push_back(all.ids[cols[k]]);
  }
  return out;
}

std::string depth_color(std::size_t k, std::size_t n) {
  // Darkest blue for the shallowest model, fading toward light blue.
  const double t = n > 1 ? static_cast<double>(k) / static_cast<double>(n - 1) : 0.0;
  const int r = static_cast<int>(std::lround(8 + t * (158 - 8)));
  const int g = static_cast<int>(std::lround(48 + t * (202 - 48)));
  const int b = static_cast<int>(std::lround(107 + t * (225 - 107)));
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", r, g, b);
  return buf;
}

}  // namespace

std::string_view to_string(Arch arch) { return arch == Arch::LogReg ? "logreg" : "mlp"; }

Arch parse_arch(std::string_view text) {
  if (text == "logreg") return Arch::LogReg;
  if (text == "mlp") return Arch::Mlp;
  throw ValidationError("arch must be 'logreg' or 'mlp'");
}

void BaselineConfig::validate() const {
  if (depth < 0) throw ValidationError("depth must be >= 0");
  if (arch == Arch::LogReg && depth != 0) throw ValidationError("logreg requires depth 0");
  if (hidden_width < 1) throw ValidationError("hidden_width must be >= 1");
  if (input_side < 1) throw ValidationError("input_side must be >= 1");
  if (epochs < 0) throw ValidationError("epochs must be >= 0");
  if (batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) throw ValidationError("learning_rate must be > 0");
}

nlohmann::ordered_json to_json(const BaselineConfig& cfg) {
  return {{"arch", to_string(cfg.arch)},     {"depth", cfg.depth},
          {"hidden_width", cfg.hidden_width}, {"input_side", cfg.input_side},
          {"epochs", cfg.epochs},             {"batch_size", cfg.batch_size},
          {"learning_rate", cfg.learning_rate}, {"seed", cfg.seed}};
}

BaselineConfig baseline_config_from_json(const nlohmann::json& j) {
  BaselineConfig cfg;
  try {
    if (j.contains("arch")) cfg.arch = parse_arch(j.at("arch").get<std::string>());
    if (j.contains("depth")) cfg.depth = j.at("depth").get<int>();
    if (j.contains("hidden_width")) cfg.hidden_width = j.at("hidden_width").get<int>();
    if (j.contains("input_side")) cfg.input_side = j.at("input_side").get<int>();
    if (j.contains("epochs")) cfg.epochs = j.at("epochs").get<int>();
    if (j.contains("batch_size")) cfg.batch_size = j.at("batch_size").get<int>();
    if (j.contains("learning_rate")) cfg.learning_rate = j.at("learning_rate").get<double>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("baseline config: ") + e.what());
  }
  cfg.validate();
  return cfg;
}

nlohmann::ordered_json to_json(const BaselineModel& model) {
  nlohmann::ordered_json j;
  j["config"] = to_json(model.config);
  j["layers"] = nlohmann::ordered_json::array();
  for (const auto& layer : model.net.layers()) {
    nlohmann::ordered_json w = nlohmann::ordered_json::array();
    for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) {
      std::vector<double> row(layer.weight.cols());
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) row[static_cast<std::size_t>(c)] = layer.weight(r, c);
      w.push_back(row);
    }
    std::vector<double> b(layer.bias.data(), layer.bias.data() + layer.bias.size());
    j["layers"].push_back({{"weight", std::move(w)}, {"bias", std::move(b)}});
  }
  return j;
}

Vector<double> image_features(const std::uint8_t* pixels, int width, int height, int side) {
  const AxisWeights ax = axis_weights(width, side);
  const AxisWeights ay = axis_weights(height, side);
  Vector<double> out(static_cast<Eigen::Index>(side) * side);
  for (int oy = 0; oy < side; ++oy) {
    for (int ox = 0; ox < side; ++ox) {
      double acc = 0.0;
      for (std::size_t j = 0; j < ay.w[oy].size(); ++j) {
        const std::uint8_t* row = pixels + static_cast<std::size_t>(ay.first[oy] + static_cast<int>(j)) * width;
        double row_acc = 0.0;
        for (std::size_t i = 0; i < ax.w[ox].size(); ++i) row_acc += ax.w[ox][i] * row[ax.first[ox] + static_cast<int>(i)];
        acc += ay.w[oy][j] * row_acc;
      }
      out(static_cast<Eigen::Index>(oy) * side + ox) = 1.0 - acc / 255.0;
    }
  }
  return out;
}

LabeledSamples load_samples(const DatasetManifest& manifest, SplitSelector split, int side) {
  std::vector<const SampleRecord*> chosen;
  for (const auto& r : manifest.records) {
    if (!split || r.split == *split) chosen.push_back(&r);
  }
  LabeledSamples s;
  s.x.resize(static_cast<Eigen::Index>(side) * side, static_cast<Eigen::Index>(chosen.size()));
  std::vector<ClassLabel> labels;
  for (std::size_t k = 0; k < chosen.size(); ++k) {
    const RasterImage img = read_image(manifest.image_file(*chosen[k]));
    s.x.col(static_cast<Eigen::Index>(k)) = image_features(img.pixels.data(), img.width, img.height, side);
    labels.push_back(chosen[k]->label);
    s.ids.push_back(chosen[k]->id);
  }
  s.y = label_row(labels);
  return s;
}

LabeledSamples mnist_samples(const MnistSet& set, int side, std::size_t limit) {
  const std::size_t n = std::min(limit, set.size());
  LabeledSamples s;
  s.x.resize(static_cast<Eigen::Index>(side) * side, static_cast<Eigen::Index>(n));
  s.y.resize(static_cast<Eigen::Index>(n));
  const int digits = std::max<int>(1, static_cast<int>(std::to_string(n).size()));
  for (std::size_t i = 0; i < n; ++i) {
    // MNIST stores ink as high values; invert so the shared 1 - v/255 mapping keeps ink = 1.
    std::vector<std::uint8_t> inverted(set.image(i), set.image(i) + static_cast<std::size_t>(set.rows) * set.cols);
    for (auto& v : inverted) v = static_cast<std::uint8_t>(255 - v);
    s.x.col(static_cast<Eigen::Index>(i)) = image_features(inverted.data(), set.cols, set.rows, side);
    s.y(static_cast<Eigen::Index>(i)) = set.labels[i] < 5 ? 1.0 : 0.0;
    std::string id = std::to_string(i);
    s.ids.push_back("mnist" + std::string(static_cast<std::size_t>(digits) - id.size(), '0') + id);
  }
  return s;
}

std::pair<BaselineModel, TrainingCurve> fit(const LabeledSamples& train, const LabeledSamples& val,
                                            const BaselineConfig& cfg) {
  cfg.validate();
  if (train.size() == 0) throw ValidationError("training split is empty");
  const int inputs = cfg.input_side * cfg.input_side;
  if (train.x.rows() != inputs) throw ValidationError("feature size does not match input_side");

  const std::uint64_t depth_seed = hash64(cfg.seed, static_cast<std::uint64_t>(cfg.depth));
  Rng init_rng(depth_seed);
  BaselineModel model{cfg, Mlp<double>(inputs, cfg.depth, cfg.hidden_width,
                                       cfg.arch == Arch::LogReg ? Init::Zero : Init::He, init_rng)};
  TrainingCurve curve{cfg.depth, {}};

  std::vector<std::size_t> order(train.size());
  std::vector<DenseLayer<double>> grad;
  Matrix<double> xb;
  RowVector<double> yb;
  for (int epoch = 1; epoch <= cfg.epochs; ++epoch) {
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng shuffle_rng(hash64(depth_seed, static_cast<std::uint64_t>(epoch)));
    shuffle_rng.shuffle(order.begin(), order.end());

    double loss_sum = 0.0;
    std::size_t batches = 0;
    for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(cfg.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(cfg.batch_size));
      const auto b = static_cast<Eigen::Index>(end - start);
      xb.resize(train.x.rows(), b);
      yb.resize(b);
      for (Eigen::Index k = 0; k < b; ++k) {
        const auto c = static_cast<Eigen::Index>(order[start + static_cast<std::size_t>(k)]);
        xb.col(k) = train.x.col(c);
        yb(k) = train.y(c);
      }
      loss_sum += model.net.gradient(xb, yb, grad);
      model.net.sgd_step(grad, cfg.learning_rate);
      ++batches;
    }
    EpochStats stats{epoch, loss_sum / static_cast<double>(batches), std::nullopt};
    if (val.size() > 0) stats.val_recall = recall_of(predict_scores(model, val), val.y);
    curve.epochs.push_back(stats);
  }
  return {std::move(model), std::move(curve)};
}

std::pair<BaselineModel, TrainingCurve> train_baseline(const DatasetManifest& manifest, const BaselineConfig& cfg) {
  cfg.validate();
  const LabeledSamples train = load_samples(manifest, Split::Train, cfg.input_side);
  const LabeledSamples val = load_samples(manifest, Split::Val, cfg.input_side);
  return fit(train, val, cfg);
}

std::vector<double> predict_scores(const BaselineModel& model, const LabeledSamples& samples) {
  if (samples.size() == 0) return {};
  const RowVector<double> s = model.net.scores(samples.x);
  return {s.data(), s.data() + s.size()};
}

std::vector<PredictionRecord> predict(const BaselineModel& model, const LabeledSamples& samples) {
  const std::vector<double> scores = predict_scores(model, samples);
  std::vector<PredictionRecord> out;
  out.reserve(scores.size());
  for (std::size_t i = 0; i < scores.size(); ++i) {
    out.push_back({samples.ids[i], label_from_score(scores[i]), scores[i]});
  }
  return out;
}

std::vector<PredictionRecord> predict(const BaselineModel& model, const DatasetManifest& manifest,
                                      SplitSelector split) {
  return predict(model, load_samples(manifest, split, model.config.input_side));
}

TrainingCurves depth_sweep(const LabeledSamples& train, const LabeledSamples& val, std::span<const int> depths,
                           const BaselineConfig& tmpl) {
  if (depths.empty()) throw ValidationError("depth_sweep: no depths given");
  TrainingCurves curves;
  for (int depth : depths) {
    BaselineConfig cfg = tmpl;
    cfg.arch = Arch::Mlp;
    cfg.depth = depth;
    curves.push_back(fit(train, val, cfg).second);
  }
  return curves;
}

TrainingCurves depth_sweep(const DatasetManifest& manifest, std::span<const int> depths, const BaselineConfig& tmpl) {
  const LabeledSamples train = load_samples(manifest, Split::Train, tmpl.input_side);
  const LabeledSamples val = load_samples(manifest, Split::Val, tmpl.input_side);
  return depth_sweep(train, val, depths, tmpl);
}

TrainingCurves depth_sweep(const MnistSet& mnist, std::span<const int> depths, const BaselineConfig& tmpl,
                           std::size_t limit) {
  const LabeledSamples all = mnist_samples(mnist, tmpl.input_side, limit);
  std::vector<std::size_t> order(all.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(hash64(tmpl.seed, kMnistSplitStream));
  rng.shuffle(order.begin(), order.end());
  const std::size_t n_train = (order.size() * 4) / 5;
  std::vector<std::size_t> train_idx(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(n_train));
  std::vector<std::size_t> val_idx(order.begin() + static_cast<std::ptrdiff_t>(n_train), order.end());
  std::sort(train_idx.begin(), train_idx.end());
  std::sort(val_idx.begin(), val_idx.end());
  return depth_sweep(select_columns(all, train_idx), select_columns(all, val_idx), depths, tmpl);
}

void write_curves_csv(const TrainingCurves& curves, const std::filesystem::path& path) {
  std::ostringstream ss;
  ss.precision(17);
  ss << "depth,epoch,train_loss,val_recall\n";
  for (const auto& c : curves) {
    for (const auto& e : c.epochs) {
      ss << c.depth << ',' << e.epoch << ',' << e.train_loss << ',';
      if (e.val_recall) ss << *e.val_recall;
      ss << '\n';
    }
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << ss.str();
  if (!out) throw IoError("write failed: " + path.string());
}

void write_curves_svg(const TrainingCurves& curves, const std::string& title, const std::filesystem::path& loss_path,
                      const std::filesystem::path& recall_path) {
  std::vector<PlotSeries> loss, rec;
  for (std::size_t k = 0; k < curves.size(); ++k) {
    PlotSeries l{"depth " + std::to_string(curves[k].depth), {}, {}, depth_color(k, curves.size()), 1.0};
    PlotSeries r = l;
    for (const auto& e : curves[k].epochs) {
      l.x.push_back(e.epoch);
      l.y.push_back(e.train_loss);
      if (e.val_recall) {
        r.x.push_back(e.epoch);
        r.y.push_back(*e.val_recall);
      }
    }
    loss.push_back(std::move(l));
    rec.push_back(std::move(r));
  }
  write_line_plot(loss, {title + ": training loss", "epoch", "loss"}, loss_path);
  write_line_plot(rec, {title + ": validation recall", "epoch", "recall"}, recall_path);
}

}  // namespace indl
