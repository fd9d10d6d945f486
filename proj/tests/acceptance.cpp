// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <string>
#include <vector>

#include "indl/baseline.hpp"
#include "indl/dataset.hpp"
#include "indl/error.hpp"
#include "indl/geometry.hpp"
#include "indl/idx.hpp"
#include "indl/kde.hpp"
#include "indl/metrics.hpp"
#include "indl/mlp.hpp"
#include "indl/random.hpp"
#include "indl/ranking.hpp"
#include "indl/raster.hpp"
#include "support.hpp"

using namespace indl;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

std::string fmt(const char* format, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, format, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome composition() {
  test::TempDir dir;
  DatasetConfig cfg;
  cfg.total = 10000;
  cfg.positive_ratio = 0.3;
  cfg.master_seed = 2023;
  cfg.workers = 1;

  cfg.out_dir = dir / "a";
  const auto start = std::chrono::steady_clock::now();
  const DatasetManifest m = build_dataset(cfg);
  const double elapsed = seconds_since(start);
  cfg.out_dir = dir / "b";
  build_dataset(cfg);

  std::size_t pos = 0, neg = 0;
  for (const auto& r : load_manifest(dir / "a").records) (r.label == ClassLabel::Positive ? pos : neg) += 1;
  const bool identical = test::same_tree(dir / "a", dir / "b");
  const bool pass = m.records.size() == 10000 && pos == 3000 && neg == 7000 && identical && elapsed < 180.0;
  return {pass, fmt("positives=%zu negatives=%zu byte_identical=%s seconds=%.1f", pos, neg,
                    identical ? "yes" : "no", elapsed)};
}

double cross_residual(const Point& a, const Point& b, const Point& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

// The exact property read straight off the coordinates, independent of
// veridical_violation.
bool exact_property(const VectorScene& s, IllusionFamily f) {
  const auto& p = s.primitives;
  switch (f) {
    case IllusionFamily::HeringWundt:
      for (int i = 0; i < 2; ++i) {
        for (const Point& q : p[i].points) {
          if (cross_residual(p[i].points.front(), p[i].points.back(), q) != 0.0) return false;
        }
      }
      return true;
    case IllusionFamily::MullerLyer:
      return (p[0].points[1] - p[0].points[0]).norm() == (p[1].points[1] - p[1].points[0]).norm();
    case IllusionFamily::Poggendorff:
      return cross_residual(p[2].points[0], p[2].points[1], p[3].points[0]) == 0.0 &&
             cross_residual(p[2].points[0], p[2].points[1], p[3].points[1]) == 0.0;
    case IllusionFamily::VerticalHorizontal:
      return (p[0].points[1] - p[0].points[0]).norm() == (p[1].points[1] - p[1].points[0]).norm();
    case IllusionFamily::Zollner:
      for (int i = 0; i < 4; ++i) {
        const Point d0 = p[0].points[1] - p[0].points[0];
        const Point di = p[i].points[1] - p[i].points[0];
        if (d0.x() * di.y() - d0.y() * di.x() != 0.0) return false;
      }
      return true;
  }
  return false;
}

Outcome geometry() {
  std::size_t failures = 0;
  std::string worst;
  for (IllusionFamily f : kAllFamilies) {
    const double floor = traits(f).deviation.lo;
    double min_negative = INFINITY;
    for (std::size_t i = 0; i < 1000; ++i) {
      const std::uint64_t seed = sample_seed(0xacce97, i);
      const VectorScene pos = build_scene(sample_params(f, ClassLabel::Positive, seed));
      if (!exact_property(pos, f) || veridical_violation(pos, f) != 0.0) ++failures;
      const double v = veridical_violation(build_scene(sample_params(f, ClassLabel::Negative, seed)), f);
      if (!(v >= floor)) ++failures;
      min_negative = std::min(min_negative, v);
    }
    worst += fmt(" %s:min_neg=%.4g/floor=%.4g", std::string(to_string(f)).c_str(), min_negative, floor);
  }
  return {failures == 0, fmt("failures=%zu", failures) + worst};
}

Outcome raster_oracle() {
  RasterConfig cfg;
  cfg.stroke_px = 1.0;
  cfg.antialias = false;
  VectorScene s;
  s.primitives.push_back({PrimitiveKind::Segment, {{0.25, 0.5}, {0.75, 0.5}}, kReferenceStroke});
  const RasterImage img = rasterize(s, cfg);
  // Brute-force scanline: centres in [56,168] x [111.5,112.5), top edge owns the tie.
  int mismatches = 0, inked = 0;
  for (int y = 0; y < cfg.height; ++y) {
    for (int x = 0; x < cfg.width; ++x) {
      const double cx = x + 0.5, cy = y + 0.5;
      const bool expect = cx >= 56.0 && cx <= 168.0 && cy >= 111.5 && cy < 112.5;
      const bool got = img.at(x, y) == cfg.foreground;
      mismatches += expect != got;
      inked += got;
    }
  }
  return {mismatches == 0 && inked == 112, fmt("inked=%d mismatches=%d", inked, mismatches)};
}

Outcome raster_equivariance() {
  double worst = 0.0;
  for (IllusionFamily f : kAllFamilies) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const VectorScene scene = build_scene(sample_params(f, seed % 2 ? ClassLabel::Negative : ClassLabel::Positive, seed));
      RasterConfig fine;
      fine.width = fine.height = 448;
      fine.stroke_px = 4.0;
      const RasterImage hi = rasterize(scene, fine);
      const RasterImage lo = rasterize(scene, RasterConfig{});
      double total = 0.0;
      for (int y = 0; y < lo.height; ++y) {
        for (int x = 0; x < lo.width; ++x) {
          const double mean =
              (hi.at(2 * x, 2 * y) + hi.at(2 * x + 1, 2 * y) + hi.at(2 * x, 2 * y + 1) + hi.at(2 * x + 1, 2 * y + 1)) /
              4.0;
          total += std::abs(mean - lo.at(x, y));
        }
      }
      worst = std::max(worst, total / (lo.width * lo.height));
    }
  }
  return {worst <= 2.0, fmt("max_mae=%.4f tolerance=2.0", worst)};
}

Outcome recall_fixture() {
  DatasetManifest m;
  std::vector<PredictionRecord> preds;
  for (int i = 0; i < 15; ++i) {
    SampleRecord r;
    r.id = fmt("%05d", i);
    r.family = IllusionFamily::Poggendorff;
    r.label = i < 10 ? ClassLabel::Positive : ClassLabel::Negative;
    r.deviation = i < 10 ? 0.0 : 1.0;
    r.split = Split::Test;
    m.records.push_back(r);
    // Positive 9 is missed; negatives 10..11 are false alarms.
    const bool says_positive = i < 9 || i == 10 || i == 11;
    preds.push_back({r.id, says_positive ? ClassLabel::Positive : ClassLabel::Negative, std::nullopt});
  }
  const ConfusionCounts c = confusion(preds, m, Split::Test);
  const std::string printed = fmt("%.6f", recall(c));
  bool raised = false;
  try {
    recall(ConfusionCounts{0, 4, 6, 0});
  } catch (const UndefinedRecallError&) {
    raised = true;
  }
  const bool pass = c == ConfusionCounts{9, 2, 3, 1} && printed == "0.900000" && raised;
  return {pass, fmt("tp=%zu fn=%zu recall=%s undefined_raises=%s", c.tp, c.fn, printed.c_str(), raised ? "yes" : "no")};
}

std::vector<ModelRecord> table2() { return read_benchmark_csv(test::source_dir() / "fixtures/table2.csv"); }

Outcome ranking() {
  const std::vector<std::pair<std::string, std::string>> expected = {
      {"ConvNext", "93.47"},          {"VGG16", "92.86"},       {"DenseNet201", "90.99"},
      {"InceptionResNetV2", "90.27"}, {"Xception", "89.81"},    {"NASNetLarge", "89.52"},
      {"Darknet53", "88.53"},         {"ResNetV2_50", "88.08"}, {"EfficientNetV2", "85.40"},
      {"MobileNetV3", "84.28"}};
  const RankingTable reported = rank_models(table2(), MeanSource::Reported);
  bool order = reported.rows.size() == expected.size();
  for (std::size_t i = 0; order && i < expected.size(); ++i) {
    order = reported.rows[i].model.name == expected[i].first && reported.rows[i].rank == i + 1 &&
            fmt("%.2f", reported.rows[i].mean * 100.0) == expected[i].second;
  }
  const RankingTable recomputed = rank_models(table2(), MeanSource::Recomputed);
  const std::string wanted = "ResNetV2_50: arithmetic mean 84.53% vs reported 88.08%";
  bool flagged = false;
  for (const auto& n : recomputed.notes) flagged |= n == wanted;
  return {order && flagged, fmt("reported_order=%s resnet_note=%s", order ? "ok" : "wrong", flagged ? "ok" : "missing")};
}

Outcome kde_criterion() {
  Rng rng(11);
  std::vector<double> values(1000);
  for (double& v : values) v = rng.uniform() * 0.7 + 0.1 * rng.normal();
  const KdeCurve c = kde(values);
  const double pi = 3.14159265358979323846;
  double worst = 0.0;
  for (std::size_t i = 0; i < c.grid.size(); ++i) {
    double sum = 0.0;
    for (double v : values) {
      const double u = (c.grid[i] - v) / c.bandwidth;
      sum += std::exp(-u * u / 2.0) / std::sqrt(2.0 * pi);
    }
    worst = std::max(worst, std::abs(c.density[i] - sum / (values.size() * c.bandwidth)));
  }
  const double integral = trapezoid(c.grid, c.density);
  const std::vector<double> one{0.0}, two{-1.0, 1.0};
  const double a1 = kde_at(one, 1.0, 0.0), a2 = kde_at(two, 1.0, 0.0);
  const bool pass = worst <= 1e-9 && std::abs(integral - 1.0) <= 1e-3 && std::abs(a1 - 0.398942) <= 1e-6 &&
                    std::abs(a2 - 0.241971) <= 1e-6;
  return {pass, fmt("max_oracle_err=%.3g integral=%.6f single=%.6f pair=%.6f", worst, integral, a1, a2)};
}

Outcome trend() {
  const auto records = table2();
  const TrendReport report = trend_compare(records);
  // Independent oracle: distinct values, so rank = 1 + number of larger values
  // and rho = 1 - 6 sum d^2 / (n (n^2 - 1)).
  std::vector<double> mean, top1;
  for (const auto& r : records) {
    mean.push_back(*r.mean_recall);
    top1.push_back(*r.imagenet_top1);
  }
  const std::size_t n = mean.size();
  auto rank_of = [](const std::vector<double>& v, std::size_t i) {
    int larger = 0;
    for (double x : v) larger += x > v[i];
    return 1 + larger;
  };
  long d2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long d = rank_of(mean, i) - rank_of(top1, i);
    d2 += d * d;
  }
  const double oracle = 1.0 - 6.0 * d2 / (static_cast<double>(n) * (n * n - 1.0));
  const bool pass = std::abs(report.spearman_rho - oracle) <= 1e-12 && std::abs(oracle + 1.0 / 165.0) <= 1e-15;
  return {pass, fmt("rho=%.12f oracle=%.12f sum_d2=%ld", report.spearman_rho, oracle, d2)};
}

Outcome gradient_check() {
  Rng data_rng(5);
  const int inputs = 10, n = 12;
  Matrix<double> x(inputs, n);
  RowVector<double> y(n);
  for (int c = 0; c < n; ++c) {
    for (int r = 0; r < inputs; ++r) x(r, c) = data_rng.uniform();
    y(c) = c % 3 == 0 ? 1.0 : 0.0;
  }
  double worst = 0.0;
  for (int depth = 0; depth <= 3; ++depth) {
    Rng rng(100 + depth);
    Mlp<double> net(inputs, depth, 6, Init::He, rng);
    for (auto& layer : net.layers()) {
      for (Eigen::Index r = 0; r < layer.bias.size(); ++r) layer.bias(r) = 0.1 * rng.normal();
    }
    std::vector<DenseLayer<double>> grad;
    net.gradient(x, y, grad);
    constexpr double h = 1e-5;
    double diff2 = 0.0, a2 = 0.0, n2 = 0.0;
    auto probe = [&](double& param, double analytic) {
      const double saved = param;
      param = saved + h;
      const double up = net.loss(x, y);
      param = saved - h;
      const double down = net.loss(x, y);
      param = saved;
      const double numeric = (up - down) / (2.0 * h);
      diff2 += (analytic - numeric) * (analytic - numeric);
      a2 += analytic * analytic;
      n2 += numeric * numeric;
    };
    for (std::size_t l = 0; l < net.layers().size(); ++l) {
      auto& layer = net.layers()[l];
      for (Eigen::Index c = 0; c < layer.weight.cols(); ++c) {
        for (Eigen::Index r = 0; r < layer.weight.rows(); ++r) probe(layer.weight(r, c), grad[l].weight(r, c));
      }
      for (Eigen::Index r = 0; r < layer.bias.size(); ++r) probe(layer.bias(r), grad[l].bias(r));
    }
    worst = std::max(worst, std::sqrt(diff2) / (std::sqrt(a2) + std::sqrt(n2)));
  }
  return {worst <= 1e-4, fmt("max_relative_error=%.3g depths=0-3", worst)};
}

Outcome separable_toy() {
  test::TempDir dir;
  fs::create_directories(dir / "images");
  DatasetManifest m;
  m.root = dir.path();
  for (int i = 0; i < 100; ++i) {
    SampleRecord r;
    r.id = fmt("%05d", i);
    r.family = IllusionFamily::Poggendorff;
    r.label = i < 50 ? ClassLabel::Positive : ClassLabel::Negative;
    r.deviation = i < 50 ? 0.0 : 0.05;
    r.strength = 0.5;
    r.split = i % 10 < 8 ? Split::Train : (i % 10 == 8 ? Split::Val : Split::Test);
    r.image_path = "images/" + r.id + ".png";
    write_image(RasterImage(32, 32, i < 50 ? 0 : 255), m.image_file(r));
    m.records.push_back(r);
  }
  write_manifest(m, dir.path());
  const DatasetManifest loaded = load_manifest(dir.path());
  BaselineConfig cfg;
  cfg.arch = Arch::LogReg;
  cfg.depth = 0;
  cfg.epochs = 20;
  cfg.learning_rate = 0.5;
  const auto [model, curve] = train_baseline(loaded, cfg);
  const auto preds = predict(model, loaded, Split::Test);
  const double r = recall(confusion(preds, loaded, Split::Test));
  return {r == 1.0, fmt("test_recall=%.6f", r)};
}

bool nonempty(const fs::path& p) { return fs::exists(p) && fs::file_size(p) > 0; }

Outcome mnist_sweep(const fs::path& out) {
  const fs::path data = test::source_dir() / "data/mnist-5k";
  const MnistSet mnist = load_mnist_idx(data / "images-idx3-ubyte", data / "labels-idx1-ubyte");
  BaselineConfig tmpl;
  tmpl.epochs = 5;
  tmpl.learning_rate = 0.1;
  tmpl.hidden_width = 64;
  tmpl.input_side = 28;
  const std::vector<int> depths{1, 2, 3};
  const auto start = std::chrono::steady_clock::now();
  const TrainingCurves curves = depth_sweep(mnist, depths, tmpl, 5000);
  const double elapsed = seconds_since(start);
  write_curves_csv(curves, out / "mnist_curves.csv");
  write_curves_svg(curves, "MNIST", out / "mnist_loss.svg", out / "mnist_recall.svg");

  bool decreasing = curves.size() == depths.size();
  std::string detail;
  for (const auto& c : curves) {
    const double first = c.epochs.front().train_loss, last = c.epochs.back().train_loss;
    decreasing = decreasing && c.epochs.size() == 5 && last < first;
    detail += fmt(" depth%d:%.4f->%.4f", c.depth, first, last);
  }
  const bool files = nonempty(out / "mnist_curves.csv") && nonempty(out / "mnist_loss.svg") &&
                     nonempty(out / "mnist_recall.svg");
  return {mnist.size() == 5000 && decreasing && files && elapsed < 300.0,
          fmt("n=%zu seconds=%.1f", mnist.size(), elapsed) + detail};
}

Outcome indl_curves(const fs::path& out) {
  DatasetConfig cfg;
  cfg.family = IllusionFamily::Poggendorff;
  cfg.total = 600;
  cfg.master_seed = 9;
  cfg.raster.width = cfg.raster.height = 64;
  cfg.out_dir = out / "poggendorff";
  const DatasetManifest m = build_dataset(cfg);
  BaselineConfig tmpl;
  tmpl.epochs = 5;
  tmpl.input_side = 32;
  const std::vector<int> depths{1, 2, 3};
  const TrainingCurves curves = depth_sweep(m, depths, tmpl);
  write_curves_csv(curves, out / "poggendorff_curves.csv");
  write_curves_svg(curves, "poggendorff", out / "poggendorff_loss.svg", out / "poggendorff_recall.svg");
  const bool files = nonempty(out / "poggendorff_curves.csv") && nonempty(out / "poggendorff_loss.svg") &&
                     nonempty(out / "poggendorff_recall.svg");
  const std::string csv = test::read_file(out / "poggendorff_curves.csv");
  const bool rows = std::count(csv.begin(), csv.end(), '\n') == 1 + 3 * 5;
  return {files && rows && curves.size() == 3, fmt("curves=%zu csv_rows_ok=%s", curves.size(), rows ? "yes" : "no")};
}

}  // namespace

int main() {
  test::TempDir artifacts;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"composition", composition},
      {"geometry-invariants", geometry},
      {"raster-oracle-112px", raster_oracle},
      {"raster-resolution-equivariance", raster_equivariance},
      {"recall", recall_fixture},
      {"ranking", ranking},
      {"kde", kde_criterion},
      {"trend-spearman", trend},
      {"baseline-gradient-check", gradient_check},
      {"baseline-separable-toy", separable_toy},
      {"baseline-mnist-depth-sweep", [&] { return mnist_sweep(artifacts.path()); }},
      {"baseline-indl-curves", [&] { return indl_curves(artifacts.path()); }},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::printf("%s %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
    std::fflush(stdout);
  }
  std::printf("%zu/%zu criteria passed\n", criteria.size() - failed, criteria.size());
  return failed == 0 ? 0 : 1;
}
