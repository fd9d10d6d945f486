#include "indl/cli.hpp"

#include <cstdio>
#include <fstream>
#include <functional>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "indl/baseline.hpp"
#include "indl/dataset.hpp"
#include "indl/error.hpp"
#include "indl/idx.hpp"
#include "indl/kde.hpp"
#include "indl/metrics.hpp"
#include "indl/ranking.hpp"
#include "indl/svg.hpp"
#include "json.hpp"

namespace indl {
namespace {

using Json = nlohmann::ordered_json;
namespace fs = std::filesystem;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

Json read_json_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json_file(const Json& j, const fs::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path.string());
}

void ensure_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

/// Sets j at a dotted key path, creating intermediate objects.
template <class T>
void set_path(Json& j, const std::string& key, const T& value) {
  Json* node = &j;
  std::size_t start = 0;
  for (std::size_t dot; (dot = key.find('.', start)) != std::string::npos; start = dot + 1) {
    node = &(*node)[key.substr(start, dot - start)];
  }
  (*node)[key.substr(start)] = value;
}

/// Like merge_patch, but null overwrites instead of deleting.
void overlay(Json& base, const Json& patch) {
  for (auto it = patch.begin(); it != patch.end(); ++it) {
    if (it->is_object() && base.contains(it.key()) && base[it.key()].is_object()) {
      overlay(base[it.key()], *it);
    } else {
      base[it.key()] = *it;
    }
  }
}

/// Resolves a subcommand's settings as defaults, then --config, then flags.
class Settings {
 public:
  Settings(CLI::App* app, Json defaults) : app_(app), defaults_(std::move(defaults)) {
    app_->add_option("--config", config_path_, "JSON config file (flat object or a run.json)");
  }

  template <class T>
  CLI::Option* option(const std::string& flag, const std::string& key, const std::string& desc) {
    auto value = std::make_shared<T>();
    CLI::Option* opt = app_->add_option(flag, *value, desc);
    appliers_.push_back([opt, value, key](Json& j) {
      if (opt->count() > 0) set_path(j, key, *value);
    });
    return opt;
  }

  CLI::Option* flag(const std::string& flag, const std::string& key, bool value, const std::string& desc) {
    CLI::Option* opt = app_->add_flag(flag, desc);
    appliers_.push_back([opt, value, key](Json& j) {
      if (opt->count() > 0) set_path(j, key, value);
    });
    return opt;
  }

  Json resolve() const {
    Json j = defaults_;
    if (!config_path_.empty()) {
      Json file = read_json_file(config_path_);
      if (!file.is_object()) throw ValidationError("--config must hold a JSON object");
      if (file.contains("config") && file["config"].is_object()) {
        if (file.contains("command") && file["command"] != app_->get_name()) {
          throw ValidationError("--config was written by '" + file["command"].get<std::string>() + "', not '" +
                                app_->get_name() + "'");
        }
        file = file["config"];
      }
      for (auto it = file.begin(); it != file.end(); ++it) {
        if (!defaults_.contains(it.key())) throw ValidationError("--config: unknown key '" + it.key() + "'");
      }
      overlay(j, file);
    }
    for (const auto& apply : appliers_) apply(j);
    return j;
  }

 private:
  CLI::App* app_;
  Json defaults_;
  std::string config_path_;
  std::vector<std::function<void(Json&)>> appliers_;
};

/// run.json: the resolved settings minus where output goes and how many
/// threads produced it, so identical runs give identical trees.
void write_run_json(const std::string& command, Json config, const fs::path& out_dir) {
  config.erase("out");
  config.erase("workers");
  Json run;
  run["command"] = command;
  run["config"] = std::move(config);
  write_json_file(run, out_dir / "run.json");
}

std::string opt_string(const Json& j, const char* key) {
  return j.contains(key) && !j[key].is_null() ? j[key].get<std::string>() : std::string();
}

SplitSelector parse_split_selector(const std::string& text) {
  if (text == "all") return std::nullopt;
  return parse_split(text);
}

fs::path require_path(const Json& j, const char* key, const char* flag) {
  const std::string p = opt_string(j, key);
  if (p.empty()) throw ValidationError(std::string(flag) + " is required");
  return p;
}

// generate ------------------------------------------------------------------

Json generate_defaults() {
  Json j = to_json(DatasetConfig{});
  j["workers"] = 1;
  j["out"] = nullptr;
  return j;
}

void add_generate(CLI::App& app, std::function<void()>& action, std::ostream& out) {
  CLI::App* sub = app.add_subcommand("generate", "Generate a labeled illusion dataset");
  auto s = std::make_shared<Settings>(sub, generate_defaults());
  s->option<std::string>("--family", "family", "hering-wundt|muller-lyer|poggendorff|vertical-horizontal|zollner");
  s->option<std::size_t>("--total", "total", "Number of samples");
  s->option<double>("--positive-ratio", "positive_ratio", "Fraction of positive samples");
  s->option<double>("--train", "split_ratios.train", "Train fraction");
  s->option<double>("--val", "split_ratios.val", "Validation fraction");
  s->option<double>("--test", "split_ratios.test", "Test fraction");
  s->option<std::uint64_t>("--seed", "master_seed", "Master seed");
  s->option<int>("--width", "raster.width", "Image width in pixels");
  s->option<int>("--height", "raster.height", "Image height in pixels");
  s->option<double>("--stroke-px", "raster.stroke_px", "Stroke width in pixels");
  s->flag("--antialias", "raster.antialias", true, "Anti-aliased rendering (default)");
  s->flag("--no-antialias", "raster.antialias", false, "Binary rendering");
  s->option<int>("--background", "raster.background", "Background intensity");
  s->option<int>("--foreground", "raster.foreground", "Foreground intensity");
  s->option<unsigned>("--workers", "workers", "Rendering threads; output does not depend on it");
  s->option<std::string>("--out", "out", "Output directory");
  sub->callback([&action, &out, s] {
    action = [&out, s] {
      const Json j = s->resolve();
      DatasetConfig cfg;
      try {
        cfg = config_from_json(j);
        cfg.workers = j.at("workers").get<unsigned>();
      } catch (const nlohmann::json::exception& e) {
        throw ValidationError(e.what());
      }
      cfg.out_dir = require_path(j, "out", "--out");
      cfg.validate();
      const DatasetManifest m = build_dataset(cfg);
      write_run_json("generate", j, cfg.out_dir);
      std::size_t pos = 0;
      for (const auto& r : m.records) pos += r.label == ClassLabel::Positive;
      out << "family=" << to_string(cfg.family) << '\n'
          << "records=" << m.records.size() << '\n'
          << "positives=" << pos << '\n'
          << "negatives=" << m.records.size() - pos << '\n'
          << "manifest=" << (cfg.out_dir / "manifest.jsonl").string() << '\n';
    };
  });
}

// evaluate / analyze ----------------------------------------------------------

void add_evaluate(CLI::App& app, std::function<void()>& action, std::ostream& out) {
  CLI::App* sub = app.add_subcommand("evaluate", "Score a prediction CSV against a manifest");
  auto s = std::make_shared<Settings>(
      sub, Json{{"manifest", nullptr}, {"preds", nullptr}, {"split", "test"}, {"model", "model"}, {"out", "indl_evaluate"}});
  s->option<std::string>("--manifest", "manifest", "manifest.jsonl or its directory");
  s->option<std::string>("--preds", "preds", "CSV with header id,predicted,score");
  s->option<std::string>("--split", "split", "train|val|test|all");
  s->option<std::string>("--model", "model", "Model name recorded in the report");
  s->option<std::string>("--out", "out", "Output directory for report.json and run.json");
  sub->callback([&action, &out, s] {
    action = [&out, s] {
      const Json j = s->resolve();
      const DatasetManifest m = load_manifest(require_path(j, "manifest", "--manifest"));
      const auto preds = read_predictions(require_path(j, "preds", "--preds"));
      const EvalReport report = evaluate(preds, m, parse_split_selector(j.at("split")), j.at("model"));
      const fs::path dir = require_path(j, "out", "--out");
      ensure_dir(dir);
      write_json_file(to_json(report), dir / "report.json");
      write_run_json("evaluate", j, dir);
      out << "tp=" << report.counts.tp << " fp=" << report.counts.fp << " tn=" << report.counts.tn
          << " fn=" << report.counts.fn << '\n'
          << "recall=" << fmt("%.6f", report.recall) << '\n';
    };
  });
}

void add_analyze(CLI::App& app, std::function<void()>& action, std::ostream& out) {
  CLI::App* sub = app.add_subcommand("analyze", "KDE of the strengths of negative predictions");
  auto s = std::make_shared<Settings>(sub, Json{{"manifest", nullptr},
                                                {"preds", nullptr},
                                                {"report", nullptr},
                                                {"split", "test"},
                                                {"bandwidth", nullptr},
                                                {"out", "indl_analyze"}});
  s->option<std::string>("--manifest", "manifest", "manifest.jsonl or its directory");
  s->option<std::string>("--preds", "preds", "Prediction CSV");
  s->option<std::string>("--report", "report", "report.json from evaluate (instead of --manifest/--preds)");
  s->option<std::string>("--split", "split", "train|val|test|all");
  s->option<double>("--bandwidth", "bandwidth", "KDE bandwidth (default: Silverman)");
  s->option<std::string>("--out", "out", "Output directory");
  sub->callback([&action, &out, s] {
    action = [&out, s] {
      const Json j = s->resolve();
      NegativeStrengths neg;
      if (!opt_string(j, "report").empty()) {
        const EvalReport r = report_from_json(read_json_file(opt_string(j, "report")));
        neg = {r.fn_strengths, r.tn_strengths};
      } else {
        const DatasetManifest m = load_manifest(require_path(j, "manifest", "--manifest or --report"));
        const auto preds = read_predictions(require_path(j, "preds", "--preds"));
        neg = stratify_negatives(preds, m, parse_split_selector(j.at("split")));
      }
      std::optional<double> h;
      if (!j.at("bandwidth").is_null()) h = j.at("bandwidth").get<double>();
      const fs::path dir = require_path(j, "out", "--out");
      ensure_dir(dir);

      Json summary;
      std::vector<PlotSeries> plot;
      const auto one = [&](const char* name, const std::vector<double>& v, const char* color) {
        Json entry{{"n", v.size()}, {"bandwidth", nullptr}};
        if (!v.empty()) {
          const KdeCurve c = kde(v, h);
          write_kde_csv(c, dir / (std::string("kde_") + name + ".csv"));
          entry["bandwidth"] = c.bandwidth;
          plot.push_back({name == std::string("fn") ? "false negatives" : "true negatives", c.grid, c.density, color});
        }
        out << name << "=" << v.size() << '\n';
        summary[name] = std::move(entry);
      };
      one("fn", neg.fn, "#d62728");
      one("tn", neg.tn, "#1f77b4");
      write_line_plot(plot, {"Strength of negative predictions", "illusion strength", "density"}, dir / "kde.svg");
      write_json_file(summary, dir / "analysis.json");
      write_run_json("analyze", j, dir);
    };
  });
}

// rank / trend ----------------------------------------------------------------

std::vector<ModelRecord> load_records(const Json& j) {
  const std::string table = opt_string(j, "table2");
  if (!table.empty()) return read_benchmark_csv(table);
  const auto& paths = j.at("reports");
  if (!paths.is_array() || paths.empty()) throw ValidationError("--table2 or --reports is required");
  std::vector<EvalReport> reports;
  for (const auto& p : paths) reports.push_back(report_from_json(read_json_file(p.get<std::string>())));
  return records_from_reports(reports);
}

void add_rank(CLI::App& app, std::function<void()>& action, std::ostream& out) {
  CLI::App* sub = app.add_subcommand("rank", "Rank models by mean recall");
  auto s = std::make_shared<Settings>(
      sub, Json{{"table2", nullptr}, {"reports", Json::array()}, {"mean", nullptr}, {"out", "indl_rank"}});
  s->option<std::string>("--table2", "table2", "Benchmark CSV (year,model,d01..d05,mean,top1,top5)");
  s->option<std::vector<std::string>>("--reports", "reports", "report.json files from evaluate");
  s->option<std::string>("--mean", "mean", "reported|recomputed (default: reported for --table2)");
  s->option<std::string>("--out", "out", "Output directory");
  sub->callback([&action, &out, s] {
    action = [&out, s] {
      Json j = s->resolve();
      const std::vector<ModelRecord> records = load_records(j);
      if (j.at("mean").is_null()) j["mean"] = opt_string(j, "table2").empty() ? "recomputed" : "reported";
      const RankingTable table = rank_models(records, parse_mean_source(j.at("mean").get<std::string>()));
      const fs::path dir = require_path(j, "out", "--out");
      ensure_dir(dir);
      write_json_file(to_json(table), dir / "ranking.json");
      write_ranking_csv(table, dir / "ranking.csv");
      write_run_json("rank", j, dir);
      for (const auto& row : table.rows) {
        out << row.rank << ' ' << row.model.name << ' ' << fmt("%.2f%%", row.mean * 100.0) << '\n';
      }
      for (const auto& note : table.notes) out << "note: " << note << '\n';
    };
  });
}

void add_trend(CLI::App& app, std::function<void()>& action, std::ostream& out) {
  CLI::App* sub = app.add_subcommand("trend", "Spearman correlation of InDL mean recall and ImageNet top-1");
  auto s = std::make_shared<Settings>(sub, Json{{"table2", nullptr}, {"reports", Json::array()}, {"out", "indl_trend"}});
  s->option<std::string>("--table2", "table2", "Benchmark CSV");
  s->option<std::string>("--out", "out", "Output directory");
  sub->callback([&action, &out, s] {
    action = [&out, s] {
      const Json j = s->resolve();
      const std::vector<ModelRecord> records = load_records(j);
      const TrendReport report = trend_compare(records);
      const fs::path dir = require_path(j, "out", "--out");
      ensure_dir(dir);
      write_json_file(to_json(report), dir / "trend.json");
      write_trend_csv(report, dir / "trend.csv");
      PlotSeries indl{"InDL mean recall", {}, {}, "#d62728"};
      PlotSeries top1{"ImageNet top-1", {}, {}, "#1f77b4"};
      for (std::size_t i = 0; i < report.series.size(); ++i) {
        indl.x.push_back(static_cast<double>(i + 1));
        indl.y.push_back(report.series[i].indl_mean);
        top1.x.push_back(static_cast<double>(i + 1));
        top1.y.push_back(report.series[i].imagenet_top1);
      }
      write_line_plot({indl, top1}, {"Models ordered by year", "model (year order)", "score"}, dir / "trend.svg");
      write_run_json("trend", j, dir);
      out << "models=" << report.series.size() << '\n' << "rho=" << fmt("%.12f", report.spearman_rho) << '\n';
    };
  });
}

// baseline / sweep ------------------------------------------------------------

void add_hyperparameters(Settings& s) {
  s.option<int>("--width", "hidden_width", "Hidden units per layer");
  s.option<int>("--input-side", "input_side", "Downsampled image side");
  s.option<int>("--epochs", "epochs", "Training epochs");
  s.option<int>("--batch", "batch_size", "Minibatch size");
  s.option<double>("--lr", "learning_rate", "Learning rate");
  s.option<std::uint64_t>("--seed", "seed", "Seed");
}

void add_baseline(CLI::App& app, std::function<void()>& action, std::ostream& out) {
  CLI::App* sub = app.add_subcommand("baseline", "Train a logistic-regression or MLP baseline");
  Json defaults = to_json(BaselineConfig{});
  defaults["manifest"] = nullptr;
  defaults["out"] = nullptr;
  auto s = std::make_shared<Settings>(sub, defaults);
  s->option<std::string>("--manifest", "manifest", "manifest.jsonl or its directory");
  s->option<std::string>("--arch", "arch", "logreg|mlp");
  s->option<int>("--depth", "depth", "Hidden layers (0 for logreg)");
  add_hyperparameters(*s);
  s->option<std::string>("--out", "out", "Output directory");
  sub->callback([&action, &out, s] {
    action = [&out, s] {
      const Json j = s->resolve();
      const BaselineConfig cfg = baseline_config_from_json(j);
      const fs::path dir = require_path(j, "out", "--out");
      const DatasetManifest m = load_manifest(require_path(j, "manifest", "--manifest"));
      auto [model, curve] = train_baseline(m, cfg);
      const auto preds = predict(model, m, Split::Test);
      ensure_dir(dir);
      write_predictions(dir / "predictions.csv", preds);
      write_json_file(to_json(model), dir / "model.json");
      const TrainingCurves curves{curve};
      write_curves_csv(curves, dir / "curves.csv");
      write_curves_svg(curves, std::string(to_string(m.records.empty() ? IllusionFamily::Poggendorff
                                                                         : m.records.front().family)),
                       dir / "loss.svg", dir / "recall.svg");
      write_run_json("baseline", j, dir);
      if (!curve.epochs.empty()) out << "final_loss=" << fmt("%.6f", curve.epochs.back().train_loss) << '\n';
      try {
        const EvalReport report = evaluate(preds, m, Split::Test, std::string(to_string(cfg.arch)));
        write_json_file(to_json(report), dir / "report.json");
        out << "recall=" << fmt("%.6f", report.recall) << '\n';
      } catch (const UndefinedRecallError&) {
        out << "recall=undefined\n";
      }
    };
  });
}

void add_sweep(CLI::App& app, std::function<void()>& action, std::ostream& out) {
  CLI::App* sub = app.add_subcommand("sweep", "Train one MLP per depth and export aligned curves");
  Json defaults = to_json(BaselineConfig{});
  defaults.erase("arch");
  defaults.erase("depth");
  defaults["depths"] = {1, 2, 3};
  defaults["manifest"] = nullptr;
  defaults["mnist_images"] = nullptr;
  defaults["mnist_labels"] = nullptr;
  defaults["limit"] = kMnistSweepLimit;
  defaults["out"] = nullptr;
  auto s = std::make_shared<Settings>(sub, defaults);
  s->option<std::string>("--manifest", "manifest", "InDL manifest");
  s->option<std::string>("--mnist-images", "mnist_images", "IDX image file");
  s->option<std::string>("--mnist-labels", "mnist_labels", "IDX label file");
  s->option<std::size_t>("--limit", "limit", "MNIST samples used");
  s->option<std::vector<int>>("--depths", "depths", "Hidden-layer counts")->delimiter(',');
  add_hyperparameters(*s);
  s->option<std::string>("--out", "out", "Output directory");
  sub->callback([&action, &out, s] {
    action = [&out, s] {
      const Json j = s->resolve();
      BaselineConfig tmpl = baseline_config_from_json(j);
      const auto depths = j.at("depths").get<std::vector<int>>();
      const fs::path dir = require_path(j, "out", "--out");
      TrainingCurves curves;
      std::string title;
      if (!opt_string(j, "manifest").empty()) {
        const DatasetManifest m = load_manifest(opt_string(j, "manifest"));
        curves = depth_sweep(m, depths, tmpl);
        title = m.records.empty() ? "InDL" : std::string(to_string(m.records.front().family));
      } else {
        const MnistSet mnist = load_mnist_idx(require_path(j, "mnist_images", "--manifest or --mnist-images"),
                                              require_path(j, "mnist_labels", "--mnist-labels"));
        curves = depth_sweep(mnist, depths, tmpl, j.at("limit").get<std::size_t>());
        title = "MNIST (digit < 5)";
      }
      ensure_dir(dir);
      write_curves_csv(curves, dir / "curves.csv");
      write_curves_svg(curves, title, dir / "loss.svg", dir / "recall.svg");
      write_run_json("sweep", j, dir);
      for (const auto& c : curves) {
        out << "depth=" << c.depth;
        if (!c.epochs.empty()) {
          out << " initial_loss=" << fmt("%.6f", c.epochs.front().train_loss)
              << " final_loss=" << fmt("%.6f", c.epochs.back().train_loss);
        }
        out << '\n';
      }
    };
  });
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Procedural geometric-illusion datasets, evaluation and baselines", "indl"};
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);
  std::function<void()> action;
  add_generate(app, action, out);
  add_evaluate(app, action, out);
  add_analyze(app, action, out);
  add_rank(app, action, out);
  add_trend(app, action, out);
  add_baseline(app, action, out);
  add_sweep(app, action, out);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e, out, err) == 0 ? 0 : 1;
  }

  try {
    if (action) action();
    return 0;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const IoError& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 2;
  }
}

}  // namespace indl
