#include "indl/dataset.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <mutex>
#include <numeric>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <unordered_set>

#include "indl/error.hpp"
#include "indl/random.hpp"

namespace indl {
namespace {

constexpr std::uint64_t kLabelStream = 0x6c6162656cULL;
constexpr std::uint64_t kSplitStream = 0x73706c6974ULL;

std::size_t id_width(std::size_t total) {
  std::size_t digits = 1;
  for (std::size_t v = total > 0 ? total - 1 : 0; v >= 10; v /= 10) ++digits;
  return std::max<std::size_t>(5, digits);
}

std::string make_id(std::size_t index, std::size_t width) {
  std::string s = std::to_string(index);
  return std::string(width - std::min(width, s.size()), '0') + s;
}

// Hamilton apportionment of integer units over real quotas.
template <std::size_t N>
std::array<std::size_t, N> apportion(const std::array<double, N>& quotas, std::size_t units,
                                     const std::array<std::size_t, N>& caps) {
  std::array<std::size_t, N> out{};
  std::array<double, N> frac{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < N; ++i) {
    out[i] = std::min(static_cast<std::size_t>(std::floor(quotas[i])), caps[i]);
    frac[i] = quotas[i] - std::floor(quotas[i]);
    assigned += out[i];
  }
  std::array<std::size_t, N> order{};
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return frac[a] > frac[b]; });
  while (assigned < units) {
    bool progressed = false;
    for (std::size_t i : order) {
      if (assigned == units) break;
      if (out[i] < caps[i]) {
        ++out[i];
        ++assigned;
        progressed = true;
      }
    }
    if (!progressed) break;
  }
  return out;
}

void check_geometry(const StimulusParams& params, const VectorScene& scene, const std::string& id) {
  const double violation = veridical_violation(scene, params.family);
  const bool ok = label_of(params) == ClassLabel::Positive ? violation == 0.0
                                                           : violation >= traits(params.family).deviation.lo;
  if (!ok) {
    std::ostringstream msg;
    msg << "sample " << id << ": veridical violation " << violation << " inconsistent with its label";
    throw std::logic_error(msg.str());
  }
}

std::string read_text(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace

std::string_view to_string(Split split) {
  switch (split) {
    case Split::Train: return "train";
    case Split::Val: return "val";
    case Split::Test: return "test";
  }
  return "unknown";
}

Split parse_split(std::string_view text) {
  if (text == "train") return Split::Train;
  if (text == "val" || text == "validation") return Split::Val;
  if (text == "test") return Split::Test;
  throw ValidationError("unknown split '" + std::string(text) + "'");
}

void DatasetConfig::validate() const {
  if (total < 1) throw ValidationError("total must be >= 1");
  if (!(positive_ratio >= 0.0 && positive_ratio <= 1.0)) throw ValidationError("positive_ratio must lie in [0,1]");
  for (double r : {split.train, split.val, split.test}) {
    if (!(r >= 0.0 && r <= 1.0)) throw ValidationError("split ratios must lie in [0,1]");
  }
  if (std::abs(split.train + split.val + split.test - 1.0) > 1e-9) throw ValidationError("split ratios must sum to 1");
  if (workers < 1) throw ValidationError("workers must be >= 1");
  raster.validate();
}

std::size_t positive_count(std::size_t total, double ratio) {
  return static_cast<std::size_t>(std::nearbyint(ratio * static_cast<double>(total)));
}

std::array<std::size_t, 3> split_sizes(std::size_t total, const SplitRatios& ratios) {
  const double n = static_cast<double>(total);
  return apportion<3>({n * ratios.train, n * ratios.val, n * ratios.test}, total, {total, total, total});
}

std::array<std::size_t, 3> positives_per_split(const std::array<std::size_t, 3>& sizes, double ratio,
                                               std::size_t positives) {
  std::array<double, 3> quotas{};
  for (std::size_t i = 0; i < 3; ++i) quotas[i] = static_cast<double>(sizes[i]) * ratio;
  return apportion<3>(quotas, positives, sizes);
}

std::uint64_t sample_seed(std::uint64_t master_seed, std::size_t index) {
  return hash64(master_seed, static_cast<std::uint64_t>(index));
}

std::vector<SampleRecord> plan_records(const DatasetConfig& cfg) {
  cfg.validate();
  const std::size_t total = cfg.total;
  const std::size_t positives = positive_count(total, cfg.positive_ratio);

  std::vector<std::size_t> order(total);
  std::iota(order.begin(), order.end(), 0);
  Rng label_rng(hash64(~cfg.master_seed, kLabelStream));
  label_rng.shuffle(order.begin(), order.end());
  std::vector<ClassLabel> labels(total, ClassLabel::Negative);
  for (std::size_t k = 0; k < positives; ++k) labels[order[k]] = ClassLabel::Positive;

  const auto sizes = split_sizes(total, cfg.split);
  const auto pos_sizes = positives_per_split(sizes, cfg.positive_ratio, positives);
  std::vector<std::size_t> pos_idx, neg_idx;
  for (std::size_t i = 0; i < total; ++i) (labels[i] == ClassLabel::Positive ? pos_idx : neg_idx).push_back(i);
  Rng split_rng(hash64(~cfg.master_seed, kSplitStream));
  split_rng.shuffle(pos_idx.begin(), pos_idx.end());
  split_rng.shuffle(neg_idx.begin(), neg_idx.end());

  std::vector<Split> splits(total, Split::Train);
  std::size_t pcur = 0, ncur = 0;
  for (std::size_t s = 0; s < 3; ++s) {
    const auto split = static_cast<Split>(s);
    for (std::size_t k = 0; k < pos_sizes[s]; ++k) splits[pos_idx[pcur++]] = split;
    for (std::size_t k = 0; k < sizes[s] - pos_sizes[s]; ++k) splits[neg_idx[ncur++]] = split;
  }

  const std::size_t width = id_width(total);
  std::vector<SampleRecord> records(total);
  for (std::size_t i = 0; i < total; ++i) {
    SampleRecord& r = records[i];
    r.id = make_id(i, width);
    r.family = cfg.family;
    r.label = labels[i];
    r.seed = sample_seed(cfg.master_seed, i);
    const StimulusParams params = sample_params(cfg.family, r.label, r.seed);
    r.strength = strength_of(params);
    r.deviation = params.deviation;
    r.split = splits[i];
    r.image_path = "images/" + r.id + ".png";
  }
  return records;
}

DatasetManifest build_dataset(const DatasetConfig& cfg) {
  DatasetManifest manifest;
  manifest.records = plan_records(cfg);
  manifest.config = cfg;
  manifest.root = cfg.out_dir;

  std::error_code ec;
  std::filesystem::create_directories(cfg.out_dir / "images", ec);
  if (ec) throw IoError("cannot create " + (cfg.out_dir / "images").string() + ": " + ec.message());

  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto work = [&]() {
    try {
      for (std::size_t i = next++; i < manifest.records.size(); i = next++) {
        const SampleRecord& r = manifest.records[i];
        const StimulusParams params = sample_params(r.family, r.label, r.seed);
        const VectorScene scene = build_scene(params);
        check_geometry(params, scene, r.id);
        write_image(rasterize(scene, cfg.raster), manifest.image_file(r));
      }
    } catch (...) {
      std::lock_guard lock(failure_mutex);
      if (!failure) failure = std::current_exception();
      next = manifest.records.size();
    }
  };
  const unsigned n_workers = std::min<std::size_t>(cfg.workers, manifest.records.size());
  std::vector<std::thread> pool;
  for (unsigned w = 1; w < n_workers; ++w) pool.emplace_back(work);
  work();
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);

  write_manifest(manifest, cfg.out_dir);
  return manifest;
}

nlohmann::ordered_json to_json(const DatasetConfig& cfg) {
  nlohmann::ordered_json j;
  j["family"] = to_string(cfg.family);
  j["total"] = cfg.total;
  j["positive_ratio"] = cfg.positive_ratio;
  j["split_ratios"] = {{"train", cfg.split.train}, {"val", cfg.split.val}, {"test", cfg.split.test}};
  j["master_seed"] = cfg.master_seed;
  j["raster"] = {{"width", cfg.raster.width},
                 {"height", cfg.raster.height},
                 {"stroke_px", cfg.raster.stroke_px},
                 {"antialias", cfg.raster.antialias},
                 {"background", cfg.raster.background},
                 {"foreground", cfg.raster.foreground}};
  return j;
}

DatasetConfig config_from_json(const nlohmann::json& j) {
  try {
    DatasetConfig cfg;
    cfg.family = parse_family(j.at("family").get<std::string>());
    cfg.total = j.at("total").get<std::size_t>();
    cfg.positive_ratio = j.at("positive_ratio").get<double>();
    const auto& s = j.at("split_ratios");
    cfg.split = {s.at("train").get<double>(), s.at("val").get<double>(), s.at("test").get<double>()};
    cfg.master_seed = j.at("master_seed").get<std::uint64_t>();
    const auto& r = j.at("raster");
    cfg.raster.width = r.at("width").get<int>();
    cfg.raster.height = r.at("height").get<int>();
    cfg.raster.stroke_px = r.at("stroke_px").get<double>();
    cfg.raster.antialias = r.at("antialias").get<bool>();
    cfg.raster.background = r.at("background").get<std::uint8_t>();
    cfg.raster.foreground = r.at("foreground").get<std::uint8_t>();
    return cfg;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("config.json: ") + e.what());
  }
}

nlohmann::ordered_json to_json(const SampleRecord& r) {
  nlohmann::ordered_json j;
  j["id"] = r.id;
  j["family"] = to_string(r.family);
  j["label"] = to_string(r.label);
  j["strength"] = r.strength;
  j["deviation"] = r.deviation;
  j["split"] = to_string(r.split);
  j["image_path"] = r.image_path;
  j["seed"] = r.seed;
  return j;
}

SampleRecord record_from_json(const nlohmann::json& j) {
  try {
    SampleRecord r;
    r.id = j.at("id").get<std::string>();
    r.family = parse_family(j.at("family").get<std::string>());
    r.label = parse_label(j.at("label").get<std::string>());
    r.strength = j.at("strength").get<double>();
    r.deviation = j.at("deviation").get<double>();
    r.split = parse_split(j.at("split").get<std::string>());
    r.image_path = j.at("image_path").get<std::string>();
    r.seed = j.at("seed").get<std::uint64_t>();
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(e.what());
  }
}

void write_manifest(const DatasetManifest& manifest, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  if (manifest.config) write_text(dir / "config.json", to_json(*manifest.config).dump(2) + "\n");
  std::string lines;
  for (const auto& r : manifest.records) lines += to_json(r).dump() + "\n";
  write_text(dir / "manifest.jsonl", lines);
}

DatasetManifest load_manifest(const std::filesystem::path& path) {
  const std::filesystem::path file = std::filesystem::is_directory(path) ? path / "manifest.jsonl" : path;
  DatasetManifest manifest;
  manifest.root = file.parent_path();

  std::istringstream in(read_text(file));
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    try {
      manifest.records.push_back(record_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(file.string() + " line " + std::to_string(line_no) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(file.string() + " line " + std::to_string(line_no) + ": " + e.what());
    }
  }

  const auto config_file = manifest.root / "config.json";
  if (std::filesystem::exists(config_file)) {
    try {
      manifest.config = config_from_json(nlohmann::json::parse(read_text(config_file)));
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError(config_file.string() + ": " + e.what());
    }
    manifest.config->out_dir = manifest.root;
  }
  validate(manifest);
  return manifest;
}

void validate(const DatasetManifest& m) {
  std::unordered_set<std::string> seen;
  std::array<std::size_t, 3> sizes{};
  std::size_t positives = 0;
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    const SampleRecord& r = m.records[i];
    const std::string where = "record " + std::to_string(i) + " (id '" + r.id + "')";
    if (r.id.empty()) throw ValidationError("record " + std::to_string(i) + ": empty id");
    if (!seen.insert(r.id).second) throw ValidationError("duplicate id '" + r.id + "' at record " + std::to_string(i));
    if ((r.label == ClassLabel::Positive) != (r.deviation == 0.0)) {
      throw ValidationError(where + ": label " + std::string(to_string(r.label)) + " contradicts deviation " +
                            std::to_string(r.deviation));
    }
    if (r.label == ClassLabel::Negative && !traits(r.family).deviation.contains(r.deviation)) {
      throw ValidationError(where + ": deviation outside the " + std::string(to_string(r.family)) + " range");
    }
    if (!(r.strength >= 0.0 && r.strength <= 1.0)) throw ValidationError(where + ": strength outside [0,1]");
    if (m.config && r.family != m.config->family) throw ValidationError(where + ": family differs from config");
    ++sizes[static_cast<std::size_t>(r.split)];
    if (r.label == ClassLabel::Positive) ++positives;
  }
  if (!m.config) return;
  const DatasetConfig& cfg = *m.config;
  if (m.records.size() != cfg.total) {
    throw ValidationError("manifest has " + std::to_string(m.records.size()) + " records, config says " +
                          std::to_string(cfg.total));
  }
  if (positives != positive_count(cfg.total, cfg.positive_ratio)) {
    throw ValidationError("manifest has " + std::to_string(positives) + " positives, expected " +
                          std::to_string(positive_count(cfg.total, cfg.positive_ratio)));
  }
  if (sizes != split_sizes(cfg.total, cfg.split)) throw ValidationError("split sizes do not match split_ratios");
}

}  // namespace indl
