#include "indl/ranking.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <sstream>

#include "indl/error.hpp"

namespace indl {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  for (std::size_t i = 0; i <= line.size(); ++i) {
    if (i == line.size() || line[i] == ',') {
      out.push_back(trim(line.substr(start, i - start)));
      start = i + 1;
    }
  }
  return out;
}

std::optional<double> parse_score(std::string_view cell, std::size_t line_no) {
  if (cell.empty()) return std::nullopt;
  bool percent = false;
  if (cell.back() == '%') {
    percent = true;
    cell.remove_suffix(1);
  }
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
  if (ec != std::errc() || ptr != cell.data() + cell.size()) {
    throw ValidationError("benchmark line " + std::to_string(line_no) + ": bad number '" + std::string(cell) + "'");
  }
  v = percent ? v / 100.0 : as_fraction(v);
  if (!(v >= 0.0 && v <= 1.0)) {
    throw ValidationError("benchmark line " + std::to_string(line_no) + ": score outside [0,100]%");
  }
  return v;
}

std::string percent(double fraction) {
  std::ostringstream ss;
  ss.setf(std::ios::fixed);
  ss.precision(2);
  ss << fraction * 100.0 << '%';
  return ss.str();
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed: " + path.string());
}

template <class T>
nlohmann::ordered_json optional_json(const std::optional<T>& v) {
  return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
}

}  // namespace

std::optional<double> ModelRecord::arithmetic_mean() const {
  double sum = 0.0;
  for (const auto& r : recall) {
    if (!r) return std::nullopt;
    sum += *r;
  }
  return sum / static_cast<double>(kDatasetCount);
}

double as_fraction(double value) { return value > 1.0 ? value / 100.0 : value; }

std::vector<ModelRecord> parse_benchmark_csv(std::string_view text) {
  std::vector<ModelRecord> out;
  std::istringstream in{std::string(text)};
  std::string raw;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim(raw);
    if (line.empty()) continue;
    const auto f = split_fields(line);
    if (!header_seen) {
      static constexpr std::array<std::string_view, 10> kHeader = {"year", "model", "d01", "d02",  "d03",
                                                                   "d04",  "d05",   "mean", "top1", "top5"};
      if (!std::equal(f.begin(), f.end(), kHeader.begin(), kHeader.end())) {
        throw ValidationError("benchmark CSV: expected header 'year,model,d01,d02,d03,d04,d05,mean,top1,top5'");
      }
      header_seen = true;
      continue;
    }
    if (f.size() != 10) throw ValidationError("benchmark line " + std::to_string(line_no) + ": expected 10 fields");
    ModelRecord m;
    if (!f[0].empty()) {
      int year = 0;
      const auto [ptr, ec] = std::from_chars(f[0].data(), f[0].data() + f[0].size(), year);
      if (ec != std::errc() || ptr != f[0].data() + f[0].size()) {
        throw ValidationError("benchmark line " + std::to_string(line_no) + ": bad year");
      }
      m.year = year;
    }
    m.name = std::string(f[1]);
    if (m.name.empty()) throw ValidationError("benchmark line " + std::to_string(line_no) + ": empty model name");
    for (std::size_t d = 0; d < kDatasetCount; ++d) m.recall[d] = parse_score(f[2 + d], line_no);
    m.mean_recall = parse_score(f[7], line_no);
    m.imagenet_top1 = parse_score(f[8], line_no);
    m.imagenet_top5 = parse_score(f[9], line_no);
    out.push_back(std::move(m));
  }
  if (!header_seen) throw ValidationError("benchmark CSV is empty");
  return out;
}

std::vector<ModelRecord> read_benchmark_csv(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_benchmark_csv(ss.str());
}

std::vector<ModelRecord> records_from_reports(std::span<const EvalReport> reports) {
  std::map<std::string, ModelRecord> by_name;
  for (const EvalReport& r : reports) {
    ModelRecord& m = by_name[r.model_name];
    m.name = r.model_name;
    const auto slot = static_cast<std::size_t>(dataset_index(parse_family(r.dataset)) - 1);
    if (m.recall[slot]) throw ValidationError("two reports for model '" + r.model_name + "' on " + r.dataset);
    m.recall[slot] = r.recall;
  }
  std::vector<ModelRecord> out;
  for (auto& [name, m] : by_name) {
    m.mean_recall = m.arithmetic_mean();
    out.push_back(std::move(m));
  }
  return out;
}

std::string_view to_string(MeanSource source) {
  return source == MeanSource::Reported ? "reported" : "recomputed";
}

MeanSource parse_mean_source(std::string_view text) {
  if (text == "reported") return MeanSource::Reported;
  if (text == "recomputed") return MeanSource::Recomputed;
  throw ValidationError("mean source must be 'reported' or 'recomputed'");
}

RankingTable rank_models(std::vector<ModelRecord> records, MeanSource source) {
  if (records.empty()) throw ValidationError("rank_models: no records");
  RankingTable table;
  table.source = source;
  for (ModelRecord& m : records) {
    RankedModel row;
    if (source == MeanSource::Reported) {
      if (!m.mean_recall) throw ValidationError("model '" + m.name + "' has no reported mean");
      row.mean = *m.mean_recall;
    } else {
      const auto mean = m.arithmetic_mean();
      if (!mean) throw ValidationError("model '" + m.name + "' lacks one of the five per-dataset recalls");
      row.mean = *mean;
      if (m.mean_recall && std::abs(*mean - *m.mean_recall) > kMeanDiscrepancyTolerance) {
        table.notes.push_back(m.name + ": arithmetic mean " + percent(*mean) + " vs reported " +
                              percent(*m.mean_recall));
      }
    }
    row.model = std::move(m);
    table.rows.push_back(std::move(row));
  }
  std::sort(table.rows.begin(), table.rows.end(), [](const RankedModel& a, const RankedModel& b) {
    if (a.mean != b.mean) return a.mean > b.mean;
    return a.model.name < b.model.name;
  });
  for (std::size_t i = 0; i < table.rows.size(); ++i) table.rows[i].rank = i + 1;
  std::sort(table.notes.begin(), table.notes.end());
  return table;
}

std::vector<double> average_ranks(std::span<const double> values) {
  std::vector<std::size_t> order(values.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  std::vector<double> ranks(values.size());
  for (std::size_t i = 0; i < order.size();) {
    std::size_t j = i;
    while (j + 1 < order.size() && values[order[j + 1]] == values[order[i]]) ++j;
    const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
    for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
    i = j + 1;
  }
  return ranks;
}

double spearman(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.size() < 2) throw ValidationError("spearman: need two equal-length series of >= 2");
  const auto ra = average_ranks(a);
  const auto rb = average_ranks(b);
  const double n = static_cast<double>(ra.size());
  const double ma = std::accumulate(ra.begin(), ra.end(), 0.0) / n;
  const double mb = std::accumulate(rb.begin(), rb.end(), 0.0) / n;
  double sab = 0.0, saa = 0.0, sbb = 0.0;
  for (std::size_t i = 0; i < ra.size(); ++i) {
    sab += (ra[i] - ma) * (rb[i] - mb);
    saa += (ra[i] - ma) * (ra[i] - ma);
    sbb += (rb[i] - mb) * (rb[i] - mb);
  }
  if (saa == 0.0 || sbb == 0.0) throw ValidationError("spearman: a series is constant");
  return sab / std::sqrt(saa * sbb);
}

TrendReport trend_compare(std::span<const ModelRecord> records) {
  TrendReport report;
  for (const ModelRecord& m : records) {
    const auto mean = m.mean_recall ? m.mean_recall : m.arithmetic_mean();
    if (!mean || !m.imagenet_top1) continue;
    report.series.push_back({m.name, m.year, *mean, *m.imagenet_top1});
  }
  if (report.series.size() < 2) throw ValidationError("trend_compare: fewer than 2 models with both scores");
  std::sort(report.series.begin(), report.series.end(), [](const TrendPoint& a, const TrendPoint& b) {
    if (a.year.has_value() != b.year.has_value()) return a.year.has_value();
    if (a.year && *a.year != *b.year) return *a.year < *b.year;
    return a.name < b.name;
  });
  std::vector<double> indl, top1;
  for (const auto& p : report.series) {
    indl.push_back(p.indl_mean);
    top1.push_back(p.imagenet_top1);
  }
  report.spearman_rho = spearman(indl, top1);
  return report;
}

nlohmann::ordered_json to_json(const RankingTable& table) {
  nlohmann::ordered_json j;
  j["mean_source"] = to_string(table.source);
  j["rows"] = nlohmann::ordered_json::array();
  for (const auto& row : table.rows) {
    nlohmann::ordered_json r;
    r["rank"] = row.rank;
    r["model"] = row.model.name;
    r["mean"] = row.mean;
    r["year"] = optional_json(row.model.year);
    r["recall"] = nlohmann::ordered_json::array();
    for (const auto& v : row.model.recall) r["recall"].push_back(optional_json(v));
    r["reported_mean"] = optional_json(row.model.mean_recall);
    r["imagenet_top1"] = optional_json(row.model.imagenet_top1);
    r["imagenet_top5"] = optional_json(row.model.imagenet_top5);
    j["rows"].push_back(std::move(r));
  }
  j["notes"] = table.notes;
  return j;
}

nlohmann::ordered_json to_json(const TrendReport& report) {
  nlohmann::ordered_json j;
  j["spearman_rho"] = report.spearman_rho;
  j["series"] = nlohmann::ordered_json::array();
  for (const auto& p : report.series) {
    j["series"].push_back(
        {{"model", p.name}, {"year", optional_json(p.year)}, {"indl_mean", p.indl_mean}, {"imagenet_top1", p.imagenet_top1}});
  }
  return j;
}

void write_ranking_csv(const RankingTable& table, const std::filesystem::path& path) {
  std::ostringstream ss;
  ss.precision(10);
  ss << "rank,model,mean\n";
  for (const auto& row : table.rows) ss << row.rank << ',' << row.model.name << ',' << row.mean << '\n';
  write_text(path, ss.str());
}

void write_trend_csv(const TrendReport& report, const std::filesystem::path& path) {
  std::ostringstream ss;
  ss.precision(10);
  ss << "year,model,indl_mean,imagenet_top1\n";
  for (const auto& p : report.series) {
    if (p.year) ss << *p.year;
    ss << ',' << p.name << ',' << p.indl_mean << ',' << p.imagenet_top1 << '\n';
  }
  write_text(path, ss.str());
}

}  // namespace indl
