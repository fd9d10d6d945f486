#include "indl/metrics.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <unordered_map>

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

// id -> (record index, matched?) for the selected split, and every manifest id.
struct Matched {
  std::vector<std::pair<const SampleRecord*, ClassLabel>> pairs;
};

Matched match(std::span<const PredictionRecord> preds, const DatasetManifest& manifest, SplitSelector split) {
  std::unordered_map<std::string_view, std::size_t> index;
  index.reserve(manifest.records.size());
  for (std::size_t i = 0; i < manifest.records.size(); ++i) index.emplace(manifest.records[i].id, i);

  std::vector<int> found(manifest.records.size(), -1);
  for (std::size_t k = 0; k < preds.size(); ++k) {
    const auto it = index.find(preds[k].id);
    if (it == index.end()) throw ValidationError("prediction for unknown id '" + preds[k].id + "'");
    if (found[it->second] >= 0) throw ValidationError("duplicate prediction for id '" + preds[k].id + "'");
    found[it->second] = static_cast<int>(k);
  }

  Matched m;
  std::vector<std::string_view> missing;
  for (std::size_t i = 0; i < manifest.records.size(); ++i) {
    const SampleRecord& r = manifest.records[i];
    if (split && r.split != *split) continue;
    if (found[i] < 0) {
      missing.push_back(r.id);
      continue;
    }
    m.pairs.emplace_back(&r, preds[static_cast<std::size_t>(found[i])].resolved());
  }
  if (!missing.empty()) {
    std::string msg = std::to_string(missing.size()) + " missing prediction(s): ";
    for (std::size_t i = 0; i < missing.size() && i < 10; ++i) msg += (i ? ", " : "") + std::string(missing[i]);
    if (missing.size() > 10) msg += ", ...";
    throw ValidationError(msg);
  }
  return m;
}

}  // namespace

ClassLabel label_from_score(double score) { return score > 0.5 ? ClassLabel::Positive : ClassLabel::Negative; }

ClassLabel PredictionRecord::resolved() const {
  if (predicted) return *predicted;
  if (score) return label_from_score(*score);
  throw ValidationError("prediction '" + id + "' has neither a label nor a score");
}

double recall(const ConfusionCounts& c) {
  if (c.tp + c.fn == 0) throw UndefinedRecallError();
  return static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
}

ConfusionCounts confusion(std::span<const PredictionRecord> preds, const DatasetManifest& manifest,
                          SplitSelector split) {
  ConfusionCounts c;
  for (const auto& [record, predicted] : match(preds, manifest, split).pairs) {
    const bool truth = record->label == ClassLabel::Positive;
    const bool guess = predicted == ClassLabel::Positive;
    if (truth && guess) ++c.tp;
    else if (truth) ++c.fn;
    else if (guess) ++c.fp;
    else ++c.tn;
  }
  return c;
}

NegativeStrengths stratify_negatives(std::span<const PredictionRecord> preds, const DatasetManifest& manifest,
                                     SplitSelector split) {
  NegativeStrengths out;
  for (const auto& [record, predicted] : match(preds, manifest, split).pairs) {
    if (predicted != ClassLabel::Negative) continue;
    (record->label == ClassLabel::Positive ? out.fn : out.tn).push_back(record->strength);
  }
  return out;
}

EvalReport evaluate(std::span<const PredictionRecord> preds, const DatasetManifest& manifest, SplitSelector split,
                    std::string model_name) {
  EvalReport report;
  report.model_name = std::move(model_name);
  if (manifest.config) {
    report.dataset = to_string(manifest.config->family);
  } else if (!manifest.records.empty()) {
    report.dataset = to_string(manifest.records.front().family);
  }
  report.split = split ? std::string(to_string(*split)) : "all";
  report.counts = confusion(preds, manifest, split);
  report.recall = recall(report.counts);
  NegativeStrengths neg = stratify_negatives(preds, manifest, split);
  report.fn_strengths = std::move(neg.fn);
  report.tn_strengths = std::move(neg.tn);
  return report;
}

nlohmann::ordered_json to_json(const EvalReport& r) {
  nlohmann::ordered_json j;
  j["model_name"] = r.model_name;
  j["dataset"] = r.dataset;
  j["split"] = r.split;
  j["counts"] = {{"tp", r.counts.tp}, {"fp", r.counts.fp}, {"tn", r.counts.tn}, {"fn", r.counts.fn}};
  j["recall"] = r.recall;
  j["fn_strengths"] = r.fn_strengths;
  j["tn_strengths"] = r.tn_strengths;
  return j;
}

EvalReport report_from_json(const nlohmann::json& j) {
  try {
    EvalReport r;
    r.model_name = j.at("model_name").get<std::string>();
    r.dataset = j.at("dataset").get<std::string>();
    r.split = j.at("split").get<std::string>();
    const auto& c = j.at("counts");
    r.counts = {c.at("tp").get<std::size_t>(), c.at("fp").get<std::size_t>(), c.at("tn").get<std::size_t>(),
                c.at("fn").get<std::size_t>()};
    r.recall = j.at("recall").get<double>();
    r.fn_strengths = j.at("fn_strengths").get<std::vector<double>>();
    r.tn_strengths = j.at("tn_strengths").get<std::vector<double>>();
    if (r.fn_strengths.size() != r.counts.fn || r.tn_strengths.size() != r.counts.tn) {
      throw ValidationError("report strength lists do not match its counts");
    }
    return r;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("evaluation report: ") + e.what());
  }
}

std::vector<PredictionRecord> parse_predictions(std::string_view text) {
  std::vector<PredictionRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  bool header_seen = false;
  while (pos <= text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = trim(text.substr(pos, end - pos));
    pos = end + 1;
    ++line_no;
    if (line.empty()) {
      if (end == text.size()) break;
      continue;
    }
    auto fail = [&](const std::string& what) {
      return ValidationError("predictions line " + std::to_string(line_no) + ": " + what);
    };
    const auto fields = split_fields(line);
    if (!header_seen) {
      if (fields.size() != 3 || fields[0] != "id" || fields[1] != "predicted" || fields[2] != "score") {
        throw fail("expected header 'id,predicted,score'");
      }
      header_seen = true;
      continue;
    }
    if (fields.size() != 3) throw fail("expected 3 fields");
    PredictionRecord rec;
    rec.id = std::string(fields[0]);
    if (rec.id.empty()) throw fail("empty id");
    if (!fields[1].empty()) {
      try {
        rec.predicted = parse_label(fields[1]);
      } catch (const ValidationError&) {
        throw fail("predicted must be 'positive' or 'negative'");
      }
    }
    if (!fields[2].empty()) {
      double v = 0.0;
      const auto [ptr, ec] = std::from_chars(fields[2].data(), fields[2].data() + fields[2].size(), v);
      if (ec != std::errc() || ptr != fields[2].data() + fields[2].size()) throw fail("score is not a number");
      if (!(v >= 0.0 && v <= 1.0)) throw fail("score outside [0,1]");
      rec.score = v;
    }
    if (!rec.predicted && !rec.score) throw fail("row has neither predicted label nor score");
    out.push_back(std::move(rec));
    if (end == text.size()) break;
  }
  if (!header_seen) throw ValidationError("predictions file is empty");
  return out;
}

std::vector<PredictionRecord> read_predictions(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_predictions(ss.str());
}

void write_predictions(const std::filesystem::path& path, std::span<const PredictionRecord> preds) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  out << "id,predicted,score\n";
  char buf[64];
  for (const auto& p : preds) {
    out << p.id << ',';
    if (p.predicted) out << to_string(*p.predicted);
    out << ',';
    if (p.score) {
      const auto res = std::to_chars(buf, buf + sizeof buf, *p.score);
      out.write(buf, res.ptr - buf);
    }
    out << '\n';
  }
  if (!out) throw IoError("write failed: " + path.string());
}

}  // namespace indl
