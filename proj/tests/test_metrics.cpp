#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <string>

#include "indl/error.hpp"
#include "indl/metrics.hpp"
#include "support.hpp"

using namespace indl;

namespace {

constexpr auto P = ClassLabel::Positive;
constexpr auto N = ClassLabel::Negative;

DatasetManifest manifest_of(const std::vector<ClassLabel>& truth, const std::vector<double>& strengths,
                            Split split = Split::Test) {
  DatasetManifest m;
  for (std::size_t i = 0; i < truth.size(); ++i) {
    SampleRecord r;
    r.id = std::string(1, static_cast<char>('a' + i));
    r.family = IllusionFamily::Poggendorff;
    r.label = truth[i];
    r.deviation = truth[i] == P ? 0.0 : 0.05;
    r.strength = strengths[i];
    r.split = split;
    r.image_path = "images/" + r.id + ".png";
    m.records.push_back(r);
  }
  return m;
}

std::vector<PredictionRecord> preds_of(const DatasetManifest& m, const std::vector<ClassLabel>& labels) {
  std::vector<PredictionRecord> out;
  for (std::size_t i = 0; i < labels.size(); ++i) out.push_back({m.records[i].id, labels[i], std::nullopt});
  return out;
}

// Fixture: ids a-f, truths P,P,P,N,N,N, strengths 0.1..0.6.
const DatasetManifest kSix = manifest_of({P, P, P, N, N, N}, {0.1, 0.2, 0.3, 0.4, 0.5, 0.6});

}  // namespace

TEST_CASE("six-record hand fixture") {
  const auto c = confusion(preds_of(kSix, {P, N, P, N, P, N}), kSix, Split::Test);
  CHECK(c.tp == 2);
  CHECK(c.fn == 1);
  CHECK(c.tn == 2);
  CHECK(c.fp == 1);
  CHECK(c.total() == 6);

  const auto neg = stratify_negatives(preds_of(kSix, {N, N, N, N, N, N}), kSix, Split::Test);
  CHECK(neg.fn == std::vector<double>{0.1, 0.2, 0.3});
  CHECK(neg.tn == std::vector<double>{0.4, 0.5, 0.6});
}

TEST_CASE("ten-sample examples") {
  std::vector<ClassLabel> truth(10, N);
  truth[0] = truth[4] = truth[7] = P;
  const DatasetManifest m = manifest_of(truth, std::vector<double>(10, 0.5));
  const auto perfect = confusion(preds_of(m, truth), m, std::nullopt);
  CHECK(perfect == ConfusionCounts{3, 0, 7, 0});
  const auto all_neg = confusion(preds_of(m, std::vector<ClassLabel>(10, N)), m, std::nullopt);
  CHECK(all_neg == ConfusionCounts{0, 0, 7, 3});
}

TEST_CASE("recall") {
  CHECK(recall({9, 0, 0, 1}) == 0.9);
  CHECK(recall({4, 3, 2, 0}) == 1.0);
  CHECK_THROWS_AS(recall({0, 5, 5, 0}), UndefinedRecallError);
  CHECK_THROWS_AS(recall({}), ValidationError);
  for (std::size_t tp = 0; tp < 20; ++tp) {
    for (std::size_t fn = 0; fn < 20; ++fn) {
      if (tp + fn == 0) continue;
      const double r = recall({tp, 0, 0, fn});
      CHECK(r >= 0.0);
      CHECK(r <= 1.0);
      CHECK(recall({tp + 1, 0, 0, fn}) >= r);
    }
  }
}

TEST_CASE("stratify examples") {
  const DatasetManifest m = manifest_of({P, P, P, N}, {0.1, 0.5, 0.9, 0.4});
  const auto neg = stratify_negatives(preds_of(m, {P, P, N, N}), m, std::nullopt);
  CHECK(neg.fn == std::vector<double>{0.9});
  CHECK(neg.tn == std::vector<double>{0.4});
  CHECK(stratify_negatives(preds_of(m, {P, P, P, N}), m, std::nullopt).fn.empty());
}

TEST_CASE("partition properties and permutation invariance") {
  std::vector<ClassLabel> truth, guess;
  std::vector<double> strengths;
  for (int i = 0; i < 26; ++i) {
    truth.push_back(i % 3 == 0 ? P : N);
    guess.push_back(i % 5 < 2 ? P : N);
    strengths.push_back(i / 26.0);
  }
  const DatasetManifest m = manifest_of(truth, strengths);
  auto preds = preds_of(m, guess);
  const auto c = confusion(preds, m, Split::Test);
  const auto neg = stratify_negatives(preds, m, Split::Test);
  CHECK(neg.fn.size() + c.tp == static_cast<std::size_t>(std::count(truth.begin(), truth.end(), P)));
  CHECK(neg.tn.size() + c.fp == static_cast<std::size_t>(std::count(truth.begin(), truth.end(), N)));
  std::reverse(preds.begin(), preds.end());
  CHECK(confusion(preds, m, Split::Test) == c);
  std::rotate(preds.begin(), preds.begin() + 7, preds.end());
  CHECK(confusion(preds, m, Split::Test) == c);
}

TEST_CASE("contract errors") {
  auto preds = preds_of(kSix, {P, N, P, N, P, N});
  auto missing = preds;
  missing.pop_back();
  try {
    confusion(missing, kSix, Split::Test);
    FAIL("expected missing-id error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("1 missing prediction(s): f") != std::string::npos);
  }
  auto dup = preds;
  dup.push_back(dup.front());
  CHECK_THROWS_AS(confusion(dup, kSix, Split::Test), ValidationError);
  auto unknown = preds;
  unknown.push_back({"zz", P, std::nullopt});
  CHECK_THROWS_AS(confusion(unknown, kSix, Split::Test), ValidationError);
}

TEST_CASE("split selection ignores other splits") {
  DatasetManifest m = kSix;
  m.records[0].split = Split::Train;
  m.records[3].split = Split::Train;
  auto preds = preds_of(kSix, {N, P, P, P, N, N});
  const auto test_only = confusion(preds, m, Split::Test);
  CHECK(test_only == ConfusionCounts{2, 0, 2, 0});
  preds.erase(preds.begin());
  CHECK(confusion(preds, m, Split::Test) == test_only);
  CHECK_THROWS_AS(confusion(preds, m, Split::Train), ValidationError);
}

TEST_CASE("score threshold, ties negative") {
  CHECK(label_from_score(0.5) == N);
  CHECK(label_from_score(0.5000001) == P);
  CHECK(PredictionRecord{"a", std::nullopt, 0.5}.resolved() == N);
  CHECK(PredictionRecord{"a", std::nullopt, 0.9}.resolved() == P);
  CHECK(PredictionRecord{"a", N, 0.9}.resolved() == N);
}

TEST_CASE("prediction CSV parsing") {
  const auto preds = parse_predictions("id,predicted,score\na,positive,0.9\nb,,0.25\nc,negative,\n");
  REQUIRE(preds.size() == 3);
  CHECK(preds[0] == PredictionRecord{"a", P, 0.9});
  CHECK(preds[1] == PredictionRecord{"b", std::nullopt, 0.25});
  CHECK(preds[2] == PredictionRecord{"c", N, std::nullopt});
  CHECK(parse_predictions("id,predicted,score\r\na,positive,1\r\n").size() == 1);

  const auto line_of = [](const std::string& text) -> std::string {
    try {
      parse_predictions(text);
    } catch (const ValidationError& e) {
      return e.what();
    }
    return "no error";
  };
  CHECK(line_of("id,label,score\n").find("line 1") != std::string::npos);
  CHECK(line_of("id,predicted,score\na,maybe,\n").find("line 2") != std::string::npos);
  CHECK(line_of("id,predicted,score\na,positive,\nb,,1.5\n").find("line 3") != std::string::npos);
  CHECK(line_of("id,predicted,score\na,,\n").find("line 2") != std::string::npos);
  CHECK(line_of("id,predicted,score\na,positive\n").find("line 2") != std::string::npos);
  CHECK(line_of("id,predicted,score\na,,x\n").find("line 2") != std::string::npos);
  CHECK(line_of("") != "no error");
}

TEST_CASE("prediction CSV round trip") {
  indl::test::TempDir dir;
  const std::vector<PredictionRecord> preds{{"a", P, 0.1 + 0.2}, {"b", std::nullopt, 1.0 / 3.0}, {"c", N, std::nullopt}};
  write_predictions(dir / "p.csv", preds);
  CHECK(read_predictions(dir / "p.csv") == preds);
  CHECK_THROWS_AS(read_predictions(dir / "missing.csv"), IoError);
}

TEST_CASE("evaluation report") {
  const EvalReport r = evaluate(preds_of(kSix, {P, N, P, N, P, N}), kSix, Split::Test, "toy");
  CHECK(r.recall == doctest::Approx(2.0 / 3.0));
  CHECK(r.dataset == "poggendorff");
  CHECK(r.split == "test");
  CHECK(r.fn_strengths.size() == r.counts.fn);
  CHECK(r.tn_strengths.size() == r.counts.tn);
  const EvalReport back = report_from_json(nlohmann::json::parse(to_json(r).dump()));
  CHECK(back.counts == r.counts);
  CHECK(back.recall == r.recall);
  CHECK(back.fn_strengths == r.fn_strengths);

  const DatasetManifest negatives = manifest_of({N, N}, {0.1, 0.2});
  CHECK_THROWS_AS(evaluate(preds_of(negatives, {N, N}), negatives, Split::Test, "toy"), UndefinedRecallError);
}
