#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "indl/dataset.hpp"
#include "indl/error.hpp"
#include "support.hpp"

using namespace indl;
using indl::test::TempDir;

namespace {

DatasetConfig small_config(std::size_t total, const std::filesystem::path& out = {}) {
  DatasetConfig cfg;
  cfg.total = total;
  cfg.master_seed = 42;
  cfg.raster.width = cfg.raster.height = 64;
  cfg.out_dir = out;
  return cfg;
}

// round-half-even over exact rationals: ratio = num / den.
std::size_t oracle_round(std::size_t total, std::size_t num, std::size_t den) {
  const std::size_t scaled = total * num;
  const std::size_t q = scaled / den, r = scaled % den;
  if (2 * r < den) return q;
  if (2 * r > den) return q + 1;
  return q % 2 == 0 ? q : q + 1;
}

}  // namespace

TEST_CASE("positive count rounding") {
  CHECK(positive_count(10000, 0.3) == 3000);
  CHECK(positive_count(10, 0.0) == 0);
  CHECK(positive_count(5, 0.5) == 2);
  CHECK(positive_count(3, 0.5) == 2);
  CHECK(positive_count(7, 1.0) == 7);
  for (std::size_t den : {2u, 4u, 8u, 10u}) {
    for (std::size_t num = 0; num <= den; ++num) {
      const double ratio = static_cast<double>(num) / den;
      // Exactly representable ratios only, so the double product is exact.
      if (den == 10 && num % 5 != 0) continue;
      for (std::size_t total = 1; total <= 3000; ++total) {
        CHECK(positive_count(total, ratio) == oracle_round(total, num, den));
      }
    }
  }
  CHECK(positive_count(1000000, 0.3) == 300000);
}

TEST_CASE("split sizes apportion the total") {
  for (std::size_t total = 1; total <= 500; ++total) {
    const auto s = split_sizes(total, SplitRatios{});
    CHECK(s[0] + s[1] + s[2] == total);
    CHECK(std::abs(static_cast<double>(s[0]) - 0.8 * total) < 1.0);
    CHECK(std::abs(static_cast<double>(s[1]) - 0.1 * total) < 1.0);
    CHECK(std::abs(static_cast<double>(s[2]) - 0.1 * total) < 1.0);
  }
  CHECK(split_sizes(10000, SplitRatios{}) == std::array<std::size_t, 3>{8000, 1000, 1000});
}

TEST_CASE("planned records: counts, ids, stratification") {
  for (std::size_t total : {1u, 2u, 7u, 10u, 33u, 100u, 1000u, 2501u}) {
    for (double ratio : {0.0, 0.3, 0.5, 1.0}) {
      DatasetConfig cfg = small_config(total);
      cfg.positive_ratio = ratio;
      const auto records = plan_records(cfg);
      REQUIRE(records.size() == total);
      std::size_t pos = 0;
      std::array<std::size_t, 3> size{}, spos{};
      for (const auto& r : records) {
        pos += r.label == ClassLabel::Positive;
        size[static_cast<int>(r.split)]++;
        spos[static_cast<int>(r.split)] += r.label == ClassLabel::Positive;
        CHECK((r.label == ClassLabel::Positive) == (r.deviation == 0.0));
        CHECK(r.strength >= 0.0);
        CHECK(r.strength <= 1.0);
        CHECK(r.image_path == "images/" + r.id + ".png");
      }
      CHECK(pos == positive_count(total, ratio));
      CHECK(size == split_sizes(total, cfg.split));
      for (int s = 0; s < 3; ++s) {
        if (size[s] == 0) continue;
        const double frac = static_cast<double>(spos[s]) / size[s];
        CHECK(std::abs(frac - ratio) <= 1.0 / size[s] + 1e-12);
      }
      std::vector<std::string> ids;
      for (const auto& r : records) ids.push_back(r.id);
      CHECK(std::is_sorted(ids.begin(), ids.end()));
      CHECK(std::adjacent_find(ids.begin(), ids.end()) == ids.end());
    }
  }
  CHECK(plan_records(small_config(10000)).back().id == "09999");
  CHECK(plan_records(small_config(100001)).back().id == "100000");
}

TEST_CASE("degenerate ratio: no positives") {
  DatasetConfig cfg = small_config(10);
  cfg.positive_ratio = 0.0;
  for (const auto& r : plan_records(cfg)) CHECK(r.label == ClassLabel::Negative);
}

TEST_CASE("samples are reproducible in isolation") {
  const DatasetConfig cfg = small_config(200);
  const auto records = plan_records(cfg);
  for (std::size_t i = 0; i < records.size(); ++i) {
    CHECK(records[i].seed == sample_seed(cfg.master_seed, i));
    const StimulusParams p = sample_params(cfg.family, records[i].label, records[i].seed);
    CHECK(strength_of(p) == records[i].strength);
    CHECK(p.deviation == records[i].deviation);
  }
}

TEST_CASE("strength coverage") {
  for (IllusionFamily f : kAllFamilies) {
    DatasetConfig cfg = small_config(1000);
    cfg.family = f;
    const auto records = plan_records(cfg);
    double lo = 1.0, hi = 0.0;
    for (const auto& r : records) {
      lo = std::min(lo, r.strength);
      hi = std::max(hi, r.strength);
    }
    CHECK(lo < 0.05);
    CHECK(hi > 0.95);
  }
}

TEST_CASE("invalid configs") {
  DatasetConfig cfg = small_config(0);
  CHECK_THROWS_AS(plan_records(cfg), ValidationError);
  cfg = small_config(10);
  cfg.positive_ratio = 1.5;
  CHECK_THROWS_AS(plan_records(cfg), ValidationError);
  cfg = small_config(10);
  cfg.split = {0.5, 0.5, 0.5};
  CHECK_THROWS_AS(plan_records(cfg), ValidationError);
}

TEST_CASE("build is byte-identical across runs and worker counts") {
  TempDir dir;
  DatasetConfig a = small_config(60, dir / "a");
  DatasetConfig b = small_config(60, dir / "b");
  b.workers = 3;
  const DatasetManifest ma = build_dataset(a);
  build_dataset(b);
  CHECK(indl::test::same_tree(dir / "a", dir / "b"));
  CHECK(std::filesystem::exists(dir / "a/config.json"));
  CHECK(std::filesystem::exists(ma.image_file(ma.records.front())));

  const DatasetManifest loaded = load_manifest(dir / "a");
  CHECK(loaded.records == ma.records);
  REQUIRE(loaded.config.has_value());
  CHECK(to_json(*loaded.config) == to_json(a));
  CHECK(load_manifest(dir / "a/manifest.jsonl").records == ma.records);
}

TEST_CASE("manifest line format") {
  SampleRecord r{"00007", IllusionFamily::Poggendorff, ClassLabel::Negative, 0.25, 0.05, Split::Val,
                 "images/00007.png", 12345};
  CHECK(to_json(r).dump() ==
        R"({"id":"00007","family":"poggendorff","label":"negative","strength":0.25,"deviation":0.05,)"
        R"("split":"val","image_path":"images/00007.png","seed":12345})");
  CHECK(record_from_json(nlohmann::json::parse(to_json(r).dump())) == r);
}

TEST_CASE("manifest validation errors") {
  TempDir dir;
  DatasetManifest m;
  m.records.push_back({"00000", IllusionFamily::Poggendorff, ClassLabel::Positive, 0.5, 0.0, Split::Train, "x.png", 1});
  m.records.push_back({"00001", IllusionFamily::Poggendorff, ClassLabel::Negative, 0.5, 0.05, Split::Test, "y.png", 2});
  write_manifest(m, dir.path());
  CHECK(load_manifest(dir.path()).records == m.records);

  DatasetManifest dup = m;
  dup.records[1].id = "00000";
  write_manifest(dup, dir.path());
  try {
    load_manifest(dir.path());
    FAIL("expected a duplicate-id error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("00000") != std::string::npos);
    CHECK(std::string(e.what()).find("record 1") != std::string::npos);
  }

  DatasetManifest contradiction = m;
  contradiction.records[0].deviation = 0.05;
  write_manifest(contradiction, dir.path());
  CHECK_THROWS_AS(load_manifest(dir.path()), ValidationError);

  DatasetManifest small_dev = m;
  small_dev.records[1].deviation = 0.001;
  write_manifest(small_dev, dir.path());
  CHECK_THROWS_AS(load_manifest(dir.path()), ValidationError);

  indl::test::write_file(dir / "manifest.jsonl", "{\"id\": \"a\"}\n");
  try {
    load_manifest(dir.path());
    FAIL("expected a parse error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("line 1") != std::string::npos);
  }
  CHECK_THROWS_AS(load_manifest(dir / "nope.jsonl"), IoError);
}

TEST_CASE("config echo enforces counts") {
  TempDir dir;
  const DatasetManifest m = build_dataset(small_config(20, dir.path()));
  DatasetManifest fewer = m;
  fewer.records.pop_back();
  write_manifest(fewer, dir.path());
  CHECK_THROWS_AS(load_manifest(dir.path()), ValidationError);

  DatasetManifest flipped = m;
  for (auto& r : flipped.records) {
    if (r.label == ClassLabel::Negative) {
      r.label = ClassLabel::Positive;
      r.deviation = 0.0;
      break;
    }
  }
  write_manifest(flipped, dir.path());
  CHECK_THROWS_AS(load_manifest(dir.path()), ValidationError);
}
