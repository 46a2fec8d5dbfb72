#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <charconv>
#include <cmath>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "hhfreak/bench.hpp"
#include "hhfreak/errors.hpp"

#include "support.hpp"

using namespace hhfreak;

namespace {

std::vector<std::string> split_lines(const std::string& text) {
  std::vector<std::string> lines;
  std::string cur;
  for (char ch : text) {
    if (ch == '\n') {
      lines.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  CHECK(cur.empty()); // every line newline-terminated
  return lines;
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char ch : line) {
    if (ch == ',') {
      fields.push_back(cur);
      cur.clear();
    } else {
      cur += ch;
    }
  }
  fields.push_back(cur);
  return fields;
}

double parse_exact(const std::string& s) {
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  CHECK(res.ec == std::errc());
  CHECK(res.ptr == s.data() + s.size());
  return v;
}

const std::vector<std::string> kPerSigmaStages = {
    "gaussx", "gaussy", "ddx",     "ddy",    "mulxx",  "mulyy",
    "mulxy",  "gaussx2", "gaussy2", "harris", "count",  "hessian"};

} // namespace

TEST_CASE("compute_stats matches hand arithmetic") {
  const RunStats st = compute_stats({1.0, 2.0, 3.0, 4.0});
  CHECK(st.mean_s == doctest::Approx(2.5).epsilon(1e-15));
  CHECK(st.std_s == doctest::Approx(std::sqrt(5.0 / 3.0)).epsilon(1e-15));
  CHECK(st.min_s == 1.0);
  CHECK(st.max_s == 4.0);
  CHECK(st.samples == std::vector<double>{1.0, 2.0, 3.0, 4.0});

  const RunStats one = compute_stats({0.25});
  CHECK(one.mean_s == 0.25);
  CHECK(one.std_s == 0.0); // sample stddev of n=1 defined as 0
  CHECK(one.min_s == 0.25);
  CHECK(one.max_s == 0.25);

  CHECK_THROWS_AS(compute_stats({}), std::invalid_argument);
}

TEST_CASE("default tile candidates cover the power-of-two grid") {
  const auto small = default_tile_candidates(kSmallDeviceMaxTileArea);
  const auto large = default_tile_candidates(kLargeDeviceMaxTileArea);
  CHECK(small.size() == 28);
  CHECK(large.size() == 45);

  for (const auto& grid : {small, large}) {
    const int cap = (&grid == &small) ? 256 : 1024;
    std::set<std::pair<int, int>> seen;
    std::pair<int, int> prev{0, 0};
    for (const TileConfig& t : grid) {
      CHECK(is_valid_tile(t));
      CHECK(t.tile_w >= 2);
      CHECK(t.tile_h >= 2);
      CHECK(t.tile_w * t.tile_h <= cap);
      const std::pair<int, int> key{t.tile_w, t.tile_h};
      CHECK(prev < key); // strictly sorted by (w, h)
      CHECK(seen.insert(key).second);
      prev = key;
    }
  }
  CHECK(small.front().tile_w == 2);
  CHECK(small.front().tile_h == 2);
  CHECK(large.back().tile_w == 512);
  CHECK(large.back().tile_h == 2);
}

TEST_CASE("bench_pipeline reports every stage of every sigma") {
  const Raster img = testsupport::textured_raster(32, 32);
  BenchConfig cfg;
  cfg.runs = 2;
  cfg.detector.base_sigmas = {0.7, 2.0};

  const TimingReport rep = bench_pipeline(img, cfg);
  CHECK(rep.runs == 2);
  CHECK(rep.outputs_identical);
  // 2 base sigmas + the 2 refinement scales detect() always adds
  const std::size_t sigmas = detect(img, cfg.detector).evaluated_sigmas.size();
  CHECK(sigmas == 4);
  CHECK(rep.stages.size() == kPerSigmaStages.size() * sigmas + 1); // + gather

  for (double sigma : cfg.detector.base_sigmas)
    for (const std::string& name : kPerSigmaStages) {
      const TimingRow* row = rep.find(name, sigma);
      REQUIRE(row != nullptr);
      CHECK(row->stats.samples.size() == 2);
      const int expected = (name == "gaussx2" || name == "gaussy2") ? 3 : 1;
      CHECK(row->invocations_per_run == expected);
      CHECK(row->stats.min_s >= 0.0);
    }
  const TimingRow* gather = rep.find("gather", std::nullopt);
  REQUIRE(gather != nullptr);
  CHECK(gather->invocations_per_run == 1);
  CHECK(rep.find("desaturate", std::nullopt) == nullptr); // input already gray
  CHECK(rep.find("gaussx", 24.0) == nullptr);

  // stage intervals are disjoint slices of the whole run
  double stage_sum = 0.0;
  for (const TimingRow& row : rep.stages) stage_sum += row.stats.mean_s;
  CHECK(stage_sum <= rep.total.mean_s + 1e-9);
  CHECK(rep.total.samples.size() == 2);

  // reported keypoints are the real detector output
  CHECK(rep.keypoints == detect(img, cfg.detector).keypoints);
}

TEST_CASE("bench_pipeline times desaturate for color input") {
  Raster rgb(16, 16, 3);
  testsupport::Rng rng{11};
  for (float& v : rgb.data()) v = static_cast<float>(rng.unit());
  BenchConfig cfg;
  cfg.runs = 1;
  cfg.detector.base_sigmas = {0.7};

  const TimingReport rep = bench_pipeline(rgb, cfg);
  const TimingRow* des = rep.find("desaturate", std::nullopt);
  REQUIRE(des != nullptr);
  CHECK(des->invocations_per_run == 1);
  // 1 base sigma + 2 refinements, plus gather and desaturate
  CHECK(rep.stages.size() == kPerSigmaStages.size() * 3 + 2);
}

TEST_CASE("emit_timing_csv round-trips the report") {
  const Raster img = testsupport::textured_raster(24, 24);
  BenchConfig cfg;
  cfg.runs = 2;
  cfg.detector.base_sigmas = {2.0};
  const TimingReport rep = bench_pipeline(img, cfg);

  std::ostringstream sink;
  const std::size_t bytes = emit_timing_csv(rep, sink);
  const std::string text = sink.str();
  CHECK(bytes == text.size());

  const auto lines = split_lines(text);
  REQUIRE(lines.size() == rep.stages.size() + 2); // header + rows + total
  CHECK(lines[0] == "stage,sigma,invocations,mean_s,std_s,min_s,max_s");

  for (std::size_t i = 0; i < rep.stages.size(); ++i) {
    const auto fields = split_fields(lines[i + 1]);
    REQUIRE(fields.size() == 7);
    const TimingRow& row = rep.stages[i];
    CHECK(fields[0] == row.stage);
    if (row.sigma)
      CHECK(parse_exact(fields[1]) == *row.sigma);
    else
      CHECK(fields[1].empty());
    CHECK(fields[2] == std::to_string(row.invocations_per_run));
    CHECK(parse_exact(fields[3]) == row.stats.mean_s);
    CHECK(parse_exact(fields[4]) == row.stats.std_s);
    CHECK(parse_exact(fields[5]) == row.stats.min_s);
    CHECK(parse_exact(fields[6]) == row.stats.max_s);
  }
  const auto total = split_fields(lines.back());
  CHECK(total[0] == "total");
  CHECK(parse_exact(total[3]) == rep.total.mean_s);
}

TEST_CASE("emit_stage_csv lists one detect run") {
  const Raster img = testsupport::textured_raster(24, 24);
  DetectorConfig cfg;
  cfg.base_sigmas = {2.0};
  const DetectionResult res = detect(img, cfg);

  std::ostringstream sink;
  const std::size_t bytes = emit_stage_csv(res.timings, sink);
  const auto lines = split_lines(sink.str());
  CHECK(bytes == sink.str().size());
  REQUIRE(lines.size() == res.timings.size() + 1);
  CHECK(lines[0] == "stage,sigma,invocations,elapsed_s");
  for (std::size_t i = 0; i < res.timings.size(); ++i) {
    const auto fields = split_fields(lines[i + 1]);
    REQUIRE(fields.size() == 4);
    CHECK(fields[0] == res.timings[i].stage);
    CHECK(parse_exact(fields[3]) == res.timings[i].elapsed_s);
  }
}

TEST_CASE("sweep_workgroups times valid tiles and records skips") {
  const Raster img = testsupport::textured_raster(64, 64);
  BenchConfig cfg;
  cfg.runs = 2;
  cfg.stages = {"gaussx", "ddx", "mulxy"};
  cfg.sweep_sigma = 2.0;
  cfg.tile_candidates = {{2, 2}, {3, 5}, {32, 32}, {64, 32}};
  cfg.max_tile_area = 1024;

  const SweepReport rep = sweep_workgroups(img, cfg);
  CHECK(rep.runs == 2);
  REQUIRE(rep.rows.size() == 6);   // 2 valid tiles x 3 stages
  REQUIRE(rep.skipped.size() == 6); // 2 bad tiles x 3 stages

  for (const SweepRow& row : rep.rows) {
    CHECK((row.tile.tile_w == 2 || row.tile.tile_w == 32));
    CHECK(row.stats.samples.size() == 2);

    // published stats and raw samples must agree exactly
    const RunStats re = compute_stats(row.stats.samples);
    CHECK(row.stats.mean_s == re.mean_s);
    CHECK(row.stats.std_s == re.std_s);
    CHECK(row.stats.min_s == re.min_s);
    CHECK(row.stats.max_s == re.max_s);
  }

  // requested stage order, ascending (w, h) inside each stage
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    CHECK(rep.rows[i].stage == cfg.stages[i / 2]);
    if (i % 2 == 1) {
      CHECK(rep.rows[i - 1].tile.tile_w < rep.rows[i].tile.tile_w);
      CHECK(rep.rows[i].stage == rep.rows[i - 1].stage);
    }
  }

  for (const SweepSkip& skip : rep.skipped) {
    const bool invalid = skip.tile.tile_w == 3;
    CHECK((invalid || skip.tile.tile_w == 64));
    CHECK(!skip.reason.empty());
    if (!invalid) CHECK(skip.reason.find("1024") != std::string::npos);
  }

  for (const char* stage : {"gaussx", "ddx", "mulxy"}) {
    const SweepRow* best = rep.best(stage);
    const SweepRow* worst = rep.worst(stage);
    REQUIRE(best != nullptr);
    REQUIRE(worst != nullptr);
    CHECK(best->stats.mean_s <= worst->stats.mean_s);
    CHECK(best->stage == stage);
  }
  CHECK(rep.best("nothere") == nullptr);
}

TEST_CASE("sweep CSV has the pinned header and exact numbers") {
  const Raster img = testsupport::textured_raster(48, 48);
  BenchConfig cfg;
  cfg.runs = 2;
  cfg.stages = {"gaussy"};
  cfg.sweep_sigma = 2.0;
  cfg.tile_candidates = {{4, 4}, {16, 8}};

  const SweepReport rep = sweep_workgroups(img, cfg);
  std::ostringstream sink;
  const std::size_t bytes = emit_csv(rep, sink);
  CHECK(bytes == sink.str().size());

  const auto lines = split_lines(sink.str());
  REQUIRE(lines.size() == rep.rows.size() + 1);
  CHECK(lines[0] == "stage,tile_w,tile_h,mean_s,std_s,min_s,max_s");
  for (std::size_t i = 0; i < rep.rows.size(); ++i) {
    const auto fields = split_fields(lines[i + 1]);
    REQUIRE(fields.size() == 7);
    CHECK(fields[0] == rep.rows[i].stage);
    CHECK(fields[1] == std::to_string(rep.rows[i].tile.tile_w));
    CHECK(fields[2] == std::to_string(rep.rows[i].tile.tile_h));
    CHECK(parse_exact(fields[3]) == rep.rows[i].stats.mean_s);
    CHECK(parse_exact(fields[4]) == rep.rows[i].stats.std_s);
    CHECK(parse_exact(fields[5]) == rep.rows[i].stats.min_s);
    CHECK(parse_exact(fields[6]) == rep.rows[i].stats.max_s);
  }
}

TEST_CASE("heatmap is a gnuplot nonuniform matrix with nan holes") {
  const Raster img = testsupport::textured_raster(48, 48);
  BenchConfig cfg;
  cfg.runs = 1;
  cfg.stages = {"gaussx"};
  cfg.sweep_sigma = 2.0;
  cfg.tile_candidates = {{2, 2}, {32, 32}}; // leaves (2,32) and (32,2) empty

  const SweepReport rep = sweep_workgroups(img, cfg);
  std::ostringstream sink;
  const std::size_t bytes = emit_heatmap(rep, "gaussx", sink);
  CHECK(bytes == sink.str().size());

  const auto lines = split_lines(sink.str());
  REQUIRE(lines.size() == 3);
  CHECK(lines[0] == "3 2 32"); // column count + tile_w axis

  const auto row2 = split_fields(lines[1]); // no commas: one field
  CHECK(lines[1].substr(0, 2) == "2 ");
  CHECK(lines[1].find("nan") != std::string::npos);
  CHECK(lines[2].substr(0, 3) == "32 ");
  CHECK(lines[2].find("nan") != std::string::npos);
  CHECK(row2.size() == 1); // space-separated, not CSV

  std::istringstream parse2(lines[1]);
  double h = 0.0, m22 = 0.0;
  std::string nan_tok;
  parse2 >> h >> m22 >> nan_tok;
  CHECK(h == 2.0);
  CHECK(nan_tok == "nan");
  for (const SweepRow& row : rep.rows)
    if (row.tile.tile_w == 2) CHECK(m22 == row.stats.mean_s);

  CHECK_THROWS_AS(emit_heatmap(rep, "ddx", sink), std::invalid_argument);
}

TEST_CASE("bench configuration errors") {
  const Raster img = testsupport::textured_raster(16, 16);
  BenchConfig runs0;
  runs0.runs = 0;
  CHECK_THROWS_AS(bench_pipeline(img, runs0), std::invalid_argument);

  BenchConfig nostages;
  nostages.stages = {};
  CHECK_THROWS_AS(sweep_workgroups(img, nostages), std::invalid_argument);

  BenchConfig unknown;
  unknown.runs = 1;
  unknown.stages = {"harris"}; // detector-only stage: not sweepable
  unknown.tile_candidates = {{4, 4}};
  CHECK_THROWS_AS(sweep_workgroups(img, unknown), std::invalid_argument);

  BenchConfig badsigma;
  badsigma.sweep_sigma = 0.0;
  CHECK_THROWS_AS(sweep_workgroups(img, badsigma), std::invalid_argument);
}
