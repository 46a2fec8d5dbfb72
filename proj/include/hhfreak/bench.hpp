#pragma once

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "hhfreak/detector.hpp"
#include "hhfreak/pipeline.hpp"
#include "hhfreak/raster.hpp"

namespace hhfreak {

// Per-measurement statistics over repeated runs. std_s is the sample
// standard deviation (0 for a single run). Raw samples are kept so
// reports can be re-verified.
struct RunStats {
  double mean_s = 0.0;
  double std_s = 0.0;
  double min_s = 0.0;
  double max_s = 0.0;
  std::vector<double> samples;
};

RunStats compute_stats(const std::vector<double>& samples);

struct BenchConfig {
  int runs = 10; // timed runs; one untimed warm-up precedes them
  std::vector<std::string> stages = {"gaussx", "gaussy"};
  std::vector<TileConfig> tile_candidates; // empty -> default grid
  int max_tile_area = kLargeDeviceMaxTileArea;
  double sweep_sigma = 20.0; // the dominant 121-tap case
  DetectorConfig detector;

  void validate() const;
};

// All power-of-two tiles from 2x2 up to the area cap, sorted by
// (tile_w, tile_h).
std::vector<TileConfig> default_tile_candidates(int max_area);

// Mean elapsed per pipeline stage across repeated full detect() runs.
struct TimingRow {
  std::string stage;
  std::optional<double> sigma;
  int invocations_per_run = 0;
  RunStats stats; // per-run totals for this (stage, sigma)
};

struct TimingReport {
  int runs = 0;
  std::vector<TimingRow> stages; // sorted by (stage, sigma)
  RunStats total;                // whole detect() wall time per run
  bool outputs_identical = true; // keypoints bit-identical across runs
  std::vector<Keypoint> keypoints;

  const TimingRow* find(std::string_view stage, std::optional<double> sigma) const;
};

TimingReport bench_pipeline(const Raster& img, const BenchConfig& cfg);

// Work-group (tile) size sweep of isolated stages.
struct SweepRow {
  std::string stage;
  TileConfig tile;
  RunStats stats;
};

struct SweepSkip {
  std::string stage;
  TileConfig tile;
  std::string reason;
};

struct SweepReport {
  int runs = 0;
  // Requested stage order, then ascending (tile_w, tile_h).
  std::vector<SweepRow> rows;
  std::vector<SweepSkip> skipped;

  const SweepRow* best(std::string_view stage) const;  // smallest mean
  const SweepRow* worst(std::string_view stage) const; // largest mean
};

// Runs each requested stage in isolation for every tile candidate.
// Candidates over the area cap are skipped with a recorded warning.
// All configurations must produce bit-identical outputs; a mismatch
// aborts the sweep (correctness gate precedes timing).
SweepReport sweep_workgroups(const Raster& img, const BenchConfig& cfg);

// CSV: header `stage,tile_w,tile_h,mean_s,std_s,min_s,max_s`, one row
// per measurement, deterministic ordering. Returns bytes written.
std::size_t emit_csv(const SweepReport& report, std::ostream& sink);

// gnuplot `nonuniform matrix` grid of mean seconds for one stage
// (columns = tile_w, rows = tile_h, skipped cells = nan).
std::size_t emit_heatmap(const SweepReport& report, std::string_view stage,
                         std::ostream& sink);

// CSV for full-pipeline timing reports:
// `stage,sigma,invocations,mean_s,std_s,min_s,max_s` plus a final
// `total` row.
std::size_t emit_timing_csv(const TimingReport& report, std::ostream& sink);

// CSV for a single detect() run: `stage,sigma,invocations,elapsed_s`.
std::size_t emit_stage_csv(const std::vector<StageTiming>& timings, std::ostream& sink);

} // namespace hhfreak
