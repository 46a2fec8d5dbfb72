#include "hhfreak/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <map>
#include <ostream>
#include <stdexcept>

#include "hhfreak/errors.hpp"
#include "numfmt.hpp"

namespace hhfreak {

namespace {

double now_minus(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

} // namespace

RunStats compute_stats(const std::vector<double>& samples) {
  if (samples.empty())
    throw std::invalid_argument("compute_stats: no samples");
  RunStats s;
  s.samples = samples;
  s.min_s = samples.front();
  s.max_s = samples.front();
  double sum = 0.0;
  for (double v : samples) {
    sum += v;
    s.min_s = std::min(s.min_s, v);
    s.max_s = std::max(s.max_s, v);
  }
  s.mean_s = sum / static_cast<double>(samples.size());
  if (samples.size() > 1) {
    double acc = 0.0;
    for (double v : samples) {
      const double d = v - s.mean_s;
      acc += d * d;
    }
    s.std_s = std::sqrt(acc / static_cast<double>(samples.size() - 1));
  }
  return s;
}

void BenchConfig::validate() const {
  if (runs < 1)
    throw std::invalid_argument("bench: runs must be >= 1");
  if (stages.empty())
    throw std::invalid_argument("bench: no stages requested");
  if (max_tile_area < 4)
    throw std::invalid_argument("bench: max_tile_area must be >= 4");
  if (!(sweep_sigma > 0.0))
    throw std::invalid_argument("bench: sweep_sigma must be positive");
  detector.validate();
}

std::vector<TileConfig> default_tile_candidates(int max_area) {
  std::vector<TileConfig> out;
  for (int w = 2; w <= max_area; w *= 2) {
    for (int h = 2; h <= max_area; h *= 2) {
      if (w * h <= max_area) out.push_back({w, h});
    }
  }
  std::sort(out.begin(), out.end(), [](const TileConfig& a, const TileConfig& b) {
    return a.tile_w != b.tile_w ? a.tile_w < b.tile_w : a.tile_h < b.tile_h;
  });
  return out;
}

const TimingRow* TimingReport::find(std::string_view stage,
                                    std::optional<double> sigma) const {
  for (const auto& row : stages)
    if (row.stage == stage && row.sigma == sigma) return &row;
  return nullptr;
}

TimingReport bench_pipeline(const Raster& img, const BenchConfig& cfg) {
  cfg.validate();

  detect(img, cfg.detector); // warm-up, untimed

  TimingReport rep;
  rep.runs = cfg.runs;

  using Key = std::pair<std::string, std::optional<double>>;
  std::map<Key, std::vector<double>> samples;
  std::map<Key, int> invocations;
  std::vector<double> totals;

  for (int run = 0; run < cfg.runs; ++run) {
    const auto t0 = std::chrono::steady_clock::now();
    DetectionResult res = detect(img, cfg.detector);
    totals.push_back(now_minus(t0));

    if (run == 0) {
      rep.keypoints = res.keypoints;
    } else if (res.keypoints != rep.keypoints) {
      rep.outputs_identical = false;
    }
    for (const StageTiming& st : res.timings) {
      Key key{st.stage, st.sigma};
      samples[key].push_back(st.elapsed_s);
      if (run == 0) invocations[key] = st.invocations;
    }
  }

  for (const auto& [key, vals] : samples) {
    TimingRow row;
    row.stage = key.first;
    row.sigma = key.second;
    row.invocations_per_run = invocations[key];
    row.stats = compute_stats(vals);
    rep.stages.push_back(std::move(row));
  }
  rep.total = compute_stats(totals);
  return rep;
}

namespace {

// A sweepable stage is a pure function of the prepared inputs and the
// tile config. Gradients are tile-invariant, so the dx/dy fixtures can
// be prepared once with any tile.
struct SweepFixtures {
  Raster gray;
  Raster dx;
  Raster dy;
  GaussianKernel kernel;
};

std::function<Raster(const TileConfig&)> stage_runner(const std::string& stage,
                                                      const SweepFixtures& fx) {
  if (stage == "gaussx")
    return [&fx](const TileConfig& t) { return gauss_x(fx.gray, fx.kernel, t); };
  if (stage == "gaussy")
    return [&fx](const TileConfig& t) { return gauss_y(fx.gray, fx.kernel, t); };
  if (stage == "ddx")
    return [&fx](const TileConfig& t) { return gradient_x(fx.gray, t); };
  if (stage == "ddy")
    return [&fx](const TileConfig& t) { return gradient_y(fx.gray, t); };
  if (stage == "mulxx")
    return [&fx](const TileConfig& t) { return multiply(fx.dx, fx.dx, t); };
  if (stage == "mulyy")
    return [&fx](const TileConfig& t) { return multiply(fx.dy, fx.dy, t); };
  if (stage == "mulxy")
    return [&fx](const TileConfig& t) { return multiply(fx.dx, fx.dy, t); };
  throw std::invalid_argument("sweep: unknown stage '" + stage + "'");
}

} // namespace

const SweepRow* SweepReport::best(std::string_view stage) const {
  const SweepRow* out = nullptr;
  for (const auto& row : rows)
    if (row.stage == stage && (!out || row.stats.mean_s < out->stats.mean_s))
      out = &row;
  return out;
}

const SweepRow* SweepReport::worst(std::string_view stage) const {
  const SweepRow* out = nullptr;
  for (const auto& row : rows)
    if (row.stage == stage && (!out || row.stats.mean_s > out->stats.mean_s))
      out = &row;
  return out;
}

SweepReport sweep_workgroups(const Raster& img, const BenchConfig& cfg) {
  cfg.validate();

  SweepFixtures fx;
  fx.gray = img.channels() == 1 ? img : desaturate(img);
  fx.kernel = make_gaussian_kernel(cfg.sweep_sigma);
  fx.dx = gradient_x(fx.gray, TileConfig{});
  fx.dy = gradient_y(fx.gray, TileConfig{});

  std::vector<TileConfig> candidates = cfg.tile_candidates.empty()
                                           ? default_tile_candidates(cfg.max_tile_area)
                                           : cfg.tile_candidates;
  std::sort(candidates.begin(), candidates.end(),
            [](const TileConfig& a, const TileConfig& b) {
              return a.tile_w != b.tile_w ? a.tile_w < b.tile_w : a.tile_h < b.tile_h;
            });

  SweepReport rep;
  rep.runs = cfg.runs;

  for (const std::string& stage : cfg.stages) {
    auto fn = stage_runner(stage, fx);

    // Correctness gate first: every admitted config must reproduce the
    // reference output bit for bit before anything is timed.
    std::vector<TileConfig> admitted;
    const Raster* reference = nullptr;
    Raster reference_store;
    for (const TileConfig& tile : candidates) {
      if (!is_valid_tile(tile)) {
        rep.skipped.push_back({stage, tile, "tile sides must be powers of two >= 1"});
        continue;
      }
      if (tile.tile_w * tile.tile_h > cfg.max_tile_area) {
        rep.skipped.push_back({stage, tile,
                               "area exceeds cap " + std::to_string(cfg.max_tile_area)});
        continue;
      }
      Raster out = fn(tile); // doubles as the warm-up pass
      if (!reference) {
        reference_store = std::move(out);
        reference = &reference_store;
      } else if (!(out == *reference)) {
        throw Error("sweep: stage '" + stage + "' output differs for tile " +
                    std::to_string(tile.tile_w) + "x" + std::to_string(tile.tile_h));
      }
      admitted.push_back(tile);
    }

    for (const TileConfig& tile : admitted) {
      std::vector<double> samples;
      samples.reserve(static_cast<std::size_t>(cfg.runs));
      for (int run = 0; run < cfg.runs; ++run) {
        const auto t0 = std::chrono::steady_clock::now();
        Raster out = fn(tile);
        samples.push_back(now_minus(t0));
        (void)out;
      }
      rep.rows.push_back({stage, tile, compute_stats(samples)});
    }
  }
  return rep;
}

std::size_t emit_csv(const SweepReport& report, std::ostream& sink) {
  std::string out = "stage,tile_w,tile_h,mean_s,std_s,min_s,max_s\n";
  for (const SweepRow& row : report.rows) {
    out += row.stage;
    out += ',';
    out += std::to_string(row.tile.tile_w);
    out += ',';
    out += std::to_string(row.tile.tile_h);
    out += ',';
    detail::append_double(out, row.stats.mean_s);
    out += ',';
    detail::append_double(out, row.stats.std_s);
    out += ',';
    detail::append_double(out, row.stats.min_s);
    out += ',';
    detail::append_double(out, row.stats.max_s);
    out += '\n';
  }
  sink.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!sink) throw IoError("emit_csv: write failed");
  return out.size();
}

std::size_t emit_heatmap(const SweepReport& report, std::string_view stage,
                         std::ostream& sink) {
  std::vector<int> widths, heights;
  std::map<std::pair<int, int>, double> cells;
  for (const SweepRow& row : report.rows) {
    if (row.stage != stage) continue;
    widths.push_back(row.tile.tile_w);
    heights.push_back(row.tile.tile_h);
    cells[{row.tile.tile_w, row.tile.tile_h}] = row.stats.mean_s;
  }
  if (cells.empty())
    throw std::invalid_argument("emit_heatmap: no rows for stage '" +
                                std::string(stage) + "'");
  auto uniq = [](std::vector<int>& v) {
    std::sort(v.begin(), v.end());
    v.erase(std::unique(v.begin(), v.end()), v.end());
  };
  uniq(widths);
  uniq(heights);

  // gnuplot `splot 'file' nonuniform matrix`: first row holds the
  // column count and the tile_w axis; each data row starts with tile_h.
  std::string out = std::to_string(widths.size() + 1);
  for (int w : widths) {
    out += ' ';
    out += std::to_string(w);
  }
  out += '\n';
  for (int h : heights) {
    out += std::to_string(h);
    for (int w : widths) {
      out += ' ';
      auto it = cells.find({w, h});
      if (it == cells.end()) {
        out += "nan";
      } else {
        detail::append_double(out, it->second);
      }
    }
    out += '\n';
  }
  sink.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!sink) throw IoError("emit_heatmap: write failed");
  return out.size();
}

namespace {

void append_stats_tail(std::string& out, const RunStats& stats) {
  detail::append_double(out, stats.mean_s);
  out += ',';
  detail::append_double(out, stats.std_s);
  out += ',';
  detail::append_double(out, stats.min_s);
  out += ',';
  detail::append_double(out, stats.max_s);
  out += '\n';
}

} // namespace

std::size_t emit_timing_csv(const TimingReport& report, std::ostream& sink) {
  std::string out = "stage,sigma,invocations,mean_s,std_s,min_s,max_s\n";
  for (const TimingRow& row : report.stages) {
    out += row.stage;
    out += ',';
    if (row.sigma) detail::append_double(out, *row.sigma);
    out += ',';
    out += std::to_string(row.invocations_per_run);
    out += ',';
    append_stats_tail(out, row.stats);
  }
  out += "total,,1,";
  append_stats_tail(out, report.total);
  sink.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!sink) throw IoError("emit_timing_csv: write failed");
  return out.size();
}

std::size_t emit_stage_csv(const std::vector<StageTiming>& timings,
                           std::ostream& sink) {
  std::string out = "stage,sigma,invocations,elapsed_s\n";
  for (const StageTiming& st : timings) {
    out += st.stage;
    out += ',';
    if (st.sigma) detail::append_double(out, *st.sigma);
    out += ',';
    out += std::to_string(st.invocations);
    out += ',';
    detail::append_double(out, st.elapsed_s);
    out += '\n';
  }
  sink.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!sink) throw IoError("emit_stage_csv: write failed");
  return out.size();
}

} // namespace hhfreak
