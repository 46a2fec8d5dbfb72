#pragma once

#include <chrono>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "hhfreak/raster.hpp"

namespace hhfreak {

// Work-group analogue: the tile of tasks one pipeline stage executes
// together. Each side must be a power of two >= 1. The area cap is
// contextual (devices differ), so it is checked where tiles are used.
struct TileConfig {
  int tile_w = 8;
  int tile_h = 4;

  bool operator==(const TileConfig&) const = default;
};

inline constexpr int kSmallDeviceMaxTileArea = 256;
inline constexpr int kLargeDeviceMaxTileArea = 1024;

bool is_valid_tile(const TileConfig& t);
// Throws std::invalid_argument for non-power-of-two sides or when the
// area exceeds max_area.
void validate_tile(const TileConfig& t, int max_area);

// Symmetric 1-D Gaussian taps; radius = max(1, round(3*sigma)), so
// sigma = 20 yields 121 taps.
struct GaussianKernel {
  double sigma = 0.0;
  int radius = 0;
  std::vector<double> weights; // size 2*radius + 1, sums to 1
};

GaussianKernel make_gaussian_kernel(double sigma);

// Accumulated wall time for one named pipeline stage. `sigma` is the
// scale the stage ran at; stages outside the per-sigma loop (gather,
// desaturate) carry no sigma.
struct StageTiming {
  std::string stage;
  std::optional<double> sigma;
  double elapsed_s = 0.0; // total across invocations
  int invocations = 0;

  double per_invocation_s() const {
    return invocations > 0 ? elapsed_s / invocations : 0.0;
  }
};

// Collects per-stage wall times keyed by (stage name, sigma).
// Single-threaded accumulation; pipelines feed it stage totals in
// sequence.
class TimingSink {
public:
  void add(std::string_view stage, std::optional<double> sigma, double seconds);

  // Entries sorted by (stage, sigma).
  std::vector<StageTiming> entries() const;
  const StageTiming* find(std::string_view stage, std::optional<double> sigma) const;
  void clear() { entries_.clear(); }

private:
  std::map<std::pair<std::string, std::optional<double>>, StageTiming> entries_;
};

// Runs `fn(tiles)` and records its wall time under `stage`. The result
// is whatever the closure returns; timing never alters it.
template <class Fn>
auto run_stage(std::string_view stage, std::optional<double> sigma,
               const TileConfig& tiles, TimingSink* sink, Fn&& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  auto result = fn(tiles);
  const auto t1 = std::chrono::steady_clock::now();
  if (sink) sink->add(stage, sigma, std::chrono::duration<double>(t1 - t0).count());
  return result;
}

// Separable Gaussian passes. Execution is tile-by-tile: each tile
// stages a (tile_w + 2*radius) x tile_h input strip (transposed for the
// y pass) before computing, modeling the work-group prefetch. Border
// reads clamp to the edge. Output bits never depend on the tiling.
Raster gauss_x(const Raster& img, const GaussianKernel& kernel, const TileConfig& tiles);
Raster gauss_y(const Raster& img, const GaussianKernel& kernel, const TileConfig& tiles);

// Central differences with clamp-to-edge: dx = (img(x+1,y) - img(x-1,y)) / 2.
Raster gradient_x(const Raster& img, const TileConfig& tiles);
Raster gradient_y(const Raster& img, const TileConfig& tiles);
std::pair<Raster, Raster> gradient(const Raster& img,
                                   const TileConfig& tiles = TileConfig{});

// Pointwise product a(x,y) * b(x,y), tiled.
Raster multiply(const Raster& a, const Raster& b, const TileConfig& tiles);

} // namespace hhfreak
