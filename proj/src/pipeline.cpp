#include "hhfreak/pipeline.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <stdexcept>

namespace hhfreak {

bool is_valid_tile(const TileConfig& t) {
  const auto pow2 = [](int v) {
    return v >= 1 && std::has_single_bit(static_cast<unsigned>(v));
  };
  return pow2(t.tile_w) && pow2(t.tile_h);
}

void validate_tile(const TileConfig& t, int max_area) {
  if (!is_valid_tile(t))
    throw std::invalid_argument("tile sides must be powers of two >= 1");
  if (static_cast<long>(t.tile_w) * t.tile_h > max_area)
    throw std::invalid_argument("tile area exceeds the configured maximum");
}

GaussianKernel make_gaussian_kernel(double sigma) {
  if (!(sigma > 0.0)) throw std::invalid_argument("gaussian kernel: sigma must be > 0");
  GaussianKernel k;
  k.sigma = sigma;
  k.radius = std::max(1, static_cast<int>(std::lround(3.0 * sigma)));
  k.weights.resize(2 * static_cast<std::size_t>(k.radius) + 1);
  double sum = 0.0;
  for (int i = 0; i <= k.radius; ++i) {
    const double d = i - k.radius;
    const double w = std::exp(-(d * d) / (2.0 * sigma * sigma));
    k.weights[static_cast<std::size_t>(i)] = w;
    k.weights[static_cast<std::size_t>(2 * k.radius - i)] = w; // exact symmetry
  }
  for (double w : k.weights) sum += w;
  for (double& w : k.weights) w /= sum;
  return k;
}

void TimingSink::add(std::string_view stage, std::optional<double> sigma,
                     double seconds) {
  auto key = std::make_pair(std::string(stage), sigma);
  StageTiming& e = entries_[key];
  if (e.invocations == 0) {
    e.stage = key.first;
    e.sigma = sigma;
  }
  e.elapsed_s += seconds;
  e.invocations += 1;
}

std::vector<StageTiming> TimingSink::entries() const {
  std::vector<StageTiming> out;
  out.reserve(entries_.size());
  for (const auto& [key, e] : entries_) out.push_back(e);
  return out;
}

const StageTiming* TimingSink::find(std::string_view stage,
                                    std::optional<double> sigma) const {
  auto it = entries_.find(std::make_pair(std::string(stage), sigma));
  return it == entries_.end() ? nullptr : &it->second;
}

namespace {

void require_single_channel(const Raster& img, const char* op) {
  if (img.channels() != 1)
    throw std::invalid_argument(std::string(op) + ": expected a single-channel raster");
  if (img.width() <= 0 || img.height() <= 0)
    throw std::invalid_argument(std::string(op) + ": empty raster");
}

// Tiled horizontal stencil: for each tile, stage the clamped input
// strip (tile_w + 2*halo wide), then evaluate one output pixel per
// task. `fn(strip_row, lx)` sees the staged row with lx the local x of
// the output pixel inside the strip (already offset by halo).
template <class Fn>
Raster tiled_stencil_x(const Raster& img, const TileConfig& tiles, int halo, Fn&& fn) {
  if (!is_valid_tile(tiles))
    throw std::invalid_argument("tile sides must be powers of two >= 1");
  const int w = img.width();
  const int h = img.height();
  Raster out(w, h, 1);
  const int strip_w = tiles.tile_w + 2 * halo;
  std::vector<float> strip(static_cast<std::size_t>(strip_w) * tiles.tile_h);
  for (int ty = 0; ty < h; ty += tiles.tile_h) {
    const int th = std::min(tiles.tile_h, h - ty);
    for (int tx = 0; tx < w; tx += tiles.tile_w) {
      const int tw = std::min(tiles.tile_w, w - tx);
      const int sw = tw + 2 * halo;
      // global -> local fetch of the (tw + 2*halo) x th input strip
      for (int ly = 0; ly < th; ++ly)
        for (int lx = 0; lx < sw; ++lx)
          strip[static_cast<std::size_t>(ly) * sw + lx] =
              img.at_clamped(tx + lx - halo, ty + ly);
      for (int ly = 0; ly < th; ++ly) {
        const float* row = strip.data() + static_cast<std::size_t>(ly) * sw;
        for (int lx = 0; lx < tw; ++lx)
          out.at(tx + lx, ty + ly) = fn(row, lx + halo);
      }
    }
  }
  return out;
}

// Vertical counterpart; the strip is tile_w x (tile_h + 2*halo) and the
// callback walks a column with stride `sw`.
template <class Fn>
Raster tiled_stencil_y(const Raster& img, const TileConfig& tiles, int halo, Fn&& fn) {
  if (!is_valid_tile(tiles))
    throw std::invalid_argument("tile sides must be powers of two >= 1");
  const int w = img.width();
  const int h = img.height();
  Raster out(w, h, 1);
  const int strip_h = tiles.tile_h + 2 * halo;
  std::vector<float> strip(static_cast<std::size_t>(tiles.tile_w) * strip_h);
  for (int ty = 0; ty < h; ty += tiles.tile_h) {
    const int th = std::min(tiles.tile_h, h - ty);
    const int sh = th + 2 * halo;
    for (int tx = 0; tx < w; tx += tiles.tile_w) {
      const int tw = std::min(tiles.tile_w, w - tx);
      for (int ly = 0; ly < sh; ++ly)
        for (int lx = 0; lx < tw; ++lx)
          strip[static_cast<std::size_t>(ly) * tw + lx] =
              img.at_clamped(tx + lx, ty + ly - halo);
      for (int ly = 0; ly < th; ++ly)
        for (int lx = 0; lx < tw; ++lx)
          out.at(tx + lx, ty + ly) = fn(strip.data() + lx, tw, ly + halo);
    }
  }
  return out;
}

} // namespace

Raster gauss_x(const Raster& img, const GaussianKernel& kernel, const TileConfig& tiles) {
  require_single_channel(img, "gauss_x");
  const int n = 2 * kernel.radius + 1;
  const double* w = kernel.weights.data();
  return tiled_stencil_x(img, tiles, kernel.radius, [&](const float* row, int lx) {
    double acc = 0.0;
    const float* p = row + (lx - kernel.radius);
    for (int i = 0; i < n; ++i) acc += w[i] * p[i];
    return static_cast<float>(acc);
  });
}

Raster gauss_y(const Raster& img, const GaussianKernel& kernel, const TileConfig& tiles) {
  require_single_channel(img, "gauss_y");
  const int n = 2 * kernel.radius + 1;
  const double* w = kernel.weights.data();
  return tiled_stencil_y(img, tiles, kernel.radius,
                         [&](const float* col, int stride, int ly) {
    double acc = 0.0;
    const float* p = col + static_cast<std::size_t>(ly - kernel.radius) * stride;
    for (int i = 0; i < n; ++i) acc += w[i] * p[static_cast<std::size_t>(i) * stride];
    return static_cast<float>(acc);
  });
}

Raster gradient_x(const Raster& img, const TileConfig& tiles) {
  require_single_channel(img, "gradient");
  return tiled_stencil_x(img, tiles, 1, [](const float* row, int lx) {
    return (row[lx + 1] - row[lx - 1]) * 0.5f;
  });
}

Raster gradient_y(const Raster& img, const TileConfig& tiles) {
  require_single_channel(img, "gradient");
  return tiled_stencil_y(img, tiles, 1, [](const float* col, int stride, int ly) {
    return (col[static_cast<std::size_t>(ly + 1) * stride] -
            col[static_cast<std::size_t>(ly - 1) * stride]) * 0.5f;
  });
}

std::pair<Raster, Raster> gradient(const Raster& img, const TileConfig& tiles) {
  return {gradient_x(img, tiles), gradient_y(img, tiles)};
}

Raster multiply(const Raster& a, const Raster& b, const TileConfig& tiles) {
  require_single_channel(a, "multiply");
  if (!a.same_shape(b))
    throw std::invalid_argument("multiply: raster shapes differ");
  if (!is_valid_tile(tiles))
    throw std::invalid_argument("tile sides must be powers of two >= 1");
  const int w = a.width();
  const int h = a.height();
  Raster out(w, h, 1);
  for (int ty = 0; ty < h; ty += tiles.tile_h) {
    const int th = std::min(tiles.tile_h, h - ty);
    for (int tx = 0; tx < w; tx += tiles.tile_w) {
      const int tw = std::min(tiles.tile_w, w - tx);
      for (int ly = 0; ly < th; ++ly)
        for (int lx = 0; lx < tw; ++lx)
          out.at(tx + lx, ty + ly) = a.at(tx + lx, ty + ly) * b.at(tx + lx, ty + ly);
    }
  }
  return out;
}

} // namespace hhfreak
