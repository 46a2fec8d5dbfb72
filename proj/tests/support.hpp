#pragma once

// Shared fixtures for the test suites: a fixed-seed PRNG (splitmix64,
// stable across platforms unlike <random> distributions), synthetic
// image builders, and reference (oracle) implementations kept
// deliberately independent of the library code paths.

#include <cmath>
#include <cstdint>
#include <numbers>
#include <vector>

#include "hhfreak/pipeline.hpp"
#include "hhfreak/raster.hpp"

namespace testsupport {

struct Rng {
  std::uint64_t state = 0x243f6a8885a308d3ULL;

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  double unit() { // [0, 1)
    return static_cast<double>(next() >> 11) * 0x1.0p-53;
  }

  int range(int lo, int hi) { // inclusive
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

inline hhfreak::Raster random_raster(int w, int h, Rng& rng) {
  hhfreak::Raster img(w, h);
  for (float& v : img.data()) v = static_cast<float>(rng.unit());
  return img;
}

// Smooth low-frequency texture quantized to 1/256 steps, so affine
// intensity transforms with power-of-two coefficients stay exact in
// float.
inline hhfreak::Raster textured_raster(int w, int h, std::uint64_t seed = 7) {
  Rng rng{seed};
  struct Wave {
    double fx, fy, phase, amp;
  };
  std::vector<Wave> waves;
  for (int i = 0; i < 6; ++i)
    waves.push_back({0.5 + 3.0 * rng.unit(), 0.5 + 3.0 * rng.unit(),
                     2.0 * std::numbers::pi * rng.unit(), 0.5 + 0.5 * rng.unit()});
  hhfreak::Raster img(w, h);
  for (int y = 0; y < h; ++y)
    for (int x = 0; x < w; ++x) {
      double v = 0.0;
      for (const Wave& wv : waves)
        v += wv.amp * std::sin(2.0 * std::numbers::pi *
                                   (wv.fx * x / w + wv.fy * y / h) +
                               wv.phase);
      const double unit = 0.5 + v / 10.0; // keep inside (0, 1)
      const int q = std::clamp(static_cast<int>(std::lround(unit * 256.0)), 0, 256);
      img.at(x, y) = static_cast<float>(q) / 256.0f;
    }
  return img;
}

// Dense reference convolution: double accumulation, clamp-to-edge,
// no tiling, no staging.
inline hhfreak::Raster dense_gauss_x(const hhfreak::Raster& img,
                                     const hhfreak::GaussianKernel& k) {
  hhfreak::Raster out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int i = -k.radius; i <= k.radius; ++i)
        acc += k.weights[static_cast<std::size_t>(i + k.radius)] *
               img.at(std::clamp(x + i, 0, img.width() - 1), y);
      out.at(x, y) = static_cast<float>(acc);
    }
  return out;
}

inline hhfreak::Raster dense_gauss_y(const hhfreak::Raster& img,
                                     const hhfreak::GaussianKernel& k) {
  hhfreak::Raster out(img.width(), img.height());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      double acc = 0.0;
      for (int i = -k.radius; i <= k.radius; ++i)
        acc += k.weights[static_cast<std::size_t>(i + k.radius)] *
               img.at(x, std::clamp(y + i, 0, img.height() - 1));
      out.at(x, y) = static_cast<float>(acc);
    }
  return out;
}

inline float max_abs_diff(const hhfreak::Raster& a, const hhfreak::Raster& b) {
  float worst = 0.0f;
  auto da = a.data();
  auto db = b.data();
  for (std::size_t i = 0; i < da.size(); ++i)
    worst = std::max(worst, std::abs(da[i] - db[i]));
  return worst;
}

// Rotates the image by `angle` about (cx, cy) with bilinear sampling;
// out-of-range reads clamp to the edge.
inline hhfreak::Raster rotate_about(const hhfreak::Raster& img, double cx, double cy,
                                    double angle) {
  hhfreak::Raster out(img.width(), img.height());
  const double c = std::cos(angle), s = std::sin(angle);
  auto sample = [&](double x, double y) {
    x = std::clamp(x, 0.0, img.width() - 1.0);
    y = std::clamp(y, 0.0, img.height() - 1.0);
    const int x0 = std::clamp(static_cast<int>(std::floor(x)), 0, img.width() - 2);
    const int y0 = std::clamp(static_cast<int>(std::floor(y)), 0, img.height() - 2);
    const double fx = x - x0, fy = y - y0;
    return (1 - fx) * (1 - fy) * img.at(x0, y0) + fx * (1 - fy) * img.at(x0 + 1, y0) +
           (1 - fx) * fy * img.at(x0, y0 + 1) + fx * fy * img.at(x0 + 1, y0 + 1);
  };
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      // inverse map: rotate the destination pixel back by -angle
      const double dx = x - cx, dy = y - cy;
      out.at(x, y) = static_cast<float>(
          sample(cx + c * dx + s * dy, cy - s * dx + c * dy));
    }
  return out;
}

// 0/1 square on black background, corners at (x0,y0)-(x1,y1) inclusive.
inline hhfreak::Raster square_raster(int size, int x0, int y0, int x1, int y1) {
  hhfreak::Raster img(size, size, 1, 0.0f);
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) img.at(x, y) = 1.0f;
  return img;
}

} // namespace testsupport
