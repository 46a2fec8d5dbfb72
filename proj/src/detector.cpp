#include "hhfreak/detector.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace hhfreak {

void DetectorConfig::validate() const {
  if (base_sigmas.empty())
    throw std::invalid_argument("detector config: base_sigmas empty");
  for (std::size_t i = 0; i < base_sigmas.size(); ++i) {
    if (!(base_sigmas[i] > 0.0))
      throw std::invalid_argument("detector config: sigmas must be > 0");
    if (i > 0 && !(base_sigmas[i] > base_sigmas[i - 1]))
      throw std::invalid_argument("detector config: sigmas must be strictly increasing");
  }
  if (!(harris_k > 0.0))
    throw std::invalid_argument("detector config: harris_k must be > 0");
  if (!(corner_threshold > 0.0))
    throw std::invalid_argument("detector config: corner_threshold must be > 0");
  if (!(hessian_threshold > 0.0))
    throw std::invalid_argument("detector config: hessian_threshold must be > 0");
  validate_tile(tiles, max_tile_area);
}

namespace {

// Smoothed structure tensor components for one scale.
struct TensorMaps {
  Raster blurred; // L
  Raster a;       // g * Ix^2
  Raster b;       // g * Iy^2
  Raster c;       // g * IxIy
};

Raster harris_from_tensor(const TensorMaps& t, double k) {
  Raster out(t.a.width(), t.a.height(), 1);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const double a = t.a.at(x, y);
      const double b = t.b.at(x, y);
      const double c = t.c.at(x, y);
      const double tr = a + b;
      out.at(x, y) = static_cast<float>((a * b - c * c) - k * tr * tr);
    }
  }
  return out;
}

Raster hessian_from_blurred(const Raster& blurred, double sigma,
                            const TileConfig& tiles) {
  const Raster dx = gradient_x(blurred, tiles);
  const Raster dy = gradient_y(blurred, tiles);
  const Raster dxx = gradient_x(dx, tiles);
  const Raster dyy = gradient_y(dy, tiles);
  const Raster dxy = gradient_y(dx, tiles);
  const double norm = sigma * sigma * sigma * sigma;
  Raster out(blurred.width(), blurred.height(), 1);
  for (int y = 0; y < out.height(); ++y) {
    for (int x = 0; x < out.width(); ++x) {
      const double det = static_cast<double>(dxx.at(x, y)) * dyy.at(x, y) -
                         static_cast<double>(dxy.at(x, y)) * dxy.at(x, y);
      out.at(x, y) = static_cast<float>(norm * det);
    }
  }
  return out;
}

// The twelve per-sigma kernel calls, each timed under its fixed name
// when a sink is attached.
ScalePlane run_sigma_pipeline(const Raster& gray, double sigma,
                              const DetectorConfig& cfg, TimingSink* sink) {
  const GaussianKernel kernel = make_gaussian_kernel(sigma);
  const TileConfig& tiles = cfg.tiles;
  const auto timed = [&](const char* name, auto&& fn) {
    return run_stage(name, sigma, tiles, sink, fn);
  };

  const Raster bx = timed("gaussx", [&](const TileConfig& t) {
    return gauss_x(gray, kernel, t);
  });
  const Raster blurred = timed("gaussy", [&](const TileConfig& t) {
    return gauss_y(bx, kernel, t);
  });
  const Raster ix = timed("ddx", [&](const TileConfig& t) {
    return gradient_x(blurred, t);
  });
  const Raster iy = timed("ddy", [&](const TileConfig& t) {
    return gradient_y(blurred, t);
  });
  const Raster ixx = timed("mulxx", [&](const TileConfig& t) {
    return multiply(ix, ix, t);
  });
  const Raster iyy = timed("mulyy", [&](const TileConfig& t) {
    return multiply(iy, iy, t);
  });
  const Raster ixy = timed("mulxy", [&](const TileConfig& t) {
    return multiply(ix, iy, t);
  });
  // one gaussx2/gaussy2 invocation per tensor component
  const auto smooth = [&](const Raster& m) {
    const Raster sx = timed("gaussx2", [&](const TileConfig& t) {
      return gauss_x(m, kernel, t);
    });
    return timed("gaussy2", [&](const TileConfig& t) {
      return gauss_y(sx, kernel, t);
    });
  };
  TensorMaps tensor{blurred, smooth(ixx), smooth(iyy), smooth(ixy)};

  ScalePlane plane;
  plane.sigma = sigma;
  plane.response = timed("harris", [&](const TileConfig&) {
    return harris_from_tensor(tensor, cfg.harris_k);
  });
  CornerCount cc = timed("count", [&](const TileConfig&) {
    return count_corners(plane.response, cfg.corner_threshold);
  });
  plane.mask = std::move(cc.mask);
  plane.corner_count = cc.count;
  plane.hessian_det = timed("hessian", [&](const TileConfig& t) {
    return hessian_from_blurred(tensor.blurred, sigma, t);
  });
  return plane;
}

} // namespace

Raster harris_response(const Raster& img, double sigma, double k,
                       const TileConfig& tiles) {
  if (!(sigma > 0.0)) throw std::invalid_argument("harris_response: sigma must be > 0");
  const GaussianKernel kernel = make_gaussian_kernel(sigma);
  const Raster blurred = gauss_y(gauss_x(img, kernel, tiles), kernel, tiles);
  const Raster ix = gradient_x(blurred, tiles);
  const Raster iy = gradient_y(blurred, tiles);
  const auto smooth = [&](const Raster& m) {
    return gauss_y(gauss_x(m, kernel, tiles), kernel, tiles);
  };
  TensorMaps tensor{blurred,
                    smooth(multiply(ix, ix, tiles)),
                    smooth(multiply(iy, iy, tiles)),
                    smooth(multiply(ix, iy, tiles))};
  return harris_from_tensor(tensor, k);
}

CornerCount count_corners(const Raster& response, double threshold) {
  const int w = response.width();
  const int h = response.height();
  CornerCount out;
  out.mask.width = w;
  out.mask.height = h;
  out.mask.flags.assign(static_cast<std::size_t>(w) * h, 0);
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      const float v = response.at(x, y);
      if (!(v > threshold)) continue;
      bool strict_max = true;
      for (int dy = -1; dy <= 1 && strict_max; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if (dx == 0 && dy == 0) continue;
          const int nx = x + dx;
          const int ny = y + dy;
          if (nx < 0 || ny < 0 || nx >= w || ny >= h) continue;
          if (!(v > response.at(nx, ny))) {
            strict_max = false;
            break;
          }
        }
      }
      if (strict_max) {
        out.mask.flags[static_cast<std::size_t>(y) * w + x] = 1;
        ++out.count;
      }
    }
  }
  return out;
}

double characteristic_sigma(const std::map<double, int>& counts) {
  if (counts.empty())
    throw std::invalid_argument("characteristic_sigma: empty counts");
  double best_sigma = counts.begin()->first;
  int best_count = counts.begin()->second;
  for (const auto& [sigma, count] : counts) {
    if (count > best_count) { // keys ascend, so ties keep the smaller sigma
      best_sigma = sigma;
      best_count = count;
    }
  }
  return best_sigma;
}

std::pair<double, double> refinement_sigmas(double sigma_c) {
  if (!(sigma_c > 0.0))
    throw std::invalid_argument("refinement_sigmas: sigma_c must be > 0");
  return {sigma_c / std::numbers::sqrt2, sigma_c * std::numbers::sqrt2};
}

Raster hessian_determinant(const Raster& img, double sigma, const TileConfig& tiles) {
  if (!(sigma > 0.0))
    throw std::invalid_argument("hessian_determinant: sigma must be > 0");
  const GaussianKernel kernel = make_gaussian_kernel(sigma);
  const Raster blurred = gauss_y(gauss_x(img, kernel, tiles), kernel, tiles);
  return hessian_from_blurred(blurred, sigma, tiles);
}

std::vector<Keypoint> cull_keypoints(const ScaleSpace& space, double threshold) {
  const auto& planes = space.planes;
  if (planes.empty()) return {};
  const int w = planes.front().hessian_det.width();
  const int h = planes.front().hessian_det.height();
  std::vector<Keypoint> kps;
  for (int y = 0; y < h; ++y) {
    for (int x = 0; x < w; ++x) {
      for (std::size_t i = 0; i < planes.size(); ++i) {
        if (!planes[i].mask.at(x, y)) continue;
        const float det = planes[i].hessian_det.at(x, y);
        if (!(det > threshold)) continue;
        if (i > 0 && !(det > planes[i - 1].hessian_det.at(x, y))) continue;
        if (i + 1 < planes.size() && !(det > planes[i + 1].hessian_det.at(x, y)))
          continue;
        kps.push_back(Keypoint{x, y, planes[i].sigma});
      }
    }
  }
  return kps;
}

DetectionResult detect(const Raster& img, const DetectorConfig& cfg) {
  return detect_with_space(img, cfg, nullptr);
}

DetectionResult detect_with_space(const Raster& img, const DetectorConfig& cfg,
                                  ScaleSpace* space_out) {
  cfg.validate();
  TimingSink sink;

  Raster gray;
  if (img.channels() == 3) {
    gray = run_stage("desaturate", std::nullopt, cfg.tiles, &sink,
                     [&](const TileConfig&) { return desaturate(img); });
  } else {
    gray = img;
  }

  ScaleSpace space;
  std::map<double, int> counts;
  for (double sigma : cfg.base_sigmas) {
    ScalePlane plane = run_sigma_pipeline(gray, sigma, cfg, &sink);
    counts[sigma] = plane.corner_count;
    space.planes.push_back(std::move(plane));
  }

  // GPU->CPU barrier analogue: counts decide the characteristic scale.
  const double sigma_c = characteristic_sigma(counts);
  const auto [lo, hi] = refinement_sigmas(sigma_c);
  for (double sigma : {lo, hi}) {
    ScalePlane plane = run_sigma_pipeline(gray, sigma, cfg, &sink);
    counts[sigma] = plane.corner_count;
    space.planes.push_back(std::move(plane));
  }
  std::sort(space.planes.begin(), space.planes.end(),
            [](const ScalePlane& a, const ScalePlane& b) { return a.sigma < b.sigma; });

  DetectionResult result;
  result.keypoints = run_stage("gather", std::nullopt, cfg.tiles, &sink,
                               [&](const TileConfig&) {
    return cull_keypoints(space, cfg.hessian_threshold);
  });
  result.timings = sink.entries();
  result.corner_counts = std::move(counts);
  result.characteristic = sigma_c;
  for (const ScalePlane& p : space.planes) result.evaluated_sigmas.push_back(p.sigma);
  if (space_out) *space_out = std::move(space);
  return result;
}

} // namespace hhfreak
