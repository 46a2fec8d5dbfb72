#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "hhfreak/keypoint.hpp"
#include "hhfreak/pipeline.hpp"
#include "hhfreak/raster.hpp"

namespace hhfreak {

// Detector parameters. The sigma schedule is the fixed nine-scale
// ladder; thresholds default to values calibrated once on the bundled
// 800x600 test image (see tools/calibrate_thresholds).
struct DetectorConfig {
  std::vector<double> base_sigmas = {0.7, 2, 4, 6, 8, 12, 16, 20, 24};
  double harris_k = 0.04;
  double corner_threshold = 1e-7;
  double hessian_threshold = 1e-6;
  TileConfig tiles{8, 4};
  int max_tile_area = kLargeDeviceMaxTileArea;

  // Throws std::invalid_argument on broken invariants (sigmas not
  // strictly increasing, non-positive thresholds, invalid tile).
  void validate() const;
};

// Plain-text key=value config (one pair per line, '#' comments).
// Recognized keys: corner_threshold, hessian_threshold, harris_k,
// tile_w, tile_h, max_tile_area, base_sigmas (comma-separated).
DetectorConfig parse_detector_config(std::istream& source);
DetectorConfig load_detector_config(const std::string& path);

// Boolean raster of suppressed corner locations at one scale.
struct CornerMask {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> flags;

  bool at(int x, int y) const {
    return flags[static_cast<std::size_t>(y) * width + x] != 0;
  }
};

struct CornerCount {
  CornerMask mask;
  int count = 0;
};

// Everything the per-sigma pipeline produces for one scale.
struct ScalePlane {
  double sigma = 0.0;
  Raster response;
  CornerMask mask;
  int corner_count = 0;
  Raster hessian_det;
};

// Corner responses and determinants across all evaluated scales,
// ordered by ascending sigma.
struct ScaleSpace {
  std::vector<ScalePlane> planes;
};

// Harris response of the sigma-blurred image: structure tensor
// components smoothed with the same sigma, R = (AB - C^2) - k(A+B)^2.
Raster harris_response(const Raster& img, double sigma, double k,
                       const TileConfig& tiles);

// Thresholding plus strict 8-neighborhood non-max suppression; count
// equals the number of set mask cells. Plateaus of equal values never
// count.
CornerCount count_corners(const Raster& response, double threshold);

// Sigma with the maximal corner count; ties break toward the smaller
// sigma. `counts` must be non-empty.
double characteristic_sigma(const std::map<double, int>& counts);

// The two extra scales bracketing the characteristic sigma.
std::pair<double, double> refinement_sigmas(double sigma_c);

// Determinant of the Hessian of the sigma-blurred image (repeated
// central differences), scale-normalized by sigma^4.
Raster hessian_determinant(const Raster& img, double sigma, const TileConfig& tiles);

// Scale-space maximum test: a corner at (x, y, sigma_i) survives iff
// its determinant strictly exceeds the neighboring scales' values at
// (x, y) and the threshold. Boundary sigmas compare one-sided. Output
// is ordered row-major, then by sigma.
std::vector<Keypoint> cull_keypoints(const ScaleSpace& space, double threshold);

struct DetectionResult {
  std::vector<Keypoint> keypoints;
  std::vector<StageTiming> timings;
  std::map<double, int> corner_counts; // per evaluated sigma
  double characteristic = 0.0;
  std::vector<double> evaluated_sigmas; // ascending, base + 2 refinement
};

// Full Harris-Hessian run: desaturate if needed, the twelve-stage
// pipeline per sigma (gaussx gaussy ddx ddy mulxx mulyy mulxy gaussx2
// gaussy2 harris count hessian), characteristic-scale selection, the
// two refinement scales, and the final gather.
DetectionResult detect(const Raster& img, const DetectorConfig& cfg);

// detect() plus the retained scale space, for callers that need the
// per-scale maps (tests, tooling).
DetectionResult detect_with_space(const Raster& img, const DetectorConfig& cfg,
                                  ScaleSpace* space_out);

} // namespace hhfreak
