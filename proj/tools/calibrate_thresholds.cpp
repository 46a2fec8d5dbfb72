// Dev utility: sweeps detector thresholds over an image and prints the
// keypoint counts, used to pick the shipped DetectorConfig defaults.

#include <cstdio>
#include <exception>
#include <vector>

#include "hhfreak/detector.hpp"
#include "hhfreak/raster.hpp"

int main(int argc, char** argv) {
  if (argc != 2) {
    std::fprintf(stderr, "usage: calibrate_thresholds <image>\n");
    return 2;
  }
  try {
    const auto img = hhfreak::decode_image_file(argv[1]);
    const std::vector<double> corner_ts = {1e-9, 1e-8, 1e-7, 1e-6, 1e-5, 1e-4, 1e-3};
    const std::vector<double> hessian_ts = {1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2};

    for (double ct : corner_ts) {
      for (double ht : hessian_ts) {
        hhfreak::DetectorConfig cfg;
        cfg.corner_threshold = ct;
        cfg.hessian_threshold = ht;
        const auto res = hhfreak::detect(img, cfg);
        std::printf("corner_t=%-8g hessian_t=%-8g sigma_c=%-5g keypoints=%zu\n", ct,
                    ht, res.characteristic, res.keypoints.size());
      }
      std::fflush(stdout);
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "calibrate_thresholds: %s\n", e.what());
    return 1;
  }
  return 0;
}
