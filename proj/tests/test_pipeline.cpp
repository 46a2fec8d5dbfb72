#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <numbers>

#include "hhfreak/pipeline.hpp"

#include "support.hpp"

using namespace hhfreak;

TEST_CASE("gaussian kernel geometry") {
  const GaussianKernel k20 = make_gaussian_kernel(20.0);
  CHECK(k20.radius == 60);
  CHECK(k20.weights.size() == 121);

  CHECK(make_gaussian_kernel(0.7).radius == 2);  // round(2.1)
  CHECK(make_gaussian_kernel(0.1).radius == 1);  // floor of max(1, ...)
  CHECK(make_gaussian_kernel(2.0).radius == 6);
  CHECK(make_gaussian_kernel(24.0).radius == 72);

  CHECK_THROWS_AS(make_gaussian_kernel(0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_gaussian_kernel(-1.0), std::invalid_argument);
}

TEST_CASE("gaussian kernel weights match the closed form") {
  for (double sigma : {0.7, 2.0, 8.0, 20.0}) {
    const GaussianKernel k = make_gaussian_kernel(sigma);

    // independent recomputation
    std::vector<double> expect(k.weights.size());
    double norm = 0.0;
    for (std::size_t i = 0; i < expect.size(); ++i) {
      const double d = static_cast<double>(i) - k.radius;
      expect[i] = std::exp(-d * d / (2.0 * sigma * sigma));
      norm += expect[i];
    }

    double sum = 0.0;
    for (std::size_t i = 0; i < expect.size(); ++i) {
      CHECK(k.weights[i] == doctest::Approx(expect[i] / norm).epsilon(1e-12));
      sum += k.weights[i];
      // exact mirror symmetry, not just approximate
      CHECK(k.weights[i] == k.weights[expect.size() - 1 - i]);
    }
    CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));

    // monotone decay from the center
    for (int i = 0; i < k.radius; ++i)
      CHECK(k.weights[static_cast<std::size_t>(i)] <
            k.weights[static_cast<std::size_t>(i + 1)]);
  }
}

TEST_CASE("tile validation") {
  CHECK(is_valid_tile({8, 4}));
  CHECK(is_valid_tile({1, 1}));
  CHECK(is_valid_tile({128, 8}));
  CHECK_FALSE(is_valid_tile({3, 4}));
  CHECK_FALSE(is_valid_tile({8, 0}));
  CHECK_FALSE(is_valid_tile({-2, 2}));

  CHECK_NOTHROW(validate_tile({32, 8}, kLargeDeviceMaxTileArea));
  CHECK_THROWS_AS(validate_tile({3, 4}, 1024), std::invalid_argument);
  CHECK_THROWS_AS(validate_tile({64, 32}, kLargeDeviceMaxTileArea),
                  std::invalid_argument);
  CHECK_NOTHROW(validate_tile({64, 16}, kLargeDeviceMaxTileArea));
  CHECK_THROWS_AS(validate_tile({32, 16}, kSmallDeviceMaxTileArea),
                  std::invalid_argument);
}

TEST_CASE("gauss passes preserve constants exactly") {
  const Raster img(37, 21, 1, 0.3125f);
  const GaussianKernel k = make_gaussian_kernel(4.0);
  const Raster gx = gauss_x(img, k, {8, 4});
  const Raster gy = gauss_y(img, k, {8, 4});
  for (float v : gx.data()) CHECK(v == 0.3125f);
  for (float v : gy.data()) CHECK(v == 0.3125f);
}

TEST_CASE("gauss matches the dense convolution oracle") {
  testsupport::Rng rng{101};
  for (double sigma : {0.7, 2.0, 20.0}) {
    const GaussianKernel k = make_gaussian_kernel(sigma);
    const Raster img = testsupport::random_raster(64, 48, rng);
    CHECK(testsupport::max_abs_diff(gauss_x(img, k, {8, 4}),
                                    testsupport::dense_gauss_x(img, k)) <= 1e-6f);
    CHECK(testsupport::max_abs_diff(gauss_y(img, k, {8, 4}),
                                    testsupport::dense_gauss_y(img, k)) <= 1e-6f);
  }
}

TEST_CASE("tiling never changes a single output bit") {
  testsupport::Rng rng{202};
  const Raster img = testsupport::random_raster(61, 47, rng); // awkward extents
  const GaussianKernel k = make_gaussian_kernel(2.0);
  const TileConfig configs[] = {{1, 1}, {2, 2}, {8, 4}, {32, 8}, {128, 8}, {4, 64}};

  const Raster ref_gx = gauss_x(img, k, configs[0]);
  const Raster ref_gy = gauss_y(img, k, configs[0]);
  const Raster ref_dx = gradient_x(img, configs[0]);
  const Raster ref_dy = gradient_y(img, configs[0]);
  const Raster ref_mul = multiply(ref_dx, ref_dy, configs[0]);

  for (const TileConfig& t : configs) {
    CHECK(gauss_x(img, k, t) == ref_gx);
    CHECK(gauss_y(img, k, t) == ref_gy);
    CHECK(gradient_x(img, t) == ref_dx);
    CHECK(gradient_y(img, t) == ref_dy);
    CHECK(multiply(ref_dx, ref_dy, t) == ref_mul);
  }
}

TEST_CASE("gauss_y equals transposed gauss_x") {
  testsupport::Rng rng{303};
  const Raster img = testsupport::random_raster(33, 52, rng);
  const GaussianKernel k = make_gaussian_kernel(3.0);

  Raster transposed(img.height(), img.width());
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) transposed.at(y, x) = img.at(x, y);

  const Raster gy = gauss_y(img, k, {8, 4});
  const Raster gx_t = gauss_x(transposed, k, {8, 4});
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) CHECK(gy.at(x, y) == gx_t.at(y, x));
}

TEST_CASE("gradients are exact on affine images") {
  Raster img(16, 12);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x)
      img.at(x, y) = 0.03125f * x + 0.0625f * y;

  const Raster dx = gradient_x(img, {4, 4});
  const Raster dy = gradient_y(img, {4, 4});
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      if (x > 0 && x < img.width() - 1) CHECK(dx.at(x, y) == 0.03125f);
      if (y > 0 && y < img.height() - 1) CHECK(dy.at(x, y) == 0.0625f);
    }
  // clamped borders halve the step
  CHECK(dx.at(0, 3) == 0.03125f / 2);
  CHECK(dx.at(img.width() - 1, 3) == 0.03125f / 2);
  CHECK(dy.at(3, 0) == 0.0625f / 2);

  auto [gdx, gdy] = gradient(img);
  CHECK(gdx == dx);
  CHECK(gdy == dy);
}

TEST_CASE("multiply is the pointwise product") {
  testsupport::Rng rng{404};
  const Raster a = testsupport::random_raster(19, 9, rng);
  const Raster b = testsupport::random_raster(19, 9, rng);
  const Raster p = multiply(a, b, {2, 2});
  for (int y = 0; y < a.height(); ++y)
    for (int x = 0; x < a.width(); ++x) CHECK(p.at(x, y) == a.at(x, y) * b.at(x, y));

  const Raster other(5, 5);
  CHECK_THROWS_AS(multiply(a, other, {2, 2}), std::invalid_argument);
}

TEST_CASE("invalid tiles are rejected by the stages") {
  const Raster img(8, 8);
  const GaussianKernel k = make_gaussian_kernel(1.0);
  CHECK_THROWS_AS(gauss_x(img, k, {3, 2}), std::invalid_argument);
  CHECK_THROWS_AS(gradient_y(img, {0, 4}), std::invalid_argument);
}

TEST_CASE("timing sink accumulates per (stage, sigma)") {
  TimingSink sink;
  sink.add("gaussx", 2.0, 0.5);
  sink.add("gaussx", 2.0, 0.25);
  sink.add("gaussx", 4.0, 1.0);
  sink.add("gather", std::nullopt, 0.125);

  const StageTiming* g2 = sink.find("gaussx", 2.0);
  REQUIRE(g2 != nullptr);
  CHECK(g2->elapsed_s == 0.75);
  CHECK(g2->invocations == 2);
  CHECK(g2->per_invocation_s() == doctest::Approx(0.375));

  CHECK(sink.find("gaussx", 8.0) == nullptr);
  CHECK(sink.find("gather", std::nullopt)->invocations == 1);

  const auto entries = sink.entries();
  REQUIRE(entries.size() == 3);
  // sorted by (stage, sigma); nullopt sigma sorts first within a stage
  CHECK(entries[0].stage == "gather");
  CHECK(entries[1].sigma == 2.0);
  CHECK(entries[2].sigma == 4.0);

  sink.clear();
  CHECK(sink.entries().empty());
}

TEST_CASE("run_stage times the closure and returns its result") {
  TimingSink sink;
  const Raster img(16, 16, 1, 0.5f);
  const GaussianKernel k = make_gaussian_kernel(1.0);
  const Raster out = run_stage("gaussx", 1.0, TileConfig{4, 4}, &sink,
                               [&](const TileConfig& t) { return gauss_x(img, k, t); });
  CHECK(out.width() == 16);
  const StageTiming* st = sink.find("gaussx", 1.0);
  REQUIRE(st != nullptr);
  CHECK(st->elapsed_s >= 0.0);
  CHECK(st->invocations == 1);

  // a null sink must be tolerated
  CHECK_NOTHROW(run_stage("gaussx", 1.0, TileConfig{4, 4}, nullptr,
                          [&](const TileConfig& t) { return gauss_x(img, k, t); }));
}
