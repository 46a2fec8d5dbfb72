// Generates the bundled deterministic assets: the 800x600 posters test
// image, two synthetic telemetry traces, and the pinned retinal
// sampling pattern. Byte-stable across runs: fixed seed, no library
// RNG, shortest round-trip float formatting.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numbers>
#include <string>

#include "CLI11.hpp"
#include "hhfreak/errors.hpp"
#include "hhfreak/freak.hpp"
#include "hhfreak/raster.hpp"

#include "../src/numfmt.hpp"

namespace {

struct Rng {
  std::uint64_t state;

  std::uint64_t next() {
    state += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [lo, hi], inclusive.
  int range(int lo, int hi) {
    return lo + static_cast<int>(next() % static_cast<std::uint64_t>(hi - lo + 1));
  }
};

void fill_rect(hhfreak::Raster& img, int x0, int y0, int x1, int y1, int gray) {
  x0 = std::max(x0, 0);
  y0 = std::max(y0, 0);
  x1 = std::min(x1, img.width());
  y1 = std::min(y1, img.height());
  const float v = static_cast<float>(gray) / 255.0f;
  for (int y = y0; y < y1; ++y)
    for (int x = x0; x < x1; ++x) img.at(x, y) = v;
}

void draw_poster(hhfreak::Raster& img, Rng& rng) {
  const int w = rng.range(70, 220);
  const int h = rng.range(60, 200);
  const int x = rng.range(-20, img.width() - 50);
  const int y = rng.range(-20, img.height() - 50);
  const int border = rng.range(15, 45);
  const int base = rng.range(120, 235);
  const int alt = rng.range(20, 100);

  fill_rect(img, x, y, x + w, y + h, border);
  const int ix0 = x + 3, iy0 = y + 3, ix1 = x + w - 3, iy1 = y + h - 3;

  switch (rng.range(0, 4)) {
    case 0: // solid sheet
      fill_rect(img, ix0, iy0, ix1, iy1, base);
      break;
    case 1: { // checkerboard
      const int cell = rng.range(8, 24);
      for (int cy = iy0; cy < iy1; cy += cell)
        for (int cx = ix0; cx < ix1; cx += cell) {
          const bool odd = (((cx - ix0) / cell) + ((cy - iy0) / cell)) % 2 != 0;
          fill_rect(img, cx, cy, std::min(cx + cell, ix1), std::min(cy + cell, iy1),
                    odd ? alt : base);
        }
      break;
    }
    case 2: { // horizontal stripes
      const int band = rng.range(6, 18);
      int row = 0;
      for (int cy = iy0; cy < iy1; cy += band, ++row)
        fill_rect(img, ix0, cy, ix1, std::min(cy + band, iy1),
                  row % 2 == 0 ? base : alt);
      break;
    }
    case 3: { // diagonal gradient
      for (int cy = std::max(iy0, 0); cy < std::min(iy1, img.height()); ++cy)
        for (int cx = std::max(ix0, 0); cx < std::min(ix1, img.width()); ++cx) {
          const double u = static_cast<double>((cx - ix0) + (cy - iy0)) /
                           std::max(1, (ix1 - ix0) + (iy1 - iy0));
          const int g = alt + static_cast<int>(std::lround(u * (base - alt)));
          img.at(cx, cy) = static_cast<float>(g) / 255.0f;
        }
      break;
    }
    default: { // rows of text-like dashes
      fill_rect(img, ix0, iy0, ix1, iy1, base);
      for (int cy = iy0 + 6; cy + 8 < iy1; cy += 14) {
        int cx = ix0 + 6;
        while (cx + 8 < ix1) {
          const int len = rng.range(8, 28);
          fill_rect(img, cx, cy, std::min(cx + len, ix1 - 4), cy + 8, alt);
          cx += len + rng.range(4, 12);
        }
      }
      break;
    }
  }
}

hhfreak::Raster make_posters_image() {
  hhfreak::Raster img(800, 600);
  for (int y = 0; y < img.height(); ++y)
    for (int x = 0; x < img.width(); ++x) {
      const int g = 60 + (40 * y) / 599 + (10 * x) / 799;
      img.at(x, y) = static_cast<float>(g) / 255.0f;
    }

  Rng rng{0x48484652454b3031ULL};
  for (int i = 0; i < 24; ++i) draw_poster(img, rng);

  // A block of small high-contrast squares for the fine scales.
  fill_rect(img, 628, 468, 792, 592, 128);
  for (int j = 0; j < 6; ++j)
    for (int i = 0; i < 8; ++i) {
      const int x0 = 636 + i * 19, y0 = 476 + j * 19;
      fill_rect(img, x0, y0, x0 + 11, y0 + 11, (i + j) % 2 == 0 ? 235 : 20);
    }
  return img;
}

constexpr double kTau = 2.0 * std::numbers::pi;

void append_row(std::string& out, double t, const char* channel, const char* kind,
                double value) {
  hhfreak::detail::append_double(out, t);
  out += ',';
  out += channel;
  out += ',';
  out += kind;
  out += ',';
  hhfreak::detail::append_double(out, value);
  out += '\n';
}

// Trace A reproduces the shapes the analyzer is specified against:
// one temperature channel ramping 30 -> 50 degC over 1800 s, stable
// after, with a 1 degC drop at 1805 s; one CPU frequency channel
// stepping 700 -> 600 MHz at 1800 s. Sinusoidal jitter with a 30 s
// period cancels exactly in the detector's 30 s window means.
std::string make_trace_a() {
  std::string out = "t,channel,kind,value\n";
  for (int t = 0; t <= 3500; t += 5) {
    const double noise = 0.2 * std::sin(kTau * t / 30.0);
    const double temp = (t <= 1800 ? 30.0 + t / 90.0 : 49.0) + noise;
    append_row(out, t, "tz3", "temperature", temp);
    append_row(out, t, "cpu3", "frequency", t < 1800 ? 700.0 : 600.0);
  }
  return out;
}

// Trace B is the fuller demo log: several thermal zones, one of them
// correlated with a dual-core frequency drop, plus constant channels.
std::string make_trace_b() {
  std::string out = "t,channel,kind,value\n";
  for (int t = 0; t <= 3500; t += 5) {
    const double n30 = std::sin(kTau * t / 30.0);
    append_row(out, t, "tz0", "temperature", 31.0 + 0.3 * std::sin(kTau * t / 40.0));
    double tz3 = t <= 2000 ? 28.0 + 11.0 * t / 1000.0 : 50.0;
    if (t >= 2205) tz3 -= 1.0;
    append_row(out, t, "tz3", "temperature", tz3 + 0.2 * n30);
    const double tz7 = (t <= 1500 ? 28.0 + 14.0 * t / 1500.0 : 42.0) +
                       0.15 * std::sin(kTau * t / 50.0);
    append_row(out, t, "tz7", "temperature", tz7);
    append_row(out, t, "cpu1", "frequency", 1500.0);
    append_row(out, t, "cpu3", "frequency", t < 2200 ? 1100.0 : 998.0);
    append_row(out, t, "cpu4", "frequency", t < 2200 ? 1100.0 : 998.0);
    append_row(out, t, "gpu", "frequency", 450.0);
  }
  return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw hhfreak::IoError("cannot open " + path.string());
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) throw hhfreak::IoError("write failed: " + path.string());
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"generate the bundled deterministic test assets"};
  std::string out_dir = ".";
  app.add_option("--out", out_dir, "output directory")->required();
  CLI11_PARSE(app, argc, argv);

  try {
    std::filesystem::create_directories(out_dir);
    const std::filesystem::path dir(out_dir);

    hhfreak::write_pgm_file(make_posters_image(), (dir / "posters_800x600.pgm").string());
    write_text(dir / "trace_synthetic_a.csv", make_trace_a());
    write_text(dir / "trace_synthetic_b.csv", make_trace_b());
    hhfreak::write_pattern_file(hhfreak::build_pattern(),
                                (dir / "freak_pattern_v1.txt").string());
  } catch (const std::exception& e) {
    std::cerr << "genassets: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
