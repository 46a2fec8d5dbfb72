#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace hhfreak {

// Row-major scalar image. Decoded images are normalized to [0, 1];
// intermediate pipeline rasters (responses, determinants) may leave
// that range. Immutable by convention once handed to a pipeline stage.
class Raster {
public:
  Raster() = default;
  Raster(int width, int height, int channels = 1, float fill = 0.0f);

  int width() const { return width_; }
  int height() const { return height_; }
  int channels() const { return channels_; }
  std::size_t size() const { return data_.size(); }

  float& at(int x, int y, int c = 0) {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  float at(int x, int y, int c = 0) const {
    return data_[(static_cast<std::size_t>(y) * width_ + x) * channels_ + c];
  }
  // Clamp-to-edge read, single channel.
  float at_clamped(int x, int y) const;

  std::span<float> data() { return data_; }
  std::span<const float> data() const { return data_; }

  bool same_shape(const Raster& o) const {
    return width_ == o.width_ && height_ == o.height_ && channels_ == o.channels_;
  }
  bool operator==(const Raster& o) const = default;

private:
  int width_ = 0;
  int height_ = 0;
  int channels_ = 1;
  std::vector<float> data_;
};

// Decodes PGM/PPM (P2/P3 ascii and P5/P6 binary, maxval up to 65535)
// into a raster normalized to [0, 1].
// Throws UnsupportedFormatError for unknown magic numbers and
// DecodeError for malformed or truncated files.
Raster decode_image(std::span<const std::uint8_t> bytes);
Raster decode_image_file(const std::string& path);

// Rec. 709 luma: 0.2126 R + 0.7152 G + 0.0722 B.
// Throws std::invalid_argument unless img has exactly 3 channels.
Raster desaturate(const Raster& img);

// Debug dump as binary PGM (single channel, values clipped to [0,1],
// quantized to 8 bits). Returns bytes written.
std::size_t write_pgm(const Raster& img, std::ostream& sink);
void write_pgm_file(const Raster& img, const std::string& path);

} // namespace hhfreak
