#include "hhfreak/raster.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <ostream>
#include <sstream>

#include "hhfreak/errors.hpp"

namespace hhfreak {

Raster::Raster(int width, int height, int channels, float fill)
    : width_(width), height_(height), channels_(channels) {
  if (width <= 0 || height <= 0 || (channels != 1 && channels != 3))
    throw std::invalid_argument("Raster: width/height must be positive, channels 1 or 3");
  data_.assign(static_cast<std::size_t>(width) * height * channels, fill);
}

float Raster::at_clamped(int x, int y) const {
  x = std::clamp(x, 0, width_ - 1);
  y = std::clamp(y, 0, height_ - 1);
  return at(x, y);
}

namespace {

// Incremental reader over the raw bytes of a PNM file.
class ByteCursor {
public:
  explicit ByteCursor(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  bool eof() const { return pos_ >= bytes_.size(); }
  std::uint8_t next() {
    if (eof()) throw DecodeError("pnm: truncated file");
    return bytes_[pos_++];
  }
  std::uint8_t peek() const {
    if (eof()) throw DecodeError("pnm: truncated file");
    return bytes_[pos_];
  }

  // Skips whitespace and '#' comments between header tokens.
  void skip_separators() {
    while (!eof()) {
      std::uint8_t c = peek();
      if (c == '#') {
        while (!eof() && next() != '\n') {}
      } else if (std::isspace(c)) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  int header_int() {
    skip_separators();
    if (eof() || !std::isdigit(peek())) throw DecodeError("pnm: malformed header");
    long v = 0;
    while (!eof() && std::isdigit(peek())) {
      v = v * 10 + (next() - '0');
      if (v > 1'000'000'000) throw DecodeError("pnm: header value out of range");
    }
    return static_cast<int>(v);
  }

  std::span<const std::uint8_t> rest() const { return bytes_.subspan(pos_); }

private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

Raster decode_pnm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2) throw DecodeError("pnm: truncated file");
  if (bytes[0] != 'P') throw UnsupportedFormatError("unsupported image format");
  const char kind = static_cast<char>(bytes[1]);
  const bool ascii = kind == '2' || kind == '3';
  const bool binary = kind == '5' || kind == '6';
  if (!ascii && !binary) throw UnsupportedFormatError("unsupported image format");
  const int channels = (kind == '3' || kind == '6') ? 3 : 1;

  ByteCursor cur(bytes.subspan(2));
  const int width = cur.header_int();
  const int height = cur.header_int();
  const int maxval = cur.header_int();
  if (width <= 0 || height <= 0) throw DecodeError("pnm: non-positive dimensions");
  if (maxval <= 0 || maxval > 65535) throw DecodeError("pnm: maxval out of range");

  Raster out(width, height, channels);
  const std::size_t count = out.size();
  // Divide per sample: a single correctly-rounded operation, so
  // decode(write(x)) is bit-exact for quantized data.
  const float denom = static_cast<float>(maxval);

  if (ascii) {
    for (std::size_t i = 0; i < count; ++i) {
      int v = cur.header_int();
      if (v > maxval) throw DecodeError("pnm: sample exceeds maxval");
      out.data()[i] = static_cast<float>(v) / denom;
    }
    return out;
  }

  // Binary payload starts after exactly one whitespace byte.
  if (cur.eof() || !std::isspace(cur.peek())) throw DecodeError("pnm: malformed header");
  cur.next();
  std::span<const std::uint8_t> raw = cur.rest();
  const int bytes_per_sample = maxval > 255 ? 2 : 1;
  if (raw.size() < count * bytes_per_sample) throw DecodeError("pnm: truncated pixel data");
  for (std::size_t i = 0; i < count; ++i) {
    int v;
    if (bytes_per_sample == 1) {
      v = raw[i];
    } else {
      v = (raw[2 * i] << 8) | raw[2 * i + 1]; // PNM 16-bit samples are big-endian
    }
    if (v > maxval) throw DecodeError("pnm: sample exceeds maxval");
    out.data()[i] = static_cast<float>(v) / denom;
  }
  return out;
}

} // namespace

Raster decode_image(std::span<const std::uint8_t> bytes) {
  if (bytes.empty()) throw DecodeError("image: empty file");
  return decode_pnm(bytes);
}

Raster decode_image_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open image file: " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  return decode_image(bytes);
}

Raster desaturate(const Raster& img) {
  if (img.channels() != 3)
    throw std::invalid_argument("desaturate: expected a 3-channel raster");
  Raster out(img.width(), img.height(), 1);
  const std::span<const float> src = img.data();
  std::span<float> dst = out.data();
  for (std::size_t i = 0; i < dst.size(); ++i) {
    const double r = src[3 * i + 0];
    const double g = src[3 * i + 1];
    const double b = src[3 * i + 2];
    dst[i] = static_cast<float>(0.2126 * r + 0.7152 * g + 0.0722 * b);
  }
  return out;
}

std::size_t write_pgm(const Raster& img, std::ostream& sink) {
  if (img.channels() != 1)
    throw std::invalid_argument("write_pgm: expected a single-channel raster");
  std::ostringstream header;
  header << "P5\n" << img.width() << " " << img.height() << "\n255\n";
  const std::string h = header.str();
  sink.write(h.data(), static_cast<std::streamsize>(h.size()));
  std::vector<std::uint8_t> row(static_cast<std::size_t>(img.width()));
  for (int y = 0; y < img.height(); ++y) {
    for (int x = 0; x < img.width(); ++x) {
      const float v = std::clamp(img.at(x, y), 0.0f, 1.0f);
      row[static_cast<std::size_t>(x)] =
          static_cast<std::uint8_t>(v * 255.0f + 0.5f);
    }
    sink.write(reinterpret_cast<const char*>(row.data()),
               static_cast<std::streamsize>(row.size()));
  }
  if (!sink) throw IoError("write_pgm: sink write failure");
  return h.size() + static_cast<std::size_t>(img.width()) * img.height();
}

void write_pgm_file(const Raster& img, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  write_pgm(img, out);
}

} // namespace hhfreak
