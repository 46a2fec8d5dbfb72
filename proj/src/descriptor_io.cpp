#include <charconv>
#include <cstdio>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "hhfreak/errors.hpp"
#include "hhfreak/keypoint.hpp"

namespace hhfreak {

std::string Bits512::to_hex() const {
  std::string s;
  s.reserve(128);
  char buf[17];
  for (std::uint64_t w : words_) {
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(w));
    s.append(buf, 16);
  }
  return s;
}

Bits512 Bits512::from_hex(const std::string& s) {
  if (s.size() != 128) throw ParseError("descriptor bits: expected 128 hex digits");
  Bits512 r;
  for (std::size_t w = 0; w < 8; ++w) {
    std::uint64_t v = 0;
    const char* first = s.data() + 16 * w;
    auto [ptr, ec] = std::from_chars(first, first + 16, v, 16);
    if (ec != std::errc{} || ptr != first + 16)
      throw ParseError("descriptor bits: invalid hex digit");
    r.words_[w] = v;
  }
  return r;
}

namespace {

void append_double(std::string& line, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw IoError("number formatting failed");
  line.append(buf, ptr);
}

double take_double(std::istringstream& fields, const char* what, int lineno) {
  std::string tok;
  if (!(fields >> tok)) {
    throw ParseError(std::string("line ") + std::to_string(lineno) + ": missing " + what);
  }
  double v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(std::string("line ") + std::to_string(lineno) + ": bad " + what);
  }
  return v;
}

int take_int(std::istringstream& fields, const char* what, int lineno) {
  std::string tok;
  if (!(fields >> tok)) {
    throw ParseError(std::string("line ") + std::to_string(lineno) + ": missing " + what);
  }
  int v = 0;
  auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc{} || ptr != tok.data() + tok.size()) {
    throw ParseError(std::string("line ") + std::to_string(lineno) + ": bad " + what);
  }
  return v;
}

} // namespace

std::size_t write_keypoint_file(const std::vector<Keypoint>& kps, std::ostream& sink) {
  std::size_t bytes = 0;
  std::string line;
  for (const Keypoint& kp : kps) {
    line.clear();
    line += std::to_string(kp.x);
    line += ' ';
    line += std::to_string(kp.y);
    line += ' ';
    append_double(line, kp.sigma);
    line += '\n';
    sink.write(line.data(), static_cast<std::streamsize>(line.size()));
    bytes += line.size();
  }
  if (!sink) throw IoError("keypoint file: sink write failure");
  return bytes;
}

std::vector<Keypoint> parse_keypoint_file(std::istream& source) {
  std::vector<Keypoint> kps;
  std::string line;
  int lineno = 0;
  while (std::getline(source, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    Keypoint kp;
    kp.x = take_int(fields, "x", lineno);
    kp.y = take_int(fields, "y", lineno);
    kp.sigma = take_double(fields, "sigma", lineno);
    std::string extra;
    if (fields >> extra)
      throw ParseError("line " + std::to_string(lineno) + ": trailing fields");
    kps.push_back(kp);
  }
  return kps;
}

std::size_t write_descriptor_file(const std::vector<DescriptorRecord>& records,
                                  std::ostream& sink) {
  std::size_t bytes = 0;
  std::string line;
  for (const DescriptorRecord& rec : records) {
    line.clear();
    line += std::to_string(rec.keypoint.x);
    line += ' ';
    line += std::to_string(rec.keypoint.y);
    line += ' ';
    append_double(line, rec.keypoint.sigma);
    line += ' ';
    append_double(line, rec.orientation);
    line += ' ';
    line += rec.bits.to_hex();
    line += '\n';
    sink.write(line.data(), static_cast<std::streamsize>(line.size()));
    bytes += line.size();
  }
  if (!sink) throw IoError("descriptor file: sink write failure");
  return bytes;
}

std::vector<DescriptorRecord> parse_descriptor_file(std::istream& source) {
  std::vector<DescriptorRecord> records;
  std::string line;
  int lineno = 0;
  while (std::getline(source, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream fields(line);
    DescriptorRecord rec;
    rec.keypoint.x = take_int(fields, "x", lineno);
    rec.keypoint.y = take_int(fields, "y", lineno);
    rec.keypoint.sigma = take_double(fields, "sigma", lineno);
    rec.orientation = take_double(fields, "orientation", lineno);
    std::string hex;
    if (!(fields >> hex))
      throw ParseError("line " + std::to_string(lineno) + ": missing bits");
    rec.bits = Bits512::from_hex(hex);
    std::string extra;
    if (fields >> extra)
      throw ParseError("line " + std::to_string(lineno) + ": trailing fields");
    records.push_back(rec);
  }
  return records;
}

namespace {

template <class Fn>
void with_output_file(const std::string& path, Fn&& fn) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  fn(out);
}

template <class Fn>
auto with_input_file(const std::string& path, Fn&& fn) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open input file: " + path);
  return fn(in);
}

} // namespace

void write_keypoint_file(const std::vector<Keypoint>& kps, const std::string& path) {
  with_output_file(path, [&](std::ostream& s) { write_keypoint_file(kps, s); });
}

void write_descriptor_file(const std::vector<DescriptorRecord>& records,
                           const std::string& path) {
  with_output_file(path, [&](std::ostream& s) { write_descriptor_file(records, s); });
}

std::vector<Keypoint> parse_keypoint_file(const std::string& path) {
  return with_input_file(path, [](std::istream& s) { return parse_keypoint_file(s); });
}

std::vector<DescriptorRecord> parse_descriptor_file(const std::string& path) {
  return with_input_file(path, [](std::istream& s) { return parse_descriptor_file(s); });
}

} // namespace hhfreak
