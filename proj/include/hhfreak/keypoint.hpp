#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "hhfreak/bits512.hpp"

namespace hhfreak {

// Detector output: pixel position plus the scale it was confirmed at.
struct Keypoint {
  int x = 0;
  int y = 0;
  double sigma = 0.0;

  bool operator==(const Keypoint&) const = default;
};

// One described keypoint: position, estimated orientation in [-pi, pi),
// and the 512-bit FREAK string.
struct DescriptorRecord {
  Keypoint keypoint;
  double orientation = 0.0;
  Bits512 bits;

  bool operator==(const DescriptorRecord&) const = default;
};

// Text formats. One record per line, fields space-separated, '\n' line
// endings. Floating-point fields are printed in shortest round-trip
// form so that parse(write(x)) == x exactly.
//
//   keypoints:   x y sigma
//   descriptors: x y sigma orientation hex(bits)   (128 lowercase hex digits)

std::size_t write_keypoint_file(const std::vector<Keypoint>& kps, std::ostream& sink);
std::vector<Keypoint> parse_keypoint_file(std::istream& source);

std::size_t write_descriptor_file(const std::vector<DescriptorRecord>& records,
                                  std::ostream& sink);
std::vector<DescriptorRecord> parse_descriptor_file(std::istream& source);

void write_keypoint_file(const std::vector<Keypoint>& kps, const std::string& path);
void write_descriptor_file(const std::vector<DescriptorRecord>& records,
                           const std::string& path);
std::vector<Keypoint> parse_keypoint_file(const std::string& path);
std::vector<DescriptorRecord> parse_descriptor_file(const std::string& path);

} // namespace hhfreak
