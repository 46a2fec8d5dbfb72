#pragma once

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

#include "hhfreak/keypoint.hpp"
#include "hhfreak/raster.hpp"

namespace hhfreak {

// Keypoint sigma that maps the pattern 1:1 to pixels; other scales
// stretch the pattern by kp.sigma / kPatternSigmaRef.
inline constexpr double kPatternSigmaRef = 2.0;

// One retinal receptive field: center offset and smoothing radius, in
// pattern units (pixels at the reference sigma).
struct ReceptiveField {
  double cx = 0.0;
  double cy = 0.0;
  double r = 0.0;

  bool operator==(const ReceptiveField&) const = default;
};

struct FieldPair {
  int a = 0;
  int b = 0;

  bool operator==(const FieldPair&) const = default;
};

// The fixed retinal sampling pattern: 43 overlapping fields (1 center
// + 7 rings of 6, geometrically spaced radii), 45 symmetric
// long-distance orientation pairs, and 512 descriptor pairs ordered
// coarse to fine in four cascades of 128.
struct SamplingPattern {
  std::vector<ReceptiveField> fields;
  std::vector<FieldPair> orientation_pairs;
  std::vector<FieldPair> descriptor_pairs;

  bool operator==(const SamplingPattern&) const = default;
};

// Deterministic hard-coded pattern; every call returns the same value.
// The bundled data file (data/freak_pattern_v1.txt) pins this exact
// pattern across releases.
SamplingPattern build_pattern();

std::size_t write_pattern_file(const SamplingPattern& pattern, std::ostream& sink);
void write_pattern_file(const SamplingPattern& pattern, const std::string& path);
SamplingPattern parse_pattern_file(std::istream& source);
SamplingPattern parse_pattern_file(const std::string& path);

// Prefix sums for O(1) box averages over a single-channel raster.
// Box bounds are real-valued; the integral interpolates exactly for
// the piecewise-constant pixel function. Shared read-only across
// threads.
class IntegralImage {
public:
  explicit IntegralImage(const Raster& img);

  int width() const { return width_; }
  int height() const { return height_; }

  // Mean over the axis-aligned square of half-width max(r, 0.5)
  // centered at (cx, cy) in continuous pixel coordinates (pixel (x,y)
  // spans [x,x+1)x[y,y+1)). The center is clamped into the image.
  double box_mean(double cx, double cy, double r) const;

private:
  double integral_at(double x, double y) const;

  int width_ = 0;
  int height_ = 0;
  double bias_ = 0.0;        // first pixel; sums_ holds deviations from it
  std::vector<double> sums_; // (width+1) x (height+1)
};

// Mean intensity of one receptive field for keypoint kp with the
// pattern rotated by `angle`.
double sample_field(const IntegralImage& img, const Keypoint& kp,
                    const ReceptiveField& field, double angle);
double sample_field(const Raster& img, const Keypoint& kp,
                    const ReceptiveField& field, double angle);

// Accumulates (Ia - Ib) * (ca - cb)/|ca - cb| over the 45 orientation
// pairs and returns atan2 of the sum; a (near-)zero sum maps to 0.
double estimate_orientation(const IntegralImage& img, const Keypoint& kp,
                            const SamplingPattern& pattern);
double estimate_orientation(const Raster& img, const Keypoint& kp,
                            const SamplingPattern& pattern);

// Full descriptor: estimate orientation, re-sample the rotated
// pattern, compare the 512 pairs (strict >, ties give 0).
DescriptorRecord describe(const IntegralImage& img, const Keypoint& kp,
                          const SamplingPattern& pattern);
DescriptorRecord describe(const Raster& img, const Keypoint& kp,
                          const SamplingPattern& pattern);

// Describes every keypoint against one shared integral image.
std::vector<DescriptorRecord> describe_all(const Raster& img,
                                           const std::vector<Keypoint>& kps,
                                           const SamplingPattern& pattern);

int hamming_distance(const Bits512& a, const Bits512& b);

// Early-out thresholds: max cumulative Hamming distance allowed after
// each cascade. Must be non-decreasing.
struct MatchPolicy {
  std::array<int, kCascadeCount> cascade_reject_thresholds{32, 64, 96, 128};

  void validate() const;
};

struct CascadeDecision {
  bool accepted = false;
  int bits_examined = 0; // 128, 256, 384 or 512

  bool operator==(const CascadeDecision&) const = default;
};

// Compares cascade by cascade, rejecting as soon as the cumulative
// distance exceeds a threshold. The accept/reject outcome always
// equals the full four-cascade evaluation.
CascadeDecision cascade_match(const Bits512& a, const Bits512& b,
                              const MatchPolicy& policy);

struct Match {
  int index_a = 0;
  int index_b = 0;
  int distance = 0;
};

// Nearest accepted neighbor in b for each descriptor in a.
std::vector<Match> match_descriptors(const std::vector<DescriptorRecord>& a,
                                     const std::vector<DescriptorRecord>& b,
                                     const MatchPolicy& policy);

} // namespace hhfreak
