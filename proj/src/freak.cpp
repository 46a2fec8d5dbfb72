#include "hhfreak/freak.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "hhfreak/errors.hpp"

namespace hhfreak {

namespace {

constexpr int kRingCount = 7;
constexpr int kFieldsPerRing = 6;
constexpr int kFieldCount = 1 + kRingCount * kFieldsPerRing; // 43
constexpr int kOrientationPairCount = 45;
constexpr double kOuterRingRadius = 12.0;
constexpr double kInnerOuterRatio = 0.1; // rho_1 / rho_7
constexpr double kFieldRadiusFactor = 0.55;
constexpr double kMinPairCenterDistance = 1.0; // de-correlation cutoff

double ring_radius(int ring) { // ring in 1..7
  return kOuterRingRadius *
         std::pow(kInnerOuterRatio, (kRingCount - ring) / double(kRingCount - 1));
}

std::vector<ReceptiveField> make_fields() {
  std::vector<ReceptiveField> fields;
  fields.reserve(kFieldCount);
  fields.push_back({0.0, 0.0, kFieldRadiusFactor * ring_radius(1)});
  for (int ring = 1; ring <= kRingCount; ++ring) {
    const double rho = ring_radius(ring);
    // alternate rings are staggered by half a step
    const double offset = (ring % 2 == 0) ? std::numbers::pi / kFieldsPerRing : 0.0;
    for (int i = 0; i < kFieldsPerRing; ++i) {
      const double theta = offset + 2.0 * std::numbers::pi * i / kFieldsPerRing;
      fields.push_back({rho * std::cos(theta), rho * std::sin(theta),
                        kFieldRadiusFactor * rho});
    }
  }
  return fields;
}

int field_index(int ring, int i) { return 1 + (ring - 1) * kFieldsPerRing + i; }

double center_distance(const ReceptiveField& a, const ReceptiveField& b) {
  return std::hypot(a.cx - b.cx, a.cy - b.cy);
}

// All pairs whose centers are collinear with the pattern origin:
// opposite fields of one ring, and same-slot opposite fields of two
// equally-staggered rings. The 45 with the largest separation become
// the orientation pairs.
std::vector<FieldPair> make_orientation_pairs(const std::vector<ReceptiveField>& fields) {
  struct Candidate {
    FieldPair pair;
    double separation;
  };
  std::vector<Candidate> candidates;
  const int half = kFieldsPerRing / 2;
  for (int ring = 1; ring <= kRingCount; ++ring)
    for (int i = 0; i < half; ++i)
      candidates.push_back({{field_index(ring, i), field_index(ring, i + half)}, 0.0});
  for (int ra = 1; ra <= kRingCount; ++ra)
    for (int rb = ra + 2; rb <= kRingCount; rb += 2) // same parity => same stagger
      for (int i = 0; i < kFieldsPerRing; ++i)
        candidates.push_back(
            {{field_index(ra, i), field_index(rb, (i + half) % kFieldsPerRing)}, 0.0});
  for (Candidate& c : candidates) {
    if (c.pair.a > c.pair.b) std::swap(c.pair.a, c.pair.b);
    c.separation = center_distance(fields[c.pair.a], fields[c.pair.b]);
  }
  std::sort(candidates.begin(), candidates.end(), [](const Candidate& x, const Candidate& y) {
    if (x.separation != y.separation) return x.separation > y.separation;
    if (x.pair.a != y.pair.a) return x.pair.a < y.pair.a;
    return x.pair.b < y.pair.b;
  });
  std::vector<FieldPair> pairs;
  pairs.reserve(kOrientationPairCount);
  for (int i = 0; i < kOrientationPairCount; ++i) pairs.push_back(candidates[i].pair);
  return pairs;
}

// Every unordered field pair sorted coarse to fine (mean smoothing
// radius descending), with near-coincident centers dropped; the first
// 512 survivors form the descriptor, 128 per cascade.
std::vector<FieldPair> make_descriptor_pairs(const std::vector<ReceptiveField>& fields) {
  struct Candidate {
    FieldPair pair;
    double mean_radius;
  };
  std::vector<Candidate> candidates;
  candidates.reserve(kFieldCount * (kFieldCount - 1) / 2);
  for (int a = 0; a < kFieldCount; ++a)
    for (int b = a + 1; b < kFieldCount; ++b)
      candidates.push_back({{a, b}, 0.5 * (fields[a].r + fields[b].r)});
  std::stable_sort(candidates.begin(), candidates.end(),
                   [](const Candidate& x, const Candidate& y) {
    if (x.mean_radius != y.mean_radius) return x.mean_radius > y.mean_radius;
    if (x.pair.a != y.pair.a) return x.pair.a < y.pair.a;
    return x.pair.b < y.pair.b;
  });
  std::vector<FieldPair> pairs;
  pairs.reserve(kDescriptorBits);
  for (const Candidate& c : candidates) {
    if (static_cast<int>(pairs.size()) == kDescriptorBits) break;
    if (center_distance(fields[c.pair.a], fields[c.pair.b]) < kMinPairCenterDistance)
      continue;
    pairs.push_back(c.pair);
  }
  if (static_cast<int>(pairs.size()) != kDescriptorBits)
    throw std::logic_error("pattern generation produced too few descriptor pairs");
  return pairs;
}

} // namespace

SamplingPattern build_pattern() {
  SamplingPattern p;
  p.fields = make_fields();
  p.orientation_pairs = make_orientation_pairs(p.fields);
  p.descriptor_pairs = make_descriptor_pairs(p.fields);
  return p;
}

namespace {

void append_double(std::string& line, double v) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  if (ec != std::errc{}) throw IoError("number formatting failed");
  line.append(buf, ptr);
}

} // namespace

std::size_t write_pattern_file(const SamplingPattern& pattern, std::ostream& sink) {
  std::string out = "# hhfreak retinal sampling pattern\nversion 1\n";
  out += "fields " + std::to_string(pattern.fields.size()) + "\n";
  for (const ReceptiveField& f : pattern.fields) {
    append_double(out, f.cx);
    out += ' ';
    append_double(out, f.cy);
    out += ' ';
    append_double(out, f.r);
    out += '\n';
  }
  const auto emit_pairs = [&out](const char* name, const std::vector<FieldPair>& pairs) {
    out += std::string(name) + " " + std::to_string(pairs.size()) + "\n";
    for (const FieldPair& p : pairs)
      out += std::to_string(p.a) + " " + std::to_string(p.b) + "\n";
  };
  emit_pairs("orientation_pairs", pattern.orientation_pairs);
  emit_pairs("descriptor_pairs", pattern.descriptor_pairs);
  sink.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!sink) throw IoError("pattern file: sink write failure");
  return out.size();
}

void write_pattern_file(const SamplingPattern& pattern, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open output file: " + path);
  write_pattern_file(pattern, out);
}

namespace {

std::string next_content_line(std::istream& in, int& lineno) {
  std::string line;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line[0] != '#') return line;
  }
  throw ParseError("pattern file: unexpected end of file");
}

int expect_counted_section(std::istream& in, int& lineno, const std::string& name) {
  std::istringstream fields(next_content_line(in, lineno));
  std::string key;
  int count = 0;
  if (!(fields >> key >> count) || key != name || count <= 0)
    throw ParseError("pattern file line " + std::to_string(lineno) + ": expected '" +
                     name + " <count>'");
  return count;
}

} // namespace

SamplingPattern parse_pattern_file(std::istream& source) {
  int lineno = 0;
  std::istringstream version(next_content_line(source, lineno));
  std::string key;
  int ver = 0;
  if (!(version >> key >> ver) || key != "version" || ver != 1)
    throw ParseError("pattern file: unsupported version");

  SamplingPattern p;
  const int nfields = expect_counted_section(source, lineno, "fields");
  for (int i = 0; i < nfields; ++i) {
    std::istringstream fields(next_content_line(source, lineno));
    ReceptiveField f;
    if (!(fields >> f.cx >> f.cy >> f.r))
      throw ParseError("pattern file line " + std::to_string(lineno) + ": bad field");
    p.fields.push_back(f);
  }
  const auto read_pairs = [&](const char* name, std::vector<FieldPair>& dst) {
    const int n = expect_counted_section(source, lineno, name);
    for (int i = 0; i < n; ++i) {
      std::istringstream fields(next_content_line(source, lineno));
      FieldPair pr;
      if (!(fields >> pr.a >> pr.b) || pr.a < 0 || pr.b < 0 || pr.a >= nfields ||
          pr.b >= nfields)
        throw ParseError("pattern file line " + std::to_string(lineno) + ": bad pair");
      dst.push_back(pr);
    }
  };
  read_pairs("orientation_pairs", p.orientation_pairs);
  read_pairs("descriptor_pairs", p.descriptor_pairs);
  return p;
}

SamplingPattern parse_pattern_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open pattern file: " + path);
  return parse_pattern_file(in);
}

IntegralImage::IntegralImage(const Raster& img) {
  if (img.channels() != 1)
    throw std::invalid_argument("IntegralImage: expected a single-channel raster");
  width_ = img.width();
  height_ = img.height();
  // Sums are stored relative to the first pixel. A constant region then
  // integrates to exactly 0, so its field means compare equal and the
  // strict-> descriptor bits stay 0 instead of picking up prefix-sum
  // rounding noise.
  bias_ = img.size() > 0 ? img.data()[0] : 0.0;
  sums_.assign(static_cast<std::size_t>(width_ + 1) * (height_ + 1), 0.0);
  for (int y = 0; y < height_; ++y) {
    double row = 0.0;
    for (int x = 0; x < width_; ++x) {
      row += img.at(x, y) - bias_;
      sums_[static_cast<std::size_t>(y + 1) * (width_ + 1) + (x + 1)] =
          sums_[static_cast<std::size_t>(y) * (width_ + 1) + (x + 1)] + row;
    }
  }
}

// Integral of the pixel function over [0,x) x [0,y) for real bounds;
// bilinear interpolation of the prefix sums is exact here because the
// integrand is constant within each pixel.
double IntegralImage::integral_at(double x, double y) const {
  const int xi = static_cast<int>(x);
  const int yi = static_cast<int>(y);
  const int x0 = std::min(xi, width_ - 1);
  const int y0 = std::min(yi, height_ - 1);
  const double fx = x - x0;
  const double fy = y - y0;
  const auto s = [&](int ix, int iy) {
    return sums_[static_cast<std::size_t>(iy) * (width_ + 1) + ix];
  };
  const double top = s(x0, y0) * (1.0 - fx) + s(x0 + 1, y0) * fx;
  const double bottom = s(x0, y0 + 1) * (1.0 - fx) + s(x0 + 1, y0 + 1) * fx;
  return top * (1.0 - fy) + bottom * fy;
}

double IntegralImage::box_mean(double cx, double cy, double r) const {
  const double half = std::max(r, 0.5);
  cx = std::clamp(cx, 0.5, width_ - 0.5);
  cy = std::clamp(cy, 0.5, height_ - 0.5);
  const double ax = std::clamp(cx - half, 0.0, static_cast<double>(width_));
  const double bx = std::clamp(cx + half, 0.0, static_cast<double>(width_));
  const double ay = std::clamp(cy - half, 0.0, static_cast<double>(height_));
  const double by = std::clamp(cy + half, 0.0, static_cast<double>(height_));
  const double area = (bx - ax) * (by - ay);
  const double sum = integral_at(bx, by) - integral_at(ax, by) -
                     integral_at(bx, ay) + integral_at(ax, ay);
  return bias_ + sum / area;
}

double sample_field(const IntegralImage& img, const Keypoint& kp,
                    const ReceptiveField& field, double angle) {
  const double scale = kp.sigma / kPatternSigmaRef;
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  const double ox = (c * field.cx - s * field.cy) * scale;
  const double oy = (s * field.cx + c * field.cy) * scale;
  return img.box_mean(kp.x + 0.5 + ox, kp.y + 0.5 + oy, field.r * scale);
}

double sample_field(const Raster& img, const Keypoint& kp,
                    const ReceptiveField& field, double angle) {
  return sample_field(IntegralImage(img), kp, field, angle);
}

double estimate_orientation(const IntegralImage& img, const Keypoint& kp,
                            const SamplingPattern& pattern) {
  double ox = 0.0;
  double oy = 0.0;
  for (const FieldPair& pair : pattern.orientation_pairs) {
    const ReceptiveField& fa = pattern.fields[static_cast<std::size_t>(pair.a)];
    const ReceptiveField& fb = pattern.fields[static_cast<std::size_t>(pair.b)];
    const double diff = sample_field(img, kp, fa, 0.0) - sample_field(img, kp, fb, 0.0);
    const double dx = fa.cx - fb.cx;
    const double dy = fa.cy - fb.cy;
    const double norm = std::hypot(dx, dy);
    ox += diff * dx / norm;
    oy += diff * dy / norm;
  }
  if (std::hypot(ox, oy) < 1e-9) return 0.0; // symmetric neighborhood
  double angle = std::atan2(oy, ox);
  if (angle >= std::numbers::pi) angle = -std::numbers::pi;
  return angle;
}

double estimate_orientation(const Raster& img, const Keypoint& kp,
                            const SamplingPattern& pattern) {
  return estimate_orientation(IntegralImage(img), kp, pattern);
}

DescriptorRecord describe(const IntegralImage& img, const Keypoint& kp,
                          const SamplingPattern& pattern) {
  DescriptorRecord rec;
  rec.keypoint = kp;
  rec.orientation = estimate_orientation(img, kp, pattern);
  std::vector<double> samples(pattern.fields.size());
  for (std::size_t i = 0; i < pattern.fields.size(); ++i)
    samples[i] = sample_field(img, kp, pattern.fields[i], rec.orientation);
  for (std::size_t j = 0; j < pattern.descriptor_pairs.size(); ++j) {
    const FieldPair& pair = pattern.descriptor_pairs[j];
    rec.bits.set(static_cast<int>(j), samples[static_cast<std::size_t>(pair.a)] >
                                          samples[static_cast<std::size_t>(pair.b)]);
  }
  return rec;
}

DescriptorRecord describe(const Raster& img, const Keypoint& kp,
                          const SamplingPattern& pattern) {
  return describe(IntegralImage(img), kp, pattern);
}

std::vector<DescriptorRecord> describe_all(const Raster& img,
                                           const std::vector<Keypoint>& kps,
                                           const SamplingPattern& pattern) {
  const IntegralImage integral(img);
  std::vector<DescriptorRecord> records;
  records.reserve(kps.size());
  for (const Keypoint& kp : kps) records.push_back(describe(integral, kp, pattern));
  return records;
}

int hamming_distance(const Bits512& a, const Bits512& b) {
  return (a ^ b).popcount();
}

void MatchPolicy::validate() const {
  for (std::size_t i = 1; i < cascade_reject_thresholds.size(); ++i)
    if (cascade_reject_thresholds[i] < cascade_reject_thresholds[i - 1])
      throw std::invalid_argument("match policy: thresholds must be non-decreasing");
}

CascadeDecision cascade_match(const Bits512& a, const Bits512& b,
                              const MatchPolicy& policy) {
  policy.validate();
  const Bits512 diff = a ^ b;
  int cumulative = 0;
  for (int cascade = 0; cascade < kCascadeCount; ++cascade) {
    // two 64-bit words per 128-bit cascade
    cumulative += std::popcount(diff.words()[static_cast<std::size_t>(2 * cascade)]) +
                  std::popcount(diff.words()[static_cast<std::size_t>(2 * cascade) + 1]);
    if (cumulative > policy.cascade_reject_thresholds[static_cast<std::size_t>(cascade)])
      return {false, (cascade + 1) * kCascadeBits};
  }
  return {true, kDescriptorBits};
}

std::vector<Match> match_descriptors(const std::vector<DescriptorRecord>& a,
                                     const std::vector<DescriptorRecord>& b,
                                     const MatchPolicy& policy) {
  policy.validate();
  std::vector<Match> matches;
  for (std::size_t ia = 0; ia < a.size(); ++ia) {
    int best = -1;
    int best_dist = kDescriptorBits + 1;
    for (std::size_t ib = 0; ib < b.size(); ++ib) {
      if (!cascade_match(a[ia].bits, b[ib].bits, policy).accepted) continue;
      const int d = hamming_distance(a[ia].bits, b[ib].bits);
      if (d < best_dist) {
        best_dist = d;
        best = static_cast<int>(ib);
      }
    }
    if (best >= 0) matches.push_back({static_cast<int>(ia), best, best_dist});
  }
  return matches;
}

} // namespace hhfreak
