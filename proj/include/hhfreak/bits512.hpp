#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <string>

namespace hhfreak {

inline constexpr int kDescriptorBits = 512;
inline constexpr int kCascadeCount = 4;
inline constexpr int kCascadeBits = kDescriptorBits / kCascadeCount; // 128

// 512-bit descriptor payload. Bit j corresponds to sampling pair j;
// pair 0 is the most significant bit of the hex rendering.
class Bits512 {
public:
  constexpr Bits512() : words_{} {}

  bool get(int j) const {
    return (words_[static_cast<std::size_t>(j) >> 6] >> (63 - (j & 63))) & 1u;
  }
  void set(int j, bool v) {
    const std::uint64_t mask = std::uint64_t{1} << (63 - (j & 63));
    if (v)
      words_[static_cast<std::size_t>(j) >> 6] |= mask;
    else
      words_[static_cast<std::size_t>(j) >> 6] &= ~mask;
  }

  const std::array<std::uint64_t, 8>& words() const { return words_; }
  std::array<std::uint64_t, 8>& words() { return words_; }

  int popcount() const {
    int n = 0;
    for (std::uint64_t w : words_) n += std::popcount(w);
    return n;
  }

  Bits512 operator^(const Bits512& o) const {
    Bits512 r;
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = words_[i] ^ o.words_[i];
    return r;
  }
  Bits512 operator~() const {
    Bits512 r;
    for (std::size_t i = 0; i < words_.size(); ++i) r.words_[i] = ~words_[i];
    return r;
  }
  bool operator==(const Bits512&) const = default;

  // 128 lowercase hex digits, most significant bit = pair index 0.
  std::string to_hex() const;
  // Throws ParseError unless s is exactly 128 hex digits.
  static Bits512 from_hex(const std::string& s);

private:
  std::array<std::uint64_t, 8> words_;
};

} // namespace hhfreak
