#pragma once

#include <cstdint>

namespace spfc {

// SplitMix64 finalizer (Steele, Lea, Flood; constants due to Vigna).
constexpr std::uint64_t mix64(std::uint64_t z) noexcept {
  z ^= z >> 30;
  z *= 0xbf58476d1ce4e5b9ULL;
  z ^= z >> 27;
  z *= 0x94d049bb133111ebULL;
  z ^= z >> 31;
  return z;
}

// Hash-combine two words into a well-mixed key. Used to derive trial and
// stream seeds; distinct inputs give distinct keys in practice.
constexpr std::uint64_t mix(std::uint64_t a, std::uint64_t b) noexcept {
  return mix64(a ^ (b + 0x9e3779b97f4a7c15ULL + (a << 6) + (a >> 2)));
}

// Counter-based stream: draw i is mix64(key + i*phi), so a stream is a pure
// function of (key, counter) and can be copied to replay a sequence.
class RngStream {
 public:
  RngStream() = default;
  explicit RngStream(std::uint64_t key) : key_(key) {}

  std::uint64_t next_u64() noexcept {
    return mix64(key_ + (++counter_) * 0x9e3779b97f4a7c15ULL);
  }

  // Uniform double in [0, 1), 53 mantissa bits.
  double next_double() noexcept {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  std::uint64_t key() const noexcept { return key_; }
  std::uint64_t counter() const noexcept { return counter_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

// One stream per (seed, layer, column) triple; identical triples replay the
// same sequence, which is what makes parallel column compression and serial
// column compression bitwise identical.
inline RngStream derive_stream(std::uint64_t master_seed, std::uint64_t layer,
                               std::uint64_t column) noexcept {
  return RngStream(mix(mix(master_seed, layer), column));
}

}  // namespace spfc
