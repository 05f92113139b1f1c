#pragma once

#include <cstdint>

namespace bmc {

// SplitMix64 finalizer. Also used to derive independent substream states
// from (seed, index) tuples.
inline std::uint64_t mix64(std::uint64_t x) {
  x ^= x >> 30;
  x *= 0xbf58476d1ce4e5b9ULL;
  x ^= x >> 27;
  x *= 0x94d049bb133111ebULL;
  x ^= x >> 31;
  return x;
}

// Initial state for the substream identified by (seed, a, b). Each
// identifier passes through the finalizer, so adjacent trial/individual
// indices land on unrelated states regardless of execution order.
inline std::uint64_t substream_state(std::uint64_t seed, std::uint64_t a,
                                     std::uint64_t b) {
  std::uint64_t h = mix64(seed + 0x9e3779b97f4a7c15ULL);
  h = mix64(h ^ (a + 0x9e3779b97f4a7c15ULL));
  h = mix64(h ^ (b + 0x632be59bd9b4e019ULL));
  return h;
}

// Minimal SplitMix64 stream.
class Rng {
 public:
  explicit Rng(std::uint64_t state) : state_(state) {}

  static Rng substream(std::uint64_t seed, std::uint64_t a, std::uint64_t b) {
    return Rng(substream_state(seed, a, b));
  }

  std::uint64_t next_u64() {
    std::uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1), 53-bit resolution.
  double next_double() { return double(next_u64() >> 11) * 0x1.0p-53; }

 private:
  std::uint64_t state_;
};

}  // namespace bmc
