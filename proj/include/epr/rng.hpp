#pragma once

#include <cstdint>

namespace epr {

// Stream keys form a hash chain: derive() folds a 64-bit label into the key
// with a splitmix64-style finalizer. Substreams keyed by distinct label
// sequences are statistically independent.
struct StreamKey {
  std::uint64_t v{0};

  static constexpr std::uint64_t mix(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  [[nodiscard]] constexpr StreamKey derive(std::uint64_t label) const {
    return StreamKey{mix(v ^ mix(label))};
  }
};

constexpr StreamKey root_key(std::uint64_t master_seed) {
  return StreamKey{StreamKey::mix(master_seed)};
}

// xoshiro256++ (Blackman & Vigna). Chosen for portability: the sequence for a
// given key is fixed by this header, independent of platform or stdlib.
// Single-owner; never share one stream between concurrent tasks.
class RngStream {
 public:
  explicit RngStream(StreamKey key) {
    // splitmix64 state expansion, the generator authors' recommended seeding
    std::uint64_t z = key.v;
    for (auto& word : state_) {
      word = StreamKey::mix(z);
      z = word;
    }
  }

  std::uint64_t next_u64() {
    const std::uint64_t result = rotl(state_[0] + state_[3], 23) + state_[0];
    const std::uint64_t t = state_[1] << 17;
    state_[2] ^= state_[0];
    state_[3] ^= state_[1];
    state_[1] ^= state_[2];
    state_[0] ^= state_[3];
    state_[2] ^= t;
    state_[3] = rotl(state_[3], 45);
    return result;
  }

  // uniform in [0, 1) with 53 random bits
  double next_double() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // fair coin, one draw
  int coin() { return next_double() < 0.5 ? 0 : 1; }

  // Bernoulli(p), one draw
  bool bernoulli(double p) { return next_double() < p; }

 private:
  static constexpr std::uint64_t rotl(std::uint64_t x, int k) {
    return (x << k) | (x >> (64 - k));
  }

  std::uint64_t state_[4]{};
};

}  // namespace epr
