#pragma once

#include <cstdint>
#include <string_view>

namespace persuasion {

// SplitMix64 finalizer. Used both as a stream generator and as the mixing
// function for counter-based streams.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Derives a subsystem seed from a master seed and a fixed label
/// (FNV-1a over the label, then mixed with the seed).
constexpr std::uint64_t derive_seed(std::uint64_t seed, std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return mix64(seed ^ mix64(h));
}

/// Small deterministic generator. A stream is identified by (key, counter),
/// so sample i of a simulation always sees the same numbers regardless of
/// which thread evaluates it.
class CounterRng {
 public:
  CounterRng(std::uint64_t key, std::uint64_t counter)
      : state_(mix64(key ^ mix64(counter + 0x632be59bd9b4e019ULL))) {}

  std::uint64_t next_u64() {
    state_ += 0x9e3779b97f4a7c15ULL;
    std::uint64_t z = state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Index drawn from a discrete distribution given as weights summing to ~1.
  template <typename Range>
  int categorical(const Range& probs) {
    double u = uniform();
    int last_positive = 0;
    int i = 0;
    for (double p : probs) {
      if (p > 0) {
        if (u < p) return i;
        u -= p;
        last_positive = i;
      }
      ++i;
    }
    return last_positive;
  }

 private:
  std::uint64_t state_;
};

}  // namespace persuasion
