#pragma once

#include <cstdint>
#include <string_view>
#include <vector>

namespace newsrec {

// Deterministic xoshiro256** generator. All randomized behavior in the
// engine goes through this class so results are reproducible across
// platforms and standard-library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t next_u64();

  // Uniform in [0, 1) with 53 bits of precision.
  double uniform();
  double uniform(double lo, double hi);

  // Uniform integer in [0, n); n must be > 0.
  uint64_t uniform_int(uint64_t n);

  // Standard normal via Box-Muller (no cached spare, fully deterministic).
  double normal();

  // Fisher-Yates in-place shuffle.
  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (size_t i = v.size(); i > 1; --i) {
      const size_t j = static_cast<size_t>(uniform_int(i));
      std::swap(v[i - 1], v[j]);
    }
  }

  // Sample k distinct indices from [0, n), in selection order.
  std::vector<size_t> sample_without_replacement(size_t n, size_t k);

 private:
  uint64_t state_[4];
};

// SplitMix64 finalizer; used for seed derivation and stable string hashing.
uint64_t mix64(uint64_t x);
uint64_t hash_combine(uint64_t a, uint64_t b);
uint64_t hash_str(std::string_view s, uint64_t seed = 0);

}  // namespace newsrec
