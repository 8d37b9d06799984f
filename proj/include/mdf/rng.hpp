#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mdf {

// Deterministic random source. All distributions are implemented on top of the
// raw mt19937_64 word stream, so the same seed yields the same values on every
// platform and compiler.
class Rng {
 public:
  explicit Rng(std::uint64_t seed);

  std::uint64_t next_u64();

  // Uniform in [0, 1), 53-bit resolution.
  double uniform();

  // Standard normal via Box-Muller; generates pairs and caches the spare.
  double normal();

  // Uniform integer in [lo, hi], inclusive.
  int uniform_int(int lo, int hi);

  // Derive an independent substream. Depends only on the construction seed and
  // the stream index, not on how many values were drawn so far.
  Rng fork(std::uint64_t stream) const;

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::uint64_t fnv1a64(std::string_view s);
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

}  // namespace mdf
