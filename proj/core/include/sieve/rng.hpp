#pragma once

#include <cstdint>
#include <initializer_list>
#include <string_view>
#include <vector>

// Deterministic random primitives.
//
// Every sampled decision in this project (subsampling, cap tie-breaking,
// synthetic draws) must reproduce bit-for-bit from a seed, on any platform.
// std::uniform_int_distribution and std::shuffle are implementation-defined,
// so nothing here touches <random>; splitmix64 plus rejection sampling gives
// the same bytes everywhere.

namespace sieve::rng {

// splitmix64 step. Used both as a stream in its own right and as the mixing
// function that derives sub-seeds from (seed, label, index, ...) tuples.
std::uint64_t splitmix64(std::uint64_t& state);

// Folds any number of 64-bit words into one well-mixed seed.
std::uint64_t mix(std::initializer_list<std::uint64_t> words);

// FNV-1a, for turning string ids into words that can feed mix().
std::uint64_t fnv1a(std::string_view s);

// A deterministic stream of draws seeded from a single word.
class Stream {
public:
  explicit Stream(std::uint64_t seed);

  std::uint64_t next();

  // Uniform in [0, n). Rejection sampling, so the mapping is exact and
  // identical everywhere. n must be positive.
  std::uint64_t below(std::uint64_t n);

  // Uniform in [0, 1) with 53 bits of precision.
  double next_double();

private:
  std::uint64_t state_;
};

// First k entries of a uniformly random permutation of {0, ..., n-1}, in
// draw order (partial Fisher-Yates). Requires 0 <= k <= n.
std::vector<int> sample_without_replacement(int n, int k, Stream& stream);

}  // namespace sieve::rng
