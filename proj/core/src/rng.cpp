#include "sieve/rng.hpp"

#include <stdexcept>

namespace sieve::rng {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t mix(std::initializer_list<std::uint64_t> words) {
  std::uint64_t state = 0x243f6a8885a308d3ULL;  // pi, nothing up the sleeve
  for (std::uint64_t w : words) {
    state ^= w;
    (void)splitmix64(state);
  }
  return splitmix64(state);
}

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

Stream::Stream(std::uint64_t seed) : state_(seed) {}

std::uint64_t Stream::next() { return splitmix64(state_); }

std::uint64_t Stream::below(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("rng: below(0)");
  // Rejection sampling over the largest multiple of n, so every residue is
  // equally likely and the draw sequence is identical on every platform.
  const std::uint64_t limit = ~std::uint64_t{0} - (~std::uint64_t{0} % n);
  std::uint64_t x;
  do {
    x = next();
  } while (x >= limit);
  return x % n;
}

double Stream::next_double() {
  return static_cast<double>(next() >> 11) * 0x1.0p-53;
}

std::vector<int> sample_without_replacement(int n, int k, Stream& stream) {
  if (n < 0 || k < 0 || k > n)
    throw std::invalid_argument("rng: sample_without_replacement needs 0 <= k <= n");
  std::vector<int> pool(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) pool[static_cast<std::size_t>(i)] = i;
  for (int i = 0; i < k; ++i) {
    const auto j = static_cast<std::size_t>(i) +
                   static_cast<std::size_t>(stream.below(static_cast<std::uint64_t>(n - i)));
    std::swap(pool[static_cast<std::size_t>(i)], pool[j]);
  }
  pool.resize(static_cast<std::size_t>(k));
  return pool;
}

}  // namespace sieve::rng
