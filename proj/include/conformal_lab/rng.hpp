#pragma once

// Stateless counter-based random numbers.  Every draw is a pure function of
// (seed, stream, counter), so seeded runs are reproducible no matter how the
// calling code is reordered or parallelized.  Streams are cheap: key one per
// (trial, vertex) pair and pull as many values as needed.

#include <cstdint>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace conformal_lab {

inline std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Hash (seed, stream, counter) into one word.
inline std::uint64_t keyed_u64(std::uint64_t seed, std::uint64_t stream,
                               std::uint64_t counter) {
  return mix64(mix64(mix64(seed) ^ stream) ^ counter);
}

// Combine identifiers (trial index, vertex index, ...) into a stream id.
inline std::uint64_t derive_stream(std::uint64_t a, std::uint64_t b = 0,
                                   std::uint64_t c = 0) {
  return mix64(mix64(a) ^ mix64(b ^ 0x5851f42d4c957f2dULL) ^
               mix64(c ^ 0x14057b7ef767814fULL));
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : seed_(seed), stream_(stream) {}

  std::uint64_t next_u64() { return keyed_u64(seed_, stream_, counter_++); }

  // Uniform on [0,1) with 53 random bits.
  double next_double() {
    return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
  }

  // Uniform on {0,...,bound-1} without modulo bias (Lemire's method).
  std::uint64_t next_below(std::uint64_t bound) {
    if (bound == 0) throw std::invalid_argument("next_below: bound must be positive");
    std::uint64_t x = next_u64();
    __uint128_t m = static_cast<__uint128_t>(x) * bound;
    auto lo = static_cast<std::uint64_t>(m);
    if (lo < bound) {
      std::uint64_t threshold = (-bound) % bound;
      while (lo < threshold) {
        x = next_u64();
        m = static_cast<__uint128_t>(x) * bound;
        lo = static_cast<std::uint64_t>(m);
      }
    }
    return static_cast<std::uint64_t>(m >> 64);
  }

  // Exponential with the given mean (inverse CDF).
  double next_exponential(double mean) {
    if (!(mean > 0)) throw std::invalid_argument("next_exponential: mean must be positive");
    double u = next_double();
    return -mean * std::log1p(-u);
  }

  // Uniform random permutation of {0,...,n-1} (Fisher-Yates).
  std::vector<int> permutation(int n) {
    std::vector<int> p(n);
    for (int i = 0; i < n; ++i) p[i] = i;
    for (int i = n - 1; i > 0; --i) {
      int j = static_cast<int>(next_below(static_cast<std::uint64_t>(i) + 1));
      std::swap(p[i], p[j]);
    }
    return p;
  }

 private:
  std::uint64_t seed_;
  std::uint64_t stream_;
  std::uint64_t counter_ = 0;
};

}  // namespace conformal_lab
