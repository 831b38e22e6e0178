#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "conformal_lab/rng.hpp"

using namespace conformal_lab;

TEST_CASE("keyed draws are pure functions of (seed, stream, counter)") {
  REQUIRE(keyed_u64(1, 2, 3) == keyed_u64(1, 2, 3));
  REQUIRE(keyed_u64(1, 2, 3) != keyed_u64(1, 2, 4));
  REQUIRE(keyed_u64(1, 2, 3) != keyed_u64(1, 3, 3));
  REQUIRE(keyed_u64(1, 2, 3) != keyed_u64(2, 2, 3));

  CounterRng a(42, 7), b(42, 7);
  for (int i = 0; i < 100; ++i) REQUIRE(a.next_u64() == b.next_u64());
}

TEST_CASE("distinct streams decorrelate") {
  CounterRng a(42, 0), b(42, 1);
  int agree = 0;
  for (int i = 0; i < 64; ++i)
    if (a.next_u64() == b.next_u64()) ++agree;
  REQUIRE(agree == 0);
}

TEST_CASE("doubles lie in [0,1) and have the right mean") {
  CounterRng r(9, 0);
  double sum = 0;
  const int trials = 200000;
  for (int i = 0; i < trials; ++i) {
    double u = r.next_double();
    REQUIRE(u >= 0.0);
    REQUIRE(u < 1.0);
    sum += u;
  }
  double mean = sum / trials;
  // 5 sigma of a uniform mean: 5 * sqrt(1/12 / trials) ~ 0.0032
  REQUIRE(std::abs(mean - 0.5) < 0.0035);
}

TEST_CASE("bounded draws are unbiased across residue classes") {
  CounterRng r(13, 0);
  const std::uint64_t bound = 6;
  std::vector<int> counts(bound, 0);
  const int trials = 120000;
  for (int i = 0; i < trials; ++i) {
    std::uint64_t v = r.next_below(bound);
    REQUIRE(v < bound);
    ++counts[v];
  }
  for (std::uint64_t k = 0; k < bound; ++k) {
    double expected = trials / static_cast<double>(bound);
    // 5 sigma binomial margin
    double sigma = std::sqrt(expected * (1.0 - 1.0 / bound));
    REQUIRE(std::abs(counts[k] - expected) < 5 * sigma);
  }
  REQUIRE_THROWS_AS(r.next_below(0), std::invalid_argument);
}

TEST_CASE("exponential draws have the requested mean") {
  CounterRng r(99, 3);
  double sum = 0;
  const int trials = 200000;
  const double mean = 2.5;
  for (int i = 0; i < trials; ++i) {
    double x = r.next_exponential(mean);
    REQUIRE(x >= 0.0);
    sum += x;
  }
  // exponential sd = mean; 5 sigma margin on the empirical mean
  REQUIRE(std::abs(sum / trials - mean) < 5 * mean / std::sqrt(double(trials)));
  REQUIRE_THROWS_AS(r.next_exponential(0.0), std::invalid_argument);
}

TEST_CASE("permutations are valid and seed-deterministic") {
  CounterRng r(5, 1);
  auto p = r.permutation(257);
  std::set<int> seen(p.begin(), p.end());
  REQUIRE(p.size() == 257);
  REQUIRE(seen.size() == 257);
  REQUIRE(*seen.begin() == 0);
  REQUIRE(*seen.rbegin() == 256);

  CounterRng r2(5, 1);
  REQUIRE(r2.permutation(257) == p);

  CounterRng r3(6, 1);
  REQUIRE(r3.permutation(257) != p);
}

TEST_CASE("derive_stream separates identifier tuples") {
  REQUIRE(derive_stream(1, 2) != derive_stream(2, 1));
  REQUIRE(derive_stream(1) != derive_stream(1, 1));
  REQUIRE(derive_stream(0, 0, 1) != derive_stream(0, 1, 0));
}
