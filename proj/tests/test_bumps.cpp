#include <algorithm>
#include <cmath>
#include <cstdint>
#include <set>
#include <stdexcept>
#include <vector>

#include <catch2/catch_amalgamated.hpp>

#include "conformal_lab/bumps.hpp"
#include "conformal_lab/generators.hpp"
#include "conformal_lab/graph_core.hpp"
#include "conformal_lab/partitions.hpp"
#include "conformal_lab/spectral.hpp"

using namespace conformal_lab;

namespace {

std::vector<double> dense_of(const std::vector<std::pair<int, double>>& f, int n) {
  std::vector<double> out(n, 0.0);
  for (const auto& [v, val] : f) out[v] = val;
  return out;
}

// Pairwise conformal distance between two vertex sets.
double set_distance(const Graph& g, const ConformalWeight& w,
                    const std::vector<int>& a, const std::vector<int>& b) {
  auto dist = conformal_distance_from_set(g, w, a);
  double best = std::numeric_limits<double>::infinity();
  for (int v : b) best = std::min(best, dist[v]);
  return best;
}

// Fixed partition of the path into runs of 13 vertices (remainder at the
// end); ignores the seed, so every sample is identical.
PartitionSampler path_runs_sampler(int n, const Graph& g) {
  (void)g;
  return [n](uint64_t) {
    Partition p;
    p.tau = 12.5;
    p.block_of.resize(n);
    for (int v = 0; v < n; ++v) p.block_of[v] = v / 13;
    int blocks = (n + 12) / 13;
    p.blocks.resize(blocks);
    for (int v = 0; v < n; ++v) p.blocks[v / 13].push_back(v);
    return p;
  };
}

void check_family_contract(const Graph& g, const ConformalWeight& w,
                           const BumpFamily& fam) {
  const int n = g.n();
  std::vector<int> owner(n, -1);
  for (int i = 0; i < fam.size(); ++i) {
    REQUIRE(!fam.supports[i].empty());
    for (int v : fam.supports[i]) {
      REQUIRE(owner[v] == -1);
      owner[v] = i;
    }
    // cores sit inside supports
    std::set<int> supp(fam.supports[i].begin(), fam.supports[i].end());
    for (int v : fam.cores[i]) REQUIRE(supp.count(v) == 1);
    // cached Rayleigh value matches a dense recomputation
    double dense_rq = rayleigh_quotient(g, dense_of(fam.functions[i], n));
    REQUIRE(std::abs(dense_rq - fam.rayleigh[i]) <= 1e-12 * std::max(1.0, dense_rq));
  }
  (void)w;
}

void check_variational(const Graph& g, const BumpFamily& fam) {
  if (fam.size() == 0) return;
  SpectralData sd = SpectralData::dense(g, false);
  double max_rq = *std::max_element(fam.rayleigh.begin(), fam.rayleigh.end());
  double lam = sd.eigenvalue(fam.size() - 1);
  REQUIRE(lam <= max_rq * (1.0 + 1e-9) + 1e-12);
  REQUIRE(lam <= 2.0 * max_rq + 1e-12);
}

}  // namespace

TEST_CASE("separated sets from a fixed run partition match the hand count") {
  const int n = 200;
  Graph g = make_path(n).graph;
  ConformalWeight w = ConformalWeight::constant(n, 1.0);
  const double R = 25.0, K = 51.0, alpha = 2.0;

  SeparatedSets sep = sepsets_easy(g, w, R, K, alpha, path_runs_sampler(n, g), 7);

  // Shaved cores: positions 3..9 of each interior 13-run; the first run
  // keeps 0..9 (no foreign blocks to its left) and the short final run
  // keeps 198..199, so 110 of 200 vertices survive shaving.
  REQUIRE(sep.partition_retries == 1);
  REQUIRE(sep.shaved_fraction == Catch::Approx(110.0 / 200.0));
  REQUIRE(sep.separation_drops == 0);
  REQUIRE(sep.eta == Catch::Approx(25.0 / 24.0));

  // Greedy merging gives runs 0-3 (31 vertices), 4-7 and 8-11 (28 each);
  // the first has the largest dilated area, so the filter keeps the other
  // two, smallest area first.
  REQUIRE(sep.sets.size() == 2);
  std::vector<int> expected0, expected1;
  for (int k = 4; k < 8; ++k)
    for (int v = 13 * k + 3; v <= 13 * k + 9; ++v) expected0.push_back(v);
  for (int k = 8; k < 12; ++k)
    for (int v = 13 * k + 3; v <= 13 * k + 9; ++v) expected1.push_back(v);
  REQUIRE(sep.sets[0] == expected0);
  REQUIRE(sep.sets[1] == expected1);

  // omega == 1 < eta, so V_L is empty and area^eta is purely the degree
  // term: 16 dbar(1/51) = 32 per unit of area.
  REQUIRE(sep.total_area == Catch::Approx(32.0 * n));
  for (double a : sep.dilated_area) REQUIRE(a == Catch::Approx(32.0 * 44.0));
  double cap = 3.0 / 2.0 * sep.total_area;
  for (double a : sep.dilated_area) REQUIRE(a <= cap);

  REQUIRE(set_distance(g, w, sep.sets[0], sep.sets[1]) >= R / (2.0 * alpha));
}

TEST_CASE("tent functions follow the distance formula exactly") {
  const int n = 200;
  Graph g = make_path(n).graph;
  ConformalWeight w = ConformalWeight::constant(n, 1.0);
  SeparatedSets sep =
      sepsets_easy(g, w, 25.0, 51.0, 2.0, path_runs_sampler(n, g), 7);

  detail::BallScanner scanner(g, w);
  for (const auto& t : sep.sets) {
    auto f = detail::tent_function(scanner, t, sep.eta, false);
    auto dense = dense_of(f, n);
    auto dist = conformal_distance_from_set(g, w, t);
    for (int x = 0; x < n; ++x) {
      double expect = std::max(0.0, sep.eta - dist[x]);
      REQUIRE(std::abs(dense[x] - expect) <= 1e-15);
    }
    // Support: each 7-run widens by one vertex on each side (eta slightly
    // above the unit edge), giving 9 per run and 36 per set.
    REQUIRE(f.size() == 36);
    int at_height = 0, at_fraction = 0;
    for (const auto& [v, val] : f) {
      (void)v;
      if (std::abs(val - sep.eta) <= 1e-15) ++at_height;
      if (std::abs(val - (sep.eta - 1.0)) <= 1e-15) ++at_fraction;
    }
    REQUIRE(at_height == 28);
    REQUIRE(at_fraction == 8);
  }
}

TEST_CASE("ball-size preconditions are enforced") {
  Graph g = make_path(64).graph;
  ConformalWeight w = ConformalWeight::constant(64, 1.0);
  auto sampler = [&](uint64_t s) { return exp_clustering(g, w, 2.0, s); };

  // max |B(x,8)| = 17 on the path: K below that, or above n/2, must throw.
  REQUIRE(max_ball_size(g, w, 8.0) == 17);
  REQUIRE_THROWS_AS(sepsets_easy(g, w, 8.0, 16.0, 8.0, sampler, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(sepsets_easy(g, w, 8.0, 33.0, 8.0, sampler, 1),
                    std::invalid_argument);
  REQUIRE_THROWS_AS(
      bump_family_delocalized(g, w, 8.0, 16.0, 8.0, 0.5, 1),
      std::invalid_argument);
  REQUIRE_THROWS_AS(bump_family_delocalized(g, w, 8.0, 17.0, 8.0, 0.0, 1),
                    std::invalid_argument);

  // Unnormalized weights are rejected by the easy builder.
  ConformalWeight tiny = ConformalWeight::constant(64, 0.5);
  REQUIRE_THROWS_AS(bump_family_easy(g, tiny, 8.0, 17.0, 8.0, 1),
                    std::invalid_argument);
}

TEST_CASE("separated sets satisfy every postcondition on the path") {
  Graph g = make_path(64).graph;
  ConformalWeight w = ConformalWeight::constant(64, 1.0);
  const double R = 8.0, K = 17.0, alpha = 8.0;
  auto sampler = [&](uint64_t s) { return exp_clustering(g, w, R / 4.0, s); };

  for (uint64_t seed : {1ull, 2ull, 3ull}) {
    SeparatedSets sep = sepsets_easy(g, w, R, K, alpha, sampler, seed);
    REQUIRE(sep.sets.size() >= 1);
    double cap = 3.0 / static_cast<double>(sep.sets.size()) * sep.total_area;
    for (size_t i = 0; i < sep.sets.size(); ++i) {
      REQUIRE(static_cast<double>(sep.sets[i].size()) >= K / 2.0);
      REQUIRE(static_cast<double>(sep.sets[i].size()) <= K);
      REQUIRE(sep.dilated_area[i] <= cap * (1.0 + 1e-12));
      for (size_t j = 0; j < i; ++j)
        REQUIRE(set_distance(g, w, sep.sets[i], sep.sets[j]) >=
                R / (2.0 * alpha) - 1e-12);
    }
  }

  // n = 2K exactly still yields at least one set.
  Graph g34 = make_path(34).graph;
  ConformalWeight w34 = ConformalWeight::constant(34, 1.0);
  auto sampler34 = [&](uint64_t s) { return exp_clustering(g34, w34, 2.0, s); };
  SeparatedSets sep34 = sepsets_easy(g34, w34, 8.0, 17.0, 8.0, sampler34, 5);
  REQUIRE(sep34.sets.size() >= 1);
}

TEST_CASE("separated sets pass a direct verification on the grid") {
  Graph g = make_grid(32, 32, false).graph;
  const int n = 1024;
  ConformalWeight w = ConformalWeight::constant(n, 1.0);
  const double R = 6.0;
  const double K = static_cast<double>(max_ball_size(g, w, R));  // 85
  const double alpha = 8.0;
  auto sampler = [&](uint64_t s) { return exp_clustering(g, w, R / 4.0, s); };

  SeparatedSets sep = sepsets_easy(g, w, R, K, alpha, sampler, 11);
  long long required = static_cast<long long>(
      std::max(1.0, std::ceil(n / (16.0 * K))));
  REQUIRE(static_cast<long long>(sep.sets.size()) >= required);

  DegreeProfile prof(g);
  double degree_cap = 16.0 * prof.dbar(1.0 / K);
  detail::BallScanner scanner(g, w);
  std::vector<std::pair<int, double>> reach;
  double cap = 3.0 / static_cast<double>(sep.sets.size()) * sep.total_area;
  for (size_t i = 0; i < sep.sets.size(); ++i) {
    REQUIRE(static_cast<double>(sep.sets[i].size()) >= K / 2.0);
    REQUIRE(static_cast<double>(sep.sets[i].size()) <= K);
    REQUIRE(sep.dilated_area[i] <= cap * (1.0 + 1e-12));
    scanner.scan_set(sep.sets[i], R / (6.0 * alpha), reach);
    for (const auto& [v, d] : reach) {
      (void)d;
      REQUIRE(static_cast<double>(g.degree(v)) <= degree_cap);
    }
    for (size_t j = 0; j < i; ++j)
      REQUIRE(set_distance(g, w, sep.sets[i], sep.sets[j]) >=
              R / (2.0 * alpha) - 1e-12);
  }
}

TEST_CASE("tent families on the path are disjoint with bounded quotients") {
  Graph g = make_path(200).graph;
  ConformalWeight w = ConformalWeight::constant(200, 1.0);
  BumpFamily fam = bump_family_easy(g, w, 25.0, 51.0, 8.0, 3);

  REQUIRE(fam.size() >= 1);
  REQUIRE(fam.params.eta == Catch::Approx(25.0 / 96.0));
  check_family_contract(g, w, fam);
  check_variational(g, fam);

  // Separation above one edge length forces gaps between supports here.
  for (int i = 0; i < fam.size(); ++i)
    for (int j = 0; j < i; ++j)
      REQUIRE(set_distance(g, w, fam.supports[i], fam.supports[j]) >=
              25.0 / 16.0 - 1e-12);
}

TEST_CASE("tent families on the square grid respect the budget") {
  Graph g = make_grid(48, 48, false).graph;
  const int n = 2304;
  ConformalWeight w = ConformalWeight::constant(n, 1.0);
  const double R = 8.0;
  const double K = static_cast<double>(max_ball_size(g, w, R));  // 145
  BumpFamily fam = bump_family_easy(g, w, R, K, 8.0, 5);

  long long required = static_cast<long long>(
      std::max(1.0, std::ceil(n / (16.0 * K))));
  REQUIRE(fam.size() >= static_cast<int>(required));
  check_family_contract(g, w, fam);

  // Sub-edge eta: supports coincide with the separated sets.
  for (int i = 0; i < fam.size(); ++i) REQUIRE(fam.supports[i] == fam.cores[i]);

  DegreeProfile prof(g);
  double budget = kEasyRayleighConstant * 64.0 *
                  (prof.dbar(1.0 / K) + prof.dbar(64.0 / (R * R))) / (R * R);
  for (double rq : fam.rayleigh) REQUIRE(rq <= budget);
}

TEST_CASE("variational eigenvalue bound holds for tent families") {
  Graph g = make_grid(32, 32, false).graph;
  ConformalWeight w = ConformalWeight::constant(1024, 1.0);
  double K = static_cast<double>(max_ball_size(g, w, 6.0));
  BumpFamily fam = bump_family_easy(g, w, 6.0, K, 8.0, 9);
  REQUIRE(fam.size() >= 1);
  check_variational(g, fam);

  Graph c = make_cycle(40).graph;
  ConformalWeight wc = ConformalWeight::constant(40, 1.0);
  double Kc = static_cast<double>(max_ball_size(c, wc, 4.0));  // 9
  BumpFamily famc = bump_family_easy(c, wc, 4.0, Kc, 8.0, 2);
  REQUIRE(famc.size() >= 1);
  check_family_contract(c, wc, famc);
  check_variational(c, famc);
}

TEST_CASE("delocalized families carry almost all stationary mass") {
  Graph g = make_grid(48, 48, false).graph;
  const int n = 2304;
  ConformalWeight w = ConformalWeight::constant(n, 1.0);
  const double R = 10.0;
  const double K = static_cast<double>(max_ball_size(g, w, R));  // 221
  const double delta = 0.2;

  DelocalizedStats stats;
  BumpFamily fam = bump_family_delocalized(g, w, R, K, 8.0, delta, 13, &stats);
  check_family_contract(g, w, fam);

  DegreeProfile prof(g);
  REQUIRE(stats.mass_target ==
          Catch::Approx(1.0 - delta - prof.pi_star(delta)));
  REQUIRE(stats.core_mass >= stats.mass_target);
  // Sub-edge shaving keeps every block intact here.
  REQUIRE(stats.core_mass == Catch::Approx(1.0));
  REQUIRE(stats.rayleigh_sum <= stats.rayleigh_budget);

  double core_mass = 0.0;
  for (int i = 0; i < fam.size(); ++i) {
    // values lie in [0,1]; the core is exactly the level-1 set
    std::vector<int> level_one;
    for (const auto& [v, val] : fam.functions[i]) {
      REQUIRE(val >= 0.0);
      REQUIRE(val <= 1.0 + 1e-15);
      if (val >= 1.0 - 1e-12) level_one.push_back(v);
    }
    REQUIRE(level_one == fam.cores[i]);
    REQUIRE(static_cast<double>(fam.supports[i].size()) <= K);
    REQUIRE(diameter_of_set(g, w, fam.supports[i]) <= R / 2.0 + 1e-9);
    for (int v : fam.cores[i]) core_mass += prof.pi(v);
  }
  REQUIRE(core_mass == Catch::Approx(stats.core_mass));
}

TEST_CASE("delocalized families tolerate vacuous and weighted settings") {
  Graph g = make_grid(20, 20, false).graph;
  ConformalWeight w = ConformalWeight::constant(400, 1.0);
  double K = static_cast<double>(max_ball_size(g, w, 6.0));

  // delta = 1 makes the mass bound vacuous; construction must not throw.
  BumpFamily fam = bump_family_delocalized(g, w, 6.0, K, 8.0, 1.0, 3);
  REQUIRE(fam.size() >= 0);
  check_family_contract(g, w, fam);

  // Non-uniform weights go through the same contract.
  Graph p = make_path(300).graph;
  CounterRng rng(99, 1);
  std::vector<double> vals(300);
  for (double& v : vals) v = 0.5 + rng.next_double();
  ConformalWeight wp(vals);
  double Kp = static_cast<double>(max_ball_size(p, wp, 20.0));
  REQUIRE(Kp <= 150.0);
  DelocalizedStats stats;
  BumpFamily famp =
      bump_family_delocalized(p, wp, 20.0, Kp, 8.0, 0.3, 17, &stats);
  check_family_contract(p, wp, famp);
  REQUIRE(stats.core_mass >= stats.mass_target);
  check_variational(p, famp);
}

TEST_CASE("sparse and dense Rayleigh evaluations agree") {
  Graph g = make_grid(9, 9, false).graph;
  CounterRng rng(5, 2);
  for (int trial = 0; trial < 6; ++trial) {
    std::vector<std::pair<int, double>> f;
    std::vector<char> used(81, 0);
    int k = 3 + static_cast<int>(rng.next_below(20));
    for (int i = 0; i < k; ++i) {
      int v = static_cast<int>(rng.next_below(81));
      if (used[v]) continue;
      used[v] = 1;
      f.push_back({v, rng.next_double() + 0.1});
    }
    double sparse = detail::sparse_rayleigh(g, f);
    double dense = rayleigh_quotient(g, dense_of(f, 81));
    REQUIRE(std::abs(sparse - dense) <= 1e-12 * std::max(1.0, dense));
  }
}
