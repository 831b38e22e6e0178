// Disjointly supported test functions built from a conformal weight and a
// padded random partition.
//
// Two variants are provided. The "easy" variant produces r >= n/16K tent
// functions psi_i(x) = max{0, eta - dist_omega(x, T_i)} with eta = R/(12
// alpha), supported on well-separated vertex sets of size K/2..K and with
// individually bounded Rayleigh quotients. The "delocalized" variant
// produces [0,1]-valued tents psi_i(x) = (1/eta) max{0, eta -
// dist_omega(x, core_i)} with eta = delta R/(18 alpha) whose level-1 cores
// carry all but a delta + pi*(delta) fraction of the stationary measure,
// and whose weighted Rayleigh sum is bounded by explicit degree averages.
//
// Every inequality promised by the construction is re-checked numerically
// before a family is returned; violations throw logic_error. Statistical
// preconditions (a partition sample with enough shaved mass) are retried up
// to a fixed budget and throw runtime_error on exhaustion.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "conformal_lab/graph_core.hpp"
#include "conformal_lab/partitions.hpp"
#include "conformal_lab/rng.hpp"

namespace conformal_lab {

struct BumpParams {
  double R = 0.0;
  double alpha = 0.0;
  double K = 0.0;
  double eta = 0.0;
  double delta = 0.0;  // zero for the easy variant
};

struct BumpFamily {
  // functions[i] lists (vertex, value) pairs sorted by vertex; vertices not
  // listed take value zero.
  std::vector<std::vector<std::pair<int, double>>> functions;
  std::vector<std::vector<int>> supports;  // sorted
  std::vector<std::vector<int>> cores;     // sorted; T_i or psi_i^{-1}(1)
  std::vector<double> rayleigh;
  BumpParams params;

  int size() const { return static_cast<int>(functions.size()); }

  std::vector<std::vector<double>> dense_functions(int n) const {
    std::vector<std::vector<double>> out(functions.size(),
                                         std::vector<double>(n, 0.0));
    for (size_t i = 0; i < functions.size(); ++i)
      for (const auto& [v, val] : functions[i]) out[i][v] = val;
    return out;
  }
};

namespace detail {

// Rayleigh quotient 2 sum_E |f(x)-f(y)|^2 / sum_x deg(x) f(x)^2 evaluated
// from a sparse function; touches only edges incident to the support.
inline double sparse_rayleigh(const Graph& g,
                              const std::vector<std::pair<int, double>>& f) {
  std::vector<std::pair<int, double>> sorted = f;
  std::sort(sorted.begin(), sorted.end());
  auto value = [&](int v) {
    auto it = std::lower_bound(sorted.begin(), sorted.end(),
                               std::make_pair(v, -std::numeric_limits<double>::infinity()));
    return (it != sorted.end() && it->first == v) ? it->second : 0.0;
  };
  double num = 0.0, den = 0.0;
  for (const auto& [v, val] : sorted) {
    den += static_cast<double>(g.degree(v)) * val * val;
    for (int u : g.neighbors(v)) {
      double diff = val - value(u);
      // Each support-support edge is seen from both endpoints; halve it.
      double scale = value(u) != 0.0 ? 0.5 : 1.0;
      num += scale * diff * diff;
    }
  }
  if (den <= 0.0) throw std::invalid_argument("rayleigh: zero function");
  return 2.0 * num / den;
}

// Edges of E(S, V_L): one endpoint in S and one endpoint of large weight
// (both conditions may be met by the same vertex).
inline long long edges_touching(const Graph& g, const std::vector<char>& in_s,
                                const std::vector<char>& in_l) {
  long long count = 0;
  for (const auto& [a, b] : g.edges()) {
    bool s = in_s[a] || in_s[b];
    bool l = in_l[a] || in_l[b];
    if (s && l) ++count;
  }
  return count;
}

inline double area_of(const ConformalWeight& w, const std::vector<int>& set) {
  double a = 0.0;
  for (int v : set) a += w[v] * w[v];
  return a;
}

}  // namespace detail

// Largest conformal ball cardinality over all centers, |B_omega(x, R)|.
inline int max_ball_size(const Graph& g, const ConformalWeight& w, double R) {
  detail::BallScanner scanner(g, w);
  std::vector<std::pair<int, double>> reach;
  int best = 0;
  for (int x = 0; x < g.n(); ++x) {
    scanner.scan(x, R, reach);
    best = std::max(best, static_cast<int>(reach.size()));
  }
  return best;
}

struct SeparatedSets {
  std::vector<std::vector<int>> sets;        // the T_i, sorted
  std::vector<double> dilated_area;          // area^eta of B(T_i, R/6alpha)
  double total_area = 0.0;                   // area^eta of V
  double eta = 0.0;
  double degree_cap = 0.0;                   // 16 dbar(1/K)
  int partition_retries = 0;                 // samples drawn
  double shaved_fraction = 0.0;              // N_P / n of the retained sample
  int separation_drops = 0;                  // candidates dropped by distance
};

// Well-separated medium-size vertex sets. From a partition into blocks of
// diameter <= R/2, keep the R/(4 alpha)-interiors, merge them greedily into
// sets of size K/2..K, enforce pairwise distance >= R/(2 alpha), keep the
// smaller half by dilated area^eta, and drop sets whose dilation contains a
// vertex of degree above 16 dbar(1/K).
inline SeparatedSets sepsets_easy(const Graph& g, const ConformalWeight& w,
                                  double R, double K, double alpha,
                                  const PartitionSampler& sampler,
                                  uint64_t seed) {
  check_weight_matches(g, w);
  const int n = g.n();
  if (!(R > 0.0) || !(alpha >= 1.0) || !(K >= 1.0))
    throw std::invalid_argument("sepsets: need R > 0 and alpha, K >= 1");
  int ball_max = max_ball_size(g, w, R);
  if (ball_max > K || K > n / 2.0)
    throw std::invalid_argument(
        "sepsets: ball-size assumption violated: max |B(x,R)| = " +
        std::to_string(ball_max) + ", K = " + std::to_string(K) +
        ", n/2 = " + std::to_string(n / 2.0));

  SeparatedSets out;
  out.eta = R / (12.0 * alpha);
  DegreeProfile prof(g);
  out.degree_cap = 16.0 * prof.dbar(1.0 / K);

  std::vector<char> in_l(n, 0);
  for (int v = 0; v < n; ++v) in_l[v] = w[v] >= out.eta ? 1 : 0;
  {
    std::vector<char> all(n, 1);
    double area_v = 0.0;
    for (int v = 0; v < n; ++v) area_v += w[v] * w[v];
    out.total_area = 16.0 * prof.dbar(1.0 / K) * area_v +
                     out.eta * out.eta *
                         static_cast<double>(detail::edges_touching(g, all, in_l));
  }

  // Retry partitions until the shaved cores hold at least half the vertices.
  detail::BallScanner scanner(g, w);
  std::vector<std::pair<int, double>> reach;
  const double shave = R / (4.0 * alpha);
  std::vector<std::vector<int>> best_cores;
  long long best_count = -1;
  const int max_retries = 64;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Partition p = sampler(keyed_u64(seed, derive_stream(0x5e95ull), attempt));
    ++out.partition_retries;
    if (static_cast<int>(p.block_of.size()) != n)
      throw std::invalid_argument("sepsets: partition size mismatch");
    if (p.tau > R / 2.0 + 1e-9)
      throw std::invalid_argument("sepsets: partition diameter exceeds R/2");
    std::vector<std::vector<int>> cores(p.blocks.size());
    long long count = 0;
    for (int x = 0; x < n; ++x) {
      if (scanner.nearest_foreign(x, shave, p.block_of) > shave) {
        cores[p.block_of[x]].push_back(x);
        ++count;
      }
    }
    if (count > best_count) {
      best_count = count;
      best_cores = std::move(cores);
    }
    if (best_count * 2 >= n) break;
  }
  if (best_count * 2 < n)
    throw std::runtime_error(
        "sepsets: no partition sample had half its mass in shaved cores "
        "(best " +
        std::to_string(best_count) + " of " + std::to_string(n) + " after " +
        std::to_string(out.partition_retries) + " samples)");
  out.shaved_fraction = static_cast<double>(best_count) / n;

  // Greedy merge in block order: cores of size >= K/2 stand alone, smaller
  // ones accumulate until they reach K/2; the final remnant is discarded.
  std::vector<std::vector<int>> merged;
  std::vector<int> acc;
  for (auto& core : best_cores) {
    if (core.empty()) continue;
    if (static_cast<double>(core.size()) >= K / 2.0) {
      merged.push_back(std::move(core));
      continue;
    }
    acc.insert(acc.end(), core.begin(), core.end());
    if (static_cast<double>(acc.size()) >= K / 2.0) {
      merged.push_back(std::move(acc));
      acc.clear();
    }
  }
  for (const auto& t : merged)
    if (static_cast<double>(t.size()) > K)
      throw std::logic_error("sepsets: merged set exceeds K");

  // Enforce pairwise separation directly; the shaving argument alone does
  // not survive edges longer than R/(4 alpha).
  const double gap = R / (2.0 * alpha);
  std::vector<std::vector<int>> kept;
  std::vector<char> in_kept(n, 0);
  for (auto& t : merged) {
    scanner.scan_set(t, gap * (1.0 - 1e-12), reach);
    bool clash = false;
    for (const auto& [v, d] : reach) {
      if (in_kept[v] && d < gap) {
        clash = true;
        break;
      }
    }
    if (clash) {
      ++out.separation_drops;
      continue;
    }
    for (int v : t) in_kept[v] = 1;
    kept.push_back(std::move(t));
  }

  // Keep the ceil(r/2) sets of smallest dilated area^eta.
  const double dilate = R / (6.0 * alpha);
  std::vector<double> areas(kept.size());
  std::vector<char> in_b(n, 0);
  for (size_t i = 0; i < kept.size(); ++i) {
    scanner.scan_set(kept[i], dilate, reach);
    double area = 0.0;
    for (const auto& [v, d] : reach) {
      (void)d;
      in_b[v] = 1;
      area += w[v] * w[v];
    }
    double a_eta = 16.0 * prof.dbar(1.0 / K) * area +
                   out.eta * out.eta *
                       static_cast<double>(detail::edges_touching(g, in_b, in_l));
    for (const auto& [v, d] : reach) {
      (void)d;
      in_b[v] = 0;
    }
    areas[i] = a_eta;
  }
  std::vector<size_t> order(kept.size());
  for (size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](size_t a, size_t b) {
    return areas[a] != areas[b] ? areas[a] < areas[b] : a < b;
  });
  size_t keep_count = (kept.size() + 1) / 2;

  // Drop sets whose dilation contains a high-degree vertex.
  for (size_t rank = 0; rank < keep_count; ++rank) {
    size_t i = order[rank];
    scanner.scan_set(kept[i], dilate, reach);
    int max_deg = 0;
    for (const auto& [v, d] : reach) {
      (void)d;
      max_deg = std::max(max_deg, g.degree(v));
    }
    if (static_cast<double>(max_deg) > out.degree_cap) continue;
    std::vector<int> t = kept[i];
    std::sort(t.begin(), t.end());
    out.sets.push_back(std::move(t));
    out.dilated_area.push_back(areas[i]);
  }

  long long required = static_cast<long long>(
      std::max(1.0, std::ceil(static_cast<double>(n) / (16.0 * K))));
  if (static_cast<long long>(out.sets.size()) < required)
    throw std::runtime_error(
        "sepsets: only " + std::to_string(out.sets.size()) +
        " separated sets survived; " + std::to_string(required) +
        " required");

  // Re-check the area guarantee with the final count.
  double cap = 3.0 / static_cast<double>(out.sets.size()) * out.total_area;
  for (double a : out.dilated_area)
    if (a > cap * (1.0 + 1e-12))
      throw std::logic_error("sepsets: dilated area exceeds (3/r) area(V)");
  return out;
}

namespace detail {

// Tent of height eta around a set: x -> max{0, eta - dist_omega(x, set)},
// optionally rescaled by 1/eta. Support is the open eta-ball around the set.
inline std::vector<std::pair<int, double>> tent_function(
    BallScanner& scanner, const std::vector<int>& set, double eta,
    bool unit_height) {
  std::vector<std::pair<int, double>> reach;
  scanner.scan_set(set, eta, reach);
  std::vector<std::pair<int, double>> f;
  for (const auto& [v, d] : reach) {
    double val = eta - d;
    if (val <= 0.0) continue;
    f.push_back({v, unit_height ? val / eta : val});
  }
  std::sort(f.begin(), f.end());
  return f;
}

inline void check_disjoint_supports(
    int n, const std::vector<std::vector<int>>& supports) {
  std::vector<int> owner(n, -1);
  for (size_t i = 0; i < supports.size(); ++i)
    for (int v : supports[i]) {
      if (owner[v] >= 0)
        throw std::logic_error("bump family: supports overlap");
      owner[v] = static_cast<int>(i);
    }
}

}  // namespace detail

// Upper bound certified for every Rayleigh quotient returned by
// bump_family_easy, in units of alpha^2 (dbar(1/K) + dbar(alpha^2/R^2)) /
// R^2 for a normalized weight. The value follows the construction's own
// accounting: R_G(psi_i) <= 6 area^eta(V) / (r eta^2 |T_i|) with r |T_i| >=
// n/32 and eta = R/(12 alpha) gives 27648 alpha^2 area^eta(V) / (R^2 n),
// and area^eta(V)/n <= 16 dbar(1/K) + dbar(144 alpha^2/R^2) <= 16 (dbar(1/K)
// + dbar(alpha^2/R^2)) for ||w||_{L^2} = 1.
inline constexpr double kEasyRayleighConstant = 442368.0;

// Constant certified for the weighted Rayleigh-sum bound of the
// delocalized family. The construction's accounting gives 36 sqrt(2): the
// per-set bound contributes 1/(eta sqrt(|E|)) = 18 alpha/(delta R
// sqrt(|E|)), Cauchy-Schwarz with the half-mass cores contributes sqrt(2)
// to each of the two terms, the boundary-edge total picks up another
// factor 2 (an edge joining two kept blocks is counted from both sides),
// and ||w||_{l^2}/sqrt(|E|) = sqrt(2/dbar(1)) ||w||_{L^2}. We round up to
// 51.
inline constexpr double kDelocalizedSumConstant = 51.0;

inline BumpFamily bump_family_easy(const Graph& g, const ConformalWeight& w,
                                   double R, double K, double alpha,
                                   uint64_t seed) {
  check_weight_matches(g, w);
  const int n = g.n();
  if (std::abs(w.l2_norm() - 1.0) > 1e-9)
    throw std::invalid_argument(
        "bump_family_easy: weight must be normalized (||w||_{L^2} = 1)");

  PartitionSampler sampler = [&](uint64_t s) {
    return exp_clustering(g, w, R / 4.0, s);
  };
  SeparatedSets sep = sepsets_easy(g, w, R, K, alpha, sampler, seed);

  BumpFamily fam;
  fam.params = {R, alpha, K, sep.eta, 0.0};
  detail::BallScanner scanner(g, w);
  const int r = static_cast<int>(sep.sets.size());
  DegreeProfile prof(g);

  double budget = kEasyRayleighConstant * alpha * alpha *
                  (prof.dbar(1.0 / K) + prof.dbar(alpha * alpha / (R * R))) /
                  (R * R);
  for (int i = 0; i < r; ++i) {
    auto f = detail::tent_function(scanner, sep.sets[i], sep.eta, false);
    std::vector<int> supp;
    for (const auto& [v, val] : f) {
      (void)val;
      supp.push_back(v);
    }
    double rq = detail::sparse_rayleigh(g, f);

    // The construction's own chain, with measured quantities.
    double denom_floor = sep.eta * sep.eta *
                         static_cast<double>(sep.sets[i].size());
    double chain = 6.0 * sep.total_area /
                   (static_cast<double>(r) * denom_floor);
    if (rq > chain * (1.0 + 1e-9))
      throw std::logic_error("bump family: Rayleigh chain bound violated");
    if (rq > budget * (1.0 + 1e-9))
      throw std::logic_error("bump family: Rayleigh budget violated");

    fam.functions.push_back(std::move(f));
    fam.supports.push_back(std::move(supp));
    fam.cores.push_back(sep.sets[i]);
    fam.rayleigh.push_back(rq);
  }
  detail::check_disjoint_supports(n, fam.supports);
  return fam;
}

struct DelocalizedStats {
  int partition_retries = 0;
  double shaved_mass = 0.0;    // sum of pi(S-hat) over the retained sample
  double core_mass = 0.0;      // sum of pi(psi_i^{-1}(1)) over the family
  double mass_target = 0.0;    // 1 - delta - pi*(delta)
  double rayleigh_sum = 0.0;   // sum of sqrt(R_G(psi_i)) pi(supp psi_i)
  double rayleigh_budget = 0.0;
};

inline BumpFamily bump_family_delocalized(const Graph& g,
                                          const ConformalWeight& w, double R,
                                          double K, double alpha, double delta,
                                          uint64_t seed,
                                          DelocalizedStats* stats = nullptr) {
  check_weight_matches(g, w);
  const int n = g.n();
  if (!(R > 0.0) || !(alpha >= 1.0) || !(K >= 1.0))
    throw std::invalid_argument("bump family: need R > 0 and alpha, K >= 1");
  if (!(delta > 0.0))
    throw std::invalid_argument("bump family: delta must be positive");
  int ball_max = max_ball_size(g, w, R);
  if (ball_max > K)
    throw std::invalid_argument(
        "bump family: ball-size assumption violated: max |B(x,R)| = " +
        std::to_string(ball_max) + " > K = " + std::to_string(K));

  const double eta = delta * R / (18.0 * alpha);
  const double shave = delta * R / (6.0 * alpha);
  DegreeProfile prof(g);
  auto pi_of = [&](const std::vector<int>& set) {
    double mass = 0.0;
    for (int v : set) mass += prof.pi(v);
    return mass;
  };

  // Retry until the shaved cores carry 1 - delta/3 of the measure.
  detail::BallScanner scanner(g, w);
  const int max_retries = 64;
  Partition best;
  std::vector<std::vector<int>> best_cores;
  double best_mass = -1.0;
  int retries = 0;
  for (int attempt = 0; attempt < max_retries; ++attempt) {
    Partition p = exp_clustering(g, w, R / 4.0,
                                 keyed_u64(seed, derive_stream(0xde10ull), attempt));
    ++retries;
    std::vector<std::vector<int>> cores(p.blocks.size());
    double mass = 0.0;
    for (int x = 0; x < n; ++x) {
      if (scanner.nearest_foreign(x, shave, p.block_of) > shave) {
        cores[p.block_of[x]].push_back(x);
        mass += prof.pi(x);
      }
    }
    if (mass > best_mass) {
      best_mass = mass;
      best_cores = std::move(cores);
      best = std::move(p);
    }
    if (best_mass >= 1.0 - delta / 3.0) break;
  }

  const double mass_target = 1.0 - delta - prof.pi_star(delta);

  // Keep blocks with pi(S-hat) >= pi(S)/2 and max degree <= dbar(delta/K).
  const double degree_cap = prof.dbar(delta / K);
  std::vector<int> kept;  // block indices
  double core_mass = 0.0;
  for (size_t b = 0; b < best_cores.size(); ++b) {
    if (best_cores[b].empty()) continue;
    if (pi_of(best_cores[b]) < 0.5 * pi_of(best.blocks[b])) continue;
    int max_deg = 0;
    for (int v : best.blocks[b]) max_deg = std::max(max_deg, g.degree(v));
    if (static_cast<double>(max_deg) > degree_cap) continue;
    kept.push_back(static_cast<int>(b));
    core_mass += pi_of(best_cores[b]);
  }
  if (core_mass < mass_target - 1e-12)
    throw std::runtime_error(
        "bump family: shaved stationary mass " + std::to_string(core_mass) +
        " fell short of target " + std::to_string(mass_target) + " after " +
        std::to_string(retries) + " partition samples");

  BumpFamily fam;
  fam.params = {R, alpha, K, eta, delta};
  const double m_edges = static_cast<double>(g.m());
  std::vector<char> in_l(n, 0), in_s(n, 0);
  for (int v = 0; v < n; ++v) in_l[v] = w[v] >= eta ? 1 : 0;

  double rayleigh_sum = 0.0;
  for (int b : kept) {
    auto f = detail::tent_function(scanner, best_cores[b], eta, true);
    std::vector<int> supp;
    for (const auto& [v, val] : f) {
      if (val < -1e-15 || val > 1.0 + 1e-15)
        throw std::logic_error("bump family: value outside [0,1]");
      supp.push_back(v);
    }
    // supp(psi) must stay inside the parent block.
    for (int v : supp)
      if (best.block_of[v] != b)
        throw std::logic_error("bump family: support escapes its block");

    double rq = detail::sparse_rayleigh(g, f);
    // Per-set bound from the construction:
    // R_G <= (eta^2 |E(S, V_L)| + dbar(delta/K) area(S)) / (eta^2 pi(S-hat) |E|).
    for (int v : best.blocks[b]) in_s[v] = 1;
    double e_sl = static_cast<double>(detail::edges_touching(g, in_s, in_l));
    double area_s = detail::area_of(w, best.blocks[b]);
    for (int v : best.blocks[b]) in_s[v] = 0;
    double per_set = (eta * eta * e_sl + degree_cap * area_s) /
                     (eta * eta * pi_of(best_cores[b]) * m_edges);
    if (rq > per_set * (1.0 + 1e-9))
      throw std::logic_error("bump family: per-set Rayleigh bound violated");

    rayleigh_sum += std::sqrt(rq) * pi_of(supp);
    fam.functions.push_back(std::move(f));
    fam.supports.push_back(std::move(supp));
    fam.cores.push_back(best_cores[b]);
    fam.rayleigh.push_back(rq);
  }
  detail::check_disjoint_supports(n, fam.supports);

  // Displayed family-level conclusions.
  double l2 = w.l2_norm();
  double budget = kDelocalizedSumConstant * alpha / (delta * R) * l2 *
                  (std::sqrt(prof.dbar(alpha * alpha / (delta * delta * R * R) *
                                       l2 * l2)) +
                   std::sqrt(prof.dbar(delta / K))) /
                  std::sqrt(prof.dbar(1.0));
  if (rayleigh_sum > budget * (1.0 + 1e-9))
    throw std::logic_error("bump family: Rayleigh sum budget violated");
  for (size_t i = 0; i < fam.supports.size(); ++i) {
    if (static_cast<double>(fam.supports[i].size()) > K)
      throw std::logic_error("bump family: support larger than K");
    if (diameter_of_set(g, w, fam.supports[i]) > R / 2.0 + 1e-9)
      throw std::logic_error("bump family: support diameter exceeds R/2");
  }

  if (stats) {
    stats->partition_retries = retries;
    stats->shaved_mass = best_mass;
    stats->core_mass = core_mass;
    stats->mass_target = mass_target;
    stats->rayleigh_sum = rayleigh_sum;
    stats->rayleigh_budget = budget;
  }
  return fam;
}

}  // namespace conformal_lab
