// Random padded partitions of (V, dist_omega): exponential clustering, a
// generic random-radius/random-order clustering, the delta-boosting
// transform, and Monte-Carlo padding profiles.
//
// All constructions run in the conformal metric of the supplied weight; the
// hop-metric instantiation is the constant weight 1. Randomness is drawn
// from counter-mode streams keyed by (seed, role, vertex), so results are
// reproducible regardless of evaluation order.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <queue>
#include <stdexcept>
#include <utility>
#include <vector>

#include "conformal_lab/graph_core.hpp"
#include "conformal_lab/rng.hpp"

namespace conformal_lab {

struct Partition {
  double tau = 0.0;                      // diameter bound per block
  std::vector<int> block_of;             // vertex -> block id
  std::vector<std::vector<int>> blocks;  // sorted vertex lists

  int block_count() const { return static_cast<int>(blocks.size()); }
};

namespace detail {

// Reusable single-source bounded Dijkstra; touched state is reset lazily via
// stamps so repeated small-ball scans stay cheap.
class BallScanner {
 public:
  BallScanner(const Graph& g, const ConformalWeight& w)
      : g_(g), w_(w), dist_(g.n(), 0.0), stamp_(g.n(), 0) {}

  // Appends (vertex, distance) pairs with dist_omega(x, v) <= bound.
  void scan(int x, double bound, std::vector<std::pair<int, double>>& out) {
    out.clear();
    if (bound < 0.0) return;
    ++round_;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    dist_[x] = 0.0;
    stamp_[x] = round_;
    heap.push({0.0, x});
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (stamp_[v] == round_ && d > dist_[v]) continue;
      out.push_back({v, d});
      for (int u : g_.neighbors(v)) {
        double nd = d + w_.edge_length(v, u);
        if (nd > bound) continue;
        if (stamp_[u] != round_ || nd < dist_[u]) {
          stamp_[u] = round_;
          dist_[u] = nd;
          heap.push({nd, u});
        }
      }
    }
  }

  // Multi-source variant: dist_omega(S, v) <= bound for the closest source.
  void scan_set(const std::vector<int>& sources, double bound,
                std::vector<std::pair<int, double>>& out) {
    out.clear();
    if (bound < 0.0 || sources.empty()) return;
    ++round_;
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
    for (int x : sources) {
      if (stamp_[x] == round_) continue;  // tolerate duplicate sources
      dist_[x] = 0.0;
      stamp_[x] = round_;
      heap.push({0.0, x});
    }
    while (!heap.empty()) {
      auto [d, v] = heap.top();
      heap.pop();
      if (d > dist_[v]) continue;
      out.push_back({v, d});
      for (int u : g_.neighbors(v)) {
        double nd = d + w_.edge_length(v, u);
        if (nd > bound) continue;
        if (stamp_[u] != round_ || nd < dist_[u]) {
          stamp_[u] = round_;
          dist_[u] = nd;
          heap.push({nd, u});
        }
      }
    }
  }

  // Distance from x to the nearest vertex outside block_of[x], looking no
  // further than bound; +infinity when the whole bounded ball is internal.
  double nearest_foreign(int x, double bound, const std::vector<int>& block_of) {
    scan(x, bound, scratch_);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& [v, d] : scratch_)
      if (block_of[v] != block_of[x]) best = std::min(best, d);
    return best;
  }

 private:
  const Graph& g_;
  const ConformalWeight& w_;
  std::vector<double> dist_;
  std::vector<int> stamp_;
  int round_ = 0;
  std::vector<std::pair<int, double>> scratch_;
};

inline Partition assemble_partition(int n, double tau,
                                    const std::vector<int>& owner_vertex) {
  // owner_vertex maps each vertex to a representative; ids are assigned in
  // increasing representative order.
  Partition p;
  p.tau = tau;
  p.block_of.assign(n, -1);
  std::vector<int> reps;
  for (int x = 0; x < n; ++x) {
    if (owner_vertex[x] < 0) throw std::logic_error("partition: uncovered vertex");
    reps.push_back(owner_vertex[x]);
  }
  std::sort(reps.begin(), reps.end());
  reps.erase(std::unique(reps.begin(), reps.end()), reps.end());
  std::vector<int> id_of(n, -1);
  for (size_t i = 0; i < reps.size(); ++i) id_of[reps[i]] = static_cast<int>(i);
  p.blocks.assign(reps.size(), {});
  for (int x = 0; x < n; ++x) {
    int id = id_of[owner_vertex[x]];
    p.block_of[x] = id;
    p.blocks[id].push_back(x);
  }
  return p;
}

}  // namespace detail

// Full audit of a partition: exact cover plus ambient-metric diameter bound
// per block, re-derived by Dijkstra. Throws on any violation.
inline void verify_partition(const Graph& g, const ConformalWeight& w,
                             const Partition& p) {
  const int n = g.n();
  if (static_cast<int>(p.block_of.size()) != n)
    throw std::logic_error("partition audit: wrong block_of size");
  std::vector<long long> seen(p.blocks.size(), 0);
  for (int x = 0; x < n; ++x) {
    int b = p.block_of[x];
    if (b < 0 || b >= p.block_count())
      throw std::logic_error("partition audit: block id out of range");
    ++seen[b];
  }
  long long total = 0;
  for (int b = 0; b < p.block_count(); ++b) {
    if (p.blocks[b].empty()) throw std::logic_error("partition audit: empty block");
    if (seen[b] != static_cast<long long>(p.blocks[b].size()))
      throw std::logic_error("partition audit: block list mismatch");
    for (int v : p.blocks[b])
      if (p.block_of[v] != b)
        throw std::logic_error("partition audit: membership mismatch");
    total += static_cast<long long>(p.blocks[b].size());
  }
  if (total != n) throw std::logic_error("partition audit: not a cover");

  detail::BallScanner scanner(g, w);
  std::vector<std::pair<int, double>> reach;
  std::vector<double> dmap(n, std::numeric_limits<double>::infinity());
  const double bound = p.tau + 1e-9;
  for (const auto& block : p.blocks) {
    for (int src : block) {
      scanner.scan(src, bound, reach);
      for (const auto& [v, dv] : reach) dmap[v] = dv;
      for (int other : block)
        if (!(dmap[other] <= p.tau + 1e-9))
          throw std::logic_error("partition audit: block diameter exceeds tau");
      for (const auto& [v, dv] : reach) {
        (void)dv;
        dmap[v] = std::numeric_limits<double>::infinity();
      }
    }
  }
}

// Exponential clustering. Every vertex draws an exponential radius with mean
// R / (3 max(log|B(x,2R)|, 1)) truncated at R, plus an independent uniform
// priority; each vertex then joins the smallest-priority vertex whose
// truncated radius reaches it. Blocks sit inside radius-R balls around their
// representative, so block diameters are at most 2R.
inline Partition exp_clustering(const Graph& g, const ConformalWeight& w,
                                double R, uint64_t seed) {
  if (!(R > 0.0)) throw std::invalid_argument("exp_clustering: R must be positive");
  check_weight_matches(g, w);
  const int n = g.n();
  detail::BallScanner scanner(g, w);
  std::vector<std::pair<int, double>> reach;

  std::vector<double> radius(n), beta(n);
  for (int x = 0; x < n; ++x) {
    scanner.scan(x, 2.0 * R, reach);
    double lg = std::log(static_cast<double>(reach.size()));
    double mean = R / (3.0 * std::max(lg, 1.0));
    CounterRng rng(seed, derive_stream(0xec17ull, static_cast<uint64_t>(x)));
    radius[x] = std::min(rng.next_exponential(mean), R);
    beta[x] = rng.next_double();
  }

  std::vector<int> owner(n, -1);
  std::vector<double> owner_beta(n, std::numeric_limits<double>::infinity());
  for (int y = 0; y < n; ++y) {
    scanner.scan(y, radius[y], reach);
    for (const auto& [x, d] : reach) {
      (void)d;
      if (beta[y] < owner_beta[x] ||
          (beta[y] == owner_beta[x] && (owner[x] < 0 || y < owner[x]))) {
        owner_beta[x] = beta[y];
        owner[x] = y;
      }
    }
  }
  return detail::assemble_partition(n, 2.0 * R, owner);
}

// Random-radius, random-order clustering: one radius uniform in
// [tau/4, tau/2), a random vertex order, and each vertex joins the earliest
// vertex in the order within that radius. A whole-graph shortcut keeps the
// small-diameter case exact: when twice the eccentricity of vertex 0 is at
// most tau, the single block {V} is returned.
inline Partition ckr_partition(const Graph& g, const ConformalWeight& w,
                               double tau, uint64_t seed) {
  if (!(tau > 0.0)) throw std::invalid_argument("ckr_partition: tau must be positive");
  check_weight_matches(g, w);
  const int n = g.n();

  auto from_zero = conformal_distance(g, w, 0);
  double ecc = 0.0;
  for (double d : from_zero) ecc = std::max(ecc, d);
  if (2.0 * ecc <= tau) {
    std::vector<int> owner(n, 0);
    return detail::assemble_partition(n, tau, owner);
  }

  CounterRng rng(seed, derive_stream(0xccb1ull));
  const double u = tau / 4.0 + (tau / 4.0) * rng.next_double();
  auto order = rng.permutation(n);

  detail::BallScanner scanner(g, w);
  std::vector<std::pair<int, double>> reach;
  std::vector<int> owner(n, -1);
  int assigned = 0;
  for (int c : order) {
    if (assigned == n) break;
    scanner.scan(c, u, reach);
    for (const auto& [x, d] : reach) {
      (void)d;
      if (owner[x] < 0) {
        owner[x] = c;
        ++assigned;
      }
    }
  }
  return detail::assemble_partition(n, tau, owner);
}

using PartitionSampler = std::function<Partition(uint64_t)>;

// Padding booster. Draws independent base partitions P_k and uniform
// shave fractions eps_k, keeps the eps_k*tau/alpha-interiors of the blocks
// of P_k restricted to still-uncovered vertices, and stops once everything
// is covered or after ceil(log2 n) + 20 rounds; stragglers become
// singletons. If the base sampler is half-padded at radius tau/alpha, the
// result is (1-4delta)-padded at radius delta*tau/alpha for every delta.
inline Partition pad_boost(const Graph& g, const ConformalWeight& w,
                           const PartitionSampler& sampler, double tau,
                           double alpha, uint64_t seed) {
  if (!(tau > 0.0) || !(alpha > 0.0))
    throw std::invalid_argument("pad_boost: tau and alpha must be positive");
  check_weight_matches(g, w);
  const int n = g.n();
  int k_max = 20;
  for (int t = 1; t < n; t *= 2) ++k_max;

  Partition out;
  out.tau = tau;
  out.block_of.assign(n, -1);
  detail::BallScanner scanner(g, w);
  std::vector<std::pair<int, double>> reach;
  CounterRng eps_rng(seed, derive_stream(0xb0057ull));

  int covered = 0;
  for (int k = 1; k <= k_max && covered < n; ++k) {
    Partition base = sampler(keyed_u64(seed, derive_stream(0xba5eull), k));
    if (static_cast<int>(base.block_of.size()) != n)
      throw std::invalid_argument("pad_boost: base partition size mismatch");
    if (base.tau > tau + 1e-9)
      throw std::invalid_argument("pad_boost: base partition exceeds tau");
    const double lambda = eps_rng.next_double() * tau / alpha;

    for (const auto& block : base.blocks) {
      std::vector<int> kept;
      for (int x : block) {
        if (out.block_of[x] >= 0) continue;
        scanner.scan(x, lambda, reach);
        bool interior = true;
        for (const auto& [v, d] : reach) {
          (void)d;
          if (base.block_of[v] != base.block_of[x]) {
            interior = false;
            break;
          }
        }
        if (interior) kept.push_back(x);
      }
      if (kept.empty()) continue;
      int id = out.block_count();
      for (int x : kept) out.block_of[x] = id;
      covered += static_cast<int>(kept.size());
      out.blocks.push_back(std::move(kept));
    }
  }

  for (int x = 0; x < n; ++x) {
    if (out.block_of[x] >= 0) continue;
    out.block_of[x] = out.block_count();
    out.blocks.push_back({x});
  }
  return out;
}

struct PaddingProfile {
  std::vector<double> delta_grid;
  std::vector<double> empirical_pad;  // fraction of (trial, vertex) successes
  std::vector<double> std_error;      // over per-trial success fractions
  long long trials = 0;
  double tau = 0.0;
  double alpha = 0.0;
};

// Monte-Carlo padding estimate: for each delta, the fraction of (trial, x)
// pairs with B(x, delta*tau/alpha) inside the block of x. One bounded
// Dijkstra per (trial, x) serves the whole grid via the distance to the
// nearest foreign vertex.
inline PaddingProfile padding_profile(const Graph& g, const ConformalWeight& w,
                                      const PartitionSampler& sampler,
                                      double tau, double alpha,
                                      const std::vector<double>& delta_grid,
                                      long long trials, uint64_t seed) {
  if (trials < 1) throw std::invalid_argument("padding_profile: trials must be >= 1");
  if (delta_grid.empty())
    throw std::invalid_argument("padding_profile: empty delta grid");
  for (double d : delta_grid)
    if (!(d >= 0.0)) throw std::invalid_argument("padding_profile: negative delta");
  check_weight_matches(g, w);

  const int n = g.n();
  const size_t k = delta_grid.size();
  double r_max = 0.0;
  std::vector<double> radii(k);
  for (size_t i = 0; i < k; ++i) {
    radii[i] = delta_grid[i] * tau / alpha;
    r_max = std::max(r_max, radii[i]);
  }

  detail::BallScanner scanner(g, w);
  std::vector<double> mean(k, 0.0), mean_sq(k, 0.0);
  for (long long t = 0; t < trials; ++t) {
    Partition p = sampler(keyed_u64(seed, derive_stream(0x9c0ffull), static_cast<uint64_t>(t)));
    if (static_cast<int>(p.block_of.size()) != n)
      throw std::invalid_argument("padding_profile: partition size mismatch");
    std::vector<long long> good(k, 0);
    for (int x = 0; x < n; ++x) {
      double foreign = scanner.nearest_foreign(x, r_max, p.block_of);
      for (size_t i = 0; i < k; ++i)
        if (foreign > radii[i]) ++good[i];
    }
    for (size_t i = 0; i < k; ++i) {
      double frac = static_cast<double>(good[i]) / n;
      mean[i] += frac;
      mean_sq[i] += frac * frac;
    }
  }

  PaddingProfile out;
  out.delta_grid = delta_grid;
  out.trials = trials;
  out.tau = tau;
  out.alpha = alpha;
  out.empirical_pad.resize(k);
  out.std_error.resize(k);
  for (size_t i = 0; i < k; ++i) {
    double m = mean[i] / trials;
    out.empirical_pad[i] = m;
    double var = std::max(0.0, mean_sq[i] / trials - m * m);
    out.std_error[i] = trials > 1 ? std::sqrt(var / (trials - 1)) : 0.0;
  }
  return out;
}

}  // namespace conformal_lab
