// Random-walk simulation and Markov-type diagnostics.
//
// The standard walk moves to a uniformly random neighbor. The walk
// restricted to a vertex set S replaces every step that would leave S
// with a holding step, so from x it stays put with probability
// |N(x) \ S| / deg(x) and moves to each neighbor inside S with
// probability 1/deg(x); this chain is reversible with stationary measure
// pi_S(x) = deg(x) / deg(S). The Markov-type ratio measures
// E d(f(Z_T), f(Z_0))^p / (T E d(f(Z_0), f(Z_1))^p) for a stationary
// chain, the quantity that a Markov-type-p space bounds by M^p.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <queue>
#include <stdexcept>
#include <string>
#include <vector>

#include "conformal_lab/graph_core.hpp"
#include "conformal_lab/rng.hpp"
#include "conformal_lab/spectral.hpp"

namespace conformal_lab {

enum class StartMode { fixed, uniform, stationary };

struct WalkTrace {
  StartMode start = StartMode::fixed;
  std::vector<int> steps;  // T+1 vertices, consecutive ones adjacent or equal
  uint64_t seed = 0;
};

namespace detail {

// Vose alias table for sampling an index with given nonnegative weights.
class AliasTable {
 public:
  explicit AliasTable(const std::vector<double>& weights) {
    const int n = static_cast<int>(weights.size());
    if (n == 0) throw std::invalid_argument("alias table: empty weights");
    double total = 0.0;
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("alias table: negative weight");
      total += w;
    }
    if (total <= 0.0) throw std::invalid_argument("alias table: zero weights");
    prob_.assign(n, 0.0);
    alias_.assign(n, 0);
    std::vector<double> scaled(n);
    std::vector<int> small, large;
    for (int i = 0; i < n; ++i) {
      scaled[i] = weights[i] * n / total;
      (scaled[i] < 1.0 ? small : large).push_back(i);
    }
    while (!small.empty() && !large.empty()) {
      int s = small.back(), l = large.back();
      small.pop_back();
      prob_[s] = scaled[s];
      alias_[s] = l;
      scaled[l] -= 1.0 - scaled[s];
      if (scaled[l] < 1.0) {
        large.pop_back();
        small.push_back(l);
      }
    }
    for (int l : large) prob_[l] = 1.0;
    for (int s : small) prob_[s] = 1.0;
  }

  int sample(CounterRng& rng) const {
    int i = static_cast<int>(rng.next_below(prob_.size()));
    return rng.next_double() < prob_[i] ? i : alias_[i];
  }

 private:
  std::vector<double> prob_;
  std::vector<int> alias_;
};

}  // namespace detail

// Degree-proportional vertex sampler (the stationary law of the walk).
class StationarySampler {
 public:
  explicit StationarySampler(const Graph& g)
      : table_([&g] {
          std::vector<double> w(g.n());
          for (int v = 0; v < g.n(); ++v) w[v] = g.degree(v);
          return w;
        }()) {}

  int sample(CounterRng& rng) const { return table_.sample(rng); }

 private:
  detail::AliasTable table_;
};

// Standard random walk for T steps from a fixed start.
inline WalkTrace simulate(const Graph& g, int start, long long T,
                          uint64_t seed) {
  if (start < 0 || start >= g.n())
    throw std::invalid_argument("walk: start out of range");
  if (T < 0) throw std::invalid_argument("walk: negative horizon");
  WalkTrace out;
  out.seed = seed;
  out.steps.reserve(static_cast<std::size_t>(T) + 1);
  out.steps.push_back(start);
  CounterRng rng(seed, derive_stream(0x3a1c));
  int x = start;
  for (long long t = 0; t < T; ++t) {
    auto nb = g.neighbors(x);
    if (nb.empty()) break;  // isolated vertex: the walk is stuck
    x = nb[static_cast<std::size_t>(rng.next_below(nb.size()))];
    out.steps.push_back(x);
  }
  return out;
}

// Walk restricted to S: a uniformly chosen neighbor outside S becomes a
// holding step, which realizes exactly the restricted transition law.
inline WalkTrace restricted_simulate(const Graph& g, const std::vector<int>& S,
                                     int start, long long T, uint64_t seed) {
  if (T < 0) throw std::invalid_argument("walk: negative horizon");
  std::vector<char> in_s(g.n(), 0);
  for (int v : S) {
    if (v < 0 || v >= g.n())
      throw std::invalid_argument("walk: set vertex out of range");
    in_s[v] = 1;
  }
  if (start < 0 || start >= g.n() || !in_s[start])
    throw std::invalid_argument("walk: start must lie in the restricted set");
  WalkTrace out;
  out.seed = seed;
  out.steps.reserve(static_cast<std::size_t>(T) + 1);
  out.steps.push_back(start);
  CounterRng rng(seed, derive_stream(0x3a1d));
  int x = start;
  for (long long t = 0; t < T; ++t) {
    auto nb = g.neighbors(x);
    if (!nb.empty()) {
      int y = nb[static_cast<std::size_t>(rng.next_below(nb.size()))];
      if (in_s[y]) x = y;
    }
    out.steps.push_back(x);
  }
  return out;
}

struct SpeedRow {
  double T = 0.0;
  double mean = 0.0;       // mean displacement from the start
  double std_error = 0.0;  // across trials
  int trials = 0;
};

// Mean displacement E[dist(X_0, X_T)] over independent walks, one row per
// horizon. Distances use the graph metric, or dist_omega when a weight is
// supplied. start_ok restricts the admissible starting vertices (uniform
// proposal, e.g. grid interiors); by default starts are stationary.
inline std::vector<SpeedRow> speed_profile(
    const Graph& g, const ConformalWeight* w,
    const std::vector<long long>& T_grid, int trials, uint64_t seed,
    const std::function<bool(int)>& start_ok = nullptr) {
  if (trials < 1) throw std::invalid_argument("speed profile: need trials >= 1");
  if (T_grid.empty()) throw std::invalid_argument("speed profile: no horizons");
  if (w) check_weight_matches(g, *w);
  std::vector<long long> horizons = T_grid;
  std::sort(horizons.begin(), horizons.end());
  if (horizons.front() < 0)
    throw std::invalid_argument("speed profile: negative horizon");
  const long long T_max = horizons.back();

  std::vector<double> sum(horizons.size(), 0.0), sum_sq(horizons.size(), 0.0);
  StationarySampler stat(g);
  CounterRng start_rng(seed, derive_stream(0x57a7));
  for (int trial = 0; trial < trials; ++trial) {
    int x0 = -1;
    if (start_ok) {
      long long guard = 0;
      do {
        x0 = static_cast<int>(start_rng.next_below(g.n()));
        if (++guard > 10000LL * g.n())
          throw std::runtime_error("speed profile: start filter rejected all");
      } while (!start_ok(x0));
    } else {
      x0 = stat.sample(start_rng);
    }
    WalkTrace trace = simulate(
        g, x0, T_max, keyed_u64(seed, derive_stream(0x5bedull), trial));

    // one distance sweep from the start serves every horizon
    std::vector<double> dist;
    if (w) {
      dist = conformal_distance(g, *w, x0);
    } else {
      std::vector<int> d = g.bfs_distances(x0);
      dist.assign(d.begin(), d.end());
    }
    for (size_t i = 0; i < horizons.size(); ++i) {
      std::size_t idx = std::min(static_cast<std::size_t>(horizons[i]),
                                 trace.steps.size() - 1);
      double v = dist[trace.steps[idx]];
      sum[i] += v;
      sum_sq[i] += v * v;
    }
  }

  std::vector<SpeedRow> rows;
  for (size_t i = 0; i < horizons.size(); ++i) {
    SpeedRow row;
    row.T = static_cast<double>(horizons[i]);
    row.trials = trials;
    row.mean = sum[i] / trials;
    double var = sum_sq[i] / trials - row.mean * row.mean;
    row.std_error = trials > 1 ? std::sqrt(std::max(0.0, var) / trials) : 0.0;
    rows.push_back(row);
  }
  return rows;
}

namespace detail {

// One restricted-walk distribution step: mass leaving S is held in place.
inline void restricted_step(const Graph& g, const std::vector<char>& in_s,
                            const std::vector<double>& cur,
                            std::vector<double>& next) {
  next.assign(cur.size(), 0.0);
  for (int x = 0; x < g.n(); ++x) {
    if (cur[x] == 0.0) continue;
    double share = cur[x] / g.degree(x);
    for (int y : g.neighbors(x)) {
      if (in_s[y])
        next[y] += share;
      else
        next[x] += share;
    }
  }
}

}  // namespace detail

// Markov-type ratio E d(f(Z_T), f(Z_0))^p / (T E d(f(Z_0), f(Z_1))^p) for
// the stationary standard walk. dist(a, b) evaluates the metric between
// the embedded images of two vertices. trials <= 0 requests the exact
// kernel (n <= 3000); positive trials run Monte Carlo with an exact
// denominator. S nonempty restricts the chain to S.
inline double markov_type_ratio(const Graph& g,
                                const std::function<double(int, int)>& dist,
                                double p, long long T, int trials,
                                uint64_t seed,
                                const std::vector<int>& S = {}) {
  if (!(p >= 1.0)) throw std::invalid_argument("markov type: need p >= 1");
  if (T < 1) throw std::invalid_argument("markov type: need T >= 1");
  const int n = g.n();
  const bool restricted = !S.empty();
  std::vector<char> in_s(n, restricted ? 0 : 1);
  for (int v : S) {
    if (v < 0 || v >= n)
      throw std::invalid_argument("markov type: set vertex out of range");
    in_s[v] = 1;
  }

  // stationary measure and exact one-step moment
  double deg_total = 0.0;
  for (int v = 0; v < n; ++v)
    if (in_s[v]) deg_total += g.degree(v);
  if (deg_total <= 0.0)
    throw std::invalid_argument("markov type: chain has no edges");
  double denom = 0.0;
  for (int x = 0; x < n; ++x) {
    if (!in_s[x]) continue;
    for (int y : g.neighbors(x))
      if (in_s[y]) denom += std::pow(dist(x, y), p) / deg_total;
  }
  // holding steps contribute zero distance
  if (denom <= 0.0)
    throw std::invalid_argument(
        "markov type: constant embedding (zero one-step moment)");

  double numer = 0.0;
  if (trials <= 0) {
    if (n > 3000)
      throw std::invalid_argument(
          "markov type: exact kernel limited to 3000 vertices");
    std::vector<double> cur(n), next;
    for (int x = 0; x < n; ++x) {
      if (!in_s[x]) continue;
      cur.assign(n, 0.0);
      cur[x] = 1.0;
      for (long long t = 0; t < T; ++t) {
        if (restricted)
          detail::restricted_step(g, in_s, cur, next);
        else
          walk_step(g, cur, next);
        cur.swap(next);
      }
      double pi_x = g.degree(x) / deg_total;
      for (int y = 0; y < n; ++y)
        if (cur[y] > 0.0) numer += pi_x * cur[y] * std::pow(dist(x, y), p);
    }
  } else {
    std::vector<double> weights(n, 0.0);
    for (int v = 0; v < n; ++v)
      if (in_s[v]) weights[v] = g.degree(v);
    detail::AliasTable start(weights);
    std::vector<int> members;
    for (int v = 0; v < n; ++v)
      if (in_s[v]) members.push_back(v);
    CounterRng rng(seed, derive_stream(0x3714));
    for (int trial = 0; trial < trials; ++trial) {
      int x0 = start.sample(rng);
      uint64_t walk_seed = keyed_u64(seed, derive_stream(0x77a1ull), trial);
      WalkTrace trace = restricted
                            ? restricted_simulate(g, members, x0, T, walk_seed)
                            : simulate(g, x0, T, walk_seed);
      numer += std::pow(dist(x0, trace.steps.back()), p) / trials;
    }
  }
  return numer / (static_cast<double>(T) * denom);
}

}  // namespace conformal_lab
