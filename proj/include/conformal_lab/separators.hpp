// Annulus vertex separators, covering separators, barrier sets, and the
// conformal metrics they induce, plus the subdiffusivity experiment.
//
// kappa(x; r, r') is the size of a smallest vertex set U inside the
// annulus B(x,r') \ B(x,r) whose removal disconnects x from everything
// outside B(x,r'). It is computed exactly by unit-capacity max-flow on
// the vertex-split annulus with B(x,r) contracted to a source and the
// exterior contracted to a sink. q(x; r, r') = sum over the cut found of
// 1/|B(y,r)|; the definition that maximizes this sum over all subsets of
// size kappa upper-bounds the reported value, and the barrier estimate
// below only needs the sum on the cut actually used.
//
// A barrier W is built from per-vertex separators U_x and i.i.d. uniform
// priorities beta: U_x keeps only the vertices v whose r-ball contains no
// priority smaller than beta_x. Every component of G - W then has
// diameter at most 2r' (asserted), and the expected fraction |W|/n is at
// most the mean of q over the roots (checked statistically).

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <queue>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "conformal_lab/graph_core.hpp"
#include "conformal_lab/rng.hpp"
#include "conformal_lab/walks.hpp"

namespace conformal_lab {

struct SeparatorResult {
  int center = -1;
  int r = 0;
  int r_prime = 0;
  std::vector<int> cut;  // ascending vertex ids, inside the open annulus
  int kappa = 0;
  double q = 0.0;  // sum of 1/|B(y,r)| over the cut found
};

namespace detail {

// Small max-flow network with integer capacities (Edmonds-Karp). Flows
// here are vertex-connectivity numbers, so very few augmentations occur.
class FlowNetwork {
 public:
  explicit FlowNetwork(int nodes) : head_(nodes) {}

  void add_edge(int a, int b, int cap) {
    head_[a].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({b, cap});
    head_[b].push_back(static_cast<int>(arcs_.size()));
    arcs_.push_back({a, 0});
  }

  int max_flow(int s, int t) {
    int total = 0;
    std::vector<int> pred_arc(head_.size());
    for (;;) {
      std::fill(pred_arc.begin(), pred_arc.end(), -1);
      std::queue<int> bfs;
      bfs.push(s);
      pred_arc[s] = -2;
      while (!bfs.empty() && pred_arc[t] == -1) {
        int u = bfs.front();
        bfs.pop();
        for (int id : head_[u]) {
          const Arc& a = arcs_[id];
          if (a.cap > 0 && pred_arc[a.to] == -1) {
            pred_arc[a.to] = id;
            bfs.push(a.to);
          }
        }
      }
      if (pred_arc[t] == -1) return total;
      int push = std::numeric_limits<int>::max();
      for (int v = t; v != s;) {
        const Arc& a = arcs_[pred_arc[v]];
        push = std::min(push, a.cap);
        v = arcs_[pred_arc[v] ^ 1].to;
      }
      for (int v = t; v != s;) {
        arcs_[pred_arc[v]].cap -= push;
        arcs_[pred_arc[v] ^ 1].cap += push;
        v = arcs_[pred_arc[v] ^ 1].to;
      }
      total += push;
    }
  }

  // residual reachability from s after max_flow
  std::vector<char> source_side(int s) const {
    std::vector<char> seen(head_.size(), 0);
    std::queue<int> bfs;
    bfs.push(s);
    seen[s] = 1;
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      for (int id : head_[u]) {
        const Arc& a = arcs_[id];
        if (a.cap > 0 && !seen[a.to]) {
          seen[a.to] = 1;
          bfs.push(a.to);
        }
      }
    }
    return seen;
  }

 private:
  struct Arc {
    int to;
    int cap;
  };
  std::vector<std::vector<int>> head_;
  std::vector<Arc> arcs_;
};

// BFS from x avoiding a removed set; returns reached flags.
inline std::vector<char> reach_avoiding(const Graph& g, int x,
                                        const std::vector<char>& removed) {
  std::vector<char> seen(g.n(), 0);
  if (removed[x]) return seen;
  std::queue<int> bfs;
  bfs.push(x);
  seen[x] = 1;
  while (!bfs.empty()) {
    int u = bfs.front();
    bfs.pop();
    for (int v : g.neighbors(u))
      if (!seen[v] && !removed[v]) {
        seen[v] = 1;
        bfs.push(v);
      }
  }
  return seen;
}

inline double log_log_slope(const std::vector<double>& xs,
                            const std::vector<double>& ys) {
  double mx = 0.0, my = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= xs.size();
  my /= xs.size();
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (std::log(xs[i]) - mx) * (std::log(ys[i]) - my);
    den += (std::log(xs[i]) - mx) * (std::log(xs[i]) - mx);
  }
  if (den == 0.0) throw std::invalid_argument("slope fit: single abscissa");
  return num / den;
}

}  // namespace detail

// Exact minimum vertex cut inside the annulus B(x,r') \ B(x,r)
// separating x from V \ B(x,r'). Throws when the exterior is empty.
inline SeparatorResult min_vertex_cut_annulus(const Graph& g, int x, int r,
                                              int r_prime) {
  if (x < 0 || x >= g.n())
    throw std::invalid_argument("separator: center out of range");
  if (!(0 < r && r < r_prime))
    throw std::invalid_argument("separator: need 0 < r < r'");
  std::vector<int> dist = g.bfs_distances(x);

  std::vector<int> annulus;
  bool has_exterior = false;
  for (int v = 0; v < g.n(); ++v) {
    if (dist[v] > r_prime)
      has_exterior = true;
    else if (dist[v] > r)
      annulus.push_back(v);
  }
  if (!has_exterior)
    throw std::invalid_argument("separator: B(x,r') covers the whole graph");

  std::vector<int> index(g.n(), -1);
  for (std::size_t i = 0; i < annulus.size(); ++i) index[annulus[i]] = static_cast<int>(i);

  const int A = static_cast<int>(annulus.size());
  const int src = 2 * A, snk = 2 * A + 1;
  const int inf = 1 << 28;
  detail::FlowNetwork net(2 * A + 2);
  for (int i = 0; i < A; ++i) net.add_edge(2 * i, 2 * i + 1, 1);
  for (int i = 0; i < A; ++i) {
    int a = annulus[i];
    for (int w : g.neighbors(a)) {
      if (dist[w] <= r)
        net.add_edge(src, 2 * i, inf);
      else if (index[w] >= 0)
        net.add_edge(2 * i + 1, 2 * index[w], inf);
      else
        net.add_edge(2 * i + 1, snk, inf);
    }
  }

  SeparatorResult out;
  out.center = x;
  out.r = r;
  out.r_prime = r_prime;
  out.kappa = net.max_flow(src, snk);
  std::vector<char> side = net.source_side(src);
  for (int i = 0; i < A; ++i)
    if (side[2 * i] && !side[2 * i + 1]) out.cut.push_back(annulus[i]);
  if (static_cast<int>(out.cut.size()) != out.kappa)
    throw std::logic_error("separator: cut size disagrees with flow value");

  // verify separation by reachability after removal
  std::vector<char> removed(g.n(), 0);
  for (int v : out.cut) removed[v] = 1;
  std::vector<char> seen = detail::reach_avoiding(g, x, removed);
  for (int v = 0; v < g.n(); ++v)
    if (seen[v] && dist[v] > r_prime)
      throw std::logic_error("separator: cut fails to separate");

  for (int y : out.cut)
    out.q += 1.0 / static_cast<double>(g.graph_ball(y, r).size());
  return out;
}

struct CoveringSeparator {
  int center = -1;
  int tau = 0;
  std::vector<int> W;  // inside B(x,6tau) \ B(x,tau); empty when nothing to cut
  int lambda = 0;      // greedy tau-net size of B(x,4tau)
  int bound = 0;       // (lambda + 1)(2 tau + 1)
};

// Separator between B(x,tau) and V \ B(x,6tau) for planar-family graphs,
// together with the covering-number budget it must respect. The cut is
// the exact annulus minimum cut, so it can only undershoot the budget;
// exceeding it means the input was not from a planar family.
inline CoveringSeparator bp_covering_separator(const Graph& g, int x,
                                               int tau) {
  if (x < 0 || x >= g.n())
    throw std::invalid_argument("covering separator: center out of range");
  if (tau < 1) throw std::invalid_argument("covering separator: tau >= 1");
  CoveringSeparator out;
  out.center = x;
  out.tau = tau;

  std::vector<int> dist = g.bfs_distances(x);
  bool exterior = false;
  for (int v = 0; v < g.n() && !exterior; ++v)
    if (dist[v] > 6 * tau) exterior = true;
  if (exterior) out.W = min_vertex_cut_annulus(g, x, tau, 6 * tau).cut;

  // greedy tau-net of B(x,4tau), scanned inside-out
  std::vector<int> ball = g.graph_ball(x, 4 * tau);
  std::stable_sort(ball.begin(), ball.end(),
                   [&dist](int a, int b) { return dist[a] < dist[b]; });
  std::vector<char> covered(g.n(), 0);
  for (int v : ball) {
    if (covered[v]) continue;
    ++out.lambda;
    for (int u : g.graph_ball(v, tau)) covered[u] = 1;
  }
  out.bound = (out.lambda + 1) * (2 * tau + 1);
  if (static_cast<int>(out.W.size()) > out.bound)
    throw std::logic_error(
        "covering separator: planar budget exceeded (non-planar input?)");
  return out;
}

struct BarrierSet {
  int r = 0;
  int r_prime = 0;
  uint64_t seed = 0;
  std::vector<int> W;  // ascending vertex ids
  // certified upper bound on the dist_G-diameter of each component of
  // G[V \ W]
  std::vector<int> component_diameter;
  double fraction = 0.0;  // |W| / n
};

// Supplies the per-root separator U_x; must return a subset of the
// annulus of x that separates x from the exterior, or empty when
// B(x,r') covers the whole graph.
using SeparatorProvider = std::function<std::vector<int>(int)>;

// Default provider: exact annulus minimum cuts, cached per root so that
// repeated barrier draws reuse them. The graph must outlive the provider.
inline SeparatorProvider annulus_cut_provider(const Graph& g, int r,
                                              int r_prime) {
  auto cache = std::make_shared<std::unordered_map<int, std::vector<int>>>();
  return [&g, r, r_prime, cache](int x) {
    auto it = cache->find(x);
    if (it != cache->end()) return it->second;
    std::vector<int> dist = g.bfs_distances(x);
    bool exterior = false;
    for (int v = 0; v < g.n() && !exterior; ++v)
      if (dist[v] > r_prime) exterior = true;
    std::vector<int> cut;
    if (exterior) cut = min_vertex_cut_annulus(g, x, r, r_prime).cut;
    (*cache)[x] = cut;
    return cut;
  };
}

// Cheap provider: the smallest BFS sphere {v : dist(x,v) = s} with s in
// (r, r']. Distance levels cut every outward path, so this is always a
// valid separator, just not a minimum one; barriers built from it keep
// both the diameter and the frequency properties (the frequency bound is
// then measured against q summed over these spheres). One BFS per root
// makes it usable at scales where max-flow would be too slow.
inline SeparatorProvider sphere_cut_provider(const Graph& g, int r,
                                             int r_prime) {
  if (!(0 < r && r < r_prime))
    throw std::invalid_argument("separator: need 0 < r < r'");
  return [&g, r, r_prime](int x) {
    std::vector<int> dist = g.bfs_distances(x);
    bool exterior = false;
    for (int v = 0; v < g.n() && !exterior; ++v)
      if (dist[v] > r_prime) exterior = true;
    if (!exterior) return std::vector<int>{};
    std::vector<std::vector<int>> levels(r_prime - r);
    for (int v = 0; v < g.n(); ++v)
      if (dist[v] > r && dist[v] <= r_prime)
        levels[dist[v] - r - 1].push_back(v);
    std::size_t best = 0;
    for (std::size_t s = 1; s < levels.size(); ++s)
      if (!levels[s].empty() &&
          (levels[best].empty() || levels[s].size() < levels[best].size()))
        best = s;
    return levels[best];
  };
}

// Barrier from per-root separators and i.i.d. uniform priorities.
// U_x keeps vertex v only when no priority within distance r of v beats
// beta_x; W is the union over roots. Component diameters of G - W are
// certified against the 2r' bound (a violation indicates a provider
// returning non-separators or a priority tie, and throws).
inline BarrierSet barrier(const Graph& g, int r, int r_prime,
                          const SeparatorProvider& provider, uint64_t seed) {
  if (!(0 < r && r < r_prime))
    throw std::invalid_argument("barrier: need 0 < r < r'");
  const int n = g.n();
  BarrierSet out;
  out.r = r;
  out.r_prime = r_prime;
  out.seed = seed;

  std::vector<double> beta(n);
  CounterRng rng(seed, derive_stream(0xbead));
  for (int v = 0; v < n; ++v) beta[v] = rng.next_double();

  // m[v] = min of beta over the closed r-ball around v, by r rounds of
  // neighborhood minima
  std::vector<double> m = beta, prev;
  for (int round = 0; round < r; ++round) {
    prev = m;
    for (int v = 0; v < n; ++v)
      for (int u : g.neighbors(v)) m[v] = std::min(m[v], prev[u]);
  }

  std::vector<char> in_w(n, 0);
  for (int x = 0; x < n; ++x) {
    double bx = beta[x];
    for (int v : provider(x))
      if (m[v] >= bx) in_w[v] = 1;
  }
  for (int v = 0; v < n; ++v)
    if (in_w[v]) out.W.push_back(v);
  out.fraction = static_cast<double>(out.W.size()) / n;

  // components of G - W with certified diameter bounds: if the first
  // vertex sees everything within r', the diameter is at most twice
  // that; otherwise measure exactly
  std::vector<int> comp(n, -1);
  auto comp_dist = [&](int source, const std::vector<int>& members,
                       std::vector<int>& dist_buf) {
    for (int v : members) dist_buf[v] = -1;
    std::queue<int> bfs;
    bfs.push(source);
    dist_buf[source] = 0;
    int ecc = 0;
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      for (int v : g.neighbors(u))
        if (!in_w[v] && dist_buf[v] == -1 && comp[v] == comp[source]) {
          dist_buf[v] = dist_buf[u] + 1;
          ecc = std::max(ecc, dist_buf[v]);
          bfs.push(v);
        }
    }
    return ecc;
  };

  int n_comp = 0;
  for (int v0 = 0; v0 < n; ++v0) {
    if (in_w[v0] || comp[v0] >= 0) continue;
    int id = n_comp++;
    std::vector<int> members;
    std::queue<int> bfs;
    bfs.push(v0);
    comp[v0] = id;
    while (!bfs.empty()) {
      int u = bfs.front();
      bfs.pop();
      members.push_back(u);
      for (int v : g.neighbors(u))
        if (!in_w[v] && comp[v] == -1) {
          comp[v] = id;
          bfs.push(v);
        }
    }
    std::vector<int> dist_buf(n, -1);
    int ecc0 = comp_dist(v0, members, dist_buf);
    int bound;
    if (ecc0 <= r_prime) {
      bound = 2 * ecc0;
    } else {
      bound = 0;
      for (int s : members) bound = std::max(bound, comp_dist(s, members, dist_buf));
    }
    if (bound > 2 * r_prime)
      throw std::logic_error("barrier: component exceeds the 2r' diameter");
    out.component_diameter.push_back(bound);
  }
  return out;
}

// Conformal weight from barriers at dyadic scales: each nonempty W_j
// contributes the indicator scaled by 1/sqrt(p_j) with the empirical
// frequency p_j = max(|W_j|/n, 1/n), and scales combine as
// sqrt((6/pi^2) sum_j w_j^2 / j^2). Scales with empty barriers are
// skipped; all empty is an error.
inline ConformalWeight barrier_metric(const Graph& g,
                                      const std::vector<BarrierSet>& barriers,
                                      const std::vector<int>& js) {
  if (barriers.size() != js.size())
    throw std::invalid_argument("barrier metric: scale list mismatch");
  const int n = g.n();
  std::vector<double> acc(n, 0.0);
  bool any = false;
  for (std::size_t i = 0; i < barriers.size(); ++i) {
    if (js[i] < 1) throw std::invalid_argument("barrier metric: j >= 1");
    const BarrierSet& b = barriers[i];
    if (b.W.empty()) continue;
    any = true;
    double p = std::max(static_cast<double>(b.W.size()) / n, 1.0 / n);
    double term = 1.0 / (p * js[i] * static_cast<double>(js[i]));
    for (int v : b.W) {
      if (v < 0 || v >= n)
        throw std::invalid_argument("barrier metric: vertex out of range");
      acc[v] += term;
    }
  }
  if (!any) throw std::invalid_argument("barrier metric: all barriers empty");
  std::vector<double> vals(n);
  const double pref = 6.0 / (M_PI * M_PI);
  for (int v = 0; v < n; ++v) vals[v] = std::sqrt(pref * acc[v]);
  return ConformalWeight(std::move(vals));
}

struct CrossingCheck {
  int pairs = 0;           // far pairs examined
  double threshold = 0.0;  // 1/sqrt(p_j)
  double min_distance = std::numeric_limits<double>::infinity();
};

// Certifies the crossing bound of a single barrier scale: endpoints
// outside W at graph distance > 2r' have single-scale conformal distance
// at least 1/sqrt(p_j), because every connecting path passes through W
// at an interior vertex. Pairs are sampled uniformly among admissible
// ones; a violation throws.
inline CrossingCheck barrier_crossing_check(const Graph& g,
                                            const BarrierSet& b, int pairs,
                                            uint64_t seed) {
  if (pairs < 1) throw std::invalid_argument("crossing check: pairs >= 1");
  if (b.W.empty()) throw std::invalid_argument("crossing check: empty barrier");
  const int n = g.n();
  std::vector<char> in_w(n, 0);
  for (int v : b.W) in_w[v] = 1;
  double p = std::max(static_cast<double>(b.W.size()) / n, 1.0 / n);
  CrossingCheck out;
  out.threshold = 1.0 / std::sqrt(p);

  std::vector<double> vals(n, 0.0);
  for (int v : b.W) vals[v] = out.threshold;
  ConformalWeight wj{vals};

  CounterRng rng(seed, derive_stream(0xc805));
  long long attempts = 0;
  while (out.pairs < pairs) {
    if (++attempts > 1000LL * pairs + 1000)
      throw std::runtime_error("crossing check: no far pairs found");
    int u = static_cast<int>(rng.next_below(n));
    if (in_w[u]) continue;
    std::vector<int> dist = g.bfs_distances(u);
    std::vector<int> far;
    for (int v = 0; v < n; ++v)
      if (dist[v] > 2 * b.r_prime && !in_w[v]) far.push_back(v);
    if (far.empty()) continue;
    int v = far[static_cast<std::size_t>(rng.next_below(far.size()))];
    double dw = conformal_distance(g, wj, u)[v];
    out.min_distance = std::min(out.min_distance, dw);
    if (dw + 1e-12 < out.threshold)
      throw std::logic_error("crossing check: conformal distance below bound");
    ++out.pairs;
  }
  return out;
}

struct SubdiffusivityReport {
  double growth_exponent = 0.0;     // d from |B(x,r)| ~ r^d
  double separator_exponent = 0.0;  // k from kappa(x; r, 6r) ~ r^{k-1}
  double speed_bound = 0.0;         // 1/(d - k + 1), the subdiffusive ceiling
  double speed_exponent = 0.0;      // fitted from displacement rows
  std::vector<SpeedRow> displacement;            // graph-metric rows
  std::vector<double> conformal_second_moment;   // E[dist_w(X_0,X_T)^2]
  std::vector<double> conformal_ratio;           // ... / (T (log T)^2)
  long long discarded_trials = 0;  // walks that left the interior region
  int roots_used = 0;
};

// Measures the growth and separator exponents of a graph family, runs
// walks from uniform starts in the interior region, and reports
// displacement against the subdiffusive ceiling T^{1/(d-k+1)}; with a
// weight it also reports the conformal second moment against the
// T (log T)^2 envelope. A walk that leaves the stay region (the
// complement of the boundary collar; defaults to the whole graph) has
// its trial discarded and counted.
inline SubdiffusivityReport subdiffusivity_experiment(
    const Graph& g, const std::vector<int>& radii,
    const std::vector<long long>& T_grid, int trials, uint64_t seed,
    const std::function<bool(int)>& interior = nullptr,
    const ConformalWeight* w = nullptr,
    const std::function<bool(int)>& stay = nullptr) {
  if (radii.size() < 2)
    throw std::invalid_argument("subdiffusivity: need at least two radii");
  for (std::size_t i = 0; i < radii.size(); ++i)
    if (radii[i] < 1 || (i > 0 && radii[i] <= radii[i - 1]))
      throw std::invalid_argument("subdiffusivity: radii must increase from 1");
  if (T_grid.empty())
    throw std::invalid_argument("subdiffusivity: no horizons");
  if (trials < 2) throw std::invalid_argument("subdiffusivity: trials >= 2");
  if (w) check_weight_matches(g, *w);
  const int n = g.n();

  std::vector<int> inside;
  for (int v = 0; v < n; ++v)
    if (!interior || interior(v)) inside.push_back(v);
  if (inside.empty())
    throw std::invalid_argument("subdiffusivity: interior region is empty");

  SubdiffusivityReport rep;
  CounterRng rng(seed, derive_stream(0x5bd1));

  // exponent fits on a fixed sample of interior roots
  const int fit_roots = std::min<int>(12, static_cast<int>(inside.size()));
  std::vector<int> roots;
  {
    std::vector<int> pool = inside;
    for (int i = 0; i < fit_roots; ++i) {
      std::size_t j = i + static_cast<std::size_t>(
                              rng.next_below(pool.size() - i));
      std::swap(pool[i], pool[j]);
      roots.push_back(pool[i]);
    }
  }
  rep.roots_used = fit_roots;

  std::vector<double> rs, mean_ball, kappa_rs, mean_kappa;
  for (int r : radii) {
    double ball_acc = 0.0, kappa_acc = 0.0;
    int kappa_roots = 0;
    for (int x : roots) {
      std::vector<int> dist = g.bfs_distances(x);
      long long ball = 0;
      bool exterior = false;
      for (int v = 0; v < n; ++v) {
        if (dist[v] <= r) ++ball;
        if (dist[v] > 6 * r) exterior = true;
      }
      ball_acc += static_cast<double>(ball);
      if (exterior) {
        kappa_acc += min_vertex_cut_annulus(g, x, r, 6 * r).kappa;
        ++kappa_roots;
      }
    }
    rs.push_back(r);
    mean_ball.push_back(ball_acc / fit_roots);
    if (kappa_roots > 0) {
      kappa_rs.push_back(r);
      mean_kappa.push_back(kappa_acc / kappa_roots);
    }
  }
  rep.growth_exponent = detail::log_log_slope(rs, mean_ball);
  if (kappa_rs.size() < 2)
    throw std::runtime_error(
        "subdiffusivity: separator fit needs an exterior at two radii");
  rep.separator_exponent = 1.0 + detail::log_log_slope(kappa_rs, mean_kappa);
  double denom_exp = rep.growth_exponent - rep.separator_exponent + 1.0;
  rep.speed_bound = denom_exp > 0.0
                        ? 1.0 / denom_exp
                        : std::numeric_limits<double>::infinity();

  // walks from uniform interior starts; any trial that leaves the stay
  // region is discarded and counted
  std::vector<long long> horizons = T_grid;
  std::sort(horizons.begin(), horizons.end());
  if (horizons.front() < 1)
    throw std::invalid_argument("subdiffusivity: horizons must be >= 1");
  const long long T_max = horizons.back();
  const std::size_t H = horizons.size();
  std::vector<double> sum(H, 0.0), sum_sq(H, 0.0), sum_w2(H, 0.0);
  int kept = 0;
  for (int trial = 0; trial < trials; ++trial) {
    int x0 = inside[static_cast<std::size_t>(rng.next_below(inside.size()))];
    WalkTrace tr =
        simulate(g, x0, T_max, keyed_u64(seed, derive_stream(0x5bd2), trial));
    bool escaped = false;
    if (stay) {
      for (int v : tr.steps)
        if (!stay(v)) {
          escaped = true;
          break;
        }
    }
    if (escaped) {
      ++rep.discarded_trials;
      continue;
    }
    ++kept;
    std::vector<int> dist = g.bfs_distances(x0);
    std::vector<double> wdist;
    if (w) wdist = conformal_distance(g, *w, x0);
    for (std::size_t i = 0; i < H; ++i) {
      std::size_t idx =
          std::min(static_cast<std::size_t>(horizons[i]), tr.steps.size() - 1);
      double dv = dist[tr.steps[idx]];
      sum[i] += dv;
      sum_sq[i] += dv * dv;
      if (w) sum_w2[i] += wdist[tr.steps[idx]] * wdist[tr.steps[idx]];
    }
  }
  if (kept < 2)
    throw std::runtime_error("subdiffusivity: nearly all trials escaped");

  std::vector<double> ts, means;
  for (std::size_t i = 0; i < H; ++i) {
    SpeedRow row;
    row.T = static_cast<double>(horizons[i]);
    row.trials = kept;
    row.mean = sum[i] / kept;
    double var = sum_sq[i] / kept - row.mean * row.mean;
    row.std_error = std::sqrt(std::max(0.0, var) / kept);
    rep.displacement.push_back(row);
    ts.push_back(row.T);
    means.push_back(row.mean);
    if (w) {
      double m2 = sum_w2[i] / kept;
      rep.conformal_second_moment.push_back(m2);
      double lg = std::log(row.T);
      rep.conformal_ratio.push_back(lg > 0.0 ? m2 / (row.T * lg * lg)
                                             : std::numeric_limits<double>::infinity());
    }
  }
  rep.speed_exponent = detail::log_log_slope(ts, means);
  return rep;
}

}  // namespace conformal_lab
