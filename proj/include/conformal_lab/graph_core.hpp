#pragma once

// Core objects: immutable undirected graphs, vertex weights ("conformal
// metrics"), the induced shortest-path distance and balls/areas, degree
// statistics, and the finite mass-transport identity used as a test oracle.
//
// Conventions, fixed once and used everywhere:
//   * edge length under a weight w is (w(u) + w(v)) / 2;
//   * balls are closed: B_w(x,R) = { y : dist_w(x,y) <= R };
//   * area_w(x,R) is the sum of w(y)^2 over the closed ball;
//   * dbar(eps) averages the ceil(eps*n) largest degrees (conservative,
//     larger-set rounding); pi_star(beta) sums the floor(beta*n) largest
//     stationary masses.  With mixed rounding the textbook inequality
//     pi_star(b) <= b*dbar(b)/dbar(1) holds exactly when b*n is an integer;
//     tests pin it on that grid.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <queue>
#include <span>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace conformal_lab {

class Graph {
 public:
  // Builds a validated graph: simple (no loops or parallel edges),
  // undirected, connected.  Edge endpoints may come in any order.
  static Graph from_edges(int n, std::vector<std::pair<int, int>> edge_list) {
    if (n <= 0) throw std::invalid_argument("graph: vertex count must be positive");
    for (auto& [u, v] : edge_list) {
      if (u < 0 || u >= n || v < 0 || v >= n)
        throw std::invalid_argument("graph: edge endpoint out of range");
      if (u == v) throw std::invalid_argument("graph: loops are not allowed");
      if (u > v) std::swap(u, v);
    }
    std::sort(edge_list.begin(), edge_list.end());
    for (std::size_t i = 1; i < edge_list.size(); ++i)
      if (edge_list[i] == edge_list[i - 1])
        throw std::invalid_argument("graph: parallel edges are not allowed");

    Graph g;
    g.n_ = n;
    g.edges_ = std::move(edge_list);
    g.offsets_.assign(static_cast<std::size_t>(n) + 1, 0);
    for (auto [u, v] : g.edges_) {
      ++g.offsets_[static_cast<std::size_t>(u) + 1];
      ++g.offsets_[static_cast<std::size_t>(v) + 1];
    }
    for (std::size_t i = 1; i < g.offsets_.size(); ++i)
      g.offsets_[i] += g.offsets_[i - 1];
    g.adj_.resize(static_cast<std::size_t>(g.offsets_[n]));
    std::vector<std::int64_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
    for (auto [u, v] : g.edges_) {
      g.adj_[static_cast<std::size_t>(cursor[u]++)] = v;
      g.adj_[static_cast<std::size_t>(cursor[v]++)] = u;
    }
    for (int v = 0; v < n; ++v) {
      auto b = g.adj_.begin() + g.offsets_[v];
      auto e = g.adj_.begin() + g.offsets_[v + 1];
      std::sort(b, e);
    }

    // Connectivity.
    std::vector<char> seen(static_cast<std::size_t>(n), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
      int x = stack.back();
      stack.pop_back();
      for (int y : g.neighbors(x))
        if (!seen[y]) {
          seen[y] = 1;
          ++count;
          stack.push_back(y);
        }
    }
    if (count != n) throw std::invalid_argument("graph: input is disconnected");
    return g;
  }

  int n() const { return n_; }
  std::size_t m() const { return edges_.size(); }

  std::span<const int> neighbors(int v) const {
    check_vertex(v);
    return {adj_.data() + offsets_[v],
            static_cast<std::size_t>(offsets_[v + 1] - offsets_[v])};
  }

  int degree(int v) const {
    check_vertex(v);
    return static_cast<int>(offsets_[v + 1] - offsets_[v]);
  }

  int max_degree() const {
    int d = 0;
    for (int v = 0; v < n_; ++v) d = std::max(d, degree(v));
    return d;
  }

  // Edges as sorted (u,v) pairs with u < v.
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  // Hop distances from a source (the graph is connected, so all finite).
  std::vector<int> bfs_distances(int source) const {
    check_vertex(source);
    std::vector<int> dist(static_cast<std::size_t>(n_), -1);
    std::vector<int> frontier{source};
    dist[source] = 0;
    int level = 0;
    while (!frontier.empty()) {
      std::vector<int> next;
      ++level;
      for (int x : frontier)
        for (int y : neighbors(x))
          if (dist[y] < 0) {
            dist[y] = level;
            next.push_back(y);
          }
      frontier = std::move(next);
    }
    return dist;
  }

  // Closed hop ball, sorted.
  std::vector<int> graph_ball(int x, int r) const {
    check_vertex(x);
    if (r < 0) throw std::invalid_argument("graph_ball: radius must be nonnegative");
    std::vector<int> dist(static_cast<std::size_t>(n_), -1);
    std::vector<int> out{x}, frontier{x};
    dist[x] = 0;
    for (int level = 1; level <= r && !frontier.empty(); ++level) {
      std::vector<int> next;
      for (int u : frontier)
        for (int y : neighbors(u))
          if (dist[y] < 0) {
            dist[y] = level;
            next.push_back(y);
            out.push_back(y);
          }
      frontier = std::move(next);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  void check_vertex(int v) const {
    if (v < 0 || v >= n_) throw std::out_of_range("graph: vertex index out of range");
  }

  int n_ = 0;
  std::vector<std::int64_t> offsets_;
  std::vector<int> adj_;
  std::vector<std::pair<int, int>> edges_;
};

// Nonnegative vertex weights with cached normalization data.  The norm is
// the root-mean-square sqrt((1/n) sum_x w(x)^2); "normalized" means it is 1
// up to 1e-9.
class ConformalWeight {
 public:
  explicit ConformalWeight(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw std::invalid_argument("weight: empty vector");
    double sum_sq = 0;
    for (double x : values_) {
      if (!(x >= 0) || !std::isfinite(x))
        throw std::invalid_argument("weight: values must be finite and nonnegative");
      sum_sq += x * x;
    }
    sum_squares_ = sum_sq;
    l2_norm_ = std::sqrt(sum_sq / static_cast<double>(values_.size()));
  }

  static ConformalWeight constant(int n, double c = 1.0) {
    return ConformalWeight(std::vector<double>(static_cast<std::size_t>(n), c));
  }

  int size() const { return static_cast<int>(values_.size()); }
  double operator[](int v) const { return values_[static_cast<std::size_t>(v)]; }
  const std::vector<double>& values() const { return values_; }

  // sqrt of the mean square (uniform-root second moment).
  double l2_norm() const { return l2_norm_; }
  // sum of squares, i.e. n * l2_norm^2.
  double sum_squares() const { return sum_squares_; }
  bool normalized() const { return std::abs(l2_norm_ - 1.0) <= 1e-9; }

  ConformalWeight normalized_copy() const {
    if (l2_norm_ <= 0) throw std::domain_error("weight: cannot normalize the zero weight");
    std::vector<double> v = values_;
    for (double& x : v) x /= l2_norm_;
    return ConformalWeight(std::move(v));
  }

  double edge_length(int u, int v) const {
    return 0.5 * (values_[static_cast<std::size_t>(u)] + values_[static_cast<std::size_t>(v)]);
  }

 private:
  std::vector<double> values_;
  double l2_norm_ = 0;
  double sum_squares_ = 0;
};

inline void check_weight_matches(const Graph& g, const ConformalWeight& w) {
  if (w.size() != g.n())
    throw std::invalid_argument("weight: size does not match vertex count");
}

namespace detail {

// Dijkstra from a set of sources under edge lengths (w(u)+w(v))/2.
// A nonnegative bound truncates exploration to distances <= bound.
inline std::vector<double> dijkstra(const Graph& g, const ConformalWeight& w,
                                    std::span<const int> sources, double bound) {
  check_weight_matches(g, w);
  constexpr double inf = std::numeric_limits<double>::infinity();
  std::vector<double> dist(static_cast<std::size_t>(g.n()), inf);
  using Item = std::pair<double, int>;  // ties broken by vertex index
  std::priority_queue<Item, std::vector<Item>, std::greater<Item>> heap;
  for (int s : sources) {
    if (s < 0 || s >= g.n()) throw std::out_of_range("dijkstra: source out of range");
    if (dist[s] != 0) {
      dist[s] = 0;
      heap.emplace(0.0, s);
    }
  }
  while (!heap.empty()) {
    auto [d, x] = heap.top();
    heap.pop();
    if (d > dist[x]) continue;
    for (int y : g.neighbors(x)) {
      double nd = d + w.edge_length(x, y);
      if (nd < dist[y] && !(bound >= 0 && nd > bound)) {
        dist[y] = nd;
        heap.emplace(nd, y);
      }
    }
  }
  return dist;
}

}  // namespace detail

// Exact shortest-path distances from one vertex under edge lengths
// (w(u)+w(v))/2.  Zero weights are allowed (pseudo-metric).
inline std::vector<double> conformal_distance(const Graph& g, const ConformalWeight& w,
                                              int source) {
  int s[1] = {source};
  return detail::dijkstra(g, w, s, -1.0);
}

// Distances to the nearest vertex of a set.
inline std::vector<double> conformal_distance_from_set(const Graph& g,
                                                       const ConformalWeight& w,
                                                       std::span<const int> sources) {
  if (sources.empty())
    throw std::invalid_argument("conformal_distance_from_set: empty source set");
  return detail::dijkstra(g, w, sources, -1.0);
}

// Closed ball { y : dist_w(x,y) <= R }, sorted; always contains x.
inline std::vector<int> conformal_ball(const Graph& g, const ConformalWeight& w, int x,
                                       double R) {
  if (!(R >= 0)) throw std::invalid_argument("conformal_ball: radius must be nonnegative");
  int s[1] = {x};
  std::vector<double> dist = detail::dijkstra(g, w, s, R);
  std::vector<int> ball;
  for (int y = 0; y < g.n(); ++y)
    if (dist[y] <= R) ball.push_back(y);
  return ball;
}

// area_w(x,R) = sum of w(y)^2 over the closed ball.
inline double area_omega(const Graph& g, const ConformalWeight& w, int x, double R) {
  double a = 0;
  for (int y : conformal_ball(g, w, x, R)) a += w[y] * w[y];
  return a;
}

// Largest distance between two vertices of a set, in the ambient metric.
inline double diameter_of_set(const Graph& g, const ConformalWeight& w,
                              std::span<const int> set) {
  double diam = 0;
  for (int x : set) {
    std::vector<double> dist = conformal_distance(g, w, x);
    for (int y : set) diam = std::max(diam, dist[y]);
  }
  return diam;
}

// Degree order statistics: Delta(k) = largest possible degree sum over k
// vertices = sum of the k largest degrees; dbar and pi_star are its two
// normalized views.
class DegreeProfile {
 public:
  explicit DegreeProfile(const Graph& g) : n_(g.n()) {
    degrees_.reserve(static_cast<std::size_t>(n_));
    for (int v = 0; v < n_; ++v) degrees_.push_back(g.degree(v));
    sorted_degrees_ = degrees_;
    std::sort(sorted_degrees_.begin(), sorted_degrees_.end(), std::greater<int>());
    prefix_sums_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (int k = 0; k < n_; ++k)
      prefix_sums_[static_cast<std::size_t>(k) + 1] =
          prefix_sums_[static_cast<std::size_t>(k)] + sorted_degrees_[static_cast<std::size_t>(k)];
    total_degree_ = prefix_sums_[static_cast<std::size_t>(n_)];
  }

  // Delta(k): sum of the k largest degrees; k beyond n saturates.
  long long delta(long long k) const {
    if (k < 0) throw std::invalid_argument("delta: k must be nonnegative");
    if (k > n_) k = n_;
    return prefix_sums_[static_cast<std::size_t>(k)];
  }

  // dbar(eps): average degree among the ceil(eps*n) vertices of largest
  // degree; eps beyond 1 saturates to the full vertex set.
  double dbar(double eps) const {
    if (!(eps > 0)) throw std::invalid_argument("dbar: eps must be positive");
    long long k = static_cast<long long>(std::ceil(eps * static_cast<double>(n_)));
    if (k < 1) k = 1;
    if (k > n_) k = n_;
    return static_cast<double>(delta(k)) / static_cast<double>(k);
  }

  double pi(int x) const {
    if (x < 0 || x >= n_) throw std::out_of_range("pi: vertex out of range");
    if (total_degree_ == 0) throw std::domain_error("pi: graph has no edges");
    return static_cast<double>(degrees_[static_cast<std::size_t>(x)]) /
           static_cast<double>(total_degree_);
  }

  // pi_star(beta): largest stationary mass of a set of floor(beta*n) vertices.
  double pi_star(double beta) const {
    if (!(beta >= 0)) throw std::invalid_argument("pi_star: beta must be nonnegative");
    if (total_degree_ == 0) throw std::domain_error("pi_star: graph has no edges");
    long long k = static_cast<long long>(std::floor(beta * static_cast<double>(n_)));
    return static_cast<double>(delta(k)) / static_cast<double>(total_degree_);
  }

  const std::vector<int>& sorted_degrees() const { return sorted_degrees_; }
  long long total_degree() const { return total_degree_; }

 private:
  int n_;
  std::vector<int> degrees_;
  std::vector<int> sorted_degrees_;
  std::vector<long long> prefix_sums_;
  long long total_degree_ = 0;
};

// Stationary measure pi(x) = deg(x) / (2m) of the simple random walk.
inline std::vector<double> stationary_distribution(const Graph& g) {
  if (g.m() == 0) throw std::domain_error("stationary_distribution: graph has no edges");
  std::vector<double> pi(static_cast<std::size_t>(g.n()));
  double total = 2.0 * static_cast<double>(g.m());
  for (int v = 0; v < g.n(); ++v) pi[v] = static_cast<double>(g.degree(v)) / total;
  return pi;
}

// Pointwise sqrt(sum_k c_k w_k(x)^2).  With coefficients (6/pi^2)/k^2 and
// normalized inputs the result has norm at most 1.
inline ConformalWeight combine_weights(const std::vector<ConformalWeight>& weights,
                                       const std::vector<double>& coefficients) {
  if (weights.empty()) throw std::invalid_argument("combine_weights: empty list");
  if (weights.size() != coefficients.size())
    throw std::invalid_argument("combine_weights: one coefficient per weight required");
  int n = weights.front().size();
  for (const auto& w : weights)
    if (w.size() != n)
      throw std::invalid_argument("combine_weights: weights live on different graphs");
  for (double c : coefficients)
    if (!(c > 0) || !std::isfinite(c))
      throw std::invalid_argument("combine_weights: coefficients must be positive and finite");
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (std::size_t k = 0; k < weights.size(); ++k)
    for (int x = 0; x < n; ++x)
      out[static_cast<std::size_t>(x)] += coefficients[k] * weights[k][x] * weights[k][x];
  for (double& v : out) v = std::sqrt(v);
  return ConformalWeight(std::move(out));
}

// Finite mass-transport identity: for F supported on pairs within the given
// hop radius, returns (sum_x sum_y F(x,y), sum_x sum_y F(y,x)).  The two
// sums range over the same pairs, so they must agree exactly up to float
// rounding; several lemmas are tested against this oracle.
template <class F>
std::pair<double, double> mass_transport_check(const Graph& g, F&& f, int radius) {
  double lhs = 0, rhs = 0;
  for (int x = 0; x < g.n(); ++x) {
    for (int y : g.graph_ball(x, radius)) {
      lhs += f(x, y);
      rhs += f(y, x);
    }
  }
  return {lhs, rhs};
}

// ---------------------------------------------------------------------------
// File formats.
//
// Graph file: first line "n m", then m lines "u v" with 0-indexed endpoints.
// Weight file: one real per line, n lines, written with 17 significant
// digits so that write/read round-trips are bit-exact.

inline Graph read_graph(std::istream& in) {
  long long n = 0, m = 0;
  if (!(in >> n >> m)) throw std::runtime_error("graph file: missing 'n m' header");
  if (n <= 0 || m < 0 || n > 100000000)
    throw std::runtime_error("graph file: invalid header values");
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(m));
  for (long long i = 0; i < m; ++i) {
    long long u = 0, v = 0;
    if (!(in >> u >> v)) throw std::runtime_error("graph file: truncated edge list");
    edges.emplace_back(static_cast<int>(u), static_cast<int>(v));
  }
  return Graph::from_edges(static_cast<int>(n), std::move(edges));
}

inline void write_graph(std::ostream& out, const Graph& g) {
  out << g.n() << ' ' << g.m() << '\n';
  for (auto [u, v] : g.edges()) out << u << ' ' << v << '\n';
}

inline Graph load_graph(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open graph file: " + path);
  return read_graph(in);
}

inline void save_graph(const std::string& path, const Graph& g) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open graph file for writing: " + path);
  write_graph(out, g);
}

inline std::string format_real(double x) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::vector<double> read_weights(std::istream& in, int n) {
  std::vector<double> w(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i)
    if (!(in >> w[static_cast<std::size_t>(i)]))
      throw std::runtime_error("weight file: expected one real per line, n lines");
  return w;
}

inline ConformalWeight load_weights(const std::string& path, int n) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open weight file: " + path);
  return ConformalWeight(read_weights(in, n));
}

inline void write_weights(std::ostream& out, const ConformalWeight& w) {
  for (int i = 0; i < w.size(); ++i) out << format_real(w[i]) << '\n';
}

inline void save_weights(const std::string& path, const ConformalWeight& w) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open weight file for writing: " + path);
  write_weights(out, w);
}

}  // namespace conformal_lab
