#pragma once

// Graph families used throughout the experiments.  All generators are pure
// functions of (spec, seed): the same inputs give a byte-identical edge list.
//
// Planarity notes (construction arguments, relied on by tests):
//   * path, cycle, star, binary_tree, canopy_tree: trees and cycles.
//   * grid (without wrap-around): the standard planar drawing.
//   * tri_grid: grid plus one fixed-orientation diagonal per unit square;
//     the diagonals lie inside disjoint faces of the grid drawing.
//   * prism: triangle x path, drawn as nested triangles.
//   * stacked_triangulation: inserting a vertex inside an existing face and
//     joining it to the three face corners preserves planarity inductively.
//   * grid with wrap=true is a torus, deliberately NOT planar: it exists to
//     suppress boundary effects in spectral-dimension experiments.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "conformal_lab/graph_core.hpp"
#include "conformal_lab/rng.hpp"

namespace conformal_lab {

enum class GraphKind {
  grid,
  tri_grid,
  cycle,
  path,
  binary_tree,
  canopy_tree,
  prism,
  stacked_triangulation,
  decorated_tree,
  transient_tree,
  star,
};

struct GeneratorSpec {
  GraphKind kind = GraphKind::path;
  int size = 0;       // grid/tri_grid side; cycle/path n; star leaves; prism L;
                      // binary/canopy/transient tree height; decorated tree depth
  int size2 = 0;      // grid column count (0 means square)
  bool wrap = false;  // grid only: wrap both dimensions (torus variant)
  double alpha = 1.0;          // decorated_tree tail exponent
  int l_max = 10000;           // decorated_tree path-length truncation
  int insertions = 0;          // stacked_triangulation vertex insertions
  std::vector<long long> d_sequence;  // transient_tree d_{2^k}, k = 1..h+1; empty = default
  std::uint64_t seed = 0;
  long long max_vertices = 1000000;  // generation aborts beyond this
};

struct GeneratedGraph {
  Graph graph;
  std::vector<std::string> labels;  // optional per-vertex labels (may be empty)
};

namespace detail {
inline void check_budget(long long n, long long max_vertices) {
  if (n > max_vertices)
    throw std::invalid_argument("generator: vertex count " + std::to_string(n) +
                                " exceeds configured maximum " + std::to_string(max_vertices));
}
}  // namespace detail

inline GeneratedGraph make_path(int n) {
  if (n < 1) throw std::invalid_argument("path: need n >= 1");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i + 1 < n; ++i) e.emplace_back(i, i + 1);
  return {Graph::from_edges(n, std::move(e)), {}};
}

inline GeneratedGraph make_cycle(int n) {
  if (n < 3) throw std::invalid_argument("cycle: need n >= 3");
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i < n; ++i) e.emplace_back(i, (i + 1) % n);
  return {Graph::from_edges(n, std::move(e)), {}};
}

inline GeneratedGraph make_star(int leaves) {
  if (leaves < 1) throw std::invalid_argument("star: need at least one leaf");
  std::vector<std::pair<int, int>> e;
  for (int i = 1; i <= leaves; ++i) e.emplace_back(0, i);
  return {Graph::from_edges(leaves + 1, std::move(e)), {}};
}

// rows x cols grid; wrap=true closes both dimensions into a torus
// (each wrapped dimension must then have length >= 3 to stay simple).
inline GeneratedGraph make_grid(int rows, int cols, bool wrap = false,
                                long long max_vertices = 1000000) {
  if (rows < 1 || cols < 1) throw std::invalid_argument("grid: need positive dimensions");
  if (wrap && (rows < 3 || cols < 3))
    throw std::invalid_argument("grid: torus variant needs both sides >= 3");
  detail::check_budget(static_cast<long long>(rows) * cols, max_vertices);
  auto id = [cols](int r, int c) { return r * cols + c; };
  std::vector<std::pair<int, int>> e;
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) {
      if (c + 1 < cols) e.emplace_back(id(r, c), id(r, c + 1));
      if (r + 1 < rows) e.emplace_back(id(r, c), id(r + 1, c));
      if (wrap && c == cols - 1) e.emplace_back(id(r, c), id(r, 0));
      if (wrap && r == rows - 1) e.emplace_back(id(r, c), id(0, c));
    }
  std::vector<std::string> labels;
  labels.reserve(static_cast<std::size_t>(rows) * cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) labels.push_back(std::to_string(r) + "," + std::to_string(c));
  return {Graph::from_edges(rows * cols, std::move(e)), std::move(labels)};
}

// k x k grid with one diagonal per unit square (fixed orientation:
// top-left to bottom-right), i.e. a triangulated grid.
inline GeneratedGraph make_tri_grid(int k, long long max_vertices = 1000000) {
  if (k < 2) throw std::invalid_argument("tri_grid: need side >= 2");
  detail::check_budget(static_cast<long long>(k) * k, max_vertices);
  auto base = make_grid(k, k, false, max_vertices);
  std::vector<std::pair<int, int>> e = base.graph.edges();
  auto id = [k](int r, int c) { return r * k + c; };
  for (int r = 0; r + 1 < k; ++r)
    for (int c = 0; c + 1 < k; ++c) e.emplace_back(id(r, c), id(r + 1, c + 1));
  return {Graph::from_edges(k * k, std::move(e)), std::move(base.labels)};
}

// Complete binary tree of height h: 2^(h+1) - 1 vertices, root 0,
// children of i are 2i+1 and 2i+2; labels carry the depth.
inline GeneratedGraph make_binary_tree(int h, long long max_vertices = 1000000) {
  if (h < 0) throw std::invalid_argument("binary_tree: need height >= 0");
  if (h > 40) throw std::invalid_argument("binary_tree: height too large");
  long long n = (1LL << (h + 1)) - 1;
  detail::check_budget(n, max_vertices);
  std::vector<std::pair<int, int>> e;
  for (long long i = 1; i < n; ++i)
    e.emplace_back(static_cast<int>((i - 1) / 2), static_cast<int>(i));
  std::vector<std::string> labels(static_cast<std::size_t>(n));
  for (long long i = 0; i < n; ++i) {
    int depth = 0;
    for (long long j = i; j > 0; j = (j - 1) / 2) ++depth;
    labels[static_cast<std::size_t>(i)] = "d" + std::to_string(depth);
  }
  return {Graph::from_edges(static_cast<int>(n), std::move(e)), std::move(labels)};
}

// Finite canopy tree: a spine x_0 ... x_h, where each x_k (k >= 1) carries a
// complete binary tree of height k-1 hanging below it.  This is the ball a
// leaf of a large complete binary tree sees, so it has 2^(h+1) - 1 vertices.
inline GeneratedGraph make_canopy_tree(int h, long long max_vertices = 1000000) {
  if (h < 0) throw std::invalid_argument("canopy_tree: need height >= 0");
  if (h > 40) throw std::invalid_argument("canopy_tree: height too large");
  long long total = (1LL << (h + 1)) - 1;
  detail::check_budget(total, max_vertices);
  std::vector<std::pair<int, int>> e;
  int next = h + 1;  // spine occupies 0..h
  std::vector<std::string> labels(static_cast<std::size_t>(total));
  for (int k = 0; k <= h; ++k) labels[static_cast<std::size_t>(k)] = "spine" + std::to_string(k);
  for (int k = 1; k <= h; ++k) {
    e.emplace_back(k - 1, k);
    // complete binary tree of height k-1 rooted at a child of spine vertex k
    int tree_size = (1 << k) - 1;
    int base = next;
    next += tree_size;
    e.emplace_back(k, base);
    for (int i = 1; i < tree_size; ++i) e.emplace_back(base + (i - 1) / 2, base + i);
    for (int i = 0; i < tree_size; ++i)
      labels[static_cast<std::size_t>(base + i)] = "sub" + std::to_string(k);
  }
  return {Graph::from_edges(static_cast<int>(total), std::move(e)), std::move(labels)};
}

// Triangle x path with L path edges: 3(L+1) vertices, layer i occupies
// vertices 3i, 3i+1, 3i+2.
inline GeneratedGraph make_prism(int L, long long max_vertices = 1000000) {
  if (L < 0) throw std::invalid_argument("prism: need L >= 0");
  long long n = 3LL * (L + 1);
  detail::check_budget(n, max_vertices);
  std::vector<std::pair<int, int>> e;
  for (int i = 0; i <= L; ++i) {
    int b = 3 * i;
    e.emplace_back(b, b + 1);
    e.emplace_back(b + 1, b + 2);
    e.emplace_back(b, b + 2);
    if (i < L)
      for (int c = 0; c < 3; ++c) e.emplace_back(b + c, b + 3 + c);
  }
  return {Graph::from_edges(static_cast<int>(n), std::move(e)), {}};
}

// Random planar triangulation growth: start from a single triangle and
// repeatedly insert a vertex at the "center" of a uniformly random inner
// face, joined to the three face corners.
inline GeneratedGraph make_stacked_triangulation(int insertions, std::uint64_t seed,
                                                 long long max_vertices = 1000000) {
  if (insertions < 0) throw std::invalid_argument("stacked_triangulation: need insertions >= 0");
  detail::check_budget(3LL + insertions, max_vertices);
  std::vector<std::pair<int, int>> e{{0, 1}, {1, 2}, {0, 2}};
  std::vector<std::array<int, 3>> faces{{0, 1, 2}};
  CounterRng rng(seed, derive_stream(0x5742C2ULL));
  int next = 3;
  for (int step = 0; step < insertions; ++step) {
    std::size_t pick = rng.next_below(faces.size());
    auto [a, b, c] = faces[pick];
    int v = next++;
    e.emplace_back(a, v);
    e.emplace_back(b, v);
    e.emplace_back(c, v);
    faces[pick] = {a, b, v};
    faces.push_back({a, c, v});
    faces.push_back({b, c, v});
  }
  return {Graph::from_edges(next, std::move(e)), {}};
}

// 3-regular tree truncated at the given depth, with an independent pendant
// path attached to every tree vertex; path lengths follow the power law
// P(L = l) proportional to l^(-2-alpha) truncated at l_max.  The draw for a
// vertex is keyed by (seed, vertex), independent of all other vertices.
inline GeneratedGraph make_decorated_tree(int depth, double alpha, int l_max,
                                          std::uint64_t seed,
                                          long long max_vertices = 1000000) {
  if (depth < 0) throw std::invalid_argument("decorated_tree: need depth >= 0");
  if (depth > 30) throw std::invalid_argument("decorated_tree: depth too large");
  if (!(alpha > 0)) throw std::invalid_argument("decorated_tree: alpha must be positive");
  if (l_max < 1) throw std::invalid_argument("decorated_tree: l_max must be >= 1");
  long long tree_n = depth == 0 ? 1 : 1 + 3LL * ((1LL << depth) - 1);
  detail::check_budget(tree_n, max_vertices);

  // cumulative weights of the truncated power law
  std::vector<double> cum(static_cast<std::size_t>(l_max));
  double total = 0;
  for (int l = 1; l <= l_max; ++l) {
    total += std::pow(static_cast<double>(l), -2.0 - alpha);
    cum[static_cast<std::size_t>(l - 1)] = total;
  }

  std::vector<std::pair<int, int>> e;
  // tree edges: root 0 has children 1..3; BFS layout
  std::vector<int> parent_layer{0};
  int next = 1;
  for (int d = 1; d <= depth; ++d) {
    std::vector<int> layer;
    for (int p : parent_layer) {
      int kids = (d == 1) ? 3 : 2;
      for (int c = 0; c < kids; ++c) {
        e.emplace_back(p, next);
        layer.push_back(next);
        ++next;
      }
    }
    parent_layer = std::move(layer);
  }

  // pendant paths
  int tree_count = next;
  for (int v = 0; v < tree_count; ++v) {
    CounterRng rng(seed, derive_stream(0xDEC0ULL, static_cast<std::uint64_t>(v)));
    double u = rng.next_double() * total;
    int length = 1 + static_cast<int>(std::lower_bound(cum.begin(), cum.end(), u) - cum.begin());
    if (length > l_max) length = l_max;
    detail::check_budget(static_cast<long long>(next) + length, max_vertices);
    int prev = v;
    for (int i = 0; i < length; ++i) {
      e.emplace_back(prev, next);
      prev = next++;
    }
  }
  return {Graph::from_edges(next, std::move(e)), {}};
}

// Complete binary tree of height h in which every edge at height k (counted
// from the leaves, so leaf edges have k = 1) is replaced by f(k) parallel
// two-edge paths, where f(k) = 2*d(2^k) - d(2^(k+1)).  The d-sequence is
// given as d(2^k) for k = 1..h+1; it must be positive, nondecreasing, capped
// by 2^(k/4), and satisfy f(k) >= 1.  Every copy is subdivided (parallel or
// not), so all original tree edges uniformly get length 2.
inline GeneratedGraph make_transient_tree(int h, std::vector<long long> d_sequence,
                                          long long max_vertices = 1000000) {
  if (h < 1) throw std::invalid_argument("transient_tree: need height >= 1");
  if (h > 24) throw std::invalid_argument("transient_tree: height too large");
  if (d_sequence.empty()) {
    // The cap d(2^k) <= 2^(k/4) forces d(2) = 1, and connectivity requires
    // 2*d(2^k) - d(2^(k+1)) >= 1, so an integer sequence can never leave 1:
    // the all-ones table is the only valid default.
    d_sequence.assign(static_cast<std::size_t>(h) + 1, 1);
  }
  if (static_cast<int>(d_sequence.size()) != h + 1)
    throw std::invalid_argument("transient_tree: need d(2^k) for k = 1..h+1");
  for (int i = 0; i < h + 1; ++i) {
    int k = i + 1;
    if (d_sequence[i] < 1)
      throw std::invalid_argument("transient_tree: d values must be positive");
    if (i > 0 && d_sequence[i] < d_sequence[i - 1])
      throw std::invalid_argument("transient_tree: d sequence must be nondecreasing");
    if (static_cast<double>(d_sequence[i]) > std::pow(2.0, k / 4.0) + 1e-9)
      throw std::invalid_argument("transient_tree: d(2^k) must be at most 2^(k/4)");
  }
  auto f = [&](int k) {
    long long v = 2 * d_sequence[static_cast<std::size_t>(k - 1)] -
                  d_sequence[static_cast<std::size_t>(k)];
    if (v < 1)
      throw std::invalid_argument("transient_tree: 2*d(2^k) - d(2^(k+1)) must be >= 1");
    return v;
  };
  for (int k = 1; k <= h; ++k) f(k);  // validate up front

  long long tree_n = (1LL << (h + 1)) - 1;
  std::vector<std::pair<int, int>> e;
  long long next = tree_n;
  for (long long child = 1; child < tree_n; ++child) {
    long long parent = (child - 1) / 2;
    // depth of child = number of steps to the root; height from leaves
    int depth = 0;
    for (long long j = child; j > 0; j = (j - 1) / 2) ++depth;
    int k = h - depth + 1;
    long long copies = f(k);
    detail::check_budget(next + copies, max_vertices);
    for (long long c = 0; c < copies; ++c) {
      e.emplace_back(static_cast<int>(parent), static_cast<int>(next));
      e.emplace_back(static_cast<int>(next), static_cast<int>(child));
      ++next;
    }
  }
  return {Graph::from_edges(static_cast<int>(next), std::move(e)), {}};
}

inline GeneratedGraph generate(const GeneratorSpec& spec) {
  switch (spec.kind) {
    case GraphKind::path:
      return make_path(spec.size);
    case GraphKind::cycle:
      return make_cycle(spec.size);
    case GraphKind::star:
      return make_star(spec.size);
    case GraphKind::grid:
      return make_grid(spec.size, spec.size2 > 0 ? spec.size2 : spec.size, spec.wrap,
                       spec.max_vertices);
    case GraphKind::tri_grid:
      return make_tri_grid(spec.size, spec.max_vertices);
    case GraphKind::binary_tree:
      return make_binary_tree(spec.size, spec.max_vertices);
    case GraphKind::canopy_tree:
      return make_canopy_tree(spec.size, spec.max_vertices);
    case GraphKind::prism:
      return make_prism(spec.size, spec.max_vertices);
    case GraphKind::stacked_triangulation:
      return make_stacked_triangulation(spec.insertions, spec.seed, spec.max_vertices);
    case GraphKind::decorated_tree:
      return make_decorated_tree(spec.size, spec.alpha, spec.l_max, spec.seed,
                                 spec.max_vertices);
    case GraphKind::transient_tree:
      return make_transient_tree(spec.size, spec.d_sequence, spec.max_vertices);
  }
  throw std::invalid_argument("generate: unknown graph kind");
}

inline GraphKind parse_graph_kind(const std::string& name) {
  if (name == "grid") return GraphKind::grid;
  if (name == "tri_grid") return GraphKind::tri_grid;
  if (name == "cycle") return GraphKind::cycle;
  if (name == "path") return GraphKind::path;
  if (name == "binary_tree") return GraphKind::binary_tree;
  if (name == "canopy_tree") return GraphKind::canopy_tree;
  if (name == "prism") return GraphKind::prism;
  if (name == "stacked_triangulation") return GraphKind::stacked_triangulation;
  if (name == "decorated_tree") return GraphKind::decorated_tree;
  if (name == "transient_tree") return GraphKind::transient_tree;
  if (name == "star") return GraphKind::star;
  throw std::invalid_argument("unknown graph kind: " + name);
}

inline std::string graph_kind_name(GraphKind k) {
  switch (k) {
    case GraphKind::grid: return "grid";
    case GraphKind::tri_grid: return "tri_grid";
    case GraphKind::cycle: return "cycle";
    case GraphKind::path: return "path";
    case GraphKind::binary_tree: return "binary_tree";
    case GraphKind::canopy_tree: return "canopy_tree";
    case GraphKind::prism: return "prism";
    case GraphKind::stacked_triangulation: return "stacked_triangulation";
    case GraphKind::decorated_tree: return "decorated_tree";
    case GraphKind::transient_tree: return "transient_tree";
    case GraphKind::star: return "star";
  }
  return "unknown";
}

}  // namespace conformal_lab
