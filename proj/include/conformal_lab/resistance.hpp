// Effective resistance and recurrence certificates for conformal metrics.
//
// The central quantity is R_eff(S <-> T) = 1 / min E(f) over potentials
// with f = 0 on S and f = 1 on T, where E(f) is the graph Dirichlet
// energy. Any feasible potential therefore certifies a lower bound
// 1/E(f); the functions here construct such certificates from conformal
// weights. A C-regulated weight (omega >= 1/2 pointwise, edge ratios
// bounded by C) localizes conformal balls between graph balls, so a
// radial cutoff in dist_omega becomes a resistance bound between two
// explicit graph balls. regulate() turns any normalized weight into a
// sqrt(2d)-regulated one at the cost of pointwise factors.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <Eigen/IterativeLinearSolvers>

#include "conformal_lab/graph_core.hpp"
#include "conformal_lab/rng.hpp"

namespace conformal_lab {

struct ResistanceQuery {
  std::vector<int> source, target;
  double value = 0.0;             // effective resistance, 1/energy
  double energy = 0.0;            // Dirichlet energy of the potential
  std::vector<double> potential;  // minimizer: 0 on source, 1 on target
};

inline double dirichlet_energy(const Graph& g, const std::vector<double>& f) {
  double e = 0.0;
  for (const auto& [u, v] : g.edges()) {
    double d = f[u] - f[v];
    e += d * d;
  }
  return e;
}

// Exact effective resistance between two disjoint vertex sets via the
// Dirichlet principle: solve the discrete Laplace problem with boundary
// values 0 on S and 1 on T, then invert the energy of the solution.
// Direct sparse factorization up to 1e5 free vertices, conjugate
// gradients (1e-10 relative residual) beyond.
inline ResistanceQuery effective_resistance(const Graph& g,
                                            std::vector<int> S,
                                            std::vector<int> T) {
  const int n = g.n();
  if (S.empty() || T.empty())
    throw std::invalid_argument("effective_resistance: empty terminal set");
  std::vector<int> role(n, -1);  // 0 = source, 1 = target, else free
  for (int v : S) {
    if (v < 0 || v >= n) throw std::invalid_argument("effective_resistance: vertex out of range");
    role[v] = 0;
  }
  for (int v : T) {
    if (v < 0 || v >= n) throw std::invalid_argument("effective_resistance: vertex out of range");
    if (role[v] == 0)
      throw std::invalid_argument("effective_resistance: source and target overlap");
    role[v] = 1;
  }

  std::vector<int> free_index(n, -1);
  int n_free = 0;
  for (int v = 0; v < n; ++v)
    if (role[v] == -1) free_index[v] = n_free++;

  ResistanceQuery out;
  out.source = std::move(S);
  out.target = std::move(T);
  out.potential.assign(n, 0.0);
  for (int v = 0; v < n; ++v)
    if (role[v] == 1) out.potential[v] = 1.0;

  if (n_free > 0) {
    Eigen::SparseMatrix<double> A(n_free, n_free);
    std::vector<Eigen::Triplet<double>> trip;
    Eigen::VectorXd b = Eigen::VectorXd::Zero(n_free);
    for (int v = 0; v < n; ++v) {
      if (free_index[v] < 0) continue;
      int i = free_index[v];
      trip.emplace_back(i, i, static_cast<double>(g.degree(v)));
      for (int u : g.neighbors(v)) {
        if (free_index[u] >= 0)
          trip.emplace_back(i, free_index[u], -1.0);
        else if (role[u] == 1)
          b(i) += 1.0;
      }
    }
    A.setFromTriplets(trip.begin(), trip.end());
    Eigen::VectorXd x;
    if (n_free <= 100000) {
      Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver(A);
      if (solver.info() != Eigen::Success)
        throw std::runtime_error("effective_resistance: factorization failed");
      x = solver.solve(b);
    } else {
      Eigen::ConjugateGradient<Eigen::SparseMatrix<double>,
                               Eigen::Lower | Eigen::Upper>
          solver;
      solver.setTolerance(1e-10);
      solver.compute(A);
      x = solver.solve(b);
      if (solver.info() != Eigen::Success)
        throw std::runtime_error("effective_resistance: solve did not converge");
    }
    for (int v = 0; v < n; ++v)
      if (free_index[v] >= 0) out.potential[v] = x(free_index[v]);
  }

  out.energy = dirichlet_energy(g, out.potential);
  out.value = out.energy > 0.0 ? 1.0 / out.energy
                               : std::numeric_limits<double>::infinity();
  return out;
}

// C-regulated predicate: omega >= 1/2 pointwise and omega(u) <= C omega(v)
// across every edge (small relative slack for rounding).
inline bool is_regulated(const Graph& g, const ConformalWeight& w, double C,
                         double tol = 1e-12) {
  check_weight_matches(g, w);
  for (int v = 0; v < g.n(); ++v)
    if (w[v] < 0.5 * (1.0 - tol)) return false;
  for (const auto& [u, v] : g.edges()) {
    double hi = std::max(w[u], w[v]), lo = std::min(w[u], w[v]);
    if (hi > C * lo * (1.0 + tol)) return false;
  }
  return true;
}

namespace detail {

// omega_0(x)^2 = sum_y omega(y)^2 (2d)^{-dist_G(x,y)}, evaluated by BFS
// layers and truncated once the per-vertex layer weight drops below 1e-15
// of the accumulated value.
inline std::vector<double> regulate_base_sq(const Graph& g,
                                            const ConformalWeight& w, int d) {
  const int n = g.n();
  double max_sq = 0.0;
  for (int v = 0; v < n; ++v) max_sq = std::max(max_sq, w[v] * w[v]);
  std::vector<double> out(n, 0.0);
  std::vector<int> mark(n, -1);
  std::vector<int> frontier, next;
  const double decay = 1.0 / (2.0 * d);
  for (int x = 0; x < n; ++x) {
    double acc = w[x] * w[x];
    mark[x] = x;
    frontier.assign(1, x);
    double factor = 1.0;
    while (!frontier.empty()) {
      factor *= decay;
      if (acc > 0.0 && factor * max_sq < 1e-15 * acc) break;
      next.clear();
      for (int v : frontier)
        for (int u : g.neighbors(v))
          if (mark[u] != x) {
            mark[u] = x;
            next.push_back(u);
            acc += factor * w[u] * w[u];
          }
      frontier.swap(next);
    }
    out[x] = acc;
  }
  return out;
}

}  // namespace detail

// Regulated weight: omega_hat = sqrt(1/4 + (3/8) omega_0^2) with omega_0
// the (2d)-smoothed base above. The output is >= 1/2 pointwise, has edge
// ratios at most sqrt(2d), dominates omega/2, and keeps its mean square
// in [1/4, 1]; all four properties are re-checked before returning.
inline ConformalWeight regulate(const Graph& g, const ConformalWeight& w,
                                int d) {
  check_weight_matches(g, w);
  if (!w.normalized())
    throw std::invalid_argument("regulate: weight must be normalized");
  if (d < g.max_degree())
    throw std::invalid_argument(
        "regulate: d = " + std::to_string(d) + " is below the max degree " +
        std::to_string(g.max_degree()));
  const int n = g.n();
  std::vector<double> base_sq = detail::regulate_base_sq(g, w, d);

  // mass-transport bound: the smoothing at most doubles the total square
  double total_base = 0.0, total_in = 0.0;
  for (int v = 0; v < n; ++v) {
    total_base += base_sq[v];
    total_in += w[v] * w[v];
  }
  if (total_base > 2.0 * total_in * (1.0 + 1e-12))
    throw std::logic_error("regulate: smoothing more than doubled the mass");

  std::vector<double> vals(n);
  for (int v = 0; v < n; ++v)
    vals[v] = std::sqrt(0.25 + 0.375 * base_sq[v]);
  ConformalWeight out(std::move(vals));

  const double C = std::sqrt(2.0 * d);
  if (!is_regulated(g, out, C))
    throw std::logic_error("regulate: output failed the regulated predicate");
  for (int v = 0; v < n; ++v)
    if (out[v] < 0.5 * w[v] * (1.0 - 1e-12))
      throw std::logic_error("regulate: output fell below omega/2");
  double mean_sq = out.l2_norm() * out.l2_norm();
  if (mean_sq < 0.25 - 1e-12 || mean_sq > 1.0 + 1e-12)
    throw std::logic_error("regulate: mean square escaped [1/4, 1]");
  return out;
}

struct BallComparison {
  double inner_radius = 0.0;  // log(r / 2 omega(x)) / log C
  bool inner_contained = false;
  bool outer_contained = false;
  int inner_size = 0;      // |B_G(x, inner_radius)|
  int conformal_size = 0;  // |B_omega(x, r)|
  int outer_size = 0;      // |B_G(x, 2r)|
};

// Check the two-sided comparison of conformal and graph balls for a
// C-regulated weight: B_G(x, log(r/2w(x))/log C) inside B_omega(x, r)
// inside B_G(x, 2r).
inline BallComparison ball_comparison_check(const Graph& g,
                                            const ConformalWeight& w, double C,
                                            int x, double r) {
  if (!(C >= 2.0))
    throw std::invalid_argument("ball comparison: need C >= 2");
  if (!is_regulated(g, w, C))
    throw std::invalid_argument("ball comparison: weight is not C-regulated");
  if (x < 0 || x >= g.n())
    throw std::invalid_argument("ball comparison: vertex out of range");

  BallComparison out;
  out.inner_radius = std::log(r / (2.0 * w[x])) / std::log(C);
  std::vector<int> dist = g.bfs_distances(x);
  std::vector<int> conf = conformal_ball(g, w, x, r);
  std::vector<char> in_conf(g.n(), 0);
  for (int v : conf) in_conf[v] = 1;

  out.conformal_size = static_cast<int>(conf.size());
  out.inner_contained = true;
  out.outer_contained = true;
  for (int v = 0; v < g.n(); ++v) {
    if (static_cast<double>(dist[v]) <= out.inner_radius) {
      ++out.inner_size;
      if (!in_conf[v]) out.inner_contained = false;
    }
    if (static_cast<double>(dist[v]) <= 2.0 * r) ++out.outer_size;
  }
  for (int v : conf)
    if (static_cast<double>(dist[v]) > 2.0 * r) out.outer_contained = false;
  return out;
}

struct AnnulusCertificate {
  int center = -1;
  double R = 0.0, C = 0.0;
  bool degenerate = false;     // outer complement or inner ball empty
  double inner_radius = 0.0;   // log(R / 4 omega(x)) / log C
  std::vector<int> inner;      // B_G(x, inner_radius)
  std::vector<int> outer;      // V minus B_G(x, 2R)
  std::vector<double> potential;
  double energy = 0.0;
  double energy_bound = 0.0;   // 4 d_max (1+C)^2 area_omega(x,R) / R^2
  double lower_bound = 0.0;    // 1 / energy_bound
};

// Radial cutoff potential f = (2/R) min(R/2, max(0, dist_omega(x,.) -
// R/2)): zero on B_omega(x, R/2), one outside B_omega(x, R), and
// (2/R)-Lipschitz in dist_omega. Its energy is at most
// 4 d_max (1+C)^2 area_omega(x, R) / R^2, so the reciprocal lower-bounds
// the effective resistance between the two graph balls listed above.
inline AnnulusCertificate annulus_test_function(const Graph& g,
                                                const ConformalWeight& w,
                                                double C, int x, double R) {
  if (!(C >= 2.0))
    throw std::invalid_argument("annulus: need C >= 2");
  if (!(R > 0.0)) throw std::invalid_argument("annulus: need R > 0");
  if (!is_regulated(g, w, C))
    throw std::invalid_argument("annulus: weight is not C-regulated");
  if (x < 0 || x >= g.n())
    throw std::invalid_argument("annulus: vertex out of range");
  const int n = g.n();

  AnnulusCertificate out;
  out.center = x;
  out.R = R;
  out.C = C;
  out.inner_radius = std::log(R / (4.0 * w[x])) / std::log(C);

  std::vector<int> gdist = g.bfs_distances(x);
  for (int v = 0; v < n; ++v) {
    if (static_cast<double>(gdist[v]) <= out.inner_radius)
      out.inner.push_back(v);
    if (static_cast<double>(gdist[v]) > 2.0 * R) out.outer.push_back(v);
  }
  if (out.inner.empty() || out.outer.empty()) {
    out.degenerate = true;
    return out;
  }

  std::vector<double> cdist = conformal_distance(g, w, x);
  out.potential.resize(n);
  for (int v = 0; v < n; ++v)
    out.potential[v] =
        (2.0 / R) *
        std::min(R / 2.0, std::max(0.0, cdist[v] - R / 2.0));
  out.energy = dirichlet_energy(g, out.potential);

  double area = area_omega(g, w, x, R);
  double dmax = static_cast<double>(g.max_degree());
  out.energy_bound = 4.0 * dmax * (1.0 + C) * (1.0 + C) * area / (R * R);
  if (out.energy > out.energy_bound * (1.0 + 1e-12))
    throw std::logic_error("annulus: energy exceeded its regulated bound");
  out.lower_bound = 1.0 / out.energy_bound;
  return out;
}

struct RecurrenceProfile {
  std::vector<double> scales;
  std::vector<std::vector<double>> certificates;  // per scale, kept roots
  std::vector<double> fraction_above;             // certificate >= threshold
  std::vector<int> degenerate_roots;              // skipped, per scale
  double threshold = 0.0;
};

// Per-scale resistance certificates at randomly sampled roots. For each
// scale R the weight family supplies a weight that must already be
// C-regulated; each sampled root contributes the annulus lower bound
// between B_G(rho, log(R/4w(rho))/log C) and the complement of
// B_G(rho, 2R). root_ok can restrict sampling (e.g. to grid interiors);
// roots with a degenerate annulus are counted and skipped.
inline RecurrenceProfile recurrence_profile(
    const Graph& g, const std::function<ConformalWeight(double)>& family,
    const std::vector<double>& scales, double C, int trials, double threshold,
    uint64_t seed,
    const std::function<bool(int, double)>& root_ok = nullptr) {
  if (scales.empty())
    throw std::invalid_argument("recurrence profile: no scales");
  if (trials <= 0)
    throw std::invalid_argument("recurrence profile: need trials >= 1");
  RecurrenceProfile out;
  out.scales = scales;
  out.threshold = threshold;
  CounterRng rng(seed, derive_stream(0x4ec4));
  for (double R : scales) {
    ConformalWeight w = family(R);
    if (!is_regulated(g, w, C))
      throw std::invalid_argument(
          "recurrence profile: family weight is not C-regulated at scale " +
          std::to_string(R));
    std::vector<double> certs;
    int degenerate = 0;
    long long rejections = 0;
    for (int t = 0; t < trials; ++t) {
      int root = static_cast<int>(rng.next_below(g.n()));
      if (root_ok && !root_ok(root, R)) {
        if (++rejections > 10000LL * trials)
          throw std::runtime_error(
              "recurrence profile: root filter rejected every sample");
        --t;  // resample; eligibility is not a certificate outcome
        continue;
      }
      AnnulusCertificate cert = annulus_test_function(g, w, C, root, R);
      if (cert.degenerate) {
        ++degenerate;
        continue;
      }
      certs.push_back(cert.lower_bound);
    }
    int above = 0;
    for (double c : certs)
      if (c >= threshold) ++above;
    out.fraction_above.push_back(
        certs.empty() ? 0.0 : static_cast<double>(above) / certs.size());
    out.certificates.push_back(std::move(certs));
    out.degenerate_roots.push_back(degenerate);
  }
  return out;
}

}  // namespace conformal_lab
