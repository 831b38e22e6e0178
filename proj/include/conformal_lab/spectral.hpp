// Normalized Laplacian spectra, exact heat kernels, Cheeger sweeps, the
// smoothed-Rayleigh / return-probability certificate chain, heat-kernel
// embeddings, and spectral-dimension estimation.
//
// Conventions. For a connected graph G with adjacency A and degree matrix D,
// the walk operator is P = D^{-1}A and the normalized Laplacian is
// L = I - D^{-1/2} A D^{-1/2} with eigenvalues 0 = lambda_0 <= ... <= lambda_{n-1} <= 2.
// If psi_k are l2-orthonormal eigenvectors of L, then
// phi_k = sqrt(2m) D^{-1/2} psi_k are L2(pi)-orthonormal eigenfunctions of P
// with P phi_k = (1 - lambda_k) phi_k, and the T-step kernel factors as
//   p_T(x,y) = sum_k psi_k(x) psi_k(y) (1-lambda_k)^T sqrt(deg y / deg x).
//
// The Rayleigh quotient used throughout is the edge-averaged form
//   R(f) = (1/|E|) sum_E (f(x)-f(y))^2 / ||f||_pi^2
//        = 2 sum_E (f(x)-f(y))^2 / sum_x deg(x) f(x)^2,
// which is twice the pi-quotient <f,(I-P)f>_pi/||f||_pi^2; every bound below
// (2R(T+1), 1-2sqrt(R(T+1)), 1-4sqrt(R(T+1))) remains valid for it.

#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "conformal_lab/graph_core.hpp"
#include "conformal_lab/rng.hpp"

namespace conformal_lab {

namespace detail {

// base^e for integer e >= 0; exact-ish and safe for negative bases.
inline double ipow(double base, long long e) {
  double acc = 1.0;
  while (e > 0) {
    if (e & 1) acc *= base;
    base *= base;
    e >>= 1;
  }
  return acc;
}

inline Eigen::SparseMatrix<double> normalized_laplacian(const Graph& g) {
  const int n = g.n();
  std::vector<Eigen::Triplet<double>> trip;
  trip.reserve(n + 2 * static_cast<size_t>(g.m()));
  for (int x = 0; x < n; ++x) trip.emplace_back(x, x, 1.0);
  for (const auto& e : g.edges()) {
    double s = -1.0 / std::sqrt(static_cast<double>(g.degree(e.first)) *
                                static_cast<double>(g.degree(e.second)));
    trip.emplace_back(e.first, e.second, s);
    trip.emplace_back(e.second, e.first, s);
  }
  Eigen::SparseMatrix<double> L(n, n);
  L.setFromTriplets(trip.begin(), trip.end());
  return L;
}

}  // namespace detail

// One walk step on a mass distribution: out(y) = sum_{x ~ y} in(x)/deg(x).
inline void walk_step(const Graph& g, const std::vector<double>& in,
                      std::vector<double>& out) {
  const int n = g.n();
  out.assign(n, 0.0);
  for (int x = 0; x < n; ++x) {
    if (in[x] == 0.0) continue;
    const double share = in[x] / g.degree(x);
    for (int y : g.neighbors(x)) out[y] += share;
  }
}

// Walk operator applied to a function: out(x) = mean of in over neighbors of x.
inline void apply_markov(const Graph& g, const std::vector<double>& in,
                         std::vector<double>& out) {
  const int n = g.n();
  out.assign(n, 0.0);
  for (int x = 0; x < n; ++x) {
    double acc = 0.0;
    for (int y : g.neighbors(x)) acc += in[y];
    out[x] = acc / g.degree(x);
  }
}

// R(f) = 2 sum_E (f(x)-f(y))^2 / sum_x deg(x) f(x)^2.
inline double rayleigh_quotient(const Graph& g, const std::vector<double>& f) {
  if (static_cast<int>(f.size()) != g.n())
    throw std::invalid_argument("rayleigh_quotient: size mismatch");
  double num = 0.0;
  for (const auto& e : g.edges()) {
    double d = f[e.first] - f[e.second];
    num += d * d;
  }
  double den = 0.0;
  for (int x = 0; x < g.n(); ++x) den += g.degree(x) * f[x] * f[x];
  if (den <= 0.0)
    throw std::invalid_argument("rayleigh_quotient: zero function");
  return 2.0 * num / den;
}

struct SpectralOptions {
  int dense_limit = 3000;    // dense full eigensolve up to this many vertices
  int partial_count = 256;   // smallest eigenvalues kept in iterative mode
  bool want_vectors = true;
  uint64_t seed = 0x51ab5eedULL;
  double residual_tol = 1e-8;
};

class SpectralData {
 public:
  static SpectralData dense(const Graph& g, bool want_vectors = true) {
    const int n = g.n();
    Eigen::MatrixXd L = Eigen::MatrixXd::Zero(n, n);
    for (int x = 0; x < n; ++x) L(x, x) = 1.0;
    for (const auto& e : g.edges()) {
      double s = -1.0 / std::sqrt(static_cast<double>(g.degree(e.first)) *
                                  static_cast<double>(g.degree(e.second)));
      L(e.first, e.second) = s;
      L(e.second, e.first) = s;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(
        L, want_vectors ? Eigen::ComputeEigenvectors : Eigen::EigenvaluesOnly);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("dense eigensolve failed");
    SpectralData sd(g, n, true);
    sd.eigenvalues_.assign(es.eigenvalues().data(), es.eigenvalues().data() + n);
    if (want_vectors) {
      sd.psi_ = es.eigenvectors();
      sd.has_vectors_ = true;
    }
    return sd;
  }

  // Smallest `count` eigenpairs by shift-invert Lanczos with full
  // reorthogonalization. Non-convergence after one Krylov enlargement is an
  // error carrying the worst residual.
  static SpectralData partial(const Graph& g, int count,
                              uint64_t seed = 0x51ab5eedULL,
                              double residual_tol = 1e-8) {
    const int n = g.n();
    if (count < 1) throw std::invalid_argument("partial: count must be >= 1");
    count = std::min(count, n);

    const double sigma = -1e-3;
    Eigen::SparseMatrix<double> L = detail::normalized_laplacian(g);
    Eigen::SparseMatrix<double> shifted = L;
    for (int x = 0; x < n; ++x) shifted.coeffRef(x, x) -= sigma;
    shifted.makeCompressed();
    Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>> solver;
    solver.compute(shifted);
    if (solver.info() != Eigen::Success)
      throw std::runtime_error("shift-invert factorization failed");

    int m = std::min(n, 4 * count + 128);
    for (int attempt = 0; attempt < 2; ++attempt) {
      SpectralData sd = lanczos_pass(g, L, solver, sigma, count, m, seed);
      if (sd.max_residual_ <= residual_tol) return sd;
      if (attempt == 1 || m >= n) {
        std::ostringstream msg;
        msg << "iterative eigensolve did not converge: worst residual "
            << sd.max_residual_ << " after " << m
            << " Lanczos steps (tolerance " << residual_tol << ")";
        throw std::runtime_error(msg.str());
      }
      m = std::min(n, 2 * m + 256);
    }
    throw std::logic_error("unreachable");
  }

  static SpectralData compute(const Graph& g, SpectralOptions opt = {}) {
    if (g.n() <= opt.dense_limit) return dense(g, opt.want_vectors);
    return partial(g, std::min(opt.partial_count, g.n()), opt.seed,
                   opt.residual_tol);
  }

  bool full() const { return full_; }
  bool has_vectors() const { return has_vectors_; }
  int count() const { return static_cast<int>(eigenvalues_.size()); }
  int n() const { return n_; }
  double max_residual() const { return max_residual_; }

  double eigenvalue(int k) const {
    if (k < 0 || k >= count()) throw std::out_of_range("eigenvalue index");
    return eigenvalues_[k];
  }
  const std::vector<double>& eigenvalues() const { return eigenvalues_; }

  // l2-orthonormal eigenvector of the normalized Laplacian.
  double psi(int k, int x) const {
    require_vectors();
    return psi_(x, k);
  }
  const Eigen::MatrixXd& psi_matrix() const {
    require_vectors();
    return psi_;
  }

  // L2(pi)-orthonormal eigenfunction of P: phi_k(x) = sqrt(2m/deg x) psi_k(x).
  double phi(int k, int x) const {
    require_vectors();
    return psi_(x, k) * sqrt_two_m_ * inv_sqrt_deg_[x];
  }

  double two_m() const { return sqrt_two_m_ * sqrt_two_m_; }
  double inv_sqrt_deg(int x) const { return inv_sqrt_deg_[x]; }

 private:
  SpectralData(const Graph& g, int count_hint, bool full)
      : n_(g.n()), full_(full) {
    double two_m = 2.0 * static_cast<double>(g.m());
    sqrt_two_m_ = std::sqrt(two_m);
    inv_sqrt_deg_.resize(n_);
    for (int x = 0; x < n_; ++x)
      inv_sqrt_deg_[x] = 1.0 / std::sqrt(static_cast<double>(g.degree(x)));
    eigenvalues_.reserve(count_hint);
  }

  void require_vectors() const {
    if (!has_vectors_)
      throw std::logic_error("spectral data was computed without eigenvectors");
  }

  static SpectralData lanczos_pass(
      const Graph& g, const Eigen::SparseMatrix<double>& L,
      const Eigen::SimplicialLDLT<Eigen::SparseMatrix<double>>& solver,
      double sigma, int count, int m, uint64_t seed) {
    const int n = g.n();
    Eigen::MatrixXd V(n, m + 1);
    Eigen::VectorXd alpha(m), beta(m);

    CounterRng rng(seed, derive_stream(0x1a2cull));
    Eigen::VectorXd v(n);
    for (int i = 0; i < n; ++i) v(i) = rng.next_double() - 0.5;
    v.normalize();
    V.col(0) = v;

    int steps = m;
    for (int j = 0; j < m; ++j) {
      Eigen::VectorXd w = solver.solve(V.col(j));
      alpha(j) = V.col(j).dot(w);
      // two passes of full reorthogonalization
      for (int pass = 0; pass < 2; ++pass) {
        Eigen::VectorXd coef = V.leftCols(j + 1).transpose() * w;
        w.noalias() -= V.leftCols(j + 1) * coef;
      }
      double b = w.norm();
      if (b < 1e-13) {
        // invariant subspace exhausted: restart with a fresh direction
        Eigen::VectorXd fresh(n);
        for (int i = 0; i < n; ++i) fresh(i) = rng.next_double() - 0.5;
        for (int pass = 0; pass < 2; ++pass) {
          Eigen::VectorXd coef = V.leftCols(j + 1).transpose() * fresh;
          fresh.noalias() -= V.leftCols(j + 1) * coef;
        }
        double fb = fresh.norm();
        if (fb < 1e-13) {
          steps = j + 1;
          break;
        }
        beta(j) = 0.0;
        V.col(j + 1) = fresh / fb;
        continue;
      }
      beta(j) = b;
      V.col(j + 1) = w / b;
    }

    Eigen::MatrixXd T = Eigen::MatrixXd::Zero(steps, steps);
    for (int j = 0; j < steps; ++j) {
      T(j, j) = alpha(j);
      if (j + 1 < steps) {
        T(j, j + 1) = beta(j);
        T(j + 1, j) = beta(j);
      }
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
    if (es.info() != Eigen::Success)
      throw std::runtime_error("tridiagonal eigensolve failed");

    int take = std::min(count, steps);
    // largest Ritz values of the inverse map to the smallest eigenvalues
    Eigen::MatrixXd S(steps, take);
    std::vector<double> lambdas(take);
    for (int i = 0; i < take; ++i) {
      double theta = es.eigenvalues()(steps - 1 - i);
      lambdas[i] = sigma + 1.0 / theta;
      S.col(i) = es.eigenvectors().col(steps - 1 - i);
    }
    Eigen::MatrixXd X = V.leftCols(steps) * S;
    for (int i = 0; i < take; ++i) X.col(i).normalize();

    SpectralData sd(g, take, take == n);
    sd.eigenvalues_.assign(lambdas.begin(), lambdas.end());
    sd.psi_ = X;
    sd.has_vectors_ = true;
    double worst = 0.0;
    for (int i = 0; i < take; ++i) {
      Eigen::VectorXd r = L * X.col(i) - lambdas[i] * X.col(i);
      worst = std::max(worst, r.norm());
    }
    sd.max_residual_ = worst;
    return sd;
  }

  int n_ = 0;
  bool full_ = false;
  bool has_vectors_ = false;
  double sqrt_two_m_ = 0.0;
  double max_residual_ = 0.0;
  std::vector<double> inv_sqrt_deg_;
  std::vector<double> eigenvalues_;
  Eigen::MatrixXd psi_;
};

// Access to p_T(x,y). The eigendecomposition route is used when a full
// spectrum with vectors is supplied; otherwise everything falls back to
// repeated sparse walk steps. The caller keeps graph and spectrum alive.
class HeatKernel {
 public:
  explicit HeatKernel(const Graph& g, const SpectralData* sd = nullptr)
      : g_(g), sd_(sd) {
    if (sd_ && sd_->n() != g.n())
      throw std::invalid_argument("heat kernel: spectrum size mismatch");
  }

  bool eigen_route() const {
    return sd_ != nullptr && sd_->full() && sd_->has_vectors();
  }

  // Distribution of X_T given X_0 = x, by T walk steps.
  std::vector<double> distribution(int x, long long T) const {
    check_args(x, T);
    std::vector<double> cur(g_.n(), 0.0), next;
    cur[x] = 1.0;
    for (long long t = 0; t < T; ++t) {
      walk_step(g_, cur, next);
      cur.swap(next);
    }
    return cur;
  }

  double probability(int x, int y, long long T) const {
    check_args(x, T);
    if (y < 0 || y >= g_.n()) throw std::out_of_range("vertex out of range");
    if (!eigen_route()) return distribution(x, T)[y];
    const auto& psi = sd_->psi_matrix();
    double acc = 0.0;
    for (int k = 0; k < sd_->count(); ++k)
      acc += psi(x, k) * psi(y, k) *
             detail::ipow(1.0 - sd_->eigenvalue(k), T);
    return acc * sd_->inv_sqrt_deg(x) / sd_->inv_sqrt_deg(y);
  }

  double return_probability(int x, long long T) const {
    check_args(x, T);
    if (!eigen_route()) return distribution(x, T)[x];
    const auto& psi = sd_->psi_matrix();
    double acc = 0.0;
    for (int k = 0; k < sd_->count(); ++k) {
      double c = psi(x, k);
      acc += c * c * detail::ipow(1.0 - sd_->eigenvalue(k), T);
    }
    return acc;
  }

  // tr(P^T)/n = (1/n) sum_k (1-lambda_k)^T.
  double diag_trace(long long T) const {
    if (T < 0) throw std::invalid_argument("negative time");
    if (eigen_route()) {
      double acc = 0.0;
      for (int k = 0; k < sd_->count(); ++k)
        acc += detail::ipow(1.0 - sd_->eigenvalue(k), T);
      return acc / g_.n();
    }
    double acc = 0.0;
    for (int x = 0; x < g_.n(); ++x) acc += distribution(x, T)[x];
    return acc / g_.n();
  }

  // Dense P^T; rows are T-step distributions.
  Eigen::MatrixXd matrix(long long T) const {
    if (T < 0) throw std::invalid_argument("negative time");
    const int n = g_.n();
    Eigen::MatrixXd K(n, n);
    if (eigen_route()) {
      const auto& psi = sd_->psi_matrix();
      Eigen::VectorXd powers(sd_->count());
      for (int k = 0; k < sd_->count(); ++k)
        powers(k) = detail::ipow(1.0 - sd_->eigenvalue(k), T);
      K.noalias() = psi * powers.asDiagonal() * psi.transpose();
      for (int x = 0; x < n; ++x)
        for (int y = 0; y < n; ++y)
          K(x, y) *= sd_->inv_sqrt_deg(x) / sd_->inv_sqrt_deg(y);
    } else {
      for (int x = 0; x < n; ++x) {
        auto row = distribution(x, T);
        for (int y = 0; y < n; ++y) K(x, y) = row[y];
      }
    }
    return K;
  }

  const Graph& graph() const { return g_; }
  const SpectralData* spectrum() const { return sd_; }

 private:
  void check_args(int x, long long T) const {
    if (x < 0 || x >= g_.n()) throw std::out_of_range("vertex out of range");
    if (T < 0) throw std::invalid_argument("negative time");
  }

  const Graph& g_;
  const SpectralData* sd_;
};

struct AnnealedTraceResult {
  double trace_avg = 0.0;    // tr(P^T)/n
  long long count_low = 0;   // #{k : lambda_k <= 1/T}
  double basic_bound = 0.0;  // count_low / (4n)
  double strong_bound = 0.0; // count_low (1-1/T)^T / n
};

// Average-return lower bounds from the spectrum; valid for even T >= 2,
// where every (1-lambda_k)^T is nonnegative and terms with lambda_k <= 1/T
// contribute at least (1-1/T)^T >= 1/4 each.
inline AnnealedTraceResult annealed_trace_check(const SpectralData& sd,
                                                long long T) {
  if (T < 2 || (T % 2) != 0)
    throw std::invalid_argument("annealed trace bound needs even T >= 2");
  if (!sd.full())
    throw std::invalid_argument("annealed trace bound needs a full spectrum");
  AnnealedTraceResult out;
  const double inv_t = 1.0 / static_cast<double>(T);
  double acc = 0.0;
  for (int k = 0; k < sd.count(); ++k) {
    acc += detail::ipow(1.0 - sd.eigenvalue(k), T);
    if (sd.eigenvalue(k) <= inv_t) ++out.count_low;
  }
  const double n = sd.n();
  out.trace_avg = acc / n;
  out.basic_bound = out.count_low / (4.0 * n);
  out.strong_bound = out.count_low * detail::ipow(1.0 - inv_t, T) / n;
  return out;
}

struct CheegerResult {
  std::vector<int> set;  // sorted level set S_h
  double level = 0.0;    // h (a value of psi^2)
  double lhs = 0.0;      // <1_S,(I-P^T)1_S>_pi / pi(S)
  double rhs = 0.0;      // sqrt(2 <psi,(I-P^T)psi>_pi / ||psi||_pi^2)
};

// Sweep of the level sets S_h = {psi^2 >= h} against Q = P^T, returning the
// set with the smallest boundary ratio; it always satisfies lhs <= rhs.
inline CheegerResult cheeger_sweep(const Graph& g, const HeatKernel& hk,
                                   long long T, const std::vector<double>& psi) {
  const int n = g.n();
  if (static_cast<int>(psi.size()) != n)
    throw std::invalid_argument("cheeger sweep: size mismatch");
  double top = 0.0;
  for (double v : psi) {
    if (!(v >= -1e-12 && v <= 1.0 + 1e-12))
      throw std::invalid_argument("cheeger sweep: psi must map into [0,1]");
    top = std::max(top, v);
  }
  if (top <= 0.0)
    throw std::invalid_argument("cheeger sweep: psi is identically zero");

  Eigen::MatrixXd K = hk.matrix(T);
  auto pi = stationary_distribution(g);

  std::vector<int> order(n);
  for (int i = 0; i < n; ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    if (psi[a] != psi[b]) return psi[a] > psi[b];
    return a < b;
  });

  std::vector<double> q(n, 0.0);  // (P^T 1_S)(v)
  double inner = 0.0;             // <1_S, P^T 1_S>_pi
  double mass = 0.0;              // pi(S)
  double best_ratio = std::numeric_limits<double>::infinity();
  double best_level = 0.0;
  int best_len = 0;

  int i = 0;
  while (i < n && psi[order[i]] > 0.0) {
    const double level = psi[order[i]] * psi[order[i]];
    while (i < n && psi[order[i]] * psi[order[i]] == level) {
      int a = order[i];
      inner += pi[a] * (2.0 * q[a] + K(a, a));
      for (int v = 0; v < n; ++v) q[v] += K(v, a);
      mass += pi[a];
      ++i;
    }
    double ratio = (mass - inner) / mass;
    if (ratio < best_ratio) {
      best_ratio = ratio;
      best_level = level;
      best_len = i;
    }
  }

  // right-hand side of the sweep inequality
  double norm_pi = 0.0, quad = 0.0;
  for (int x = 0; x < n; ++x) {
    double kpsi = 0.0;
    for (int y = 0; y < n; ++y) kpsi += K(x, y) * psi[y];
    norm_pi += pi[x] * psi[x] * psi[x];
    quad += pi[x] * psi[x] * (psi[x] - kpsi);
  }

  CheegerResult out;
  out.set.assign(order.begin(), order.begin() + best_len);
  std::sort(out.set.begin(), out.set.end());
  out.level = best_level;
  out.lhs = best_ratio;
  out.rhs = std::sqrt(2.0 * std::max(0.0, quad) / norm_pi);
  return out;
}

struct SmoothedRayleighResult {
  double lhs = 0.0;      // <psi,(I-P^T)psi>_pi / ||psi||_pi^2
  double bound = 0.0;    // 2 R(psi) (T+1)
  double psd_lhs = 0.0;  // <psi_hat, P^{2T} psi_hat>_pi
  double psd_rhs = 0.0;  // <psi_hat, P^2 psi_hat>_pi ^ T
};

// Smoothed Rayleigh bound plus the matching power inequality for A = P^2.
inline SmoothedRayleighResult smoothed_rayleigh_check(
    const Graph& g, const SpectralData& sd, const std::vector<double>& psi,
    long long T) {
  if (!sd.full() || !sd.has_vectors())
    throw std::invalid_argument("smoothed rayleigh needs a full eigenbasis");
  if (static_cast<int>(psi.size()) != g.n())
    throw std::invalid_argument("smoothed rayleigh: size mismatch");
  if (T < 1) throw std::invalid_argument("T must be >= 1");

  const int n = g.n();
  Eigen::VectorXd u(n);
  for (int x = 0; x < n; ++x) u(x) = psi[x] / sd.inv_sqrt_deg(x);
  Eigen::VectorXd c = sd.psi_matrix().transpose() * u;
  double total = c.squaredNorm();
  if (total <= 0.0)
    throw std::invalid_argument("smoothed rayleigh: zero function");

  double pt = 0.0, p2t = 0.0, p2 = 0.0;
  for (int k = 0; k < n; ++k) {
    double mu = 1.0 - sd.eigenvalue(k);
    double w = c(k) * c(k) / total;
    pt += w * detail::ipow(mu, T);
    p2t += w * detail::ipow(mu, 2 * T);
    p2 += w * mu * mu;
  }

  SmoothedRayleighResult out;
  out.lhs = 1.0 - pt;
  out.bound = 2.0 * rayleigh_quotient(g, psi) * static_cast<double>(T + 1);
  out.psd_lhs = p2t;
  out.psd_rhs = detail::ipow(p2, T);
  return out;
}

struct ReturnCertificate {
  struct PerSet {
    int index = 0;            // which bump produced this set
    std::vector<int> set;     // sweep set, sorted
    double level = 0.0;
    double rayleigh = 0.0;    // R(psi_i)
    double inner = 0.0;       // <1_S, P^T 1_S>_pi
    double pwdsj_bound = 0.0; // (1 - 2 sqrt(R (T+1)))_+ pi(S)
    double mass_at_one = 0.0; // pi(psi_i^{-1}(1))
  };
  std::vector<PerSet> sets;
  long long max_support = 0;     // M
  double threshold = 0.0;        // eps * beta / (4M)
  double guaranteed_mass = 0.0;  // certified lower bound (may be <= 0)
  bool vacuous = false;
  std::vector<int> certified;    // {x : p_2T(x,x) >= threshold}, sorted
  double certified_mass = 0.0;
};

// Certificate that many vertices have large return probability, built from a
// family of disjointly supported [0,1] bumps: for each bump a level set of
// the T-step sweep witnesses mass retention, and the exact kernel is then
// measured against the threshold eps*beta/(4M).
inline ReturnCertificate bump_return_certificate(
    const Graph& g, const HeatKernel& hk,
    const std::vector<std::vector<double>>& family, long long T, double eps,
    double beta) {
  const int n = g.n();
  if (family.empty()) throw std::invalid_argument("certificate: empty family");
  if (T < 1) throw std::invalid_argument("certificate: T must be >= 1");
  if (!(eps > 0.0) || !(beta > 0.0))
    throw std::invalid_argument("certificate: eps and beta must be positive");

  std::vector<int> owner(n, -1);
  long long max_support = 0;
  for (size_t i = 0; i < family.size(); ++i) {
    const auto& psi = family[i];
    if (static_cast<int>(psi.size()) != n)
      throw std::invalid_argument("certificate: bump size mismatch");
    long long supp = 0;
    for (int x = 0; x < n; ++x) {
      if (!(psi[x] >= -1e-12 && psi[x] <= 1.0 + 1e-12))
        throw std::invalid_argument("certificate: bump values must be in [0,1]");
      if (psi[x] > 0.0) {
        if (owner[x] != -1)
          throw std::invalid_argument("certificate: bump supports overlap");
        owner[x] = static_cast<int>(i);
        ++supp;
      }
    }
    if (supp == 0)
      throw std::invalid_argument("certificate: bump is identically zero");
    max_support = std::max(max_support, supp);
  }

  auto pi = stationary_distribution(g);
  Eigen::MatrixXd K = hk.matrix(T);
  DegreeProfile prof(g);

  ReturnCertificate out;
  out.max_support = max_support;
  out.threshold = eps * beta / (4.0 * static_cast<double>(max_support));

  double sum_term = 0.0;
  for (size_t i = 0; i < family.size(); ++i) {
    const auto& psi = family[i];
    ReturnCertificate::PerSet ps;
    ps.index = static_cast<int>(i);
    ps.rayleigh = rayleigh_quotient(g, psi);

    auto sweep = cheeger_sweep(g, hk, T, psi);
    ps.set = std::move(sweep.set);
    ps.level = sweep.level;

    double set_mass = 0.0, inner = 0.0;
    for (int a : ps.set) {
      set_mass += pi[a];
      double row = 0.0;
      for (int b : ps.set) row += K(a, b);
      inner += pi[a] * row;
    }
    ps.inner = inner;
    double root = std::sqrt(ps.rayleigh * static_cast<double>(T + 1));
    ps.pwdsj_bound = std::max(0.0, 1.0 - 2.0 * root) * set_mass;
    if (ps.inner < ps.pwdsj_bound - 1e-9)
      throw std::logic_error("certificate: sweep set violates its retention bound");

    for (int x = 0; x < n; ++x)
      if (psi[x] >= 1.0 - 1e-12) ps.mass_at_one += pi[x];
    sum_term += std::max(0.0, 1.0 - 4.0 * root) * ps.mass_at_one;
    out.sets.push_back(std::move(ps));
  }

  out.guaranteed_mass = sum_term - 2.0 * prof.pi_star(eps) - beta;
  out.vacuous = out.guaranteed_mass <= 0.0;

  for (int x = 0; x < n; ++x) {
    if (hk.return_probability(x, 2 * T) >= out.threshold) {
      out.certified.push_back(x);
      out.certified_mass += pi[x];
    }
  }
  if (out.certified_mass < out.guaranteed_mass - 1e-9)
    throw std::logic_error("certificate: certified mass fell below its guarantee");
  return out;
}

struct SpreadingCheck {
  std::size_t cone_size = 0;
  double bound = 0.0;  // 4 / p_2T(x,x)
};

struct IsotropyCheck {
  double lhs = 0.0;  // sum_x <P^T 1_x, P^T 1_rho>^2 / deg(x)
  double rhs = 0.0;  // ||P^{2T} 1_rho||^2 = deg(rho) p_4T(rho,rho)
};

// Heat-kernel embedding Phi_T(x) = P^T 1_x / sqrt(deg x) with the
// degree-weighted inner product <f,g> = sum_z deg(z) f(z) g(z).
class HeatEmbedding {
 public:
  HeatEmbedding(const Graph& g, const HeatKernel& hk, long long T)
      : g_(g), hk_(hk), t_(T) {
    if (T < 1) throw std::invalid_argument("embedding: T must be >= 1");
    Eigen::MatrixXd K = hk.matrix(T);
    const int n = g.n();
    Eigen::VectorXd deg(n);
    for (int x = 0; x < n; ++x) deg(x) = g.degree(x);
    // B(x,y) = <P^T 1_x, P^T 1_y> = (K^t D K)(x,y)
    b_.noalias() = K.transpose() * deg.asDiagonal() * K;
    inv_sqrt_deg_.resize(n);
    for (int x = 0; x < n; ++x) inv_sqrt_deg_[x] = 1.0 / std::sqrt(deg(x));
  }

  // <Phi_T(x), Phi_T(y)>; the diagonal equals p_2T(x,x).
  double gram(int x, int y) const {
    return b_(x, y) * inv_sqrt_deg_[x] * inv_sqrt_deg_[y];
  }

  double distance_squared(int x, int y) const {
    return std::max(0.0, gram(x, x) + gram(y, y) - 2.0 * gram(x, y));
  }

  // {y : ||Phi_T(x) - Phi_T(y)|| <= ||Phi_T(y)||}
  std::vector<int> cone_set(int x) const {
    if (x < 0 || x >= g_.n()) throw std::out_of_range("vertex out of range");
    std::vector<int> out;
    for (int y = 0; y < g_.n(); ++y)
      if (distance_squared(x, y) <= gram(y, y)) out.push_back(y);
    return out;
  }

  SpreadingCheck spreading_check(int x) const {
    SpreadingCheck out;
    out.cone_size = cone_set(x).size();
    out.bound = 4.0 / hk_.return_probability(x, 2 * t_);
    return out;
  }

  IsotropyCheck isotropic_check(int rho) const {
    if (rho < 0 || rho >= g_.n()) throw std::out_of_range("vertex out of range");
    IsotropyCheck out;
    for (int x = 0; x < g_.n(); ++x)
      out.lhs += b_(x, rho) * b_(x, rho) / g_.degree(x);
    out.rhs = g_.degree(rho) * hk_.return_probability(rho, 4 * t_);
    return out;
  }

  // omega_T(x) = sqrt(sum_{y ~ x} ||Phi_T(x) - Phi_T(y)||^2); its square
  // summed over vertices counts each edge from both endpoints.
  ConformalWeight weight() const {
    std::vector<double> w(g_.n(), 0.0);
    for (int x = 0; x < g_.n(); ++x) {
      double acc = 0.0;
      for (int y : g_.neighbors(x)) acc += distance_squared(x, y);
      w[x] = std::sqrt(acc);
    }
    return ConformalWeight(std::move(w));
  }

 private:
  const Graph& g_;
  const HeatKernel& hk_;
  long long t_;
  Eigen::MatrixXd b_;
  std::vector<double> inv_sqrt_deg_;
};

inline ConformalWeight heat_kernel_weight(const Graph& g, const HeatKernel& hk,
                                          long long T) {
  return HeatEmbedding(g, hk, T).weight();
}

struct SpectralDimensionEstimate {
  struct Row {
    long long t = 0;
    double p2t = 0.0;
    double slope_to_next = 0.0;  // NaN on the last row
  };
  std::vector<Row> rows;
  bool underflow = false;
  double relaxation_time = 0.0;  // 1/lambda_1 when a spectrum is supplied
};

// Finite-scale secant slopes of -2 log p_2T(x,x) against log T over a dyadic
// grid of times, computed by one walk-step recursion up to 2*max(T).
inline SpectralDimensionEstimate spectral_dimension_estimate(
    const Graph& g, int x, const std::vector<long long>& t_grid,
    const SpectralData* sd = nullptr) {
  if (t_grid.empty()) throw std::invalid_argument("empty time grid");
  for (size_t i = 0; i < t_grid.size(); ++i) {
    if (t_grid[i] < 1) throw std::invalid_argument("times must be >= 1");
    if (i > 0 && t_grid[i] != 2 * t_grid[i - 1])
      throw std::invalid_argument("time grid must be dyadic");
  }
  if (x < 0 || x >= g.n()) throw std::out_of_range("vertex out of range");

  SpectralDimensionEstimate out;
  out.rows.resize(t_grid.size());
  const long long t_max = 2 * t_grid.back();
  std::vector<double> cur(g.n(), 0.0), next;
  cur[x] = 1.0;
  size_t want = 0;
  for (long long t = 0; t <= t_max && want < t_grid.size(); ++t) {
    if (t == 2 * t_grid[want]) {
      out.rows[want].t = t_grid[want];
      out.rows[want].p2t = cur[x];
      ++want;
    }
    if (t == t_max) break;
    walk_step(g, cur, next);
    cur.swap(next);
  }

  const double ln2 = std::log(2.0);
  for (size_t i = 0; i < out.rows.size(); ++i) {
    if (out.rows[i].p2t < 1e-300) out.underflow = true;
    if (i + 1 < out.rows.size() && out.rows[i].p2t > 0.0 &&
        out.rows[i + 1].p2t > 0.0) {
      out.rows[i].slope_to_next =
          -2.0 * (std::log(out.rows[i + 1].p2t) - std::log(out.rows[i].p2t)) /
          ln2;
    } else {
      out.rows[i].slope_to_next = std::numeric_limits<double>::quiet_NaN();
    }
  }
  if (sd && sd->count() > 1 && sd->eigenvalue(1) > 0.0)
    out.relaxation_time = 1.0 / sd->eigenvalue(1);
  return out;
}

struct EigenvalueDegreeReport {
  struct Row {
    int k = 0;
    double lambda = 0.0;
    double delta_frac = 0.0;  // Delta(k)/n
    double ratio = 0.0;       // lambda_k * n / Delta(k); zero at k = 0
  };
  std::vector<Row> rows;
  double max_ratio = 0.0;
};

// Per-index comparison of eigenvalue growth against the degree profile.
inline EigenvalueDegreeReport eigenvalue_degree_report(const Graph& g,
                                                       const SpectralData& sd) {
  DegreeProfile prof(g);
  EigenvalueDegreeReport out;
  const double n = g.n();
  out.rows.resize(sd.count());
  for (int k = 0; k < sd.count(); ++k) {
    auto& row = out.rows[k];
    row.k = k;
    row.lambda = sd.eigenvalue(k);
    double delta = static_cast<double>(prof.delta(k));
    row.delta_frac = delta / n;
    row.ratio = k == 0 ? 0.0 : row.lambda * n / delta;
    out.max_ratio = std::max(out.max_ratio, row.ratio);
  }
  return out;
}

}  // namespace conformal_lab
