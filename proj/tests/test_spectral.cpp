#include <catch2/catch_amalgamated.hpp>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <vector>

#include "conformal_lab/generators.hpp"
#include "conformal_lab/rng.hpp"
#include "conformal_lab/spectral.hpp"

using namespace conformal_lab;

namespace {

Graph complete_graph(int n) {
  std::vector<std::pair<int, int>> edges;
  for (int u = 0; u < n; ++u)
    for (int v = u + 1; v < n; ++v) edges.push_back({u, v});
  return Graph::from_edges(n, edges);
}

Graph random_connected_graph(int n, int extra_edges, uint64_t seed) {
  CounterRng rng(seed, derive_stream(0x7357u));
  std::vector<std::pair<int, int>> edges;
  for (int v = 1; v < n; ++v) {
    int parent = static_cast<int>(rng.next_below(static_cast<uint64_t>(v)));
    edges.push_back({parent, v});
  }
  int added = 0;
  int guard = 0;
  while (added < extra_edges && guard++ < 50 * extra_edges) {
    int u = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
    int v = static_cast<int>(rng.next_below(static_cast<uint64_t>(n)));
    if (u == v) continue;
    auto e = std::minmax(u, v);
    bool dup = false;
    for (auto& p : edges) {
      if (p.first == e.first && p.second == e.second) dup = true;
    }
    if (dup) continue;
    edges.push_back({e.first, e.second});
    ++added;
  }
  return Graph::from_edges(n, edges);
}

// Independent oracle: raw transition matrix P(x,y) = 1/deg(x) on edges.
Eigen::MatrixXd oracle_transition(const Graph& g) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(g.n(), g.n());
  for (int x = 0; x < g.n(); ++x)
    for (int y : g.neighbors(x)) P(x, y) = 1.0 / g.degree(x);
  return P;
}

Eigen::MatrixXd mat_power(Eigen::MatrixXd base, long long t) {
  Eigen::MatrixXd acc = Eigen::MatrixXd::Identity(base.rows(), base.cols());
  while (t > 0) {
    if (t & 1) acc = acc * base;
    base = base * base;
    t >>= 1;
  }
  return acc;
}

std::vector<Graph> small_corpus() {
  std::vector<Graph> out;
  out.push_back(complete_graph(2));
  out.push_back(complete_graph(3));
  out.push_back(make_cycle(4).graph);
  out.push_back(make_cycle(8).graph);
  out.push_back(make_path(5).graph);
  out.push_back(make_star(5).graph);
  out.push_back(make_tri_grid(4).graph);
  out.push_back(make_grid(4, 4, true).graph);
  out.push_back(make_binary_tree(4).graph);
  out.push_back(random_connected_graph(20, 12, 11));
  out.push_back(random_connected_graph(24, 5, 22));
  return out;
}

void require_close(double a, double b, double tol) {
  REQUIRE(std::abs(a - b) < tol);
}

}  // namespace

TEST_CASE("spectrum of tiny graphs matches closed forms") {
  auto k2 = SpectralData::dense(complete_graph(2));
  REQUIRE(k2.count() == 2);
  require_close(k2.eigenvalue(0), 0.0, 1e-12);
  require_close(k2.eigenvalue(1), 2.0, 1e-12);

  auto k3 = SpectralData::dense(complete_graph(3));
  require_close(k3.eigenvalue(0), 0.0, 1e-12);
  require_close(k3.eigenvalue(1), 1.5, 1e-12);
  require_close(k3.eigenvalue(2), 1.5, 1e-12);

  auto c4 = SpectralData::dense(make_cycle(4).graph);
  require_close(c4.eigenvalue(0), 0.0, 1e-12);
  require_close(c4.eigenvalue(1), 1.0, 1e-12);
  require_close(c4.eigenvalue(2), 1.0, 1e-12);
  require_close(c4.eigenvalue(3), 2.0, 1e-12);
}

TEST_CASE("cycle, path, star, torus spectra match closed forms") {
  const double pi = std::acos(-1.0);

  for (int n : {5, 8, 12}) {
    auto sd = SpectralData::dense(make_cycle(n).graph);
    std::vector<double> expect;
    for (int j = 0; j < n; ++j) expect.push_back(1.0 - std::cos(2.0 * pi * j / n));
    std::sort(expect.begin(), expect.end());
    for (int k = 0; k < n; ++k) require_close(sd.eigenvalue(k), expect[k], 1e-9);
  }

  for (int n : {2, 3, 6, 9}) {
    auto sd = SpectralData::dense(make_path(n).graph);
    std::vector<double> expect;
    for (int k = 0; k < n; ++k) expect.push_back(1.0 - std::cos(pi * k / (n - 1.0)));
    std::sort(expect.begin(), expect.end());
    for (int k = 0; k < n; ++k) require_close(sd.eigenvalue(k), expect[k], 1e-9);
  }

  // star on n vertices: {0, 1 (n-2 times), 2}
  {
    int leaves = 7;
    auto sd = SpectralData::dense(make_star(leaves).graph);
    require_close(sd.eigenvalue(0), 0.0, 1e-9);
    for (int k = 1; k <= leaves - 1; ++k) require_close(sd.eigenvalue(k), 1.0, 1e-9);
    require_close(sd.eigenvalue(leaves), 2.0, 1e-9);
  }

  // torus C_m x C_m: P eigenvalues (cos a + cos b)/2 over the frequency grid
  for (int m : {4, 6}) {
    auto sd = SpectralData::dense(make_grid(m, m, true).graph);
    std::vector<double> expect;
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        expect.push_back(1.0 - 0.5 * (std::cos(2.0 * pi * i / m) + std::cos(2.0 * pi * j / m)));
    std::sort(expect.begin(), expect.end());
    REQUIRE(sd.count() == m * m);
    for (int k = 0; k < m * m; ++k) require_close(sd.eigenvalue(k), expect[k], 1e-9);
  }
}

TEST_CASE("spectral data invariants on a corpus") {
  for (const auto& g : small_corpus()) {
    auto sd = SpectralData::dense(g);
    REQUIRE(sd.count() == g.n());
    REQUIRE(std::abs(sd.eigenvalue(0)) < 1e-9);
    double sum = 0.0;
    for (int k = 0; k < sd.count(); ++k) {
      double lam = sd.eigenvalue(k);
      REQUIRE(lam > -1e-9);
      REQUIRE(lam < 2.0 + 1e-9);
      if (k > 0) REQUIRE(lam >= sd.eigenvalue(k - 1) - 1e-12);
      sum += lam;
    }
    REQUIRE(std::abs(sum - g.n()) < 1e-6);

    // eigenfunction residual: P phi_k = (1 - lambda_k) phi_k
    REQUIRE(sd.has_vectors());
    for (int k = 0; k < sd.count(); ++k) {
      std::vector<double> phi(g.n()), pphi(g.n());
      for (int x = 0; x < g.n(); ++x) phi[x] = sd.phi(k, x);
      apply_markov(g, phi, pphi);
      double resid = 0.0;
      for (int x = 0; x < g.n(); ++x)
        resid = std::max(resid, std::abs(pphi[x] - (1.0 - sd.eigenvalue(k)) * phi[x]));
      REQUIRE(resid < 1e-8);
    }

    // L2(pi)-orthonormality of phi
    auto pi_m = stationary_distribution(g);
    for (int a = 0; a < std::min(sd.count(), 6); ++a) {
      for (int b = a; b < std::min(sd.count(), 6); ++b) {
        double ip = 0.0;
        for (int x = 0; x < g.n(); ++x) ip += pi_m[x] * sd.phi(a, x) * sd.phi(b, x);
        require_close(ip, a == b ? 1.0 : 0.0, 1e-9);
      }
    }
  }
}

TEST_CASE("heat kernel rows are stochastic, reversible, and match the matrix power oracle") {
  for (const auto& g : small_corpus()) {
    auto sd = SpectralData::dense(g);
    HeatKernel hk(g, &sd);
    HeatKernel hk_mv(g);
    auto pi_m = stationary_distribution(g);
    for (long long T : {1LL, 2LL, 5LL}) {
      Eigen::MatrixXd PT = mat_power(oracle_transition(g), T);
      for (int x = 0; x < g.n(); ++x) {
        auto row = hk_mv.distribution(x, T);
        double s = 0.0;
        for (int y = 0; y < g.n(); ++y) {
          s += row[y];
          require_close(row[y], PT(x, y), 1e-9);
          require_close(hk.probability(x, y, T), PT(x, y), 1e-9);
        }
        require_close(s, 1.0, 1e-9);
        // eigen route vs mat-vec route on the diagonal
        require_close(hk.return_probability(x, T), row[x], 1e-8);
      }
      for (int x = 0; x < g.n(); ++x)
        for (int y = 0; y < g.n(); ++y)
          require_close(pi_m[x] * PT(x, y), pi_m[y] * PT(y, x), 1e-9);
    }
  }
}

TEST_CASE("return probabilities of tiny graphs") {
  auto k2 = complete_graph(2);
  auto sd2 = SpectralData::dense(k2);
  HeatKernel hk2(k2, &sd2);
  require_close(hk2.return_probability(0, 2), 1.0, 1e-12);

  auto k3 = complete_graph(3);
  auto sd3 = SpectralData::dense(k3);
  HeatKernel hk3(k3, &sd3);
  require_close(hk3.return_probability(0, 2), 0.5, 1e-12);
}

TEST_CASE("trace identity and annealed lower bounds") {
  // C_4 by hand: tr(P^2)/4 = (1 + 0 + 0 + 1)/4 = 1/2 >= 1/16
  auto c4 = make_cycle(4).graph;
  auto sd4 = SpectralData::dense(c4);
  HeatKernel hk4(c4, &sd4);
  require_close(hk4.diag_trace(2), 0.5, 1e-12);
  auto ann = annealed_trace_check(sd4, 2);
  require_close(ann.trace_avg, 0.5, 1e-12);
  REQUIRE(ann.count_low == 1);  // only lambda_0 = 0 is <= 1/2
  require_close(ann.basic_bound, 1.0 / 16.0, 1e-12);
  REQUIRE(ann.trace_avg >= ann.basic_bound);
  REQUIRE(ann.trace_avg >= ann.strong_bound);

  for (const auto& g : small_corpus()) {
    auto sd = SpectralData::dense(g);
    HeatKernel hk(g, &sd);
    HeatKernel hk_mv(g);
    for (long long T : {2LL, 4LL, 8LL, 16LL}) {
      // trace identity vs the mat-vec route
      double mean_diag = 0.0;
      for (int x = 0; x < g.n(); ++x) mean_diag += hk_mv.distribution(x, T)[x];
      mean_diag /= g.n();
      require_close(hk.diag_trace(T), mean_diag, 1e-9);

      auto a = annealed_trace_check(sd, T);
      REQUIRE(a.trace_avg >= a.basic_bound - 1e-12);
      REQUIRE(a.trace_avg >= a.strong_bound - 1e-12);
      REQUIRE(a.strong_bound >= a.basic_bound - 1e-12);  // (1-1/T)^T >= 1/4 for T >= 2
    }
    REQUIRE_THROWS_AS(annealed_trace_check(sd, 3), std::invalid_argument);
  }
}

TEST_CASE("rayleigh quotient oracle values") {
  auto k2 = complete_graph(2);
  require_close(rayleigh_quotient(k2, {1.0, 0.0}), 2.0, 1e-12);
  auto k3 = complete_graph(3);
  require_close(rayleigh_quotient(k3, {1.0, 0.0, 0.0}), 2.0, 1e-12);
  // constant function has zero quotient
  require_close(rayleigh_quotient(k3, {0.7, 0.7, 0.7}), 0.0, 1e-12);
  REQUIRE_THROWS_AS(rayleigh_quotient(k3, {0.0, 0.0, 0.0}), std::invalid_argument);
  REQUIRE_THROWS_AS(rayleigh_quotient(k3, {1.0, 0.0}), std::invalid_argument);
}

TEST_CASE("cheeger sweep level sets") {
  // indicator input returns the set itself
  auto g = random_connected_graph(16, 10, 5);
  auto sd = SpectralData::dense(g);
  HeatKernel hk(g, &sd);
  std::vector<double> ind(g.n(), 0.0);
  std::vector<int> s = {1, 3, 4, 9, 12};
  for (int v : s) ind[v] = 1.0;
  auto res = cheeger_sweep(g, hk, 2, ind);
  REQUIRE(res.set == s);
  REQUIRE(res.lhs <= res.rhs + 1e-12);

  // constant function returns everything with both sides zero
  std::vector<double> ones(g.n(), 1.0);
  auto full = cheeger_sweep(g, hk, 3, ones);
  REQUIRE(static_cast<int>(full.set.size()) == g.n());
  require_close(full.lhs, 0.0, 1e-9);
  require_close(full.rhs, 0.0, 1e-9);

  // K_2 with psi = (1, 0), T = 1: lhs = 1 and the bound holds
  auto k2 = complete_graph(2);
  auto sd2 = SpectralData::dense(k2);
  HeatKernel hk2(k2, &sd2);
  auto r2 = cheeger_sweep(k2, hk2, 1, {1.0, 0.0});
  REQUIRE(r2.set == std::vector<int>{0});
  require_close(r2.lhs, 1.0, 1e-12);
  REQUIRE(r2.lhs <= r2.rhs + 1e-12);
  REQUIRE(r2.rhs <= 2.0 + 1e-12);

  // rejects invalid input
  std::vector<double> zero(k2.n(), 0.0);
  REQUIRE_THROWS_AS(cheeger_sweep(k2, hk2, 1, zero), std::invalid_argument);
  REQUIRE_THROWS_AS(cheeger_sweep(k2, hk2, 1, {1.5, 0.0}), std::invalid_argument);

  // random [0,1] functions on the corpus: inequality for the returned set
  for (const auto& gg : small_corpus()) {
    auto sdd = SpectralData::dense(gg);
    HeatKernel hkk(gg, &sdd);
    CounterRng rng(99, derive_stream(0xC1Eu));
    for (long long T : {1LL, 2LL, 4LL}) {
      std::vector<double> psi(gg.n());
      for (auto& v : psi) v = rng.next_double();
      auto r = cheeger_sweep(gg, hkk, T, psi);
      REQUIRE(!r.set.empty());
      REQUIRE(r.lhs <= r.rhs + 1e-10);
      REQUIRE(r.level > 0.0);
      REQUIRE(r.level <= 1.0);
    }
  }
}

TEST_CASE("smoothed rayleigh bound and psd power inequality") {
  // constant function: both sides vanish
  auto c8 = make_cycle(8).graph;
  auto sd8 = SpectralData::dense(c8);
  {
    std::vector<double> ones(c8.n(), 1.0);
    auto r = smoothed_rayleigh_check(c8, sd8, ones, 3);
    require_close(r.lhs, 0.0, 1e-12);
    require_close(r.bound, 0.0, 1e-12);
    REQUIRE(r.psd_lhs >= r.psd_rhs - 1e-12);
  }

  // random functions on C_8 and the corpus
  CounterRng rng(4242, derive_stream(0x5Au));
  for (const auto& g : small_corpus()) {
    auto sd = SpectralData::dense(g);
    for (long long T : {1LL, 3LL, 7LL}) {
      std::vector<double> psi(g.n());
      for (auto& v : psi) v = 2.0 * rng.next_double() - 0.5;
      auto r = smoothed_rayleigh_check(g, sd, psi, T);
      REQUIRE(r.lhs <= r.bound + 1e-10);
      REQUIRE(r.psd_lhs >= r.psd_rhs - 1e-10);
    }
  }

  // eigenfunction: lhs equals 1-(1-lambda)^T and the tight scalar bound holds
  for (const auto& g : small_corpus()) {
    auto sd = SpectralData::dense(g);
    for (int k : {1, sd.count() - 1}) {
      std::vector<double> phi(g.n());
      for (int x = 0; x < g.n(); ++x) phi[x] = sd.phi(k, x);
      for (long long T : {1LL, 2LL, 5LL}) {
        auto r = smoothed_rayleigh_check(g, sd, phi, T);
        double lam = sd.eigenvalue(k);
        double expect = 1.0, b = 1.0 - lam;
        for (long long t = 0; t < T; ++t) expect *= b;
        require_close(r.lhs, 1.0 - expect, 1e-8);
        REQUIRE(1.0 - expect <= 2.0 * lam * (T + 1) + 1e-10);
        REQUIRE(r.lhs <= r.bound + 1e-10);
      }
    }
  }
}

TEST_CASE("bump return certificate on tiny and structured inputs") {
  // singleton indicators on K_2, T = 1
  auto k2 = complete_graph(2);
  auto sd2 = SpectralData::dense(k2);
  HeatKernel hk2(k2, &sd2);
  std::vector<std::vector<double>> fam = {{1.0, 0.0}, {0.0, 1.0}};
  auto cert = bump_return_certificate(k2, hk2, fam, 1, 0.9, 0.9);
  REQUIRE(cert.max_support == 1);
  require_close(cert.threshold, 0.9 * 0.9 / 4.0, 1e-12);
  // p_2(x,x) = 1 for both vertices, so everything is certified
  REQUIRE(cert.certified.size() == 2);
  require_close(cert.certified_mass, 1.0, 1e-12);
  REQUIRE(cert.certified_mass >= cert.guaranteed_mass - 1e-12);
  for (const auto& ps : cert.sets) {
    REQUIRE(ps.inner >= ps.pwdsj_bound - 1e-9);
    REQUIRE(ps.set.size() == 1);
  }

  // high-rayleigh family forces a vacuous guarantee via the (.)_+ clamp
  {
    auto p4 = make_path(4).graph;
    auto sdp = SpectralData::dense(p4);
    HeatKernel hkp(p4, &sdp);
    std::vector<std::vector<double>> steep = {{1.0, 0.0, 0.0, 0.0}, {0.0, 0.0, 0.0, 1.0}};
    // R_G = 2*1/1 = 2 for each, so R*(T+1) >= 1/16 by far
    auto c = bump_return_certificate(p4, hkp, steep, 4, 0.1, 0.1);
    REQUIRE(c.vacuous);
    REQUIRE(c.guaranteed_mass <= 0.0);
    REQUIRE(c.certified_mass >= c.guaranteed_mass);
  }

  // tent bumps on a 12x12 torus at a gentle T: nonvacuous and exactly cross-checked
  {
    auto g = make_grid(12, 12, true).graph;
    auto sd = SpectralData::dense(g);
    HeatKernel hk(g, &sd);
    ConformalWeight w = ConformalWeight::constant(g.n(), 1.0);
    std::vector<int> centers = {0, 6 * 12 + 6};
    std::vector<std::vector<double>> bumps;
    for (int c : centers) {
      auto dist = conformal_distance(g, w, c);
      std::vector<double> psi(g.n(), 0.0);
      for (int x = 0; x < g.n(); ++x) psi[x] = std::max(0.0, 1.0 - dist[x] / 3.0);
      bumps.push_back(psi);
    }
    auto c = bump_return_certificate(g, hk, bumps, 1, 0.5, 0.2);
    REQUIRE(c.max_support > 1);
    for (const auto& ps : c.sets) {
      REQUIRE(ps.inner >= ps.pwdsj_bound - 1e-9);
      // akey sandwich: psi^{-1}(1) inside S inside supp(psi)
      for (int v : ps.set) REQUIRE(bumps[ps.index][v] > 0.0);
      for (int x = 0; x < g.n(); ++x)
        if (bumps[ps.index][x] == 1.0)
          REQUIRE(std::binary_search(ps.set.begin(), ps.set.end(), x));
    }
    REQUIRE(c.certified_mass >= c.guaranteed_mass - 1e-12);
    // exact kernel on the certified set
    for (int v : c.certified)
      REQUIRE(hk.return_probability(v, 2) >= c.threshold - 1e-15);
  }

  // overlapping supports rejected
  std::vector<std::vector<double>> overlap = {{1.0, 0.5}, {0.5, 1.0}};
  REQUIRE_THROWS_AS(bump_return_certificate(k2, hk2, overlap, 1, 0.5, 0.5),
                    std::invalid_argument);
}

TEST_CASE("heat embedding cone, spreading, isotropy, and monotonicity") {
  // K_2: p_2 = 1, cone size at most 2 <= 4
  auto k2 = complete_graph(2);
  auto sd2 = SpectralData::dense(k2);
  HeatKernel hk2(k2, &sd2);
  HeatEmbedding emb2(k2, hk2, 1);
  auto cone = emb2.cone_set(0);
  REQUIRE(!cone.empty());
  REQUIRE(std::find(cone.begin(), cone.end(), 0) != cone.end());
  REQUIRE(cone.size() <= 2);
  auto sp2 = emb2.spreading_check(0);
  REQUIRE(sp2.cone_size <= sp2.bound + 1e-12);

  for (const auto& g : small_corpus()) {
    auto sd = SpectralData::dense(g);
    HeatKernel hk(g, &sd);
    for (long long T : {1LL, 2LL, 4LL}) {
      HeatEmbedding emb(g, hk, T);
      for (int x = 0; x < g.n(); ++x) {
        auto c = emb.cone_set(x);
        REQUIRE(std::find(c.begin(), c.end(), x) != c.end());
        auto sp = emb.spreading_check(x);
        REQUIRE(sp.cone_size == c.size());
        REQUIRE(static_cast<double>(sp.cone_size) <= sp.bound + 1e-9);
        // diagonal norm identity |Phi_T(x)|^2 = p_2T(x,x)
        require_close(emb.gram(x, x), hk.return_probability(x, 2 * T), 1e-9);
        // return probability monotonicity p_2T >= p_4T
        REQUIRE(hk.return_probability(x, 2 * T) >=
                hk.return_probability(x, 4 * T) - 1e-12);
      }
      // isotropy identity at a few roots
      for (int rho : {0, g.n() / 2, g.n() - 1}) {
        auto iso = emb.isotropic_check(rho);
        require_close(iso.lhs, iso.rhs, 1e-9);
      }
    }
  }

  // C_8, T=2 isotropy to 1e-12
  auto c8 = make_cycle(8).graph;
  auto sd8 = SpectralData::dense(c8);
  HeatKernel hk8(c8, &sd8);
  HeatEmbedding emb8(c8, hk8, 2);
  for (int rho = 0; rho < 8; ++rho) {
    auto iso = emb8.isotropic_check(rho);
    require_close(iso.lhs, iso.rhs, 1e-12);
  }
}

TEST_CASE("heat kernel weight identities") {
  // K_3, T=1: edge sum vs vertex sum
  auto k3 = complete_graph(3);
  auto sd3 = SpectralData::dense(k3);
  HeatKernel hk3(k3, &sd3);
  HeatEmbedding emb3(k3, hk3, 1);
  auto w3 = emb3.weight();
  double vertex_sum = w3.sum_squares();
  double edge_sum = 0.0;
  for (const auto& e : k3.edges()) {
    double d2 = emb3.gram(e.first, e.first) + emb3.gram(e.second, e.second) -
                2.0 * emb3.gram(e.first, e.second);
    edge_sum += d2;
  }
  require_close(vertex_sum, 2.0 * edge_sum, 1e-12);

  // vertex-transitive cycle: constant weight
  auto c6 = make_cycle(6).graph;
  auto sd6 = SpectralData::dense(c6);
  HeatKernel hk6(c6, &sd6);
  auto w6 = heat_kernel_weight(c6, hk6, 2);
  for (int x = 1; x < 6; ++x) require_close(w6[x], w6[0], 1e-10);

  // non-bipartite graph at large T: weight tends to zero
  auto c5 = make_cycle(5).graph;
  auto sd5 = SpectralData::dense(c5);
  HeatKernel hk5(c5, &sd5);
  auto w5 = heat_kernel_weight(c5, hk5, 200);
  for (int x = 0; x < 5; ++x) REQUIRE(w5[x] < 1e-8);
}

TEST_CASE("spectral dimension estimate slopes") {
  // K_2: p_2T = 1, slope 0
  auto k2 = complete_graph(2);
  auto est2 = spectral_dimension_estimate(k2, 0, {1, 2, 4, 8});
  for (const auto& row : est2.rows) require_close(row.p2t, 1.0, 1e-12);
  for (size_t i = 0; i + 1 < est2.rows.size(); ++i)
    require_close(est2.rows[i].slope_to_next, 0.0, 1e-9);
  REQUIRE(!est2.underflow);

  // cycle: d_sp = 1 at scales far below mixing
  auto c1024 = make_cycle(1024).graph;
  auto est = spectral_dimension_estimate(c1024, 0, {32, 64, 128, 256});
  for (size_t i = 0; i + 1 < est.rows.size(); ++i) {
    REQUIRE(est.rows[i].slope_to_next > 0.8);
    REQUIRE(est.rows[i].slope_to_next < 1.2);
  }
  // closed form for the cycle return probability
  const double pi = std::acos(-1.0);
  for (const auto& row : est.rows) {
    double exact = 0.0;
    for (int j = 0; j < 1024; ++j) {
      double base = std::cos(2.0 * pi * j / 1024.0);
      exact += std::pow(base, static_cast<double>(2 * row.t));
    }
    exact /= 1024.0;
    require_close(row.p2t, exact, 1e-10);
  }

  // relaxation-time report when a spectrum is supplied
  auto c16 = make_cycle(16).graph;
  auto sd16 = SpectralData::dense(c16);
  auto est16 = spectral_dimension_estimate(c16, 3, {2, 4, 8}, &sd16);
  REQUIRE(est16.relaxation_time > 0.0);
  require_close(est16.relaxation_time, 1.0 / sd16.eigenvalue(1), 1e-9);

  // grid must be dyadic
  REQUIRE_THROWS_AS(spectral_dimension_estimate(k2, 0, {2, 5}), std::invalid_argument);
  REQUIRE_THROWS_AS(spectral_dimension_estimate(k2, 0, {}), std::invalid_argument);
}

TEST_CASE("eigenvalue degree report") {
  // star: lambda_1 = 1, ratio n/(n-1)
  for (int leaves : {5, 9}) {
    auto g = make_star(leaves).graph;
    auto sd = SpectralData::dense(g);
    auto rep = eigenvalue_degree_report(g, sd);
    REQUIRE(rep.rows.size() == static_cast<size_t>(g.n()));
    require_close(rep.rows[0].lambda, 0.0, 1e-9);
    require_close(rep.rows[0].ratio, 0.0, 1e-12);
    require_close(rep.rows[1].lambda, 1.0, 1e-9);
    double n = leaves + 1.0;
    require_close(rep.rows[1].ratio, n / (n - 1.0), 1e-9);
    REQUIRE(rep.max_ratio >= rep.rows[1].ratio - 1e-12);
  }

  // comparable max ratios across triangulated grid sizes
  auto g20 = make_tri_grid(20).graph;
  auto g40 = make_tri_grid(40).graph;
  auto r20 = eigenvalue_degree_report(g20, SpectralData::dense(g20, false));
  auto r40 = eigenvalue_degree_report(g40, SpectralData::dense(g40, false));
  REQUIRE(r20.max_ratio > 0.0);
  REQUIRE(r40.max_ratio > 0.0);
  REQUIRE(r40.max_ratio <= 2.0 * r20.max_ratio);
  REQUIRE(r20.max_ratio <= 2.0 * r40.max_ratio);
}

TEST_CASE("partial spectrum matches dense on medium instances") {
  auto g = make_tri_grid(32).graph;  // 1024 vertices
  auto dense = SpectralData::dense(g, false);
  auto part = SpectralData::partial(g, 64);
  REQUIRE(part.count() == 64);
  REQUIRE(!part.full());
  REQUIRE(part.max_residual() < 1e-8);
  for (int k = 0; k < 64; ++k)
    require_close(part.eigenvalue(k), dense.eigenvalue(k), 1e-8);

  // partial eigenvectors still satisfy the eigen equation
  for (int k : {0, 1, 13, 63}) {
    std::vector<double> phi(g.n()), pphi(g.n());
    for (int x = 0; x < g.n(); ++x) phi[x] = part.phi(k, x);
    apply_markov(g, phi, pphi);
    double resid = 0.0;
    for (int x = 0; x < g.n(); ++x)
      resid = std::max(resid, std::abs(pphi[x] - (1.0 - part.eigenvalue(k)) * phi[x]));
    REQUIRE(resid < 1e-7);
  }

  // auto route picks partial above the dense cutoff
  auto big = make_tri_grid(60).graph;  // 3600 vertices
  SpectralOptions opt;
  opt.partial_count = 16;
  auto sd = SpectralData::compute(big, opt);
  REQUIRE(!sd.full());
  REQUIRE(sd.count() == 16);
  REQUIRE(std::abs(sd.eigenvalue(0)) < 1e-9);
  for (int k = 1; k < 16; ++k) REQUIRE(sd.eigenvalue(k) >= sd.eigenvalue(k - 1) - 1e-12);
  REQUIRE(sd.max_residual() < 1e-8);
}
