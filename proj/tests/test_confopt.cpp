// Ball-growth optimization and the binary-tree growth certificate.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <vector>

#include "catch2/catch_amalgamated.hpp"
#include "conformal_lab/confopt.hpp"
#include "conformal_lab/generators.hpp"
#include "conformal_lab/graph_core.hpp"
#include "conformal_lab/rng.hpp"

using namespace conformal_lab;

namespace {

int heap_depth(long long v) {
  int d = 0;
  while ((2LL << d) - 1 <= v) ++d;
  return d;
}

// Literal enumeration of the parity-matched path families: walks every
// leaf pair (i + j even) across every height-k subtree root and counts
// path memberships vertex by vertex.  Independent of the closed-form
// depth counts used by cbt_certificate.
std::vector<double> alpha_by_enumeration(int n) {
  long long nv = (1LL << (n + 1)) - 1;
  std::vector<double> alpha(static_cast<std::size_t>(nv), 0.0);
  for (int k = 1; k <= n; ++k) {
    double scale = std::exp2(-1.5 * k);
    long long first_root = (1LL << (n - k)) - 1;
    for (long long s = first_root; s < 2 * first_root + 1; ++s) {
      long long leaf0 = ((s + 1) << k) - 1;
      long long half = 1LL << (k - 1);
      for (long long i = 0; i < half; ++i) {
        for (long long j = 0; j < half; ++j) {
          if ((i + j) % 2 != 0) continue;
          for (long long v = leaf0 + i;; v = (v - 1) / 2) {
            alpha[static_cast<std::size_t>(v)] += scale;
            if (v == s) break;
          }
          for (long long v = leaf0 + half + j; v != s; v = (v - 1) / 2)
            alpha[static_cast<std::size_t>(v)] += scale;
        }
      }
    }
  }
  return alpha;
}

double fit_slope(const std::vector<double>& xs, const std::vector<double>& ys) {
  double mx = 0, my = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    mx += std::log(xs[i]);
    my += std::log(ys[i]);
  }
  mx /= static_cast<double>(xs.size());
  my /= static_cast<double>(xs.size());
  double num = 0, den = 0;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    num += (std::log(xs[i]) - mx) * (std::log(ys[i]) - my);
    den += (std::log(xs[i]) - mx) * (std::log(xs[i]) - mx);
  }
  return num / den;
}

}  // namespace

TEST_CASE("growth objective and optimizer baselines") {
  Graph path = make_path(50).graph;
  for (double R : {1.0, 2.0, 5.0}) {
    auto [w, obj] = optimize_weight(path, R, 12, 11);
    CHECK(w.normalized());
    CHECK(obj.R == R);
    // A path ball holds at most 2R+1 <= 3R^2 vertices at unit weights,
    // and the optimizer never returns anything above that baseline.
    CHECK(obj.value <= 3.0 + 1e-12);
    CHECK(obj.value >= 1.0 / (R * R) - 1e-15);
    GrowthObjective again = growth_objective(path, w, R);
    CHECK(again.value == Catch::Approx(obj.value).margin(1e-12));
    CHECK(0 <= obj.argmax);
    CHECK(obj.argmax < path.n());
  }

  Graph cyc = make_cycle(60).graph;
  GrowthObjective base = growth_objective(cyc, ConformalWeight::constant(60), 7.0);
  CHECK(base.value == Catch::Approx(15.0 / 49.0).margin(1e-12));
  auto [w, obj] = optimize_weight(cyc, 7.0, 12, 11);
  CHECK(obj.value <= base.value + 1e-12);

  auto [w2, obj2] = optimize_weight(cyc, 7.0, 12, 11);
  CHECK(w.values() == w2.values());
  CHECK(obj.value == obj2.value);

  CHECK_THROWS_AS(growth_objective(cyc, ConformalWeight::constant(60), 0.5),
                  std::invalid_argument);
  CHECK_THROWS_AS(optimize_weight(cyc, 0.5, 5, 1), std::invalid_argument);
  CHECK_THROWS_AS(optimize_weight(cyc, 2.0, 0, 1), std::invalid_argument);
}

TEST_CASE("optimizer strictly improves the binary tree at scale four") {
  Graph tree = make_binary_tree(8).graph;
  GrowthObjective base = growth_objective(tree, ConformalWeight::constant(tree.n()), 4.0);
  // Unit weights: a depth-4 vertex sees its 4-level subtree (30), four
  // ancestors, and the sibling subtrees hanging off them (7 + 3 + 1).
  REQUIRE(base.value == Catch::Approx(46.0 / 16.0).margin(1e-12));
  auto [w, obj] = optimize_weight(tree, 4.0, 40, 7);
  CHECK(w.normalized());
  CHECK(obj.value < base.value - 1e-9);
  GrowthObjective again = growth_objective(tree, w, 4.0);
  CHECK(again.value == Catch::Approx(obj.value).margin(1e-12));
}

TEST_CASE("certificate alpha matches direct path enumeration") {
  for (int n = 2; n <= 6; ++n) {
    CbtCertificate cert = cbt_certificate(n);
    std::vector<double> oracle = alpha_by_enumeration(n);
    REQUIRE(cert.alpha.size() == oracle.size());
    for (std::size_t v = 0; v < oracle.size(); ++v)
      REQUIRE(cert.alpha[v] == Catch::Approx(oracle[v]).margin(1e-12));
  }

  // Height 2 by hand: the lone height-1 pair in each bottom subtree plus
  // the two parity-matched pairs across the root.
  CbtCertificate c2 = cbt_certificate(2);
  CHECK(c2.vertices == 7);
  CHECK(c2.alpha[0] == Catch::Approx(0.25).margin(1e-12));
  CHECK(c2.alpha[1] == Catch::Approx(std::exp2(-1.5) + 0.25).margin(1e-12));
  CHECK(c2.alpha[2] == Catch::Approx(std::exp2(-1.5) + 0.25).margin(1e-12));
  for (int v = 3; v < 7; ++v)
    CHECK(c2.alpha[v] == Catch::Approx(std::exp2(-1.5) + 0.125).margin(1e-12));
  CHECK(c2.alpha_l2_sq == Catch::Approx(1.7071067811865475).margin(1e-9));
  CHECK(c2.alpha_l2_sq <= 8.0);
}

TEST_CASE("alpha stays inside the budget at every supported height") {
  for (int n = 2; n <= 14; ++n) {
    CbtCertificate cert = cbt_certificate(n);
    CHECK(cert.vertices == (1LL << (n + 1)) - 1);
    CHECK(cert.alpha.size() == static_cast<std::size_t>(cert.vertices));
    CHECK(cert.alpha_budget == Catch::Approx(n * std::exp2(n)));
    CHECK(cert.alpha_l2_sq <= cert.alpha_budget);
    double ss = 0;
    for (double a : cert.alpha) ss += a * a;
    CHECK(ss == Catch::Approx(cert.alpha_l2_sq).epsilon(1e-12));
    // alpha depends on depth alone.
    for (long long v = 1; v < cert.vertices; ++v) {
      if (heap_depth(v) == heap_depth(v - 1))
        REQUIRE(cert.alpha[static_cast<std::size_t>(v)] ==
                cert.alpha[static_cast<std::size_t>(v - 1)]);
    }
  }
  CHECK_THROWS_AS(cbt_certificate(1), std::invalid_argument);
  CHECK_THROWS_AS(cbt_certificate(21), std::invalid_argument);
}

TEST_CASE("implied lower bounds grow with height") {
  std::vector<double> heights, bounds;
  double prev = 0;
  for (int n : {4, 6, 8, 10, 12}) {
    CbtCertificate cert = cbt_certificate(n);
    double b = cert.implied_l2_lower(1.0);
    CHECK(b > prev);
    prev = b;
    heights.push_back(static_cast<double>(n));
    bounds.push_back(b);
    if (n >= 6) CHECK(cert.implied_l2_lower(4.0) < b);  // weaker premise, weaker bound
  }
  double slope = fit_slope(heights, bounds);
  INFO("fitted growth exponent of the certified bound: " << slope);
  CHECK(slope >= 0.3);
  CHECK_THROWS_AS(cbt_certificate(4).implied_l2_lower(0.0), std::invalid_argument);

  // Inverting the chain at its unit crossing certifies a growth ratio no
  // normalized weight can beat; the certified ratio must also climb with
  // height, and the crossing must be tight from both sides.
  std::vector<double> certified;
  double prev_q = 0.0;
  for (int n : {4, 6, 8, 10, 12}) {
    CbtCertificate cert = cbt_certificate(n);
    double q = cert.certified_growth_lower();
    REQUIRE(q > prev_q);
    prev_q = q;
    certified.push_back(q);
    CHECK(cert.implied_l2_lower(q * (1.0 - 1e-9)) > 1.0);
    CHECK(cert.implied_l2_lower(q * (1.0 + 1e-9)) <= 1.0);
  }
  double q_slope = fit_slope(heights, certified);
  INFO("fitted exponent of the certified growth ratio: " << q_slope);
  CHECK(q_slope >= 0.3);
}

TEST_CASE("growth audit is sound on the unit-weight tree") {
  const int n = 10;
  const long long nv = (1LL << (n + 1)) - 1;
  ConformalWeight unit = ConformalWeight::constant(static_cast<int>(nv));

  CbtAudit probe = cbt_audit(n, unit, 1e9);
  CHECK(probe.growth_ok);
  // At R = 16 a central ball swallows the whole tree: 2047 / 256.
  CHECK(probe.worst_ratio >= 2047.0 / 256.0 - 1e-9);
  CHECK(probe.worst_ratio <= 16.0);
  // Unit diameter 2n = 20, so the dyadic grid runs {1, ..., 64}.
  CHECK(probe.balls_checked == nv * 7);
  CHECK(probe.grid_slack == 4.0);

  CbtAudit a = cbt_audit(n, unit, probe.worst_ratio * (1 + 1e-12));
  CHECK(a.growth_ok);
  CHECK(a.implied_lower > 0.0);
  // Measured long-pair counts can only beat the guaranteed three-quarter
  // floor, never undercut it.
  CHECK(a.measured_lower >= a.implied_lower * (1 - 1e-12));
  CHECK(a.consistent);
  CHECK(a.implied_lower <= a.actual_l2 * (1 + 1e-9) + 1e-12);
  CHECK(a.measured_lower <= a.actual_l2 * (1 + 1e-9) + 1e-12);
  CHECK(a.actual_l2 == Catch::Approx(1.0).margin(1e-9));

  CbtAudit reject = cbt_audit(n, unit, 7.0);
  CHECK_FALSE(reject.growth_ok);
  CHECK(reject.implied_lower == 0.0);
  CHECK(reject.measured_lower == 0.0);
  CHECK(reject.consistent);
}

TEST_CASE("growth audit never reports a violated implication") {
  const int n = 7;
  const long long nv = (1LL << (n + 1)) - 1;
  for (std::uint64_t seed : {901, 902, 903, 904}) {
    CounterRng rng(seed, derive_stream(1));
    std::vector<double> v(static_cast<std::size_t>(nv));
    for (auto& x : v) x = 0.2 + rng.next_double();
    ConformalWeight w = ConformalWeight{v}.normalized_copy();
    CbtAudit probe = cbt_audit(n, w, 1e9);
    REQUIRE(probe.growth_ok);
    CbtAudit a = cbt_audit(n, w, probe.worst_ratio * (1 + 1e-12));
    CHECK(a.growth_ok);
    CHECK(a.consistent);
    CHECK(a.implied_lower <= a.actual_l2 * (1 + 1e-9) + 1e-12);
    CHECK(a.measured_lower <= a.actual_l2 * (1 + 1e-9) + 1e-12);
  }

  ConformalWeight bad_size = ConformalWeight::constant(100);
  CHECK_THROWS_AS(cbt_audit(n, bad_size, 4.0), std::invalid_argument);
  ConformalWeight not_normalized = ConformalWeight::constant(static_cast<int>(nv), 2.0);
  CHECK_THROWS_AS(cbt_audit(n, not_normalized, 4.0), std::invalid_argument);
  ConformalWeight unit = ConformalWeight::constant(static_cast<int>(nv));
  CHECK_THROWS_AS(cbt_audit(n, unit, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(cbt_audit(1, unit, 4.0), std::invalid_argument);
}
