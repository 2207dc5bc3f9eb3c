#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "oracles.hpp"
#include "shrink/errors.hpp"
#include "shrink/minimax.hpp"
#include "shrink/shrinkage.hpp"

using namespace shrink;
using namespace shrink::minimax;

namespace {

// Printed quadratic whose larger root is a*, written out independently of h.
double g_quadratic(double p, double n, double e, double a) {
  return (2 * p + 2 * n + 4 * e + 4) * a * a +
         a * (2 * p * p + 2 * p * n + 12 * p + 7 * n + 4 * (p + 3) * e + 10) +
         4 * p * p + 3.5 * p * n + 6 * (p + 2) * e + 7 * n + 13 * p + 10;
}

double g_larger_root(double p, double n, double e) {
  const double A = 2 * p + 2 * n + 4 * e + 4;
  const double B = 2 * p * p + 2 * p * n + 12 * p + 7 * n + 4 * (p + 3) * e + 10;
  const double C = 4 * p * p + 3.5 * p * n + 6 * (p + 2) * e + 7 * n + 13 * p + 10;
  const double disc = std::sqrt(B * B - 4 * A * C);
  return A > 0 ? (-B + disc) / (2 * A) : (-B - disc) / (2 * A);
}

}  // namespace

TEST_CASE("c(p,n) and u*") {
  CHECK(c_pn(5, 5) == doctest::Approx(6.0 / 7.0).epsilon(1e-15));
  CHECK(u_star(5, 5, 0) == doctest::Approx(-9.5 / 13.0).epsilon(1e-14));
  for (int p : {3, 4, 7, 12}) {
    for (int n : {1, 2, 6, 20}) {
      for (double e : {-2.0, -1.0, 0.0, 0.7, 3.0}) {
        const double c = 2.0 * (p - 2.0) / (n + 2.0);
        const double shifted = (p - 2.0) * (n + 4 * e + 6) / (2 * (n + 2.0) * (1 + c));
        CHECK(u_star(p, n, e) + 2.0 == doctest::Approx(shifted).epsilon(1e-12));
        CHECK((u_star(p, n, e) > -2.0) == (e > -0.25 * n - 1.5));
        // alpha at u* equals c(p,n)
        const double a = u_star(p, n, e);
        const double alpha = (0.5 * p + a + 1) / (0.5 * n + e - a);
        if (0.5 * n + e - a > 0) CHECK(alpha == doctest::Approx(c).epsilon(1e-12));
      }
    }
  }
}

TEST_CASE("sufficient condition for constant phi") {
  const auto grid = log_grid(1e-3, 1e4, 50);
  // phi = 0 gives 0 everywhere
  auto zero = scan_theorem21(3, 1, [](double) { return PhiPoint{0.0, 0.0}; }, grid, 0.0, 0.0);
  CHECK(zero.scan_max == 0.0);
  CHECK(zero.overall() <= 0.0);
  // phi = c(3,1) = 2/3 is the boundary
  auto edge = scan_theorem21(3, 1, [](double) { return PhiPoint{2.0 / 3.0, 0.0}; }, grid, 0.0, 0.0);
  CHECK(std::abs(edge.scan_max) < 1e-15);
  // James-Stein constants: negative below c, positive above
  auto below = scan_theorem21(5, 5, [](double) { return PhiPoint{0.5, 0.0}; }, grid, 0.0, 0.0);
  CHECK(below.scan_max < 0.0);
  CHECK(below.argmax_w == grid.back());
  auto above = scan_theorem21(5, 5, [](double) { return PhiPoint{0.9, 0.0}; }, grid, 0.0, 0.0);
  CHECK(above.scan_max > 0.0);
  CHECK(above.argmax_w == grid.front());
  CHECK(sufficient_condition(5, 5, 2.0, 0.5, 0.1) ==
        doctest::Approx(0.25 * (3.5 - 6.0) - 0.4 * 1.5).epsilon(1e-15));
  const std::vector<double> bad{1.0, -1.0};
  CHECK_THROWS_AS(scan_theorem21(3, 1, [](double) { return PhiPoint{0.0, 0.0}; }, bad, 0.0, 0.0),
                  ValidationError);
}

TEST_CASE("scan of the generalized Bayes phi uses the analytic limit at 0") {
  const HyperParams hp{5, 5, -1, 0, 0};
  const auto grid = standard_w_grid();
  const auto s = scan_theorem21(hp, grid);
  CHECK(s.limit_zero == doctest::Approx(-2.0 * 5 * 2.5 / 3.5).epsilon(1e-14));
  CHECK(s.limit_infinity == 0.0);
  CHECK(s.overall() <= 1e-9);
  // independent evaluation at one point from the tanh-sinh oracle
  const double w = 2.0, h = 1e-3;
  const double phi = oracle::phi(hp, w);
  const double dphi = oracle::derivative([&](double x) { return oracle::phi(hp, x); }, w, h);
  const double expect = phi / w * (7.0 * phi - 6.0) - 4.0 * dphi * (1.0 + phi);
  const std::vector<double> one{w};
  CHECK(scan_theorem21(hp, one).scan_max == doctest::Approx(expect).epsilon(1e-7));
}

TEST_CASE("corollary: monotone phi with alpha <= c(p,n)") {
  const auto a = check_corollary_monotone({5, 5, 1, 0, 0});
  CHECK_FALSE(a.certified);  // alpha = 3
  CHECK(a.constants.alpha == doctest::Approx(3.0));
  const auto b = check_corollary_monotone({3, 1, -2.5 + 1e-3, 0, 0});
  CHECK(b.certified);
  CHECK(b.route == Route::CorMonotone);
  CHECK_FALSE(check_corollary_monotone({5, 5, -1, -0.02, 0}).certified);
}

TEST_CASE("corollary: M1/M2") {
  const HyperParams hp{5, 5, -1, -0.02, 0};
  const auto v = check_corollary_m1m2(hp);
  REQUIRE(v.constants.m1);
  REQUIRE(v.constants.m2);
  CHECK(v.certified);
  CHECK(v.route == Route::CorM1M2);
  CHECK(m1m2_expression(5, 5, *v.constants.m1, *v.constants.m2) <= 0.0);
  CHECK_FALSE(check_corollary_m1m2({5, 5, -1, -0.3, 0}).certified);
  CHECK_THROWS_AS(check_corollary_m1m2({5, 5, -1, 0.5, 0}), ValidationError);

  // At b equal to the main-theorem lower bound the M1/M2 expression is zero.
  for (const auto& base : {HyperParams{5, 5, -1, 0, 0}, HyperParams{8, 10, 0, 0, 1},
                           HyperParams{4, 3, -1.5, 0, 0.5}}) {
    HyperParams hp2 = base;
    hp2.b = main_b_lower_bound(base);
    CAPTURE(hp2.p);
    REQUIRE(hp2.b > -1.0);
    REQUIRE(hp2.b < 0.0);
    const auto bounds = phi_bounds(hp2);
    REQUIRE(bounds.m1);
    CHECK(std::abs(m1m2_expression(hp2.p, hp2.n, *bounds.m1, *bounds.m2)) < 1e-12);
  }
}

TEST_CASE("main theorem examples") {
  const auto i = check_main_theorem({5, 5, -1, 0, 0});
  CHECK(i.certified);
  CHECK(i.route == Route::MainThmI);
  const auto ii = check_main_theorem({5, 5, -1, -0.02, 0});
  CHECK(ii.certified);
  CHECK(ii.route == Route::MainThmII);
  CHECK(*ii.constants.m1 == doctest::Approx(0.73964).epsilon(1e-4));
  CHECK_FALSE(check_main_theorem({5, 5, -1, -0.05, 0}).certified);
  CHECK(check_main_theorem({5, 5, u_star(5, 5, 0), 0, 0}).route == Route::MainThmI);
  CHECK_FALSE(check_main_theorem({5, 5, u_star(5, 5, 0) + 1e-6, 0, 0}).certified);
  CHECK_THROWS_AS(check_main_theorem({5, 5, -1, 0, -6.5}), ValidationError);
  CHECK_THROWS_AS(check_main_theorem({2, 5, -1, 0, 0}), ValidationError);
}

TEST_CASE("route (i) agrees with the monotone corollary") {
  std::mt19937_64 rng(3);
  int agree = 0;
  for (int k = 0; k < 300; ++k) {
    const auto hp = oracle::random_hp(rng, k % 2 == 0);
    const bool mono = check_corollary_monotone(hp).certified;
    const bool main_i = check_main_theorem(hp).route == Route::MainThmI;
    CHECK(mono == main_i);
    agree += mono;
  }
  CHECK(agree > 0);
}

TEST_CASE("certified configurations pass the numerical scan") {
  std::mt19937_64 rng(17);
  const auto grid = standard_w_grid();
  int seen_i = 0, seen_ii = 0;
  for (int k = 0; k < 4000 && (seen_i < 15 || seen_ii < 15); ++k) {
    auto hp = oracle::random_hp(rng, k % 3 != 0);
    hp.a = std::min(hp.a, u_star(hp.p, hp.n, hp.e) - 1e-3);
    if (!(hp.a > -0.5 * hp.p - 1.0)) continue;
    if (k % 3 != 0) {
      // pull b into the admissible window
      const double lo = main_b_lower_bound(hp);
      const double hi = std::min(0.0, 0.5 * hp.n + hp.e - hp.a - 1.0);
      if (lo <= -1.0 || lo >= hi) continue;
      hp.b = lo + (hi - lo) * 0.5 * (1.0 + std::sin(k));
      if (hp.b >= hi) continue;
    }
    const auto v = check_main_theorem(hp);
    if (!v.certified) continue;
    (v.route == Route::MainThmI ? seen_i : seen_ii)++;
    CAPTURE(hp.p); CAPTURE(hp.n); CAPTURE(hp.a); CAPTURE(hp.b); CAPTURE(hp.e);
    CHECK(scan_theorem21(hp, grid).overall() <= 1e-9);
  }
  CHECK(seen_i >= 15);
  CHECK(seen_ii >= 15);
}

TEST_CASE("uncertified configurations beyond the boundary fail the scan") {
  const auto grid = standard_w_grid();
  // alpha > c(p,n): the condition turns positive at large w
  CHECK_FALSE(certify_by_scan({5, 5, u_star(5, 5, 0) + 0.3, 0, 0}, grid).certified);
  CHECK_FALSE(certify_by_scan({5, 5, 1, 0, 0}, grid).certified);
  // b far below the window
  CHECK_FALSE(certify_by_scan({5, 5, -1, -0.6, 0}, grid).certified);
  const auto ok = certify_by_scan({5, 5, -1, 0, 0}, grid);
  CHECK(ok.certified);
  CHECK(ok.route == Route::Thm21Scan);
}

TEST_CASE("h and a*") {
  CHECK(h_function(5, 5, 0, -2) == doctest::Approx(11.0 / 64.0).epsilon(1e-14));
  CHECK(h_function(5, 5, 0, -1) == doctest::Approx(-1.0 + 7.0 / 240.0).epsilon(1e-14));
  for (int p : {3, 5, 8}) {
    for (int n : {2, 5, 10}) {
      double prev = 0;
      for (double e : {-1.0, -0.5, 0.0, 1.0, 3.0}) {
        CAPTURE(p); CAPTURE(n); CAPTURE(e);
        const double as = find_a_star(p, n, e);
        CHECK(as > -2.0);
        CHECK(as < -1.0);
        CHECK(as < u_star(p, n, e));
        CHECK(std::abs(h_function(p, n, e, as)) < 1e-10);
        CHECK(h_function(p, n, e, -2.0) > 0.0);
        CHECK(h_function(p, n, e, -1.0) < 0.0);
        // larger root of the printed quadratic, sign convention flipped
        CHECK(as == doctest::Approx(g_larger_root(p, n, e)).epsilon(1e-9));
        CHECK(g_quadratic(p, n, e, -2.0) < 0.0);
        CHECK(g_quadratic(p, n, e, -1.0) > 0.0);
        // a* moves continuously and monotonically with e
        if (e > -1.0) CHECK(as > prev);
        prev = as;
      }
    }
  }
  CHECK_THROWS_AS(find_a_star(5, 1, 0), ValidationError);
  CHECK_THROWS_AS(find_a_star(5, 5, -3), ValidationError);
}

TEST_CASE("b = -a-2 family: h >= 0 matches the main theorem's b bound") {
  for (double a = -1.99; a < -1.0; a += 0.01) {
    const HyperParams hp{5, 5, a, -a - 2.0, 0};
    const bool h_ok = h_function(5, 5, 0, a) >= 0.0;
    const bool in_window = hp.b >= main_b_lower_bound(hp);
    CHECK(h_ok == in_window);
  }
}

TEST_CASE("check_spherical") {
  // e <= -n/4-3/2 uses u*
  const double us = u_star(5, 5, -3);
  CHECK(us == doctest::Approx(-27.5 / 13.0).epsilon(1e-13));
  const auto i = check_spherical({5, 5, -3, -2.5}, true);
  CHECK(i.certified);
  CHECK(i.route == Route::SphericalI);
  CHECK_FALSE(check_spherical({5, 5, -3, -2.1}, true).certified);

  // e > -n/4-3/2 uses a*
  const double as = find_a_star(5, 5, 0);
  CHECK(check_spherical({5, 5, 0, -2.0}, true).certified);
  const auto ii = check_spherical({5, 5, 0, 0.5 * (-2.0 + as)}, true);
  CHECK(ii.certified);
  CHECK(ii.route == Route::SphericalII);
  CHECK(*ii.a_star == doctest::Approx(as));
  CHECK(check_spherical({5, 5, 0, as - 1e-9}, true).certified);
  CHECK_FALSE(check_spherical({5, 5, 0, as + 1e-6}, true).certified);
  CHECK_FALSE(check_spherical({5, 5, 0, -1.9}, false).certified);
  CHECK(check_spherical({5, 5, 0, -1.9}, false).route == Route::None);
  // n = 1 cannot use the a* route
  CHECK_FALSE(check_spherical({5, 1, 0, -1.5}, true).certified);
  CHECK_THROWS_AS(check_spherical({5, 5, 0, -0.5}, true), ValidationError);
  CHECK_THROWS_AS(check_spherical({5, 5, 0, -3.6}, true), ValidationError);

  // certified spherical configurations agree with the normal-theory scan
  const auto grid = standard_w_grid();
  for (double a : {-2.4, -2.0, -1.95, as}) {
    CAPTURE(a);
    CHECK(scan_theorem21(SphericalParams{5, 5, 0, a}.hyper(), grid).overall() <= 1e-9);
  }
}
