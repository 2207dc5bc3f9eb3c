#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <random>
#include <vector>

#include "shrink/errors.hpp"
#include "shrink/minimax.hpp"
#include "shrink/risksim.hpp"
#include "shrink/shrinkage.hpp"

using namespace shrink;
using namespace shrink::risksim;

namespace {

// mean and standard error of the squared entries
struct Moment {
  double mean, se;
};

Moment second_moment(const ErrorSamples& s) {
  Stats st;
  for (double v : s.data) st.add(v * v);
  return {st.mean(), st.std_error()};
}

class ThreadEnv {
 public:
  explicit ThreadEnv(const char* v) {
    if (const char* old = std::getenv("SHRINK_THREADS")) old_ = old, had_ = true;
    ::setenv("SHRINK_THREADS", v, 1);
  }
  ~ThreadEnv() {
    if (had_) ::setenv("SHRINK_THREADS", old_.c_str(), 1);
    else ::unsetenv("SHRINK_THREADS");
  }

 private:
  std::string old_;
  bool had_ = false;
};

const HyperParams kMono{5, 5, -1, 0, 0};

}  // namespace

TEST_CASE("error laws") {
  const auto normal = sample_errors(SphericalErrorModel::normal(), 3, 4, 2.0, 40000, 9);
  const auto m = second_moment(normal);
  CHECK(std::abs(m.mean - 2.0) < 4 * m.se);

  const auto t7 = sample_errors(SphericalErrorModel::student_t(7), 3, 4, 1.0, 40000, 9);
  const auto mt = second_moment(t7);
  CHECK(std::abs(mt.mean - 7.0 / 5.0) < 5 * mt.se);

  const auto cn = sample_errors(SphericalErrorModel::contaminated_normal(0.1, 3.0), 3, 4, 1.0,
                                40000, 9);
  const auto mc = second_moment(cn);
  CHECK(std::abs(mc.mean - (0.9 + 0.1 * 9.0)) < 4 * mc.se);

  const auto fr = sample_errors(SphericalErrorModel::fixed_radius(2.0), 3, 4, 2.25, 1000, 9);
  for (std::int64_t i = 0; i < fr.count; ++i) {
    double n2 = 0;
    for (double v : fr.row(i)) n2 += v * v;
    CHECK(std::sqrt(n2) == doctest::Approx(3.0).epsilon(1e-13));
  }

  // the direction is uniform: each coordinate has the same second moment
  Stats first, last;
  for (std::int64_t i = 0; i < normal.count; ++i) {
    first.add(normal.row(i)[0] * normal.row(i)[0]);
    last.add(normal.row(i)[6] * normal.row(i)[6]);
  }
  CHECK(std::abs(first.mean() - last.mean()) <
        4 * std::hypot(first.std_error(), last.std_error()));

  CHECK_THROWS_AS(validate(SphericalErrorModel::student_t(0)), ValidationError);
  CHECK_THROWS_AS(validate(SphericalErrorModel::contaminated_normal(1.5, 2)), ValidationError);
  CHECK_THROWS_AS(sample_errors(SphericalErrorModel::normal(), 3, 4, -1.0, 10, 1),
                  ValidationError);
}

TEST_CASE("sampling is deterministic and independent of the worker count") {
  const auto model = SphericalErrorModel::student_t(5);
  const auto a = sample_errors(model, 4, 3, 1.0, 3 * kBlockSize + 17, 42);
  const auto b = sample_errors(model, 4, 3, 1.0, 3 * kBlockSize + 17, 42);
  CHECK(a.data == b.data);
  const auto c = sample_errors(model, 4, 3, 1.0, 3 * kBlockSize + 17, 43);
  CHECK(a.data != c.data);
  // a prefix of a longer run
  const auto shorter = sample_errors(model, 4, 3, 1.0, kBlockSize + 5, 42);
  CHECK(std::equal(shorter.data.begin(), shorter.data.end(), a.data.begin()));

  const std::vector<double> theta{1.0, 0.0, 0.0, 0.0, 0.0};
  const PhiTable table(kMono);
  const PhiFunction phi = [&](double w) { return table(w); };
  PairedRisk r1, r3;
  {
    ThreadEnv env("1");
    CHECK(simulation_threads() == 1);
    r1 = paired_risk(model, 5, phi, theta, 1.0, 50000, 5);
  }
  {
    ThreadEnv env("3");
    CHECK(simulation_threads() == 3);
    r3 = paired_risk(model, 5, phi, theta, 1.0, 50000, 5);
  }
  CHECK(r1.phi.mean == r3.phi.mean);
  CHECK(r1.phi.std_error == r3.phi.std_error);
  CHECK(r1.ls.mean == r3.ls.mean);
  CHECK(r1.difference.mean == r3.difference.mean);
}

TEST_CASE("Stats merge matches a single pass") {
  std::mt19937_64 rng(4);
  std::normal_distribution<double> z(3.0, 2.0);
  Stats whole, left, right;
  for (int i = 0; i < 1000; ++i) {
    const double x = z(rng);
    whole.add(x);
    (i < 377 ? left : right).add(x);
  }
  left.merge(right);
  CHECK(left.count() == 1000);
  CHECK(left.mean() == doctest::Approx(whole.mean()).epsilon(1e-13));
  CHECK(left.variance() == doctest::Approx(whole.variance()).epsilon(1e-12));
  Stats empty;
  empty.merge(whole);
  CHECK(empty.mean() == whole.mean());
}

TEST_CASE("PhiTable interpolates phi") {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(-9.0, 12.0);
  for (const auto& hp : {kMono, HyperParams{5, 5, -1, -0.02, 0}, HyperParams{3, 1, -2.2, 0.3, 1.5}}) {
    const PhiTable t(hp);
    for (int i = 0; i < 300; ++i) {
      const double w = std::pow(10.0, u(rng));
      const double ref = phi_hypergeom(hp, w);
      // linear continuation below the table carries an O(w) relative error
      const double tol = w < 1e-8 ? 1e-7 : 1e-9;
      CHECK(std::abs(t(w) - ref) <= tol * ref);
    }
    CHECK(t(1e-10) == doctest::Approx(phi_slope_at_zero(hp) * 1e-10).epsilon(1e-6));
    CHECK(t(0.0) == 0.0);
  }
}

TEST_CASE("risk of the least squares estimator is p") {
  const std::vector<double> theta{0.5, -1.0, 2.0, 0.0, 0.0};
  const auto r = paired_risk(SphericalErrorModel::normal(), 5,
                             [](double) { return 0.0; }, theta, 1.0, 100000, 3);
  CHECK(std::abs(r.ls.mean - 5.0) < 4 * r.ls.std_error);
  CHECK(std::abs(r.difference.mean) < 1e-12);
  CHECK(r.phi.mean == doctest::Approx(r.ls.mean).epsilon(1e-13));
  CHECK(r.ls.n_samples == 100000);
  CHECK(r.ls.seed == 3);
  CHECK_THROWS_AS(paired_risk(SphericalErrorModel::normal(), 5, [](double) { return 0.0; },
                              theta, 1.0, 9999, 3),
                  ValidationError);
}

TEST_CASE("certified estimators dominate X on a norm grid") {
  const std::vector<double> norms{0, 1, 2, 3, 5, 8};
  for (const auto& model : {SphericalErrorModel::normal(), SphericalErrorModel::student_t(7)}) {
    CAPTURE(model.name());
    REQUIRE(check_moment_condition(model, kMono));
    const auto curve = dominance_curve(model, kMono, norms, 1.0, 100000, 11);
    REQUIRE(curve.size() == norms.size());
    // clear improvement at the origin
    CHECK(curve[0].risk.difference.mean < -10 * curve[0].risk.difference.std_error);
    for (const auto& pt : curve) {
      CHECK(pt.risk.difference.mean <= 3 * pt.risk.difference.std_error);
      // the gain is largest at theta = 0
      CHECK(pt.risk.difference.mean >= curve[0].risk.difference.mean);
    }
  }
  // the gain vanishes as |theta| grows
  const std::vector<double> far{0.0, 100.0};
  const auto c = dominance_curve(SphericalErrorModel::normal(), kMono, far, 1.0, 50000, 2);
  CHECK(std::abs(c[1].risk.difference.mean) < 0.01 * std::abs(c[0].risk.difference.mean));
}

TEST_CASE("invariances") {
  const auto model = SphericalErrorModel::student_t(9);
  // scale: theta -> s theta with sigma2 -> s^2 sigma2 leaves the normalized loss unchanged
  const std::vector<double> t1{1.0, 0.5, 0.0, 0.0, 0.0};
  const std::vector<double> t2{2.0, 1.0, 0.0, 0.0, 0.0};
  const auto r1 = estimate_risk(model, kMono, t1, 1.0, 20000, 6);
  const auto r2 = estimate_risk(model, kMono, t2, 4.0, 20000, 6);
  CHECK(r2.mean == doctest::Approx(r1.mean).epsilon(1e-12));

  // rotation: risk depends on theta through its norm only
  const double r = 2.5;
  const std::vector<double> axis{r, 0, 0, 0, 0};
  std::vector<double> diag(5, r / std::sqrt(5.0));
  const auto ra = estimate_risk(model, kMono, axis, 1.0, 100000, 21);
  const auto rd = estimate_risk(model, kMono, diag, 1.0, 100000, 22);
  CHECK(std::abs(ra.mean - rd.mean) < 4 * std::hypot(ra.std_error, rd.std_error));
}

TEST_CASE("curve csv") {
  const std::vector<double> norms{0, 1};
  const auto c = dominance_curve(SphericalErrorModel::normal(), kMono, norms, 1.0, 10000, 1);
  const auto csv = curve_csv(c);
  CHECK(csv.rfind("theta_norm,risk_phi,se_phi,risk_ls,se_ls,n_samples,seed\n", 0) == 0);
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

TEST_CASE("moment condition") {
  // j = 2(e - a + 1) must stay below the tail index
  CHECK(check_moment_condition(SphericalErrorModel::normal(), {5, 5, -1.9, -0.1, 0}));
  CHECK(check_moment_condition(SphericalErrorModel::student_t(7), {5, 5, -1.9, -0.1, 0}));
  CHECK_FALSE(check_moment_condition(SphericalErrorModel::student_t(5), {5, 5, -1.9, -0.1, 0}));
  CHECK_FALSE(check_moment_condition(SphericalErrorModel::student_t(7), {5, 5, -1.0, 0, 3}));
  CHECK(check_moment_condition(SphericalErrorModel::student_t(9), {5, 5, -1.0, 0, 2}));
  CHECK_FALSE(check_moment_condition(SphericalErrorModel::student_t(6), {5, 5, -1.0, 0, 2}));
  CHECK(check_moment_condition(SphericalErrorModel::fixed_radius(1.0), {5, 5, -1.0, 0, 30}));
  CHECK(check_moment_condition(SphericalErrorModel::contaminated_normal(0.2, 4), {5, 5, -1, 0, 30}));
  SphericalErrorModel bare;
  bare.moment_exponent_bound.reset();
  CHECK_THROWS_AS(check_moment_condition(bare, kMono), ValidationError);
}

TEST_CASE("Stein and chi-square identities under normal errors") {
  const auto checks = check_stein_identities(200000, 99, 4, 6, 1.5);
  const auto lib = stein_library();
  std::size_t h = 0, g = 0;
  for (const auto& name : lib) (name.rfind("h_", 0) == 0 ? h : g)++;
  CHECK(h >= 4);
  CHECK(g >= 4);
  CHECK(checks.size() == 4 * h + g);
  for (const auto& c : checks) {
    CAPTURE(c.name);
    CHECK(c.pass);
    CHECK(c.std_error > 0.0);
    CHECK(std::abs(c.residual) <= 4 * c.std_error);
  }
  const std::vector<std::string> one{"g_identity"};
  const auto only = check_stein_identities(20000, 1, 4, 6, 1.0, one);
  REQUIRE(only.size() == 1);
  // E[S^2] = sigma^4 n(n+2): lhs is E[S g(S)] with g(s) = s
  CHECK(only[0].lhs == doctest::Approx(48.0).epsilon(0.05));
  const std::vector<std::string> bad{"h_nope"};
  CHECK_THROWS_AS(check_stein_identities(20000, 1, 4, 6, 1.0, bad), ValidationError);
  CHECK_THROWS_AS(check_stein_identities(20000, 1, 1, 6, 1.0), ValidationError);
}
