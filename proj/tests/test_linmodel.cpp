#include <doctest.h>

#include <Eigen/Dense>
#include <cmath>
#include <random>
#include <string>

#include "shrink/errors.hpp"
#include "shrink/linmodel.hpp"
#include "shrink/shrinkage.hpp"

using namespace shrink::linmodel;

namespace {

const std::string kFixtures = SHRINK_FIXTURES;

Eigen::MatrixXd random_matrix(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> z;
  Eigen::MatrixXd m(rows, cols);
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) m(i, j) = z(rng);
  return m;
}

Eigen::VectorXd random_vector(std::mt19937_64& rng, int n) {
  return random_matrix(rng, n, 1).col(0);
}

}  // namespace

TEST_CASE("orthonormal design reduces to identity") {
  const auto data = read_csv(kFixtures + "/orthonormal.csv");
  REQUIRE(data.a_matrix.rows() == 10);
  REQUIRE(data.a_matrix.cols() == 5);
  CHECK(data.column_names.size() == 5);
  const auto cf = to_canonical(data);
  CHECK(cf.n == 5);
  CHECK((cf.p_matrix - Eigen::MatrixXd::Identity(5, 5)).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cf.d_diag.array() - 1.0).abs().maxCoeff() < 1e-12);
  const Eigen::VectorXd aty = data.a_matrix.transpose() * data.y;
  CHECK((cf.x - aty).cwiseAbs().maxCoeff() < 1e-12);
  CHECK((cf.beta_hat - aty).cwiseAbs().maxCoeff() < 1e-12);
  CHECK(cf.s == doctest::Approx(data.y.squaredNorm() - aty.squaredNorm()).epsilon(1e-12));
}

TEST_CASE("hand-computed 6x3 instance") {
  const auto data = read_csv(kFixtures + "/hand6x3.csv");
  const auto cf = to_canonical(data);
  // A'A = 4I, so D = I/4, P = I and X = 2 beta_hat.
  CHECK(cf.beta_hat(0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(cf.beta_hat(1) == doctest::Approx(-2.0).epsilon(1e-14));
  CHECK(cf.beta_hat(2) == doctest::Approx(3.0).epsilon(1e-14));
  CHECK(cf.x(0) == doctest::Approx(2.0).epsilon(1e-14));
  CHECK(cf.x(1) == doctest::Approx(-4.0).epsilon(1e-14));
  CHECK(cf.x(2) == doctest::Approx(6.0).epsilon(1e-14));
  CHECK(cf.s == doctest::Approx(9.0).epsilon(1e-14));
  CHECK(cf.n == 3);
  CHECK((cf.d_diag.array() - 0.25).abs().maxCoeff() < 1e-14);
  CHECK(cf.x.squaredNorm() / cf.s == doctest::Approx(56.0 / 9.0).epsilon(1e-14));
  CHECK((from_canonical(cf, cf.x) - cf.beta_hat).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("canonical invariants on random designs") {
  std::mt19937_64 rng(2024);
  for (int k = 0; k < 100; ++k) {
    const int p = 3 + k % 6, big_n = p + 1 + k % 9;
    RegressionData data{random_vector(rng, big_n), random_matrix(rng, big_n, p), {}};
    // uneven column scales spread the eigenvalues
    for (int j = 0; j < p; ++j) data.a_matrix.col(j) *= 1.0 + j;
    const auto cf = to_canonical(data);
    CAPTURE(k);
    // P orthogonal
    const Eigen::MatrixXd ptp = cf.p_matrix.transpose() * cf.p_matrix;
    CHECK((ptp - Eigen::MatrixXd::Identity(p, p)).cwiseAbs().maxCoeff() < 1e-12);
    // D nonincreasing, and P D P' = (A'A)^-1
    for (int j = 1; j < p; ++j) CHECK(cf.d_diag(j) <= cf.d_diag(j - 1));
    const Eigen::MatrixXd ata_inv = (data.a_matrix.transpose() * data.a_matrix).inverse();
    const Eigen::MatrixXd pdp = cf.p_matrix * cf.d_diag.asDiagonal() * cf.p_matrix.transpose();
    CHECK((pdp - ata_inv).cwiseAbs().maxCoeff() < 1e-10 * ata_inv.cwiseAbs().maxCoeff());
    // sign rule: the largest entry of each column is positive
    for (int j = 0; j < p; ++j) {
      Eigen::Index at;
      cf.p_matrix.col(j).cwiseAbs().maxCoeff(&at);
      CHECK(cf.p_matrix(at, j) > 0.0);
    }
    // least squares normal equations and the residual sum of squares
    const Eigen::VectorXd resid = data.y - data.a_matrix * cf.beta_hat;
    CHECK((data.a_matrix.transpose() * resid).cwiseAbs().maxCoeff() < 1e-9);
    CHECK(cf.s == doctest::Approx(resid.squaredNorm()).epsilon(1e-10));

    // round trip
    CHECK((from_canonical(cf, cf.x) - cf.beta_hat).cwiseAbs().maxCoeff() <
          1e-12 * std::max(1.0, cf.beta_hat.cwiseAbs().maxCoeff()));

    // beta-space loss equals canonical loss with theta = D^-1/2 P' beta
    const Eigen::VectorXd beta = random_vector(rng, p);
    const Eigen::VectorXd theta_hat = random_vector(rng, p);
    const Eigen::VectorXd b = from_canonical(cf, theta_hat);
    const Eigen::VectorXd theta =
        cf.d_diag.cwiseSqrt().cwiseInverse().asDiagonal() * (cf.p_matrix.transpose() * beta);
    const double sigma2 = 0.5 + k * 0.01;
    const double lb = loss(b, beta, sigma2, data.a_matrix);
    const double lc = canonical_loss(theta_hat, theta, sigma2);
    CHECK(std::abs(lb - lc) <= 1e-10 * std::max(1.0, lc));
  }
}

TEST_CASE("|x|^2 and s are invariant under orthogonal left multiplication") {
  std::mt19937_64 rng(7);
  for (int k = 0; k < 20; ++k) {
    const int p = 4, big_n = 11;
    RegressionData data{random_vector(rng, big_n), random_matrix(rng, big_n, p), {}};
    const Eigen::MatrixXd q = random_matrix(rng, big_n, big_n).householderQr().householderQ();
    RegressionData rotated{q * data.y, q * data.a_matrix, {}};
    const auto c1 = to_canonical(data);
    const auto c2 = to_canonical(rotated);
    CHECK(c2.x.squaredNorm() == doctest::Approx(c1.x.squaredNorm()).epsilon(1e-10));
    CHECK(c2.s == doctest::Approx(c1.s).epsilon(1e-10));
    CHECK((c2.beta_hat - c1.beta_hat).cwiseAbs().maxCoeff() < 1e-10);
  }
}

TEST_CASE("shrinkage estimate maps back to beta space") {
  const auto data = read_csv(kFixtures + "/hand6x3.csv");
  const auto cf = to_canonical(data);
  const shrink::HyperParams hp{3, 3, -1, 0, 0};
  const std::vector<double> x(cf.x.data(), cf.x.data() + cf.x.size());
  const auto est = shrink::estimate_with_diagnostics(hp, x, cf.s);
  const Eigen::VectorXd theta_hat = Eigen::Map<const Eigen::VectorXd>(est.theta.data(), 3);
  const Eigen::VectorXd b = from_canonical(cf, theta_hat);
  CHECK((b - est.multiplier * cf.beta_hat).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("errors") {
  std::mt19937_64 rng(1);
  Eigen::MatrixXd a = random_matrix(rng, 8, 4);
  a.col(3) = a.col(0) + 2.0 * a.col(1);
  CHECK_THROWS_AS(to_canonical({random_vector(rng, 8), a, {}}), shrink::ValidationError);
  CHECK_THROWS_AS(to_canonical({random_vector(rng, 3), random_matrix(rng, 3, 3), {}}),
                  shrink::ValidationError);
  CHECK_THROWS_AS(to_canonical({random_vector(rng, 8), random_matrix(rng, 8, 2), {}}),
                  shrink::ValidationError);
  CHECK_THROWS_AS(to_canonical({random_vector(rng, 7), random_matrix(rng, 8, 4), {}}),
                  shrink::ValidationError);
  CHECK_THROWS_AS(read_csv(kFixtures + "/malformed.csv"), shrink::IoError);
  CHECK_THROWS_AS(read_csv(kFixtures + "/no_such_file.csv"), shrink::IoError);
  CHECK_THROWS_AS(parse_csv("y\n1\n2\n"), shrink::IoError);
  CHECK_THROWS_AS(parse_csv("y,a,b\n1,2\n"), shrink::IoError);
  CHECK_THROWS_AS(parse_csv("y,a\n"), shrink::IoError);
  CHECK_THROWS_AS(loss(Eigen::VectorXd::Zero(3), Eigen::VectorXd::Zero(3), 0.0,
                       Eigen::MatrixXd::Identity(3, 3)),
                  shrink::ValidationError);
}

TEST_CASE("intercept column") {
  const auto d = parse_csv("y,u,v\n1,2,3\n4,5,6\n7,8,10\n", true);
  REQUIRE(d.a_matrix.cols() == 3);
  CHECK(d.a_matrix.col(0).isOnes());
  CHECK(d.a_matrix(2, 2) == 10.0);
  CHECK(d.y(1) == 4.0);
  const auto plain = parse_csv("y,u,v\n1,2,3\n4,5,6\n", false);
  CHECK(plain.a_matrix.cols() == 2);
  CHECK(plain.column_names.size() == 2);
}
