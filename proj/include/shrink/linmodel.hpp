#pragma once

// Canonical reduction of Y = A beta + eps. With (A'A)^-1 = P D P',
// X = D^-1/2 P' beta_hat and S = |y - A beta_hat|^2, the problem becomes
// estimation of the mean of X under loss |delta - theta|^2 / sigma^2.

#include <Eigen/Dense>
#include <string>
#include <vector>

namespace shrink::linmodel {

struct RegressionData {
  Eigen::VectorXd y;         // N responses
  Eigen::MatrixXd a_matrix;  // N x p design
  std::vector<std::string> column_names;  // optional, size p when present
};

struct CanonicalForm {
  Eigen::VectorXd x;         // p
  double s = 0;              // residual sum of squares
  Eigen::MatrixXd p_matrix;  // p x p orthogonal, columns are eigenvectors
  Eigen::VectorXd d_diag;    // eigenvalues of (A'A)^-1, nonincreasing
  Eigen::VectorXd beta_hat;  // least squares estimate
  int n = 0;                 // N - p
};

// Rank check uses sigma_min < 1e-10 sigma_max. Requires p >= 3, N - p >= 1.
// Eigenvector signs are fixed so that each column's largest-magnitude entry
// is positive (first such entry on ties).
CanonicalForm to_canonical(const RegressionData& data);

// beta = P D^1/2 theta
Eigen::VectorXd from_canonical(const CanonicalForm& cf,
                               const Eigen::VectorXd& theta_hat);

// (b - beta)' A'A (b - beta) / sigma2
double loss(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta,
            double sigma2, const Eigen::MatrixXd& a_matrix);

// |theta_hat - theta|^2 / sigma2
double canonical_loss(const Eigen::VectorXd& theta_hat,
                      const Eigen::VectorXd& theta, double sigma2);

// Header row, then one row per observation: response first, design columns
// after. With `intercept`, a leading column of ones is added to the design.
// Throws IoError on unreadable files and malformed rows.
RegressionData read_csv(const std::string& path, bool intercept = false);
RegressionData parse_csv(const std::string& text, bool intercept = false);

}  // namespace shrink::linmodel
