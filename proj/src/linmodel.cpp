#include "shrink/linmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "shrink/errors.hpp"

namespace shrink::linmodel {

CanonicalForm to_canonical(const RegressionData& data) {
  const auto& a = data.a_matrix;
  const Eigen::Index big_n = a.rows();
  const Eigen::Index p = a.cols();
  if (data.y.size() != big_n) {
    throw ValidationError("to_canonical: y has " + std::to_string(data.y.size()) +
                          " rows, design has " + std::to_string(big_n));
  }
  if (p < 3) throw ValidationError("to_canonical: need p >= 3 columns");
  if (big_n - p < 1) throw ValidationError("to_canonical: need N - p >= 1");
  if (!a.allFinite() || !data.y.allFinite()) {
    throw ValidationError("to_canonical: non-finite data");
  }

  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();  // nonincreasing
  if (!(sv(p - 1) >= 1e-10 * sv(0)) || sv(0) == 0.0) {
    throw ValidationError("to_canonical: design is rank deficient (singular values " +
                          std::to_string(sv(0)) + " .. " + std::to_string(sv(p - 1)) + ")");
  }

  // d_i = 1 / sigma_i^2 is nonincreasing when sigma is taken in increasing
  // order, so reverse the SVD ordering.
  CanonicalForm cf;
  cf.n = static_cast<int>(big_n - p);
  cf.p_matrix.resize(p, p);
  cf.d_diag.resize(p);
  Eigen::VectorXd sigma(p);
  Eigen::MatrixXd u(big_n, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    const Eigen::Index src = p - 1 - j;
    sigma(j) = sv(src);
    cf.d_diag(j) = 1.0 / (sv(src) * sv(src));
    Eigen::VectorXd col = svd.matrixV().col(src);
    Eigen::VectorXd ucol = svd.matrixU().col(src);
    Eigen::Index lead = 0;
    for (Eigen::Index i = 1; i < p; ++i) {
      if (std::abs(col(i)) > std::abs(col(lead))) lead = i;
    }
    if (col(lead) < 0.0) {
      col = -col;
      ucol = -ucol;
    }
    cf.p_matrix.col(j) = col;
    u.col(j) = ucol;
  }

  // Equal eigenvalues leave P free within their eigenspace; order such
  // columns by the row of their leading entry so that, for instance, an
  // orthonormal design gives P = I.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(p));
  std::vector<Eigen::Index> lead_row(static_cast<std::size_t>(p));
  for (Eigen::Index j = 0; j < p; ++j) {
    order[j] = j;
    Eigen::Index lead = 0;
    for (Eigen::Index i = 1; i < p; ++i) {
      if (std::abs(cf.p_matrix(i, j)) > std::abs(cf.p_matrix(lead, j))) lead = i;
    }
    lead_row[j] = lead;
  }
  for (Eigen::Index start = 0; start < p;) {
    Eigen::Index stop = start + 1;
    while (stop < p && std::abs(sigma(stop) - sigma(start)) <= 1e-12 * sigma(start)) ++stop;
    std::stable_sort(order.begin() + start, order.begin() + stop,
                     [&](Eigen::Index l, Eigen::Index r) { return lead_row[l] < lead_row[r]; });
    start = stop;
  }
  {
    const Eigen::MatrixXd pm = cf.p_matrix, um = u;
    const Eigen::VectorXd dd = cf.d_diag, sg = sigma;
    for (Eigen::Index j = 0; j < p; ++j) {
      cf.p_matrix.col(j) = pm.col(order[j]);
      u.col(j) = um.col(order[j]);
      cf.d_diag(j) = dd(order[j]);
      sigma(j) = sg(order[j]);
    }
  }

  // beta_hat = P diag(1/sigma) U'y and x = D^-1/2 P' beta_hat.
  const Eigen::VectorXd uty = u.transpose() * data.y;
  cf.beta_hat = cf.p_matrix * uty.cwiseQuotient(sigma);
  cf.x = cf.d_diag.cwiseSqrt().cwiseInverse().cwiseProduct(cf.p_matrix.transpose() * cf.beta_hat);
  const Eigen::VectorXd resid = data.y - a * cf.beta_hat;
  cf.s = resid.squaredNorm();
  return cf;
}

Eigen::VectorXd from_canonical(const CanonicalForm& cf,
                               const Eigen::VectorXd& theta_hat) {
  if (theta_hat.size() != cf.p_matrix.cols()) {
    throw ValidationError("from_canonical: dimension mismatch");
  }
  return cf.p_matrix * cf.d_diag.cwiseSqrt().cwiseProduct(theta_hat);
}

double loss(const Eigen::VectorXd& beta_hat, const Eigen::VectorXd& beta,
            double sigma2, const Eigen::MatrixXd& a_matrix) {
  if (!(sigma2 > 0.0)) throw ValidationError("loss: sigma2 must be positive");
  return (a_matrix * (beta_hat - beta)).squaredNorm() / sigma2;
}

double canonical_loss(const Eigen::VectorXd& theta_hat,
                      const Eigen::VectorXd& theta, double sigma2) {
  if (!(sigma2 > 0.0)) throw ValidationError("canonical_loss: sigma2 must be positive");
  return (theta_hat - theta).squaredNorm() / sigma2;
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream is(line);
  while (std::getline(is, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r");
    const auto last = cell.find_last_not_of(" \t\r");
    out.push_back(first == std::string::npos ? "" : cell.substr(first, last - first + 1));
  }
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_number(const std::string& cell, int row, std::size_t col) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(cell, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != cell.size() || !std::isfinite(v)) {
    throw IoError("csv: row " + std::to_string(row) + ", column " +
                  std::to_string(col + 1) + ": not a number: '" + cell + "'");
  }
  return v;
}

}  // namespace

RegressionData parse_csv(const std::string& text, bool intercept) {
  std::istringstream is(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(is, line)) {
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  header = split_row(line);
  if (header.size() < 2) {
    throw IoError("csv: header needs a response column and at least one design column");
  }
  const std::size_t width = header.size();
  std::vector<std::vector<double>> rows;
  int row_no = 1;
  while (std::getline(is, line)) {
    ++row_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_row(line);
    if (cells.size() != width) {
      throw IoError("csv: row " + std::to_string(row_no) + " has " +
                    std::to_string(cells.size()) + " fields, header has " +
                    std::to_string(width));
    }
    std::vector<double> r(width);
    for (std::size_t j = 0; j < width; ++j) r[j] = parse_number(cells[j], row_no, j);
    rows.push_back(std::move(r));
  }
  if (rows.empty()) throw IoError("csv: no data rows");

  const Eigen::Index big_n = static_cast<Eigen::Index>(rows.size());
  const Eigen::Index offset = intercept ? 1 : 0;
  const Eigen::Index p = static_cast<Eigen::Index>(width) - 1 + offset;
  RegressionData data;
  data.y.resize(big_n);
  data.a_matrix.resize(big_n, p);
  for (Eigen::Index i = 0; i < big_n; ++i) {
    data.y(i) = rows[i][0];
    if (intercept) data.a_matrix(i, 0) = 1.0;
    for (std::size_t j = 1; j < width; ++j) {
      data.a_matrix(i, offset + static_cast<Eigen::Index>(j) - 1) = rows[i][j];
    }
  }
  if (intercept) data.column_names.push_back("(intercept)");
  data.column_names.insert(data.column_names.end(), header.begin() + 1, header.end());
  return data;
}

RegressionData read_csv(const std::string& path, bool intercept) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), intercept);
}

}  // namespace shrink::linmodel
