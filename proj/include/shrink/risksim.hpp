#pragma once

// Monte Carlo risk machinery for the canonical problem: spherically
// symmetric error laws, paired risk estimates with common random numbers,
// the moment condition of the b = -a-2 family, and empirical Stein and
// chi-square identity checks under normal errors.

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "shrink/shrinkage.hpp"

namespace shrink::risksim {

enum class ErrorKind { Normal, StudentT, ContaminatedNormal, FixedRadius };
const char* to_string(ErrorKind k);

// Error vector eps = sigma * R * U with U uniform on the unit sphere of
// R^(p+n) and R drawn from the radial law of `kind`.
struct SphericalErrorModel {
  ErrorKind kind = ErrorKind::Normal;
  double df = 0;      // StudentT
  double eps = 0;     // ContaminatedNormal: mixing weight of the wide part
  double scale = 1;   // ContaminatedNormal: scale of the wide part
  double radius = 1;  // FixedRadius
  // Supremum of the orders j with E|eps|^j finite (exclusive); +inf when
  // every moment exists. Empty for laws without moment metadata.
  std::optional<double> moment_exponent_bound;

  static SphericalErrorModel normal();
  static SphericalErrorModel student_t(double df);
  static SphericalErrorModel contaminated_normal(double eps, double scale);
  static SphericalErrorModel fixed_radius(double r);

  std::string name() const;
};

void validate(const SphericalErrorModel& m);

struct RiskEstimate {
  double mean = 0;
  double std_error = 0;  // sample sd / sqrt(n_samples)
  std::int64_t n_samples = 0;
  std::uint64_t seed = 0;
};

// Running mean and variance; merge() combines blocks in a fixed order.
class Stats {
 public:
  void add(double x);
  void merge(const Stats& other);
  std::int64_t count() const { return n_; }
  double mean() const { return mean_; }
  double variance() const;  // sample variance
  double std_error() const;
  RiskEstimate estimate(std::uint64_t seed) const;

 private:
  std::int64_t n_ = 0;
  double mean_ = 0;
  double m2_ = 0;
};

// Draws are generated in blocks of kBlockSize; block k is seeded from
// (seed, k) alone, so results do not depend on the number of workers.
inline constexpr std::int64_t kBlockSize = 8192;

// Worker count: SHRINK_THREADS when set (1..256), else the hardware count.
int simulation_threads();

struct ErrorSamples {
  int p = 0;
  int n = 0;
  std::int64_t count = 0;
  std::vector<double> data;  // row-major, count x (p + n)

  std::span<const double> row(std::int64_t i) const {
    return {data.data() + i * (p + n), static_cast<std::size_t>(p + n)};
  }
};

ErrorSamples sample_errors(const SphericalErrorModel& model, int p, int n,
                           double sigma2, std::int64_t count, std::uint64_t seed);

// phi on a log-spaced Hermite table over [1e-8, 1e12] using exact slopes,
// phi ~ phi'(0) w below the table and direct evaluation above it.
class PhiTable {
 public:
  explicit PhiTable(const HyperParams& hp, int nodes = 4001);
  double operator()(double w) const;
  const HyperParams& hyper() const { return hp_; }

 private:
  HyperParams hp_;
  double log_lo_, log_hi_, step_;
  double slope0_;
  std::vector<double> value_, dvalue_;  // phi and d phi / d log w
};

// phi(w); the identically zero function gives the least squares estimator.
using PhiFunction = std::function<double(double)>;

struct PairedRisk {
  RiskEstimate phi;         // delta_phi
  RiskEstimate ls;          // X
  RiskEstimate difference;  // delta_phi - X on the same draws
};

// E |delta - theta|^2 / sigma2 with X = theta + eps_1, S = |eps_2|^2.
// Requires count >= 1e4.
PairedRisk paired_risk(const SphericalErrorModel& model, int n,
                       const PhiFunction& phi, std::span<const double> theta,
                       double sigma2, std::int64_t count, std::uint64_t seed);

RiskEstimate estimate_risk(const SphericalErrorModel& model, const HyperParams& hp,
                           std::span<const double> theta, double sigma2,
                           std::int64_t count, std::uint64_t seed);

struct CurvePoint {
  double theta_norm = 0;
  PairedRisk risk;
};

// Risks along theta = |theta| e_1, every point on the same seed.
std::vector<CurvePoint> dominance_curve(const SphericalErrorModel& model,
                                        const HyperParams& hp,
                                        std::span<const double> theta_norms,
                                        double sigma2, std::int64_t count,
                                        std::uint64_t seed);

std::vector<CurvePoint> dominance_curve(const SphericalErrorModel& model, int p,
                                        int n, const PhiFunction& phi,
                                        std::span<const double> theta_norms,
                                        double sigma2, std::int64_t count,
                                        std::uint64_t seed);

// theta_norm,risk_phi,se_phi,risk_ls,se_ls,n_samples,seed
std::string curve_csv(std::span<const CurvePoint> curve);

// int_0^inf t^((n+p)/2 - a + e) f(t) dt < inf, decided from the model's
// moment metadata. Throws ValidationError when the metadata is missing.
bool check_moment_condition(const SphericalErrorModel& model, const HyperParams& hp);

struct IdentityCheck {
  std::string name;
  double lhs = 0;
  double rhs = 0;
  double residual = 0;   // mean of lhs - rhs per draw
  double std_error = 0;
  bool pass = false;     // |residual| <= 4 std_error
};

// Names of the built-in test functions: h_* for the Stein identity
// (checked in every coordinate), g_* for the chi-square identity.
std::vector<std::string> stein_library();

// Monte Carlo check of
//   E[(X_i - theta_i) h(X, Z)] = sigma^2 E[dh/dX_i]
//   E[S g(S)] = sigma^2 E[n g(S) + 2 S g'(S)]
// under normal errors. An empty `names` selects the whole library.
std::vector<IdentityCheck> check_stein_identities(std::int64_t count,
                                                  std::uint64_t seed, int p, int n,
                                                  double sigma2,
                                                  std::span<const std::string> names = {});

}  // namespace shrink::risksim
