#pragma once

// Shrinkage factor phi(w) of the generalized Bayes estimator
//   delta(X, S) = (1 - phi(W)/W) X,   W = |X|^2 / S,
// under the hierarchical prior
//   theta | eta, lambda ~ N_p(0, (1-lambda)/(eta lambda) I),
//   eta ~ eta^e,  lambda ~ lambda^a (1-lambda)^b.
//
// phi is available by two independent routes: adaptive quadrature of the
// lambda-integral ratio, and a closed form in ratios of 2F1 values.

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace shrink {

struct HyperParams {
  int p = 3;     // coefficient dimension
  int n = 1;     // residual degrees of freedom
  double a = 0;  // lambda^a
  double b = 0;  // (1-lambda)^b
  double e = 0;  // eta^e

  double half_p() const { return 0.5 * p; }
  double half_n() const { return 0.5 * n; }
};

// p >= 3, n >= 1, a > -p/2-1, b > -1, p/2+n/2+e+2 > 0. Throws ValidationError.
void validate(const HyperParams& hp);
bool is_valid(const HyperParams& hp);

// b >= min(n/2+e-a-1, 0): phi is nondecreasing on this branch.
bool is_monotone_branch(const HyperParams& hp);

struct DerivedConstants {
  double alpha = 0;               // lim phi(w), (p/2+a+1)/(n/2+e-a)
  double cc = 0;                  // p/2+n/2+e+2
  double dd = 0;                  // p/2+a+b+2
  double c_pn = 0;                // 2(p-2)/(n+2)
  std::optional<double> m1;       // sup phi, when the restriction on b holds
  std::optional<double> m2;       // -inf w phi'/phi, for -1 < b < min(n/2+e-a-1, 0)
};

// Unconditional constants (alpha is +inf when a >= n/2+e); m1, m2 unset.
DerivedConstants derived_constants(const HyperParams& hp);

// Constants plus the bounds M1, M2 where their regimes apply.
// Requires e > -p/2-n/2-1 and -p/2-1 < a < n/2+e.
DerivedConstants phi_bounds(const HyperParams& hp);

// lim_{w->0} phi(w)/w = (p/2+a+1)/(p/2+a+b+2).
double phi_slope_at_zero(const HyperParams& hp);

enum class PhiMethod { Quadrature, Hypergeom };
const char* to_string(PhiMethod m);

struct PhiEvaluation {
  double w = 0;
  double phi = 0;
  double dphi = 0;
  double v = 0;  // w / (w + 1)
  PhiMethod method = PhiMethod::Hypergeom;
};

// w * I(p/2+a+1) / I(p/2+a) with I(k) = int_0^1 l^k (1-l)^b (1+wl)^-c dl.
double phi_quadrature(const HyperParams& hp, double w);

// (1 - G(v)) / ((n/2+e-a)/(p/2+a+1) + G(v)),
// G(v) = F(b, c-1; d; v) / F(b+1, c-1; d; v), v = w/(w+1).
double phi_hypergeom(const HyperParams& hp, double w);

// phi'(w) from the closed form of w phi'/phi:
//   (p/2+a+2) F(b,c;d+1;v)/F(b+1,c;d+1;v) - (p/2+a+1) F(b,c;d;v)/F(b+1,c;d;v)
double phi_derivative(const HyperParams& hp, double w);

// w phi'(w) / phi(w) by the closed form above.
double phi_log_slope(const HyperParams& hp, double w);

// phi'(w) from the lambda-integral expression of w phi'/phi, by quadrature.
double phi_derivative_quadrature(const HyperParams& hp, double w);

PhiEvaluation evaluate_phi(const HyperParams& hp, double w,
                           PhiMethod method = PhiMethod::Hypergeom);

// K(v) = F(b, beta; gamma; v) / F(b+1, beta; gamma; v).
double k_ratio(double b, double beta, double gamma, double v);

// G(v) for the given hyperparameters: K with beta = c-1, gamma = d.
double g_ratio(const HyperParams& hp, double v);

// phi(w) by the closed form, falling back to quadrature when the closed
// form fails (for instance when w/(w+1) rounds to 1).
struct PhiValue {
  double phi;
  PhiMethod method;
};
PhiValue phi_with_fallback(const HyperParams& hp, double w);

struct Estimate {
  std::vector<double> theta;  // (1 - phi(W)/W) x
  double w = 0;
  double phi = 0;
  double multiplier = 1;      // 1 - phi(W)/W
  PhiMethod method = PhiMethod::Hypergeom;
};

// Generalized Bayes estimate of the canonical mean from (x, s).
// x = 0 maps to the zero vector. Requires s > 0.
Estimate estimate_with_diagnostics(const HyperParams& hp,
                                   std::span<const double> x, double s);

std::vector<double> estimate(const HyperParams& hp, std::span<const double> x,
                             double s);

// Standard scan grid: 200 log-spaced points on [1e-3, 1e4] followed by
// the probes 1e-8, 1e6, 1e8.
std::vector<double> standard_w_grid();

// n log-spaced points on [lo, hi].
std::vector<double> log_grid(double lo, double hi, int n);

}  // namespace shrink
