#pragma once

// Gauss hypergeometric function 2F1(alpha, beta; gamma; z) for real
// parameters and real z < 1.

#include <span>
#include <string>
#include <vector>

namespace shrink::hypergeom {

struct HypergeomParams {
  double alpha;
  double beta;
  double gamma;
};

// Throws ValidationError if gamma is 0, -1, -2, ...
void validate(const HypergeomParams& p);

// 2F1 on z < 1. Uses the power series for |z| <= 1/2, analytic continuation
// by re-centred Taylor series on (1/2, 1), and the Pfaff transformation
//   F(a,b;c;z) = (1-z)^(-a) F(a, c-b; c; z/(z-1))
// for z < 0. Throws NumericalError if a series exceeds its term budget.
double gauss_2f1(const HypergeomParams& p, double z);

// d/dz 2F1 = (alpha beta / gamma) 2F1(alpha+1, beta+1; gamma+1; z).
double gauss_2f1_derivative(const HypergeomParams& p, double z);

// Direct summation of the defining series, |z| < 1. Slow as |z| -> 1; kept
// as an independent reference for the transformed evaluation paths.
double gauss_2f1_series(const HypergeomParams& p, double z);

inline constexpr int kMaxTerms = 10000;

enum class LimitKind { Finite, LogDivergent, PowerDivergent };

// Behaviour of 2F1 as z -> 1 from below.
//   Finite:          F -> value
//   LogDivergent:    F ~ value * (-log(1-z))
//   PowerDivergent:  F ~ value * (1-z)^exponent, exponent < 0
// `exponent` is gamma - alpha - beta in every case.
struct LimitClass {
  LimitKind kind;
  double value;
  double exponent;
};

LimitClass limit_at_one(const HypergeomParams& p);

const char* to_string(LimitKind k);

// One line of an identity check. `max_residual` is the largest scaled
// residual |lhs - rhs| / max(1, |lhs|, |rhs|) over the points that could be
// evaluated; `skipped` counts points where the identity's parameter
// constraint does not hold.
struct IdentityResidual {
  std::string identity;
  double max_residual = 0.0;
  int evaluated = 0;
  int skipped = 0;
  std::vector<std::string> failures;
};

// Residuals of the classical relations the shrinkage factor relies on:
//   euler_integral      F = Gamma(c)/(Gamma(b)Gamma(c-b)) int t^(b-1)(1-t)^(c-b-1)(1-tz)^(-a)   (c > b > 0)
//   pfaff               F(a,b;c;z) = (1-z)^(-a) F(a,c-b;c;z/(z-1))
//   contiguous_gamma    c(1-z)F(a,b;c) - cF(a,b-1;c) + z(c-a)F(a,b;c+1) = 0
//   contiguous_alpha    (c-a-b)F(a,b;c) - (c-a)F(a-1,b;c) + b(1-z)F(a,b+1;c) = 0
//   euler_transform     F(a,b;c;z) = (1-z)^(c-a-b) F(c-a,c-b;c;z)
//   derivative          F' = (ab/c) F(a+1,b+1;c+1;z) against Ridders differences
// Grid points must lie in (0, 1). Evaluation errors are recorded per point.
std::vector<IdentityResidual> identity_residuals(const HypergeomParams& p,
                                                 std::span<const double> z_grid);

}  // namespace shrink::hypergeom
