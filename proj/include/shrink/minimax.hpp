#pragma once

// Minimaxity certificates for delta_phi = (1 - phi(W)/W) X under
// spherically symmetric errors with unknown scale.

#include <functional>
#include <optional>
#include <span>
#include <string>

#include "shrink/shrinkage.hpp"

namespace shrink::minimax {

enum class Route {
  Thm21Scan,
  CorMonotone,
  CorM1M2,
  MainThmI,
  MainThmII,
  SphericalI,
  SphericalII,
  None,
};
const char* to_string(Route r);

struct MinimaxVerdict {
  bool certified = false;
  Route route = Route::None;
  DerivedConstants constants;
  std::optional<double> scan_max;
  std::optional<double> u_star;
  std::optional<double> a_star;
  std::string details;
};

// Prior with b = -a-2, which factors into |theta|^-(p+2a+2) eta^(e-a-1).
struct SphericalParams {
  int p = 3;
  int n = 1;
  double e = 0;
  double a = -1.5;

  double b() const { return -a - 2.0; }
  HyperParams hyper() const { return {p, n, a, b(), e}; }
};

// p/2+a+1 > 0 and a < -1, plus p >= 3, n >= 1.
void validate(const SphericalParams& sp);

// c(p, n) = 2(p-2)/(n+2)
double c_pn(int p, int n);

// (c(p,n)(n/2+e) - p/2 - 1) / (1 + c(p,n)), the largest a for which
// alpha <= c(p, n).
double u_star(int p, int n, double e);

// Left side of the sufficient condition at one point:
//   (phi/w) {(n+2) phi - 2(p-2)} - 4 phi' (1 + phi)
double sufficient_condition(int p, int n, double w, double phi, double dphi);

struct ScanResult {
  double scan_max = 0;      // max over the grid
  double argmax_w = 0;
  double limit_zero = 0;    // value of the condition as w -> 0
  double limit_infinity = 0;
  // max(scan_max, limit_zero, limit_infinity)
  double overall() const;
};

struct PhiPoint {
  double phi;
  double dphi;
};
using PhiFunction = std::function<PhiPoint(double)>;

// Scan for an arbitrary shrinkage function. The limits are supplied by the
// caller: for phi ~ k w near 0 the condition tends to -2 p k, and for
// phi -> alpha with w phi' -> 0 it tends to 0.
ScanResult scan_theorem21(int p, int n, const PhiFunction& phi,
                          std::span<const double> w_grid, double limit_zero,
                          double limit_infinity);

// Scan for the generalized Bayes phi of `hp` (closed-form route) with the
// analytic limits -2p (p/2+a+1)/(p/2+a+b+2) at 0 and 0 at infinity.
ScanResult scan_theorem21(const HyperParams& hp, std::span<const double> w_grid);

// Numerical certificate from the scan: certified iff the scanned maximum and
// both limits are <= 0.
MinimaxVerdict certify_by_scan(const HyperParams& hp,
                               std::span<const double> w_grid);

// phi nondecreasing and 0 <= phi <= c(p,n): monotone branch and alpha <= c(p,n).
MinimaxVerdict check_corollary_monotone(const HyperParams& hp);

// ((n+2) M1 - 2(p-2)) / (1 + M1) + 4 M2
double m1m2_expression(int p, int n, double m1, double m2);

// Certified iff m1m2_expression <= 0 with M1, M2 from phi_bounds. Throws
// ValidationError when the bounds are unavailable for hp.
MinimaxVerdict check_corollary_m1m2(const HyperParams& hp);

// Lower end of the admissible b interval for the non-monotone branch,
//   -(n+2) (c(p,n) - alpha) / (4 (p+a+1) (alpha+1)).
double main_b_lower_bound(const HyperParams& hp);

// Requires e > -p/2-n/2-1 (ValidationError otherwise).
MinimaxVerdict check_main_theorem(const HyperParams& hp);

// h(a) = (-a-2) + (n+2)(c(p,n) - alpha(a)) / (4 (p+a+1)(alpha(a)+1)),
// alpha(a) = (p/2+a+1)/(n/2+e-a). The b = -a-2 family is minimax on the
// non-monotone stretch exactly where h(a) >= 0.
double h_function(int p, int n, double e, double a);

// Largest root of h in (-2, -1). Requires e > -n/4-3/2 and n >= 2.
// Throws NumericalError if h does not change sign on the interval.
double find_a_star(int p, int n, double e);

// moment_condition_holds is supplied by the caller (see risksim); without it
// the generalized Bayes representation is not established and the verdict
// is not certified.
MinimaxVerdict check_spherical(const SphericalParams& sp,
                               bool moment_condition_holds);

}  // namespace shrink::minimax
