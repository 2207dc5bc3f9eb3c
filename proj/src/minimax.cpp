#include "shrink/minimax.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "shrink/errors.hpp"

namespace shrink::minimax {
namespace {

std::string fmt(double x) {
  std::ostringstream os;
  os.precision(10);
  os << x;
  return os.str();
}

}  // namespace

const char* to_string(Route r) {
  switch (r) {
    case Route::Thm21Scan: return "THM21_SCAN";
    case Route::CorMonotone: return "COR_MONOTONE";
    case Route::CorM1M2: return "COR_M1M2";
    case Route::MainThmI: return "MAIN_THM_I";
    case Route::MainThmII: return "MAIN_THM_II";
    case Route::SphericalI: return "SPHERICAL_I";
    case Route::SphericalII: return "SPHERICAL_II";
    case Route::None: return "NONE";
  }
  return "NONE";
}

void validate(const SphericalParams& sp) {
  if (sp.p < 3 || sp.n < 1) {
    throw ValidationError("SphericalParams: need p >= 3 and n >= 1");
  }
  if (!(0.5 * sp.p + sp.a + 1.0 > 0.0)) {
    throw ValidationError("SphericalParams: need p/2+a+1 > 0, got a = " + fmt(sp.a));
  }
  if (!(sp.a < -1.0)) {
    throw ValidationError("SphericalParams: need a < -1 so that b = -a-2 > -1, got a = " +
                          fmt(sp.a));
  }
  shrink::validate(sp.hyper());
}

double c_pn(int p, int n) { return 2.0 * (p - 2.0) / (n + 2.0); }

double u_star(int p, int n, double e) {
  const double c = c_pn(p, n);
  return (c * (0.5 * n + e) - 0.5 * p - 1.0) / (1.0 + c);
}

double sufficient_condition(int p, int n, double w, double phi, double dphi) {
  return phi / w * ((n + 2.0) * phi - 2.0 * (p - 2.0)) - 4.0 * dphi * (1.0 + phi);
}

double ScanResult::overall() const {
  return std::max({scan_max, limit_zero, limit_infinity});
}

ScanResult scan_theorem21(int p, int n, const PhiFunction& phi,
                          std::span<const double> w_grid, double limit_zero,
                          double limit_infinity) {
  if (w_grid.empty()) throw ValidationError("scan_theorem21: empty grid");
  ScanResult r;
  r.scan_max = -std::numeric_limits<double>::infinity();
  r.limit_zero = limit_zero;
  r.limit_infinity = limit_infinity;
  for (double w : w_grid) {
    if (!(w > 0.0)) throw ValidationError("scan_theorem21: grid points must be positive");
    const auto pt = phi(w);
    const double val = sufficient_condition(p, n, w, pt.phi, pt.dphi);
    if (std::isnan(val)) {
      throw NumericalError("scan_theorem21: NaN at w = " + fmt(w));
    }
    if (val > r.scan_max) {
      r.scan_max = val;
      r.argmax_w = w;
    }
  }
  return r;
}

ScanResult scan_theorem21(const HyperParams& hp, std::span<const double> w_grid) {
  shrink::validate(hp);
  const double limit_zero = -2.0 * hp.p * phi_slope_at_zero(hp);
  return scan_theorem21(
      hp.p, hp.n,
      [&](double w) {
        const double phi = phi_hypergeom(hp, w);
        return PhiPoint{phi, phi_log_slope(hp, w) * phi / w};
      },
      w_grid, limit_zero, 0.0);
}

MinimaxVerdict certify_by_scan(const HyperParams& hp,
                               std::span<const double> w_grid) {
  const auto scan = scan_theorem21(hp, w_grid);
  MinimaxVerdict v;
  v.constants = derived_constants(hp);
  v.scan_max = scan.scan_max;
  v.certified = scan.overall() <= 0.0;
  v.route = v.certified ? Route::Thm21Scan : Route::None;
  v.details = std::string("numerical certificate: ") +
              (v.certified ? "condition <= 0" : "condition > 0") +
              " on " + std::to_string(w_grid.size()) + " grid points, max " +
              fmt(scan.scan_max) + " at w = " + fmt(scan.argmax_w) +
              "; limits " + fmt(scan.limit_zero) + " (w->0), " +
              fmt(scan.limit_infinity) + " (w->inf)";
  return v;
}

MinimaxVerdict check_corollary_monotone(const HyperParams& hp) {
  shrink::validate(hp);
  MinimaxVerdict v;
  v.constants = derived_constants(hp);
  const bool shape_ok = hp.e > -hp.half_p() - hp.half_n() - 1.0 &&
                        hp.a < hp.half_n() + hp.e;
  const bool monotone = is_monotone_branch(hp);
  const bool bounded = v.constants.alpha <= v.constants.c_pn;
  v.certified = shape_ok && monotone && bounded;
  v.route = v.certified ? Route::CorMonotone : Route::None;
  if (!shape_ok) {
    v.details = "needs e > -p/2-n/2-1 and a < n/2+e";
  } else if (!monotone) {
    v.details = "b < min(n/2+e-a-1, 0): phi is not monotone";
  } else {
    v.details = "alpha = " + fmt(v.constants.alpha) +
                (bounded ? " <= " : " > ") + "c(p,n) = " + fmt(v.constants.c_pn);
  }
  return v;
}

double m1m2_expression(int p, int n, double m1, double m2) {
  return ((n + 2.0) * m1 - 2.0 * (p - 2.0)) / (1.0 + m1) + 4.0 * m2;
}

MinimaxVerdict check_corollary_m1m2(const HyperParams& hp) {
  MinimaxVerdict v;
  v.constants = phi_bounds(hp);
  if (!v.constants.m1 || !v.constants.m2) {
    throw ValidationError(
        "check_corollary_m1m2: bounds unavailable, need "
        "-(n/2+e-a)/(p/2+n/2+e+1) < b < min(n/2+e-a-1, 0)");
  }
  const double expr = m1m2_expression(hp.p, hp.n, *v.constants.m1, *v.constants.m2);
  v.certified = expr <= 0.0;
  v.route = v.certified ? Route::CorM1M2 : Route::None;
  v.details = "((n+2)M1-2(p-2))/(1+M1)+4M2 = " + fmt(expr);
  return v;
}

double main_b_lower_bound(const HyperParams& hp) {
  const double alpha = derived_constants(hp).alpha;
  const double c = c_pn(hp.p, hp.n);
  return -(hp.n + 2.0) * (c - alpha) / (4.0 * (hp.p + hp.a + 1.0) * (alpha + 1.0));
}

MinimaxVerdict check_main_theorem(const HyperParams& hp) {
  shrink::validate(hp);
  if (!(hp.e > -hp.half_p() - hp.half_n() - 1.0)) {
    throw ValidationError("check_main_theorem: need e > -p/2-n/2-1");
  }
  MinimaxVerdict v;
  v.constants = derived_constants(hp);
  const double us = u_star(hp.p, hp.n, hp.e);
  v.u_star = us;
  const double lower_a = -hp.half_p() - 1.0;

  if (hp.a > lower_a && hp.a <= us && is_monotone_branch(hp)) {
    v.certified = true;
    v.route = Route::MainThmI;
    v.details = "monotone phi: a = " + fmt(hp.a) + " <= u* = " + fmt(us) +
                " and b >= min(n/2+e-a-1, 0)";
    return v;
  }

  const double b_upper = std::min(0.0, hp.half_n() + hp.e - hp.a - 1.0);
  if (hp.a > lower_a && hp.a < us) {
    const double b_lower = main_b_lower_bound(hp);
    if (b_lower > -1.0 && hp.b >= b_lower && hp.b < b_upper) {
      v.constants = phi_bounds(hp);
      v.certified = true;
      v.route = Route::MainThmII;
      v.details = "non-monotone phi: " + fmt(b_lower) + " <= b = " + fmt(hp.b) +
                  " < " + fmt(b_upper);
      return v;
    }
    v.details = "a < u* = " + fmt(us) + " but b = " + fmt(hp.b) +
                " outside [" + fmt(b_lower) + ", " + fmt(b_upper) + ")" +
                (b_lower > -1.0 ? "" : " (lower bound <= -1)");
    return v;
  }
  v.details = "a = " + fmt(hp.a) + " outside (-p/2-1, u* = " + fmt(us) + "]";
  return v;
}

double h_function(int p, int n, double e, double a) {
  const double alpha = (0.5 * p + a + 1.0) / (0.5 * n + e - a);
  return (-a - 2.0) +
         (n + 2.0) * (c_pn(p, n) - alpha) / (4.0 * (p + a + 1.0) * (alpha + 1.0));
}

double find_a_star(int p, int n, double e) {
  if (p < 3) throw ValidationError("find_a_star: need p >= 3");
  if (n < 2) throw ValidationError("find_a_star: need n >= 2");
  if (!(e > -0.25 * n - 1.5)) {
    throw ValidationError("find_a_star: need e > -n/4-3/2");
  }
  auto h = [&](double a) { return h_function(p, n, e, a); };
  const double h_lo = h(-2.0), h_hi = h(-1.0);
  if (!(h_lo > 0.0) || !(h_hi < 0.0)) {
    throw NumericalError("find_a_star: no sign change on (-2, -1): h(-2) = " +
                         fmt(h_lo) + ", h(-1) = " + fmt(h_hi));
  }
  // Walk down from -1 to the first sign change so that the bracket holds the
  // largest root even if h were to cross zero more than once.
  constexpr int kProbe = 400;
  double hi = -1.0, lo = -2.0;
  for (int i = 1; i <= kProbe; ++i) {
    const double a = -1.0 - static_cast<double>(i) / kProbe;
    if (h(a) >= 0.0) {
      lo = a;
      hi = -1.0 - static_cast<double>(i - 1) / kProbe;
      break;
    }
  }
  while (hi - lo > 1e-13) {
    const double mid = 0.5 * (lo + hi);
    if (h(mid) >= 0.0) {
      lo = mid;
    } else {
      hi = mid;
    }
  }
  // h(lo) >= 0 > h(hi); return the endpoint with the smaller residual.
  return std::abs(h(lo)) <= std::abs(h(hi)) ? lo : hi;
}

MinimaxVerdict check_spherical(const SphericalParams& sp,
                               bool moment_condition_holds) {
  validate(sp);
  const HyperParams hp = sp.hyper();
  MinimaxVerdict v;
  v.constants = derived_constants(hp);
  const double us = u_star(sp.p, sp.n, sp.e);
  v.u_star = us;
  const double e_split = -0.25 * sp.n - 1.5;
  const double e_floor = -0.5 * sp.p - 0.5 * sp.n - 1.0;
  const double lower_a = -0.5 * sp.p - 1.0;

  Route route = Route::None;
  if (sp.e > e_floor && sp.e <= e_split) {
    if (sp.a > lower_a && sp.a <= us) route = Route::SphericalI;
    v.details = "e <= -n/4-3/2: need a <= u* = " + fmt(us);
  } else if (sp.e > e_split && sp.n >= 2) {
    const double as = find_a_star(sp.p, sp.n, sp.e);
    v.a_star = as;
    if (sp.a > lower_a && sp.a <= as) route = Route::SphericalII;
    v.details = "e > -n/4-3/2: need a <= a* = " + fmt(as);
  } else {
    v.details = sp.e <= e_floor ? "e <= -p/2-n/2-1" : "e > -n/4-3/2 requires n >= 2";
  }

  if (route != Route::None && !moment_condition_holds) {
    v.details += "; moment condition fails for the error law";
    route = Route::None;
  }
  v.route = route;
  v.certified = route != Route::None;
  v.details = (v.certified ? "certified, " : "not certified, ") + v.details +
              ", a = " + fmt(sp.a) + ", b = " + fmt(sp.b());
  return v;
}

}  // namespace shrink::minimax
