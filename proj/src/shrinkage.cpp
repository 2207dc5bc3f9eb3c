#include "shrink/shrinkage.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <string>

#include "shrink/errors.hpp"
#include "shrink/hypergeom.hpp"
#include "shrink/quadrature.hpp"

namespace shrink {

using hypergeom::gauss_2f1;

namespace {

std::string describe(const HyperParams& hp) {
  return "(p=" + std::to_string(hp.p) + ", n=" + std::to_string(hp.n) +
         ", a=" + std::to_string(hp.a) + ", b=" + std::to_string(hp.b) +
         ", e=" + std::to_string(hp.e) + ")";
}

void check_w(double w, const char* who) {
  if (!(w > 0.0) || !std::isfinite(w)) {
    throw ValidationError(std::string(who) + ": w must be positive and finite");
  }
}

// int_0^1 l^k (1-l)^b (1+wl)^(-c) dl
double lambda_integral(double k, double b, double c, double w) {
  quad::Options opt;
  opt.rel_tol = 1e-13;
  opt.max_intervals = 20000;
  // The mass sits near l ~ 1/w; decade cuts keep the first panels from
  // stepping over it when w is large.
  std::vector<double> cuts;
  for (double t = 1.0 / w; t < 1.0; t *= 10.0) cuts.push_back(t);
  const auto r = quad::beta_kernel_integral(
      k, b, [&](double l, double) { return std::exp(-c * std::log1p(w * l)); },
      opt, cuts);
  return r.value;
}

}  // namespace

void validate(const HyperParams& hp) {
  if (hp.p < 3) {
    throw ValidationError("HyperParams: p must be at least 3, got " + std::to_string(hp.p));
  }
  if (hp.n < 1) {
    throw ValidationError("HyperParams: n must be at least 1, got " + std::to_string(hp.n));
  }
  if (!std::isfinite(hp.a) || !std::isfinite(hp.b) || !std::isfinite(hp.e)) {
    throw ValidationError("HyperParams: a, b, e must be finite");
  }
  if (!(hp.a > -hp.half_p() - 1.0)) {
    throw ValidationError("HyperParams: need a > -p/2-1 " + describe(hp));
  }
  if (!(hp.b > -1.0)) {
    throw ValidationError("HyperParams: need b > -1 " + describe(hp));
  }
  if (!(hp.half_p() + hp.half_n() + hp.e + 2.0 > 0.0)) {
    throw ValidationError("HyperParams: need p/2+n/2+e+2 > 0 " + describe(hp));
  }
}

bool is_valid(const HyperParams& hp) {
  try {
    validate(hp);
    return true;
  } catch (const ValidationError&) {
    return false;
  }
}

bool is_monotone_branch(const HyperParams& hp) {
  return hp.b >= std::min(hp.half_n() + hp.e - hp.a - 1.0, 0.0);
}

DerivedConstants derived_constants(const HyperParams& hp) {
  DerivedConstants dc;
  const double tail = hp.half_n() + hp.e - hp.a;
  dc.alpha = tail > 0.0 ? (hp.half_p() + hp.a + 1.0) / tail
                        : std::numeric_limits<double>::infinity();
  dc.cc = hp.half_p() + hp.half_n() + hp.e + 2.0;
  dc.dd = hp.half_p() + hp.a + hp.b + 2.0;
  dc.c_pn = 2.0 * (hp.p - 2.0) / (hp.n + 2.0);
  return dc;
}

DerivedConstants phi_bounds(const HyperParams& hp) {
  validate(hp);
  if (!(hp.e > -hp.half_p() - hp.half_n() - 1.0)) {
    throw ValidationError("phi_bounds: need e > -p/2-n/2-1 " + describe(hp));
  }
  if (!(hp.a < hp.half_n() + hp.e)) {
    throw ValidationError("phi_bounds: need a < n/2+e " + describe(hp));
  }
  DerivedConstants dc = derived_constants(hp);
  const double tail = hp.half_n() + hp.e - hp.a;
  const double upper = std::min(tail - 1.0, 0.0);
  const double c_minus_1 = hp.half_p() + hp.half_n() + hp.e + 1.0;
  if (hp.b < upper) {
    if (hp.b > -tail / c_minus_1) {
      dc.m1 = (hp.half_p() + hp.a + 1.0) / (tail + hp.b * c_minus_1);
    }
    dc.m2 = -(hp.half_p() + hp.a + 2.0) * hp.b / (hp.b + 1.0);
  }
  return dc;
}

double phi_slope_at_zero(const HyperParams& hp) {
  return (hp.half_p() + hp.a + 1.0) / (hp.half_p() + hp.a + hp.b + 2.0);
}

const char* to_string(PhiMethod m) {
  return m == PhiMethod::Quadrature ? "quadrature" : "hypergeom";
}

double phi_quadrature(const HyperParams& hp, double w) {
  validate(hp);
  check_w(w, "phi_quadrature");
  const double k = hp.half_p() + hp.a;
  const double c = hp.half_p() + hp.half_n() + hp.e + 2.0;
  const double num = lambda_integral(k + 1.0, hp.b, c, w);
  const double den = lambda_integral(k, hp.b, c, w);
  return w * num / den;
}

double k_ratio(double b, double beta, double gamma, double v) {
  return gauss_2f1({b, beta, gamma}, v) / gauss_2f1({b + 1.0, beta, gamma}, v);
}

double g_ratio(const HyperParams& hp, double v) {
  const double c1 = hp.half_p() + hp.half_n() + hp.e + 1.0;
  const double d = hp.half_p() + hp.a + hp.b + 2.0;
  return k_ratio(hp.b, c1, d, v);
}

double phi_hypergeom(const HyperParams& hp, double w) {
  validate(hp);
  check_w(w, "phi_hypergeom");
  const double v = w / (w + 1.0);
  const double c1 = hp.half_p() + hp.half_n() + hp.e + 1.0;
  const double d = hp.half_p() + hp.a + hp.b + 2.0;

  const double lower = gauss_2f1({hp.b + 1.0, c1, d}, v);
  const double g = gauss_2f1({hp.b, c1, d}, v) / lower;
  // 1 - G from F(b+1,.) - F(b,.) = (c1 v / d) F(b+1, c1+1; d+1; v), which
  // keeps full relative accuracy as v -> 0.
  const double one_minus_g = c1 * v / d * gauss_2f1({hp.b + 1.0, c1 + 1.0, d + 1.0}, v) / lower;

  const double kappa = (hp.half_n() + hp.e - hp.a) / (hp.half_p() + hp.a + 1.0);
  const double den = kappa + g;
  if (std::abs(den) < 1e-14) {
    throw NumericalError("phi_hypergeom: denominator vanishes at w = " +
                         std::to_string(w) + " " + describe(hp));
  }
  return one_minus_g / den;
}

double phi_log_slope(const HyperParams& hp, double w) {
  validate(hp);
  check_w(w, "phi_log_slope");
  const double v = w / (w + 1.0);
  const double c = hp.half_p() + hp.half_n() + hp.e + 2.0;
  const double d = hp.half_p() + hp.a + hp.b + 2.0;
  return (hp.half_p() + hp.a + 2.0) * k_ratio(hp.b, c, d + 1.0, v) -
         (hp.half_p() + hp.a + 1.0) * k_ratio(hp.b, c, d, v);
}

double phi_derivative(const HyperParams& hp, double w) {
  return phi_log_slope(hp, w) * phi_hypergeom(hp, w) / w;
}

double phi_derivative_quadrature(const HyperParams& hp, double w) {
  validate(hp);
  check_w(w, "phi_derivative_quadrature");
  const double k = hp.half_p() + hp.a;
  const double c = hp.half_p() + hp.half_n() + hp.e + 2.0;
  const double i_k_c = lambda_integral(k, hp.b, c, w);
  const double i_k1_c = lambda_integral(k + 1.0, hp.b, c, w);
  const double i_k1_c1 = lambda_integral(k + 1.0, hp.b, c + 1.0, w);
  const double i_k2_c1 = lambda_integral(k + 2.0, hp.b, c + 1.0, w);
  const double log_slope = 1.0 + c * w * (i_k1_c1 / i_k_c - i_k2_c1 / i_k1_c);
  const double phi = w * i_k1_c / i_k_c;
  return log_slope * phi / w;
}

PhiEvaluation evaluate_phi(const HyperParams& hp, double w, PhiMethod method) {
  PhiEvaluation ev;
  ev.w = w;
  ev.v = w / (w + 1.0);
  ev.method = method;
  if (method == PhiMethod::Quadrature) {
    ev.phi = phi_quadrature(hp, w);
    ev.dphi = phi_derivative_quadrature(hp, w);
  } else {
    ev.phi = phi_hypergeom(hp, w);
    ev.dphi = phi_log_slope(hp, w) * ev.phi / w;
  }
  return ev;
}

PhiValue phi_with_fallback(const HyperParams& hp, double w) {
  if (w / (w + 1.0) < 1.0) {
    try {
      return {phi_hypergeom(hp, w), PhiMethod::Hypergeom};
    } catch (const NumericalError&) {
    }
  }
  return {phi_quadrature(hp, w), PhiMethod::Quadrature};
}

Estimate estimate_with_diagnostics(const HyperParams& hp,
                                   std::span<const double> x, double s) {
  validate(hp);
  if (!(s > 0.0) || !std::isfinite(s)) {
    throw ValidationError("estimate: s must be positive and finite");
  }
  if (x.size() != static_cast<std::size_t>(hp.p)) {
    throw ValidationError("estimate: x has " + std::to_string(x.size()) +
                          " entries, expected p = " + std::to_string(hp.p));
  }
  double norm2 = 0.0;
  for (double xi : x) norm2 += xi * xi;

  Estimate out;
  out.theta.assign(x.size(), 0.0);
  if (norm2 == 0.0) {
    // Limit along any ray: phi(W)/W stays bounded, so the estimate -> 0.
    out.w = 0.0;
    out.phi = 0.0;
    out.multiplier = 1.0 - phi_slope_at_zero(hp);
    return out;
  }
  out.w = norm2 / s;
  const auto pv = phi_with_fallback(hp, out.w);
  out.phi = pv.phi;
  out.method = pv.method;
  out.multiplier = 1.0 - pv.phi / out.w;
  for (std::size_t i = 0; i < x.size(); ++i) out.theta[i] = out.multiplier * x[i];
  return out;
}

std::vector<double> estimate(const HyperParams& hp, std::span<const double> x,
                             double s) {
  return estimate_with_diagnostics(hp, x, s).theta;
}

std::vector<double> log_grid(double lo, double hi, int n) {
  if (n < 2 || !(lo > 0.0) || !(hi > lo)) {
    throw ValidationError("log_grid: need n >= 2 and 0 < lo < hi");
  }
  std::vector<double> g(n);
  const double l0 = std::log10(lo), l1 = std::log10(hi);
  for (int i = 0; i < n; ++i) {
    g[i] = std::pow(10.0, l0 + (l1 - l0) * i / (n - 1));
  }
  g.front() = lo;
  g.back() = hi;
  return g;
}

std::vector<double> standard_w_grid() {
  auto g = log_grid(1e-3, 1e4, 200);
  g.push_back(1e-8);
  g.push_back(1e6);
  g.push_back(1e8);
  return g;
}

}  // namespace shrink
