#include "shrink/hypergeom.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "shrink/errors.hpp"
#include "shrink/numdiff.hpp"
#include "shrink/quadrature.hpp"
#include "shrink/special.hpp"

namespace shrink::hypergeom {
namespace {

constexpr double kTermTol = 1e-16;
constexpr int kQuietTerms = 3;

// Neumaier compensated sum.
class Accumulator {
 public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      comp_ += (sum_ - t) + x;
    } else {
      comp_ += (x - t) + sum_;
    }
    sum_ = t;
    abs_ += std::abs(x);
  }
  double value() const { return sum_ + comp_; }
  double abs_sum() const { return abs_; }

 private:
  double sum_ = 0.0;
  double comp_ = 0.0;
  double abs_ = 0.0;
};

struct ValueAndSlope {
  double value;
  double slope;
};

std::string describe(const HypergeomParams& p, double z) {
  return "(" + std::to_string(p.alpha) + ", " + std::to_string(p.beta) +
         "; " + std::to_string(p.gamma) + "; " + std::to_string(z) + ")";
}

// Power series and its termwise derivative at z. Stops once kQuietTerms
// consecutive terms fall below kTermTol relative to the absolute term sum,
// which bounds the rounding error even when the partial sums cancel.
ValueAndSlope series_with_slope(const HypergeomParams& p, double z) {
  Accumulator f, df;
  double term = 1.0;  // (a)_k (b)_k / ((c)_k k!) z^k
  f.add(term);
  int quiet = 0;
  for (int k = 0; k < kMaxTerms; ++k) {
    term *= (p.alpha + k) * (p.beta + k) / ((p.gamma + k) * (k + 1.0)) * z;
    f.add(term);
    // d/dz of term_{k+1} z^{k+1} is (k+1) term_{k+1} / z
    const double dterm = z != 0.0 ? (k + 1.0) * term / z : 0.0;
    df.add(dterm);
    const bool small = std::abs(term) <= kTermTol * f.abs_sum() &&
                       std::abs(dterm) <= kTermTol * std::max(df.abs_sum(), f.abs_sum());
    quiet = small ? quiet + 1 : 0;
    if (quiet >= kQuietTerms || term == 0.0) {
      if (z == 0.0) return {1.0, p.alpha * p.beta / p.gamma};
      return {f.value(), df.value()};
    }
  }
  throw NumericalError("gauss_2f1: series did not converge within " +
                       std::to_string(kMaxTerms) + " terms at " +
                       describe(p, z));
}

// One step of analytic continuation. Expands the solution of
//   x(1-x) F'' + [c - (a+b+1) x] F' - ab F = 0
// about `x` (with 1 - x = `dist`) and evaluates value and slope at x + h.
// Coefficients are carried pre-scaled by h^k.
ValueAndSlope taylor_step(const HypergeomParams& p, double x, double dist,
                          ValueAndSlope at, double h) {
  const double a0 = x * dist;
  const double a1 = dist - x;
  const double q0 = p.gamma - (p.alpha + p.beta + 1.0) * x;
  const double q1 = -(p.alpha + p.beta + 1.0);
  const double ab = p.alpha * p.beta;

  Accumulator f, df;
  double e0 = at.value;
  double e1 = at.slope * h;
  f.add(e0);
  f.add(e1);
  df.add(e1);
  int quiet = 0;
  for (int k = 0; k < kMaxTerms; ++k) {
    const double kk = k;
    const double e2 =
        -((a1 * kk + q0) * (kk + 1.0) * e1 * h +
          (-kk * (kk - 1.0) + q1 * kk - ab) * e0 * h * h) /
        (a0 * (kk + 2.0) * (kk + 1.0));
    f.add(e2);
    df.add((kk + 2.0) * e2);
    const bool small =
        std::abs(e2) <= kTermTol * f.abs_sum() &&
        (kk + 2.0) * std::abs(e2) <= kTermTol * std::max(df.abs_sum(), f.abs_sum());
    quiet = small ? quiet + 1 : 0;
    if (quiet >= kQuietTerms || (e2 == 0.0 && e1 == 0.0)) {
      return {f.value(), df.value() / h};
    }
    e0 = e1;
    e1 = e2;
  }
  throw NumericalError("gauss_2f1: continuation step did not converge at x = " +
                       std::to_string(x) + " for " + describe(p, x + h));
}

// 2F1 on [0, 1).
double unit_interval(const HypergeomParams& p, double z) {
  if (z <= 0.5) return series_with_slope(p, z).value;

  // Each step covers at most half the distance to the singular point z = 1,
  // so every expansion converges at least like 2^-k. Expanding about x >= 1/2
  // keeps F's coefficients dominant in the three-term recurrence.
  ValueAndSlope state = series_with_slope(p, 0.5);
  double dist = 0.5;           // 1 - x, tracked directly
  const double target = 1.0 - z;  // exact for z in [1/2, 1)
  while (dist > target) {
    const double h = std::min(dist - target, 0.5 * dist);
    state = taylor_step(p, 1.0 - dist, dist, state, h);
    dist -= h;
  }
  return state.value;
}

bool is_zero_parameter(double x) { return x == 0.0; }

}  // namespace

void validate(const HypergeomParams& p) {
  if (!std::isfinite(p.alpha) || !std::isfinite(p.beta) ||
      !std::isfinite(p.gamma)) {
    throw ValidationError("gauss_2f1: non-finite parameter");
  }
  if (special::is_nonpositive_integer(p.gamma)) {
    throw ValidationError("gauss_2f1: gamma = " + std::to_string(p.gamma) +
                          " is a pole of the series");
  }
}

double gauss_2f1(const HypergeomParams& p, double z) {
  validate(p);
  if (!(z < 1.0) || std::isnan(z)) {
    throw ValidationError("gauss_2f1: argument must satisfy z < 1, got " +
                          std::to_string(z));
  }
  if (z == 0.0 || is_zero_parameter(p.alpha) || is_zero_parameter(p.beta)) {
    return 1.0;
  }
  if (z > 0.0) return unit_interval(p, z);

  const double zeta = z / (z - 1.0);
  if (!(zeta < 1.0)) {
    throw NumericalError("gauss_2f1: argument " + std::to_string(z) +
                         " too large in magnitude for the Pfaff map");
  }
  const HypergeomParams mapped{p.alpha, p.gamma - p.beta, p.gamma};
  return std::pow(1.0 - z, -p.alpha) * unit_interval(mapped, zeta);
}

double gauss_2f1_derivative(const HypergeomParams& p, double z) {
  validate(p);
  const HypergeomParams shifted{p.alpha + 1.0, p.beta + 1.0, p.gamma + 1.0};
  validate(shifted);
  const double scale = p.alpha * p.beta / p.gamma;
  if (scale == 0.0) {
    if (!(z < 1.0)) {
      throw ValidationError("gauss_2f1_derivative: argument must satisfy z < 1");
    }
    return 0.0;
  }
  return scale * gauss_2f1(shifted, z);
}

double gauss_2f1_series(const HypergeomParams& p, double z) {
  validate(p);
  if (!(std::abs(z) < 1.0)) {
    throw ValidationError("gauss_2f1_series: requires |z| < 1");
  }
  return series_with_slope(p, z).value;
}

LimitClass limit_at_one(const HypergeomParams& p) {
  validate(p);
  if (!(p.gamma > 0.0)) {
    throw ValidationError("limit_at_one: requires gamma > 0");
  }
  const double s = p.gamma - p.alpha - p.beta;
  const double tie = 64.0 * std::numeric_limits<double>::epsilon() *
                     std::max({1.0, std::abs(p.alpha), std::abs(p.beta), p.gamma});
  if (std::abs(s) <= tie) {
    return {LimitKind::LogDivergent,
            special::gamma_ratio({p.gamma}, {p.alpha, p.beta}), 0.0};
  }
  if (s > 0.0) {
    return {LimitKind::Finite,
            special::gamma_ratio({p.gamma, s}, {p.gamma - p.alpha, p.gamma - p.beta}),
            s};
  }
  return {LimitKind::PowerDivergent,
          special::gamma_ratio({p.gamma, -s}, {p.alpha, p.beta}), s};
}

const char* to_string(LimitKind k) {
  switch (k) {
    case LimitKind::Finite: return "finite";
    case LimitKind::LogDivergent: return "log-divergent";
    case LimitKind::PowerDivergent: return "power-divergent";
  }
  return "unknown";
}

namespace {

double scaled_residual(double lhs, double rhs) {
  return std::abs(lhs - rhs) / std::max({1.0, std::abs(lhs), std::abs(rhs)});
}

// Three-term relation sum_i t_i = 0, scaled by its largest term.
double scaled_residual3(double t1, double t2, double t3) {
  return std::abs(t1 + t2 + t3) /
         std::max({1.0, std::abs(t1), std::abs(t2), std::abs(t3)});
}

template <class Fn>
void accumulate(IdentityResidual& out, double z, Fn&& residual_at) {
  try {
    const double r = residual_at();
    if (std::isnan(r)) {
      out.failures.push_back("z=" + std::to_string(z) + ": NaN residual");
      return;
    }
    out.max_residual = std::max(out.max_residual, r);
    ++out.evaluated;
  } catch (const std::exception& ex) {
    out.failures.push_back("z=" + std::to_string(z) + ": " + ex.what());
  }
}

}  // namespace

std::vector<IdentityResidual> identity_residuals(const HypergeomParams& p,
                                                 std::span<const double> z_grid) {
  validate(p);
  const double a = p.alpha, b = p.beta, c = p.gamma;

  IdentityResidual integral;
  integral.identity = "euler_integral";
  IdentityResidual pfaff;
  pfaff.identity = "pfaff";
  IdentityResidual cont_gamma;
  cont_gamma.identity = "contiguous_gamma";
  IdentityResidual cont_alpha;
  cont_alpha.identity = "contiguous_alpha";
  IdentityResidual euler;
  euler.identity = "euler_transform";
  IdentityResidual deriv;
  deriv.identity = "derivative";

  for (double z : z_grid) {
    if (!(z > 0.0 && z < 1.0)) {
      throw ValidationError("identity_residuals: grid points must lie in (0, 1)");
    }

    if (c > b && b > 0.0) {
      accumulate(integral, z, [&] {
        quad::Options opt;
        opt.rel_tol = 1e-13;
        const auto q = quad::beta_kernel_integral(
            b - 1.0, c - b - 1.0,
            [&](double t, double) { return std::pow(1.0 - t * z, -a); }, opt);
        const double rhs = special::gamma_ratio({c}, {b, c - b}) * q.value;
        return scaled_residual(gauss_2f1(p, z), rhs);
      });
    } else {
      ++integral.skipped;
    }

    accumulate(pfaff, z, [&] {
      // The right side is evaluated without going back through the Pfaff
      // map that gauss_2f1 itself uses: by direct series when the mapped
      // argument is small, otherwise through the companion transformation
      // on the second parameter.
      const double zeta = z / (z - 1.0);
      double inner;
      if (zeta >= -0.75) {
        inner = gauss_2f1_series({a, c - b, c}, zeta);
      } else {
        inner = std::pow(1.0 - zeta, -(c - b)) * gauss_2f1({c - a, c - b, c}, z);
      }
      return scaled_residual(gauss_2f1(p, z), std::pow(1.0 - z, -a) * inner);
    });

    if (!special::is_nonpositive_integer(c + 1.0)) {
      accumulate(cont_gamma, z, [&] {
        return scaled_residual3(c * (1.0 - z) * gauss_2f1(p, z),
                                -c * gauss_2f1({a, b - 1.0, c}, z),
                                z * (c - a) * gauss_2f1({a, b, c + 1.0}, z));
      });
    } else {
      ++cont_gamma.skipped;
    }

    accumulate(cont_alpha, z, [&] {
      return scaled_residual3((c - a - b) * gauss_2f1(p, z),
                              -(c - a) * gauss_2f1({a - 1.0, b, c}, z),
                              b * (1.0 - z) * gauss_2f1({a, b + 1.0, c}, z));
    });

    accumulate(euler, z, [&] {
      return scaled_residual(
          gauss_2f1(p, z),
          std::pow(1.0 - z, c - a - b) * gauss_2f1({c - a, c - b, c}, z));
    });

    if (!special::is_nonpositive_integer(c + 1.0)) {
      accumulate(deriv, z, [&] {
        const double h = 0.1 * std::min({z, 1.0 - z, 0.1});
        const auto fd = numdiff::ridders(
            [&](double t) { return gauss_2f1(p, t); }, z, h);
        return scaled_residual(fd.value, gauss_2f1_derivative(p, z));
      });
    } else {
      ++deriv.skipped;
    }
  }
  return {integral, pfaff, cont_gamma, cont_alpha, euler, deriv};
}

}  // namespace shrink::hypergeom
