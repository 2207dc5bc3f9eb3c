#pragma once

// Globally adaptive Gauss-Kronrod (10/21 point) integration, plus a driver
// for Beta-type kernels  x^k (1-x)^m g(x)  on [0, 1] with k, m > -1.

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <queue>
#include <span>
#include <string>
#include <vector>

#include "shrink/errors.hpp"

namespace shrink::quad {

struct Options {
  double abs_tol = 0.0;
  double rel_tol = 1e-12;
  int max_intervals = 4000;
};

struct Result {
  double value = 0.0;
  double abs_error = 0.0;
  int intervals = 0;
};

namespace detail {

inline constexpr std::array<double, 11> kXgk = {
    0.995657163025808080735527280689003, 0.973906528517171720077964012084452,
    0.930157491355708226001207180059508, 0.865063366688984510732096688423493,
    0.780817726586416897063717578345042, 0.679409568299024406234327365114874,
    0.562757134668604683339000099272694, 0.433395394129247190799265943165784,
    0.294392862701460198131126603103866, 0.148874338981631210884826001129720,
    0.0};
inline constexpr std::array<double, 11> kWgk = {
    0.011694638867371874278064396062192, 0.032558162307964727478818972459390,
    0.054755896574351996031381300244580, 0.075039674810919952767043140916190,
    0.093125454583697605535065465083366, 0.109387158802297641899210590325805,
    0.123491976262065851077958109831074, 0.134709217311473325928054001771707,
    0.142775938577060080797094273138717, 0.147739104901338491374841515972068,
    0.149445554002916905664936468389821};
// Gauss weights for the odd-indexed Kronrod nodes 1, 3, 5, 7, 9.
inline constexpr std::array<double, 5> kWg = {
    0.066671344308688137593568809893332, 0.149451349150580593145776339657697,
    0.219086362515982043995534934228163, 0.269266719309996355091226921569469,
    0.295524224714752870173892994651338};

struct Panel {
  double lo, hi, value, error;
  bool operator<(const Panel& o) const { return error < o.error; }
};

template <class F>
Panel gauss_kronrod21(F& f, double lo, double hi) {
  const double center = 0.5 * (lo + hi);
  const double half = 0.5 * (hi - lo);
  const double fc = f(center);
  double resk = kWgk[10] * fc;
  double resg = 0.0;
  double resabs = std::abs(resk);
  std::array<double, 10> f1{}, f2{};
  for (int j = 0; j < 10; ++j) {
    const double dx = half * kXgk[j];
    f1[j] = f(center - dx);
    f2[j] = f(center + dx);
    const double sum = f1[j] + f2[j];
    resk += kWgk[j] * sum;
    resabs += kWgk[j] * (std::abs(f1[j]) + std::abs(f2[j]));
    if (j % 2 == 1) resg += kWg[j / 2] * sum;
  }
  const double mean = 0.5 * resk;
  double resasc = kWgk[10] * std::abs(fc - mean);
  for (int j = 0; j < 10; ++j) {
    resasc += kWgk[j] * (std::abs(f1[j] - mean) + std::abs(f2[j] - mean));
  }
  const double value = resk * half;
  resabs *= std::abs(half);
  resasc *= std::abs(half);
  double err = std::abs((resk - resg) * half);
  if (resasc != 0.0 && err != 0.0) {
    err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
  }
  constexpr double eps = std::numeric_limits<double>::epsilon();
  if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) {
    err = std::max(50.0 * eps * resabs, err);
  }
  return {lo, hi, value, err};
}

}  // namespace detail

// Integrates f over [lo, hi] with the given breakpoints as initial panels.
template <class F>
Result integrate(F&& f, double lo, double hi, const Options& opt = {},
                 std::span<const double> breakpoints = {}) {
  if (!(hi > lo)) {
    if (hi == lo) return {};
    throw ValidationError("quad::integrate: empty or reversed interval");
  }
  std::vector<double> cuts{lo};
  for (double b : breakpoints) {
    if (b > lo && b < hi) cuts.push_back(b);
  }
  cuts.push_back(hi);
  std::sort(cuts.begin(), cuts.end());

  std::priority_queue<detail::Panel> heap;
  double total = 0.0, total_err = 0.0;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) {
    if (cuts[i + 1] <= cuts[i]) continue;
    auto p = detail::gauss_kronrod21(f, cuts[i], cuts[i + 1]);
    total += p.value;
    total_err += p.error;
    heap.push(p);
  }

  int intervals = static_cast<int>(heap.size());
  while (total_err > std::max(opt.abs_tol, opt.rel_tol * std::abs(total))) {
    if (intervals >= opt.max_intervals) {
      throw NumericalError("quad::integrate: no convergence after " +
                           std::to_string(intervals) +
                           " panels, error estimate " +
                           std::to_string(total_err));
    }
    const auto worst = heap.top();
    const double mid = 0.5 * (worst.lo + worst.hi);
    if (!(mid > worst.lo && mid < worst.hi)) break;  // panel at roundoff width
    heap.pop();
    const auto left = detail::gauss_kronrod21(f, worst.lo, mid);
    const auto right = detail::gauss_kronrod21(f, mid, worst.hi);
    total += left.value + right.value - worst.value;
    total_err += left.error + right.error - worst.error;
    heap.push(left);
    heap.push(right);
    ++intervals;
  }

  // Re-sum from the panels to shed drift from the incremental updates.
  double sum = 0.0, err = 0.0;
  while (!heap.empty()) {
    sum += heap.top().value;
    err += heap.top().error;
    heap.pop();
  }
  return {sum, err, intervals};
}

// Integral of x^k (1-x)^m g(x, 1-x) over [0, 1] for k, m > -1.
//
// Each half of the interval is handled in its own endpoint coordinate. A
// singular endpoint factor t^s (s < 0) is absorbed by u = t^(s+1), which
// leaves a bounded integrand. g receives both x and 1-x so that the
// complement is never formed by cancellation. `breakpoints` are extra
// initial panel boundaries in (0, 1).
template <class G>
Result beta_kernel_integral(double k, double m, G&& g, const Options& opt = {},
                            std::span<const double> breakpoints = {}) {
  if (!(k > -1.0) || !(m > -1.0)) {
    throw ValidationError("beta_kernel_integral: exponents must exceed -1");
  }
  constexpr double split = 0.5;

  // Left half in x; u = x^(k+1) when k < 0.
  std::vector<double> left_cuts, right_cuts;
  for (double b : breakpoints) {
    if (b > 0.0 && b < split) {
      left_cuts.push_back(k < 0.0 ? std::pow(b, k + 1.0) : b);
    } else if (b > split && b < 1.0) {
      const double t = 1.0 - b;
      right_cuts.push_back(m < 0.0 ? std::pow(t, m + 1.0) : t);
    }
  }

  Result left, right;
  Options half = opt;
  half.abs_tol = 0.5 * opt.abs_tol;
  if (k < 0.0) {
    const double inv = 1.0 / (k + 1.0);
    left = integrate(
        [&](double u) {
          const double x = std::pow(u, inv);
          return std::pow(1.0 - x, m) * g(x, 1.0 - x) * inv;
        },
        0.0, std::pow(split, k + 1.0), half, left_cuts);
  } else {
    left = integrate(
        [&](double x) {
          return std::pow(x, k) * std::pow(1.0 - x, m) * g(x, 1.0 - x);
        },
        0.0, split, half, left_cuts);
  }

  // Right half in t = 1 - x; u = t^(m+1) when m < 0.
  if (m < 0.0) {
    const double inv = 1.0 / (m + 1.0);
    right = integrate(
        [&](double u) {
          const double t = std::pow(u, inv);
          return std::pow(1.0 - t, k) * g(1.0 - t, t) * inv;
        },
        0.0, std::pow(split, m + 1.0), half, right_cuts);
  } else {
    right = integrate(
        [&](double t) {
          return std::pow(1.0 - t, k) * std::pow(t, m) * g(1.0 - t, t);
        },
        0.0, split, half, right_cuts);
  }
  return {left.value + right.value, left.abs_error + right.abs_error,
          left.intervals + right.intervals};
}

}  // namespace shrink::quad
