#pragma once

#include <array>
#include <cmath>
#include <limits>

namespace shrink::numdiff {

struct Derivative {
  double value;
  double error;
};

// Ridders' extrapolated central difference starting from step h.
template <class F>
Derivative ridders(F&& f, double x, double h) {
  constexpr int kMax = 10;
  constexpr double kShrink = 1.4;
  constexpr double kShrink2 = kShrink * kShrink;
  std::array<std::array<double, kMax>, kMax> a{};
  a[0][0] = (f(x + h) - f(x - h)) / (2.0 * h);
  Derivative best{a[0][0], std::numeric_limits<double>::max()};
  for (int i = 1; i < kMax; ++i) {
    h /= kShrink;
    a[0][i] = (f(x + h) - f(x - h)) / (2.0 * h);
    double fac = kShrink2;
    for (int j = 1; j <= i; ++j) {
      a[j][i] = (a[j - 1][i] * fac - a[j - 1][i - 1]) / (fac - 1.0);
      fac *= kShrink2;
      const double err = std::max(std::abs(a[j][i] - a[j - 1][i]),
                                  std::abs(a[j][i] - a[j - 1][i - 1]));
      if (err <= best.error) best = {a[j][i], err};
    }
    if (std::abs(a[i][i] - a[i - 1][i - 1]) >= 2.0 * best.error) break;
  }
  return best;
}

// Plain central difference, f'(x) ~ (f(x+h) - f(x-h)) / 2h.
template <class F>
double central(F&& f, double x, double h) {
  return (f(x + h) - f(x - h)) / (2.0 * h);
}

}  // namespace shrink::numdiff
