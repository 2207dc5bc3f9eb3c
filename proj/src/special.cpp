#include "shrink/special.hpp"

#include <cmath>
#include <numbers>
#include <string>

#include "shrink/errors.hpp"

namespace shrink::special {

bool is_nonpositive_integer(double x) {
  if (x > 0.5) return false;
  const double r = std::round(x);
  return std::abs(x - r) <= 4.0 * std::numeric_limits<double>::epsilon() *
                                std::max(1.0, std::abs(x));
}

SignedLogGamma log_gamma(double x) {
  if (is_nonpositive_integer(x)) {
    throw ValidationError("log_gamma: pole at x = " + std::to_string(x));
  }
  if (x > 0.0) return {std::lgamma(x), 1};

  // Gamma(x) Gamma(1-x) = pi / sin(pi x)
  const double s = std::sin(std::numbers::pi * x);
  const double log_abs =
      std::log(std::numbers::pi) - std::log(std::abs(s)) - std::lgamma(1.0 - x);
  return {log_abs, s < 0.0 ? -1 : 1};
}

double gamma_ratio(std::initializer_list<double> num,
                   std::initializer_list<double> den) {
  double log_sum = 0.0;
  int sign = 1;
  for (double x : num) {
    const auto g = log_gamma(x);
    log_sum += g.log_abs;
    sign *= g.sign;
  }
  for (double x : den) {
    if (is_nonpositive_integer(x)) return 0.0;
    const auto g = log_gamma(x);
    log_sum -= g.log_abs;
    sign *= g.sign;
  }
  return sign * std::exp(log_sum);
}

}  // namespace shrink::special
