#pragma once

#include <initializer_list>

namespace shrink::special {

// log|Gamma(x)| together with the sign of Gamma(x). Negative non-integer
// arguments go through the reflection formula.
struct SignedLogGamma {
  double log_abs;
  int sign;  // +1 or -1
};

SignedLogGamma log_gamma(double x);

// True when x is 0, -1, -2, ... (to within a few ulps).
bool is_nonpositive_integer(double x);

// prod Gamma(num_i) / prod Gamma(den_i), evaluated in log space.
// A pole among the denominator arguments makes the ratio exactly zero;
// a pole in the numerator is a ValidationError.
double gamma_ratio(std::initializer_list<double> num,
                   std::initializer_list<double> den);

}  // namespace shrink::special
