#include "xlroute/exp_integral.hpp"

#include <cmath>

#include "xlroute/errors.hpp"

namespace xlr {

namespace {

constexpr double kEulerGamma = 0.57721566490153286060651209008240243;

// E1(x) = -gamma - ln x + sum_{n>=1} (-1)^{n+1} x^n / (n n!),  0 < x <= 1
double e1Series(double x) {
  double sum = 0.0;
  double pow = 1.0;  // x^n / n!
  for (int n = 1; n <= 64; ++n) {
    pow *= x / n;
    const double term = ((n & 1) ? pow : -pow) / n;
    sum += term;
    if (std::abs(term) < 1e-17 * std::abs(sum)) break;
  }
  return -kEulerGamma - std::log(x) + sum;
}

// Modified Lentz evaluation of the continued fraction
//   e^x E1(x) = 1/(x+1- 1/(x+3- 4/(x+5- 9/(x+7- ...))))
// valid for x > 1.
double scaledE1ContinuedFraction(double x) {
  constexpr double tiny = 1e-300;
  double b = x + 1.0;
  double c = 1.0 / tiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= 400; ++i) {
    const double a = -static_cast<double>(i) * i;
    b += 2.0;
    d = a * d + b;
    if (d == 0.0) d = tiny;
    c = b + a / c;
    if (c == 0.0) c = tiny;
    d = 1.0 / d;
    const double delta = c * d;
    h *= delta;
    if (std::abs(delta - 1.0) < 1e-16) break;
  }
  return h;
}

}  // namespace

double expIntegralE1(double x) {
  if (!(x > 0.0)) throw DomainError("E1 requires x > 0");
  if (x <= 1.0) return e1Series(x);
  return std::exp(-x) * scaledE1ContinuedFraction(x);
}

double expScaledE1(double x) {
  if (!(x > 0.0)) throw DomainError("E1 requires x > 0");
  if (x <= 1.0) return std::exp(x) * e1Series(x);
  return scaledE1ContinuedFraction(x);
}

}  // namespace xlr
