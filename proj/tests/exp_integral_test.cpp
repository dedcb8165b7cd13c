#include <doctest.h>

#include <cmath>

#include "support.hpp"
#include "xlroute/errors.hpp"
#include "xlroute/exp_integral.hpp"

using xlr::expIntegralE1;
using xlr::expScaledE1;

TEST_CASE("E1 known values") {
  // Abramowitz & Stegun table values
  CHECK(expIntegralE1(1.0) == doctest::Approx(0.21938393439552026).epsilon(1e-13));
  CHECK(expIntegralE1(2.0) == doctest::Approx(0.04890051070806112).epsilon(1e-13));
  CHECK(expIntegralE1(0.5) == doctest::Approx(0.55977359477616081).epsilon(1e-13));
}

TEST_CASE("E1 against quadrature of the defining integral") {
  for (double x : {0.05, 0.3, 0.9, 1.1, 2.5, 7.0, 20.0}) {
    const double ref = oracle::integrate(
        [](double t) { return std::exp(-t) / t; }, x, x + 80.0, 1e-15);
    CHECK(expIntegralE1(x) == doctest::Approx(ref).epsilon(1e-11));
  }
}

TEST_CASE("series and continued fraction meet smoothly at the switch point") {
  const double below = expIntegralE1(1.0 - 1e-9);
  const double above = expIntegralE1(1.0 + 1e-9);
  CHECK(std::abs(below - above) / below < 1e-7);
}

TEST_CASE("scaled form stays finite where the plain form underflows") {
  CHECK(expIntegralE1(800.0) == 0.0);  // underflow of e^-x
  const double x = 1e4;
  const double scaled = expScaledE1(x);
  // asymptotic series e^x E1(x) ~ (1/x)(1 - 1/x + 2/x^2 - 6/x^3)
  const double asym = (1.0 - 1.0 / x + 2.0 / (x * x) - 6.0 / (x * x * x)) / x;
  CHECK(scaled == doctest::Approx(asym).epsilon(1e-10));
  CHECK(expScaledE1(0.3) == doctest::Approx(std::exp(0.3) * expIntegralE1(0.3)).epsilon(1e-14));
}

TEST_CASE("E1 domain") {
  CHECK_THROWS_AS(expIntegralE1(0.0), xlr::DomainError);
  CHECK_THROWS_AS(expIntegralE1(-1.0), xlr::DomainError);
  CHECK_THROWS_AS(expScaledE1(0.0), xlr::DomainError);
}
