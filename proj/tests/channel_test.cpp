#include <doctest.h>

#include <cmath>
#include <numbers>
#include <vector>

#include "support.hpp"
#include "xlroute/channel.hpp"
#include "xlroute/errors.hpp"
#include "xlroute/exp_integral.hpp"
#include "xlroute/rng.hpp"

using namespace xlr;

TEST_CASE("fading draws: mean, median, determinism") {
  Rng rng(42);
  const double gammaBar = 8.0;
  const int n = 1'000'000;
  double sum = 0.0;
  int aboveMedian = 0;
  for (int i = 0; i < n; ++i) {
    const double g = sampleSnr(gammaBar, rng);
    sum += g;
    if (g > gammaBar * std::numbers::ln2) ++aboveMedian;
  }
  const double mean = sum / n;
  // 3 sigma of the sample-mean estimator (sigma = mean for an exponential)
  CHECK(std::abs(mean - gammaBar) < 3.0 * gammaBar / std::sqrt(double(n)));
  const double medianFreq = double(aboveMedian) / n;
  CHECK(std::abs(medianFreq - 0.5) < 3.0 * 0.5 / std::sqrt(double(n)));

  Rng a(7), b(7);
  for (int i = 0; i < 10; ++i) CHECK(sampleSnr(1.0, a) == sampleSnr(1.0, b));
  CHECK_THROWS_AS(sampleSnr(0.0, rng), DomainError);
}

TEST_CASE("capacity") {
  CHECK(capacity(0.0, 1e6) == 0.0);
  CHECK(capacity(1.0, 1.0) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(capacity(7.0, 1e6) == doctest::Approx(3e6).epsilon(1e-15));
  CHECK_THROWS_AS(capacity(-0.5, 1.0), DomainError);
}

TEST_CASE("single-link ergodic rate against quadrature") {
  for (double gammaBar : {0.1, 1.0, 8.0, 37.0, 1000.0}) {
    const double closed = meanRateSingle(gammaBar, 1.0);
    const double quad = oracle::meanRateSingleQuad(gammaBar, 1.0);
    CHECK(closed == doctest::Approx(quad).epsilon(1e-8));
  }
  // gammaBar = 1: (1/ln2) e E1(1)
  CHECK(meanRateSingle(1.0, 1.0) == doctest::Approx(0.86042).epsilon(1e-4));
  CHECK_THROWS_AS(meanRateSingle(0.0, 1.0), DomainError);
}

TEST_CASE("single-link rate vanishes monotonically with the SNR") {
  double prev = 0.0;
  for (double g : {1e-6, 1e-4, 1e-2, 1e-1, 1.0}) {
    const double r = meanRateSingle(g, 1.0);
    CHECK(r > prev);
    prev = r;
  }
  CHECK(meanRateSingle(1e-9, 1.0) < 1e-7);
}

TEST_CASE("contest of one link degenerates to the single-link rate") {
  const std::vector<double> g{3.7};
  const std::vector<double> b{2.0};
  CHECK(meanRateOpportunistic(0, b, g, 1e6) ==
        doctest::Approx(meanRateSingle(3.7, 1e6)).epsilon(1e-14));
  CHECK(winProbability(0, b, g) == doctest::Approx(1.0).epsilon(1e-14));
}

TEST_CASE("symmetric two-link contest closed form") {
  const std::vector<double> g{1.0, 1.0};
  const std::vector<double> b{1.0, 1.0};
  const double e = std::exp(1.0);
  const double expected =
      (e * expIntegralE1(1.0) - e * e * expIntegralE1(2.0) / 2.0) / std::numbers::ln2;
  const double rate = meanRateOpportunistic(0, b, g, 1.0);
  CHECK(rate == doctest::Approx(expected).epsilon(1e-12));
  CHECK(rate == doctest::Approx(oracle::opportunisticRateQuad(0, g, b, 1.0)).epsilon(1e-8));

  const auto mc = oracle::contestMonteCarlo(g, b, 1.0, 1'000'000, 99);
  CHECK(mc.ratePerSlot[0] == doctest::Approx(rate).epsilon(0.01));

  // multiuser diversity: the pair together beats any single link
  const double both = rate + meanRateOpportunistic(1, b, g, 1.0);
  CHECK(both > meanRateSingle(1.0, 1.0));
}

TEST_CASE("dominant priority weight recovers the single-link rate") {
  const std::vector<double> g{2.0, 5.0};
  const std::vector<double> b{1e9, 1.0};
  CHECK(meanRateOpportunistic(0, b, g, 1.0) ==
        doctest::Approx(meanRateSingle(2.0, 1.0)).epsilon(1e-6));
}

TEST_CASE("win probabilities: symmetry, totals, 2:1 case") {
  for (int m : {2, 3, 5}) {
    std::vector<double> g(m, 4.0), b(m, 1.3);
    for (int j = 0; j < m; ++j) {
      CHECK(winProbability(j, b, g) == doctest::Approx(1.0 / m).epsilon(1e-10));
    }
  }
  // equal beta keeps the contest fair even across unequal mean SNRs
  {
    const std::vector<double> g{0.3, 8.0, 1000.0};
    const std::vector<double> b{1.0, 1.0, 1.0};
    for (int j = 0; j < 3; ++j) {
      CHECK(winProbability(j, b, g) == doctest::Approx(1.0 / 3).epsilon(1e-10));
    }
  }
  {
    const std::vector<double> g{1.0, 1.0};
    const std::vector<double> b{2.0, 1.0};
    CHECK(winProbability(0, b, g) == doctest::Approx(2.0 / 3).epsilon(1e-10));
  }
  Rng rng(5);
  for (int trial = 0; trial < 20; ++trial) {
    const int m = 2 + int(rng.uniform01() * 3);
    std::vector<double> g(m), b(m);
    for (int j = 0; j < m; ++j) {
      g[j] = 0.2 + 20.0 * rng.uniform01();
      b[j] = 0.1 + 5.0 * rng.uniform01();
    }
    double total = 0.0;
    for (int j = 0; j < m; ++j) total += winProbability(j, b, g);
    CHECK(total == doctest::Approx(1.0).epsilon(1e-10));
  }
}

TEST_CASE("contest rates match quadrature and Monte Carlo on random link sets") {
  Rng rng(17);
  for (int trial = 0; trial < 6; ++trial) {
    const int m = 2 + trial % 3;  // 2..4 links
    std::vector<double> g(m), b(m);
    for (int j = 0; j < m; ++j) {
      g[j] = 0.3 + 15.0 * rng.uniform01();
      b[j] = 0.2 + 4.0 * rng.uniform01();
    }
    const auto rates = opportunisticRates(g, b, 1e6);
    for (int j = 0; j < m; ++j) {
      CHECK(rates.rate[j] ==
            doctest::Approx(oracle::opportunisticRateQuad(j, g, b, 1e6)).epsilon(1e-8));
    }
    const auto mc = oracle::contestMonteCarlo(g, b, 1e6, 400'000, 1000 + trial);
    for (int j = 0; j < m; ++j) {
      CHECK(mc.ratePerSlot[j] == doctest::Approx(rates.rate[j]).epsilon(0.02));
    }
  }
}

TEST_CASE("contest rate is monotone in the priority weights") {
  Rng rng(23);
  for (int trial = 0; trial < 30; ++trial) {
    const int m = 2 + int(rng.uniform01() * 2);
    std::vector<double> g(m), b(m);
    for (int j = 0; j < m; ++j) {
      g[j] = 0.3 + 10.0 * rng.uniform01();
      b[j] = 0.2 + 3.0 * rng.uniform01();
    }
    const double base = meanRateOpportunistic(0, b, g, 1.0);
    auto up = b;
    up[0] *= 1.2;
    CHECK(meanRateOpportunistic(0, up, g, 1.0) >= base - 1e-12);
    auto rival = b;
    rival[1] *= 1.2;
    CHECK(meanRateOpportunistic(0, rival, g, 1.0) <= base + 1e-12);
  }
}

TEST_CASE("analytic contest gradient matches finite differences") {
  Rng rng(31);
  for (int trial = 0; trial < 10; ++trial) {
    const int m = 2 + trial % 3;
    std::vector<double> g(m), b(m);
    for (int j = 0; j < m; ++j) {
      g[j] = 0.4 + 8.0 * rng.uniform01();
      b[j] = 0.3 + 2.0 * rng.uniform01();
    }
    const auto withGrad = opportunisticRates(g, b, 1.0, true);
    for (int j = 0; j < m; ++j) {
      for (int z = 0; z < m; ++z) {
        const double h = 1e-5 * b[z];
        auto hi = b, lo = b;
        hi[z] += h;
        lo[z] -= h;
        const double fd = (opportunisticRates(g, hi, 1.0).rate[j] -
                           opportunisticRates(g, lo, 1.0).rate[j]) /
                          (2.0 * h);
        CHECK(withGrad.dRate[j][z] == doctest::Approx(fd).epsilon(2e-5));
      }
    }
  }
}

TEST_CASE("contest input validation") {
  std::vector<double> g{1.0, -1.0}, b{1.0, 1.0};
  CHECK_THROWS_AS(opportunisticRates(g, b, 1.0), DomainError);
  std::vector<double> g2{1.0, 1.0}, b2{0.0, 1.0};
  CHECK_THROWS_AS(opportunisticRates(g2, b2, 1.0), DomainError);
  std::vector<double> empty;
  CHECK_THROWS_AS(opportunisticRates(empty, empty, 1.0), StructureError);
  std::vector<double> big(13, 1.0);
  CHECK_THROWS_AS(opportunisticRates(big, big, 1.0), StructureError);
}
