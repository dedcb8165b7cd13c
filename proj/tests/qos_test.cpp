#include <doctest.h>

#include <cmath>
#include <vector>

#include "support.hpp"
#include "xlroute/errors.hpp"
#include "xlroute/qos.hpp"
#include "xlroute/rng.hpp"

using namespace xlr;

TEST_CASE("traffic split") {
  CHECK(splitRate(10.0, 4.0, 4.0) == doctest::Approx(10.0));
  CHECK(splitRate(10.0, 2.0, 4.0) == doctest::Approx(5.0));
  CHECK(splitRate(0.0, 0.0, 0.0) == 0.0);
  CHECK_THROWS_AS(splitRate(1.0, 0.0, 0.0), StarvationError);

  // conservation across any decomposition of the service rate
  Rng rng(3);
  for (int trial = 0; trial < 20; ++trial) {
    const double rho = 10.0 * rng.uniform01();
    std::vector<double> mu(3);
    double total = 0.0;
    for (double& m : mu) {
      m = rng.uniform01() + 0.01;
      total += m;
    }
    double sum = 0.0;
    for (double m : mu) sum += splitRate(rho, m, total);
    CHECK(sum == doctest::Approx(rho).epsilon(1e-12));
  }
}

TEST_CASE("waiting-time tail") {
  CHECK(delayViolationProb(0.0, 1.0, 5.0) == 0.0);
  CHECK(delayViolationProb(0.5, 1.0, 5.0) ==
        doctest::Approx(0.5 * std::exp(-2.5)).epsilon(1e-14));
  CHECK(delayViolationProb(0.5, 1.0, 5.0) == doctest::Approx(0.04104).epsilon(1e-3));
  CHECK_THROWS_AS(delayViolationProb(1.0, 1.0, 5.0), InstabilityError);
  CHECK_THROWS_AS(delayViolationProb(2.0, 1.0, 5.0), InstabilityError);
}

TEST_CASE("waiting-time tail matches a queue simulation") {
  const double lambda = 0.5, mu = 1.0;
  // pick the deadline so the violation probability sits near 3e-3
  const double deadline = std::log(lambda / mu / 3e-3) / (mu - lambda);
  const double predicted = delayViolationProb(lambda, mu, deadline);
  const double simulated = oracle::mm1WaitViolationFreq(lambda, mu, deadline, 2'000'000, 11);
  CHECK(simulated == doctest::Approx(predicted).epsilon(0.10));
}

TEST_CASE("waiting-time tail monotonicity") {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    const double mu = 0.5 + 2.0 * rng.uniform01();
    const double rho = mu * (0.1 + 0.8 * rng.uniform01());
    const double d = 0.5 + 5.0 * rng.uniform01();
    const double base = delayViolationProb(rho, mu, d);
    CHECK(delayViolationProb(rho * 1.01, mu, d) > base);
    CHECK(delayViolationProb(rho, mu * 1.01, d) < base);
    CHECK(delayViolationProb(rho, mu, d * 1.01) < base);
  }
}

TEST_CASE("admissible rate") {
  CHECK(maxAdmissibleRate(2e5, 1e-6, 1e-4) ==
        doctest::Approx(2e5 - std::log(1e6) / 1e-4).epsilon(1e-12));
  CHECK(maxAdmissibleRate(2e5, 1e-6, 1e-4) == doctest::Approx(6.1845e4).epsilon(1e-4));
  CHECK(maxAdmissibleRate(1e3, 1e-6, 1e-4) == 0.0);  // penalty exceeds service
  CHECK(maxAdmissibleRate(5.0, 1.0 - 1e-12, 1.0) == doctest::Approx(5.0).epsilon(1e-9));
  CHECK_THROWS_AS(maxAdmissibleRate(-1.0, 1e-6, 1e-4), DomainError);
  CHECK_THROWS_AS(maxAdmissibleRate(1.0, 0.0, 1e-4), DomainError);
}

TEST_CASE("admitting at the cap honors the exact tail within the stated slack") {
  Rng rng(21);
  for (int trial = 0; trial < 30; ++trial) {
    const double mu = 1.0 + 10.0 * rng.uniform01();
    const double eps = std::pow(10.0, -1.0 - 4.0 * rng.uniform01());
    const double d = 0.5 + 3.0 * rng.uniform01();
    const double rho = maxAdmissibleRate(mu, eps, d);
    if (rho <= 0.0) continue;
    const double exact = delayViolationProb(rho, mu, d);
    CHECK(exact <= eps * (1.0 + 1e-12));
    CHECK(exact == doctest::Approx(eps * rho / mu).epsilon(1e-9));
  }
}

TEST_CASE("last-hop admissible rate") {
  CHECK(rhoStarLastHop(3e6, 1e-6, 1e-4) ==
        doctest::Approx(3e6 - std::log(1e6) / 1e-4).epsilon(1e-12));
  CHECK(rhoStarLastHop(3e6, 1e-6, 1e-4) == doctest::Approx(2.8618e6).epsilon(1e-4));
  CHECK(rhoStarLastHop(1e5, 1e-6, 1e-4) == 0.0);
  // longer deadline admits more
  CHECK(rhoStarLastHop(3e6, 1e-6, 1e-3) == doctest::Approx(2.98618e6).epsilon(1e-5));
  CHECK(rhoStarLastHop(3e6, 1e-6, 1e-3) > rhoStarLastHop(3e6, 1e-6, 1e-4));
}

TEST_CASE("interior admissible rate") {
  // penalty ln(1/eps)/D = 0.5 with eps = e^-0.5, D = 1
  const double eps = std::exp(-0.5);
  std::vector<LinkCap> links{{2.0, 1.0}, {2.0, 3.0}};
  CHECK(rhoStarInterior(links, eps, 1.0) == doctest::Approx(2.5).epsilon(1e-12));

  // zero-limit cold start admits nothing
  std::vector<LinkCap> cold{{5.0, 0.0}, {9.0, 0.0}};
  CHECK(rhoStarInterior(cold, eps, 1.0) == 0.0);

  // monotone in every offered rate and limit
  Rng rng(13);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<LinkCap> base(2);
    for (auto& l : base) {
      l.muHat = 3.0 * rng.uniform01();
      l.rhoHatLimit = 3.0 * rng.uniform01();
    }
    const double f0 = rhoStarInterior(base, eps, 1.0);
    auto moreMu = base;
    moreMu[0].muHat += 0.5;
    CHECK(rhoStarInterior(moreMu, eps, 1.0) >= f0);
    auto moreLimit = base;
    moreLimit[1].rhoHatLimit += 0.5;
    CHECK(rhoStarInterior(moreLimit, eps, 1.0) >= f0);
  }
}

TEST_CASE("limit apportionment") {
  const std::vector<NodeId> relays{NodeId::relay(1, 1), NodeId::relay(1, 2)};
  const std::vector<NodeId> sources{NodeId::source(1), NodeId::source(2)};

  auto limits = apportionLimits(
      9.0, {{NodeId::relay(1, 1), 2.0}, {NodeId::relay(1, 2), 1.0}}, relays, 2);
  CHECK(limits[NodeId::relay(1, 1)] == doctest::Approx(6.0));
  CHECK(limits[NodeId::relay(1, 2)] == doctest::Approx(3.0));

  // no observed arrivals: relays share equally, sources get the full limit
  limits = apportionLimits(9.0, {}, relays, 2);
  CHECK(limits[NodeId::relay(1, 1)] == doctest::Approx(4.5));
  CHECK(limits[NodeId::relay(1, 2)] == doctest::Approx(4.5));
  limits = apportionLimits(9.0, {}, sources, 2);
  CHECK(limits[NodeId::source(1)] == doctest::Approx(9.0));
  CHECK(limits[NodeId::source(2)] == doctest::Approx(9.0));

  // proportional branch partitions the admissible rate
  Rng rng(29);
  for (int trial = 0; trial < 20; ++trial) {
    std::map<NodeId, double> arr{{relays[0], rng.uniform01() + 0.01},
                                 {relays[1], rng.uniform01()}};
    const double star = 5.0 * rng.uniform01();
    auto lim = apportionLimits(star, arr, relays, 2);
    CHECK(lim[relays[0]] + lim[relays[1]] == doctest::Approx(star).epsilon(1e-12));
    CHECK(lim[relays[0]] >= 0.0);
    CHECK(lim[relays[1]] >= 0.0);
  }
}

TEST_CASE("equal end-to-end budget split") {
  const QosBudget one = deriveEqualBudgets(1, 3e-4, 1e-6);
  CHECK(one.deadline_s == doctest::Approx(3e-4));
  CHECK(one.violationProb == doctest::Approx(1e-6).epsilon(1e-12));

  const QosBudget three = deriveEqualBudgets(3, 3e-4, 3e-6);
  CHECK(three.deadline_s == doctest::Approx(1e-4).epsilon(1e-12));
  CHECK(three.violationProb == doctest::Approx(1e-6).epsilon(1e-3));

  // the per-node values compose back to the end-to-end budget exactly
  const double recomposed = 1.0 - std::pow(1.0 - three.violationProb, 3);
  CHECK(recomposed == doctest::Approx(3e-6).epsilon(1e-12));
  CHECK(3.0 * three.deadline_s == doctest::Approx(3e-4).epsilon(1e-12));
}

TEST_CASE("budget lookup and penalties") {
  QosSpec spec;
  spec.defaultBudget = {1e-4, 1e-6};
  spec.overrides[{NodeId::relay(1, 1), 2}] = {1e-3, 1e-2};
  CHECK(spec.at(NodeId::source(1), 1).deadline_s == 1e-4);
  CHECK(spec.at(NodeId::relay(1, 1), 2).deadline_s == 1e-3);
  CHECK(spec.penalty(NodeId::source(1), 1) ==
        doctest::Approx(std::log(1e6) / 1e-4).epsilon(1e-12));
  CHECK(spec.penalty(NodeId::relay(1, 1), 2) ==
        doctest::Approx(std::log(1e2) / 1e-3).epsilon(1e-12));

  QosSpec bad;
  bad.defaultBudget = {0.0, 0.5};
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}
