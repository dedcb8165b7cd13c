#include "xlroute/qos.hpp"

#include <algorithm>
#include <cmath>

#include "xlroute/errors.hpp"

namespace xlr {

namespace {
void checkBudget(const QosBudget& b) {
  if (!(b.deadline_s > 0.0)) throw ConfigError("deadline must be > 0");
  if (!(b.violationProb > 0.0 && b.violationProb < 1.0)) {
    throw ConfigError("violation probability must be in (0, 1)");
  }
}
}  // namespace

const QosBudget& QosSpec::at(NodeId node, int source) const {
  auto it = overrides.find({node, source});
  return it == overrides.end() ? defaultBudget : it->second;
}

double QosSpec::penalty(NodeId node, int source) const {
  const QosBudget& b = at(node, source);
  return std::log(1.0 / b.violationProb) / b.deadline_s;
}

void QosSpec::validate() const {
  checkBudget(defaultBudget);
  for (const auto& [key, b] : overrides) checkBudget(b);
}

double splitRate(double rho_ik, double mu_ijk, double mu_ik) {
  if (rho_ik < 0.0 || mu_ijk < 0.0 || mu_ik < 0.0) {
    throw DomainError("rates must be nonnegative");
  }
  if (mu_ik == 0.0) {
    if (rho_ik > 0.0) throw StarvationError("arrivals with zero service rate");
    return 0.0;
  }
  return mu_ijk / mu_ik * rho_ik;
}

double delayViolationProb(double rho, double mu, double deadline_s) {
  if (rho < 0.0) throw DomainError("arrival rate must be >= 0");
  if (!(deadline_s > 0.0)) throw DomainError("deadline must be > 0");
  if (!(rho < mu)) throw InstabilityError("queue requires rho < mu");
  if (rho == 0.0) return 0.0;
  return rho / mu * std::exp(-deadline_s * (mu - rho));
}

double maxAdmissibleRate(double mu, double epsStar, double deadline_s) {
  if (mu < 0.0) throw DomainError("service rate must be >= 0");
  if (!(epsStar > 0.0 && epsStar < 1.0)) throw DomainError("eps* must be in (0, 1)");
  if (!(deadline_s > 0.0)) throw DomainError("deadline must be > 0");
  const double penalty = std::log(1.0 / epsStar) / deadline_s;
  return std::max(0.0, mu - penalty);
}

double rhoStarLastHop(double muHatToDest, double epsStar, double deadline_s) {
  return maxAdmissibleRate(muHatToDest, epsStar, deadline_s);
}

double rhoStarInterior(std::span<const LinkCap> links, double epsStar,
                       double deadline_s) {
  double served = 0.0;
  for (const LinkCap& link : links) {
    if (link.muHat < 0.0 || link.rhoHatLimit < 0.0) {
      throw DomainError("link caps must be nonnegative");
    }
    served += std::min(link.muHat, link.rhoHatLimit);
  }
  return maxAdmissibleRate(served, epsStar, deadline_s);
}

std::map<NodeId, double> apportionLimits(double rhoStar,
                                         const std::map<NodeId, double>& observedArrivals,
                                         std::span<const NodeId> prevHops,
                                         int relaysPerHop) {
  if (rhoStar < 0.0) throw DomainError("admissible rate must be >= 0");
  double totalArrivals = 0.0;
  for (NodeId y : prevHops) {
    auto it = observedArrivals.find(y);
    if (it != observedArrivals.end()) {
      if (it->second < 0.0) throw DomainError("arrival estimates must be >= 0");
      totalArrivals += it->second;
    }
  }
  std::map<NodeId, double> limits;
  for (NodeId y : prevHops) {
    if (totalArrivals > 0.0) {
      auto it = observedArrivals.find(y);
      const double arr = it == observedArrivals.end() ? 0.0 : it->second;
      limits[y] = arr / totalArrivals * rhoStar;
    } else if (y.isSource()) {
      limits[y] = rhoStar;
    } else {
      limits[y] = rhoStar / relaysPerHop;
    }
  }
  return limits;
}

QosBudget deriveEqualBudgets(int pathLength, double endToEndDeadline_s,
                             double endToEndLoss) {
  if (pathLength < 1) throw DomainError("path length must be >= 1");
  QosBudget b;
  b.deadline_s = endToEndDeadline_s / pathLength;
  // 1 - (1 - eps)^(1/n), evaluated without cancellation
  b.violationProb = -std::expm1(std::log1p(-endToEndLoss) / pathLength);
  checkBudget(b);
  return b;
}

}  // namespace xlr
