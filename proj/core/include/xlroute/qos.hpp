#pragma once

#include <map>
#include <span>
#include <utility>

#include "xlroute/node.hpp"

namespace xlr {

// Delay deadline and permitted deadline-violation probability for one queue
// (the buffer holding source k's data at node i).
struct QosBudget {
  double deadline_s = 1.0e-4;
  double violationProb = 1.0e-6;
};

struct QosSpec {
  QosBudget defaultBudget;
  // explicit per-(node, source) overrides; absent entries use the default
  std::map<std::pair<NodeId, int>, QosBudget> overrides;

  const QosBudget& at(NodeId node, int source) const;
  // Rate headroom a queue must keep to honor its budget: ln(1/eps*) / D*.
  double penalty(NodeId node, int source) const;

  void validate() const;  // throws ConfigError on out-of-range budgets
};

// Traffic-split identity: the share of node i's source-k arrivals that leaves
// over the link with service rate mu_ijk out of mu_ik total.
double splitRate(double rho_ik, double mu_ijk, double mu_ik);

// M/M/1 head-of-line waiting-time tail: P(D > deadline) = (rho/mu) e^{-D(mu-rho)}.
// Requires a stable queue (rho < mu). The delay is read as the wait before
// service begins (the simulator drops on the same rule); a sojourn-time
// reading would fold one service time into the deadline.
double delayViolationProb(double rho, double mu, double deadline_s);

// Largest arrival rate a queue with service rate mu admits under the budget:
// max(0, mu - ln(1/eps*)/D*).
double maxAdmissibleRate(double mu, double epsStar, double deadline_s);

// Admissible rate at a last-hop relay, whose only outlet for source k is the
// destination link with offered rate muHatToDest.
double rhoStarLastHop(double muHatToDest, double epsStar, double deadline_s);

// One outgoing link of an interior node: the offered rate and the limit the
// next-hop node granted.
struct LinkCap {
  double muHat = 0.0;
  double rhoHatLimit = 0.0;
};

// Admissible rate at a source or interior relay:
// max(0, sum_j min(muHat_j, rhoHat_j) - ln(1/eps*)/D*).
double rhoStarInterior(std::span<const LinkCap> links, double epsStar,
                       double deadline_s);

// Splits an admissible rate into per-predecessor limits: proportional to the
// observed arrivals when there are any; otherwise the full limit to a source
// predecessor and an equal 1/M share to relay predecessors.
std::map<NodeId, double> apportionLimits(double rhoStar,
                                         const std::map<NodeId, double>& observedArrivals,
                                         std::span<const NodeId> prevHops,
                                         int relaysPerHop);

// Equal division of an end-to-end budget over the queues of a path:
// deadlines split evenly, loss budget split so the per-node values compose
// back to the end-to-end target exactly.
QosBudget deriveEqualBudgets(int pathLength, double endToEndDeadline_s,
                             double endToEndLoss);

}  // namespace xlr
