#include "xlroute/static_baseline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "xlroute/channel.hpp"
#include "xlroute/errors.hpp"
#include "xlroute/tcdr.hpp"

namespace xlr {

namespace {
std::size_t idx(int i) { return static_cast<std::size_t>(i); }
}  // namespace

AssignmentEnumerator::AssignmentEnumerator(int sources, int hops, int relaysPerHop,
                                           std::uint64_t cap)
    : sources_(sources), hops_(hops), relaysPerHop_(relaysPerHop) {
  if (sources < 1 || hops < 1 || relaysPerHop < 1) {
    throw ConfigError("assignment enumeration needs K, L, M >= 1");
  }
  count_ = 1;
  for (int d = 0; d < sources * hops; ++d) {
    count_ *= static_cast<std::uint64_t>(relaysPerHop);
    if (count_ > cap) {
      throw EnumerationCapError(
          "assignment count M^(K*L) exceeds the cap of " + std::to_string(cap) +
          "; raise the cap to enumerate anyway");
    }
  }
  current_.sources = sources;
  current_.hops = hops;
  current_.relayOf.assign(idx(sources * hops), 1);
}

bool AssignmentEnumerator::next(StaticAssignment& out) {
  if (done_) return false;
  if (!started_) {
    started_ = true;
    out = current_;
    return true;
  }
  // odometer increment, least-significant digit last
  for (int d = static_cast<int>(current_.relayOf.size()) - 1; d >= 0; --d) {
    if (current_.relayOf[idx(d)] < relaysPerHop_) {
      ++current_.relayOf[idx(d)];
      out = current_;
      return true;
    }
    current_.relayOf[idx(d)] = 1;
  }
  done_ = true;
  return false;
}

namespace {

struct PathNode {
  int node;       // dense index of the transmitter
  int target;     // dense index of its next hop on this path
  double rate;    // single-link ergodic rate of the path edge
  double cumPen;  // QoS penalties accumulated from the source through here
};

std::vector<PathNode> pathOf(const StaticAssignment& a, const NetIndex& net,
                             const QosSpec& qos, int k) {
  std::vector<PathNode> path;
  NodeId here = NodeId::source(k);
  double cum = 0.0;
  for (int stage = 0; stage <= net.hops(); ++stage) {
    const NodeId nextId = stage < net.hops()
                              ? NodeId::relay(stage + 1, a.relay(k, stage + 1))
                              : NodeId::destination(k);
    const int i = net.indexOf(here);
    const int j = net.indexOf(nextId);
    const int li = net.linkIndexOf(i, j);
    if (li < 0) throw StructureError("assignment edge missing from the topology");
    cum += qos.penalty(here, k);
    path.push_back({i, j, meanRateSingle(net.gammaBar(i, li),
                                         net.params().bandwidth_hz),
                    cum});
    here = nextId;
  }
  return path;
}

double pathRate(const std::vector<PathNode>& path, const std::vector<double>& shares) {
  double r = std::numeric_limits<double>::infinity();
  for (std::size_t s = 0; s < path.size(); ++s) {
    r = std::min(r, shares[s] * path[s].rate - path[s].cumPen);
  }
  return std::max(0.0, r);
}

StaticPlan makePlan(const NetIndex& net, const std::vector<std::vector<PathNode>>& paths,
                    const std::vector<std::vector<double>>& shares,
                    const std::vector<double>& rates,
                    const StaticAssignment& assignment) {
  StaticPlan plan;
  plan.assignment = assignment;
  plan.share.assign(idx(net.txCount()), std::vector<double>(idx(net.sources()), 0.0));
  plan.edgeTarget.assign(idx(net.txCount()), std::vector<int>(idx(net.sources()), -1));
  plan.sourceRate = rates;
  for (int k = 1; k <= net.sources(); ++k) {
    const auto& path = paths[idx(k - 1)];
    for (std::size_t s = 0; s < path.size(); ++s) {
      plan.share[idx(path[s].node)][idx(k - 1)] = shares[idx(k - 1)][s];
      plan.edgeTarget[idx(path[s].node)][idx(k - 1)] = path[s].target;
    }
  }
  return plan;
}

// Exact split for two sources. Parametrized by the rate granted to source 1:
// each shared node then needs airtime (rho1 + cumPen1)/r1, the rest serves
// source 2, whose rate is a min of affine pieces in rho1. The maximum of the
// weighted sum sits on a piece boundary, so evaluating every boundary is exact.
StaticEval evaluateTwoSources(const StaticAssignment& assignment, const NetIndex& net,
                              const Objective& objective,
                              std::vector<std::vector<PathNode>>& paths) {
  const auto& p1 = paths[0];
  const auto& p2 = paths[1];

  std::vector<int> sharedOf2(p2.size(), -1);  // index into p1, -1 when exclusive
  for (std::size_t s2 = 0; s2 < p2.size(); ++s2) {
    for (std::size_t s1 = 0; s1 < p1.size(); ++s1) {
      if (p1[s1].node == p2[s2].node) sharedOf2[s2] = static_cast<int>(s1);
    }
  }

  double rho1Max = std::numeric_limits<double>::infinity();
  for (const PathNode& n : p1) rho1Max = std::min(rho1Max, n.rate - n.cumPen);
  rho1Max = std::max(0.0, rho1Max);

  // source 2's rate when source 1 takes rho1 (> 0), as min of lines c - m*rho1
  std::vector<double> c(p2.size()), m(p2.size());
  for (std::size_t s2 = 0; s2 < p2.size(); ++s2) {
    if (sharedOf2[s2] < 0) {
      c[s2] = p2[s2].rate - p2[s2].cumPen;
      m[s2] = 0.0;
    } else {
      const PathNode& n1 = p1[idx(sharedOf2[s2])];
      c[s2] = p2[s2].rate * (1.0 - n1.cumPen / n1.rate) - p2[s2].cumPen;
      m[s2] = p2[s2].rate / n1.rate;
    }
  }

  std::vector<double> candidates{0.0, rho1Max};
  for (std::size_t a = 0; a < p2.size(); ++a) {
    if (m[a] > 0.0) candidates.push_back(c[a] / m[a]);  // line crosses zero
    for (std::size_t b = a + 1; b < p2.size(); ++b) {
      if (m[a] != m[b]) candidates.push_back((c[a] - c[b]) / (m[a] - m[b]));
    }
  }

  const double f1 = objective.weightOf(1);
  const double f2 = objective.weightOf(2);
  auto rho2At = [&](double rho1) {
    double r = std::numeric_limits<double>::infinity();
    for (std::size_t s2 = 0; s2 < p2.size(); ++s2) {
      // rho1 == 0 frees the shared airtime entirely
      const double line = rho1 > 0.0 ? c[s2] - m[s2] * rho1
                                     : p2[s2].rate - p2[s2].cumPen;
      r = std::min(r, line);
    }
    return std::max(0.0, r);
  };

  double bestF = -1.0, bestRho1 = 0.0, bestRho2 = 0.0;
  for (double rho1 : candidates) {
    if (!(rho1 >= 0.0) || rho1 > rho1Max) continue;
    const double rho2 = rho2At(rho1);
    const double f = f1 * rho1 + f2 * rho2;
    if (f > bestF) {
      bestF = f;
      bestRho1 = rho1;
      bestRho2 = rho2;
    }
  }

  std::vector<std::vector<double>> shares(2);
  shares[0].assign(p1.size(), 1.0);
  shares[1].assign(p2.size(), 1.0);
  for (std::size_t s2 = 0; s2 < p2.size(); ++s2) {
    if (sharedOf2[s2] < 0) continue;
    const PathNode& n1 = p1[idx(sharedOf2[s2])];
    const double t1 = bestRho1 > 0.0 ? (bestRho1 + n1.cumPen) / n1.rate : 0.0;
    shares[0][idx(sharedOf2[s2])] = t1;
    shares[1][s2] = 1.0 - t1;
  }

  StaticEval eval;
  eval.bestF = bestF;
  eval.plan = makePlan(net, paths, shares, {bestRho1, bestRho2}, assignment);

  std::vector<std::vector<double>> equalShares = shares;
  for (std::size_t s2 = 0; s2 < p2.size(); ++s2) {
    if (sharedOf2[s2] < 0) continue;
    equalShares[0][idx(sharedOf2[s2])] = 0.5;
    equalShares[1][s2] = 0.5;
  }
  eval.equalShareF =
      f1 * pathRate(p1, equalShares[0]) + f2 * pathRate(p2, equalShares[1]);
  return eval;
}

// General case: time-division optimization restricted to the assignment's
// edges, with each edge reserved for the sources routed over it.
StaticEval evaluateViaRestrictedTd(const StaticAssignment& assignment,
                                   const NetIndex& net, const QosSpec& qos,
                                   const Objective& objective,
                                   std::vector<std::vector<PathNode>>& paths) {
  std::vector<std::pair<NodeId, NodeId>> edges;
  for (const auto& path : paths) {
    for (const PathNode& n : path) {
      edges.emplace_back(net.idOf(n.node), net.idOf(n.target));
    }
  }
  const Topology restricted = restrictToEdges(net.topo(), edges);
  NetIndex restrictedNet(restricted, net.params());
  std::vector<std::vector<char>> mask(idx(restrictedNet.txCount()));
  for (int i = 0; i < restrictedNet.txCount(); ++i) {
    mask[idx(i)].assign(idx(restrictedNet.slotCount(i)), 0);
  }
  for (int k = 1; k <= net.sources(); ++k) {
    for (const PathNode& n : paths[idx(k - 1)]) {
      const int i = restrictedNet.indexOf(net.idOf(n.node));
      const int li = restrictedNet.linkIndexOf(i, restrictedNet.indexOf(net.idOf(n.target)));
      mask[idx(i)][idx(restrictedNet.slot(li, k))] = 1;
    }
  }
  restrictedNet.setAllowedMask(std::move(mask));

  Hyperparams hp;
  TcdrRun run = runTcdr(restrictedNet, qos, objective, hp);

  StaticEval eval;
  eval.bestF = run.result.objective;
  eval.equalShareF = eval.bestF;  // refinement of the split is already optimal
  std::vector<std::vector<double>> shares;
  TcdrPolicy policy(restrictedNet, hp);
  policy.setState(run.state);
  for (int k = 1; k <= net.sources(); ++k) {
    auto& pathShares = shares.emplace_back();
    for (const PathNode& n : paths[idx(k - 1)]) {
      const int i = restrictedNet.indexOf(net.idOf(n.node));
      const int li = restrictedNet.linkIndexOf(i, restrictedNet.indexOf(net.idOf(n.target)));
      pathShares.push_back(policy.timeShare(i, li, k));
    }
  }
  eval.plan = makePlan(net, paths, shares, run.result.sourceRate, assignment);
  return eval;
}

}  // namespace

StaticEval evaluateStatic(const StaticAssignment& assignment, const NetIndex& net,
                          const QosSpec& qos, const Objective& objective) {
  objective.validate(net.sources());
  std::vector<std::vector<PathNode>> paths;
  for (int k = 1; k <= net.sources(); ++k) {
    paths.push_back(pathOf(assignment, net, qos, k));
  }

  if (net.sources() == 1) {
    std::vector<std::vector<double>> shares{std::vector<double>(paths[0].size(), 1.0)};
    const double rho = pathRate(paths[0], shares[0]);
    StaticEval eval;
    eval.bestF = objective.weightOf(1) * rho;
    eval.equalShareF = eval.bestF;
    eval.plan = makePlan(net, paths, shares, {rho}, assignment);
    return eval;
  }
  if (net.sources() == 2) {
    return evaluateTwoSources(assignment, net, objective, paths);
  }
  return evaluateViaRestrictedTd(assignment, net, qos, objective, paths);
}

BestStatic bestStatic(const NetIndex& net, const QosSpec& qos,
                      const Objective& objective, std::uint64_t cap) {
  AssignmentEnumerator en(net.sources(), net.hops(), net.relaysPerHop(), cap);
  BestStatic best;
  bool first = true;
  StaticAssignment a;
  while (en.next(a)) {
    StaticEval eval = evaluateStatic(a, net, qos, objective);
    if (first || eval.bestF > best.eval.bestF) {
      best.assignment = a;
      best.eval = std::move(eval);
      first = false;
    }
  }
  return best;
}

}  // namespace xlr
