#include "xlroute/control.hpp"

#include <algorithm>
#include <cmath>

#include "xlroute/errors.hpp"

namespace xlr {

const char* schemeName(Scheme s) {
  switch (s) {
    case Scheme::Ocdr: return "ocdr";
    case Scheme::Tcdr: return "tcdr";
    case Scheme::StaticAssign: return "static";
  }
  return "?";
}

Scheme schemeFromName(const std::string& name) {
  if (name == "ocdr") return Scheme::Ocdr;
  if (name == "tcdr") return Scheme::Tcdr;
  if (name == "static") return Scheme::StaticAssign;
  throw ConfigError("unknown scheme '" + name + "' (ocdr, tcdr, static)");
}

void Objective::validate(int sources) const {
  if (static_cast<int>(weights.size()) != sources) {
    throw ConfigError("need one weight per source");
  }
  bool anyPositive = false;
  for (double f : weights) {
    if (f < 0.0) throw ConfigError("weights must be >= 0");
    anyPositive = anyPositive || f > 0.0;
  }
  if (!anyPositive) throw ConfigError("at least one weight must be > 0");
}

void Hyperparams::validate() const {
  if (!(stepAlpha > 0.0 && stepBeta > 0.0 && stepAlphaPrime > 0.0)) {
    throw ConfigError("ascent steps must be > 0");
  }
  if (betaPeriodRounds < 1) throw ConfigError("betaPeriodRounds must be >= 1");
  if (!(convergenceTol > 0.0)) throw ConfigError("convergenceTol must be > 0");
  if (patienceRounds < 1 || maxRounds < 1) throw ConfigError("round counts must be >= 1");
  if (!(betaFloor > 0.0)) throw ConfigError("betaFloor must be > 0");
  if (alphaFloor < 0.0) throw ConfigError("alphaFloor must be >= 0");
  if (!(t2_s > t1_s)) throw ConfigError("need t2 > t1");
}

NetIndex::NetIndex(const Topology& topo, const ChannelParams& params)
    : topo_(&topo), params_(params) {
  params_.validate();
  K_ = topo.sources;
  L_ = topo.hops;
  M_ = topo.relaysPerHop;
  ids_ = topo.allNodes();
  nodeCount_ = static_cast<int>(ids_.size());
  txCount_ = K_ + L_ * M_;

  links_.resize(static_cast<std::size_t>(txCount_));
  prevs_.resize(static_cast<std::size_t>(nodeCount_));
  gammaBars_.resize(static_cast<std::size_t>(txCount_));
  for (int i = 0; i < txCount_; ++i) {
    const NodeId id = ids_[static_cast<std::size_t>(i)];
    for (NodeId u : topo.next(id)) {
      links_[static_cast<std::size_t>(i)].push_back(indexOf(u));
      gammaBars_[static_cast<std::size_t>(i)].push_back(
          avgSnr(params_, topo.distance(id, u)));
    }
  }
  for (int i = 0; i < nodeCount_; ++i) {
    const NodeId id = ids_[static_cast<std::size_t>(i)];
    for (NodeId v : topo.prev(id)) {
      prevs_[static_cast<std::size_t>(i)].push_back(indexOf(v));
    }
  }
}

int NetIndex::indexOf(NodeId id) const {
  auto it = std::lower_bound(ids_.begin(), ids_.end(), id);
  if (it == ids_.end() || *it != id) throw ConfigError("node not in topology");
  return static_cast<int>(it - ids_.begin());
}

std::span<const int> NetIndex::links(int i) const {
  return links_[static_cast<std::size_t>(i)];
}

std::span<const int> NetIndex::prevs(int i) const {
  return prevs_[static_cast<std::size_t>(i)];
}

int NetIndex::linkIndexOf(int i, int target) const {
  auto ls = links(i);
  for (std::size_t li = 0; li < ls.size(); ++li) {
    if (ls[li] == target) return static_cast<int>(li);
  }
  return -1;
}

bool NetIndex::isLastHopRelay(int i) const {
  const NodeId id = idOf(i);
  return id.isRelay() && id.hop == L_;
}

int NetIndex::destIndexOf(int k) const { return indexOf(NodeId::destination(k)); }

bool NetIndex::allowed(int i, int li, int k) const {
  if (!allowedMask_.empty() &&
      !allowedMask_[static_cast<std::size_t>(i)][static_cast<std::size_t>(slot(li, k))]) {
    return false;
  }
  const NodeId id = idOf(i);
  if (id.isSource()) return id.index == k;
  if (isLastHopRelay(i)) {
    return idOf(links(i)[static_cast<std::size_t>(li)]) == NodeId::destination(k);
  }
  return true;
}

void NetIndex::setAllowedMask(std::vector<std::vector<char>> mask) {
  if (mask.size() != static_cast<std::size_t>(txCount_)) {
    throw ConfigError("allowed mask must cover every transmitter");
  }
  for (int i = 0; i < txCount_; ++i) {
    if (mask[static_cast<std::size_t>(i)].size() != static_cast<std::size_t>(slotCount(i))) {
      throw ConfigError("allowed mask row size mismatch");
    }
  }
  allowedMask_ = std::move(mask);
}

double NetIndex::gammaBar(int i, int li) const {
  return gammaBars_[static_cast<std::size_t>(i)][static_cast<std::size_t>(li)];
}

std::span<const double> NetIndex::gammaBarRow(int i) const {
  return gammaBars_[static_cast<std::size_t>(i)];
}

std::vector<std::vector<double>> SchemePolicy::snapshotParams() const {
  std::vector<std::vector<double>> out;
  for (int i = 0; i < txCount(); ++i) {
    auto block = paramBlock(i);
    out.emplace_back(block.begin(), block.end());
  }
  return out;
}

void SchemePolicy::restoreParams(const std::vector<std::vector<double>>& saved) {
  for (int i = 0; i < txCount(); ++i) {
    auto block = paramBlock(i);
    std::copy(saved[static_cast<std::size_t>(i)].begin(),
              saved[static_cast<std::size_t>(i)].end(), block.begin());
  }
}

namespace {

std::size_t idx(int i) { return static_cast<std::size_t>(i); }

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Deterministic stand-in for arrival-estimation noise: a per-(relay,
// predecessor, source) phase-shifted log-sinusoid applied to the estimates
// behind the limit apportionment.
struct EstimateDither {
  double amplitude = 0.0;
  double phase = 0.0;

  double scale(int relay, int predPos, int k) const {
    if (amplitude <= 1e-3) return 1.0;
    const std::uint64_t h = mix64(
        (static_cast<std::uint64_t>(relay) << 32) ^
        (static_cast<std::uint64_t>(predPos) << 16) ^ static_cast<std::uint64_t>(k));
    const double offset =
        static_cast<double>(h >> 11) * 0x1.0p-53 * 6.283185307179586;
    return std::exp(amplitude * std::sin(phase + offset));
  }
};

struct Workspace {
  std::vector<std::vector<double>> muHat, grants, nextGrants, flows, rhoStar;
  std::vector<std::vector<double>> arrivals;      // per tx node, per source
  std::vector<std::vector<double>> arrivalsFrom;  // per node, [vIdx*K + (k-1)]
  std::vector<double> rho;                        // admitted source rates
  bool starvedNode = false;  // some node held flow it could not forward

  explicit Workspace(const NetIndex& net) {
    const int tx = net.txCount();
    const int K = net.sources();
    muHat.resize(idx(tx));
    grants.resize(idx(tx));
    nextGrants.resize(idx(tx));
    flows.resize(idx(tx));
    arrivals.assign(idx(tx), std::vector<double>(idx(K), 0.0));
    for (int i = 0; i < tx; ++i) {
      muHat[idx(i)].assign(idx(net.slotCount(i)), 0.0);
      grants[idx(i)].assign(idx(net.slotCount(i)), 0.0);
      nextGrants[idx(i)].assign(idx(net.slotCount(i)), 0.0);
      flows[idx(i)].assign(idx(net.slotCount(i)), 0.0);
    }
    arrivalsFrom.resize(idx(net.nodeCount()));
    for (int i = 0; i < net.nodeCount(); ++i) {
      arrivalsFrom[idx(i)].assign(net.prevs(i).size() * idx(K), 0.0);
    }
    rho.assign(idx(K), 0.0);
  }
};

// Grant-limited service rate of slot (li, k) at node i.
double effectiveMu(const NetIndex& net, const Workspace& ws, int i, int li, int k) {
  const auto s = idx(net.slot(li, k));
  if (net.isLastHopRelay(i)) {
    return net.allowed(i, li, k) ? ws.muHat[idx(i)][s] : 0.0;
  }
  return std::min(ws.muHat[idx(i)][s], ws.grants[idx(i)][s]);
}

// One control round: offered rates, admissible rates and admissions from the
// limits received last round, flow propagation, fresh limits for next round.
// Returns the weighted sum rate.
double computeRound(const NetIndex& net, const QosSpec& qos, const Objective& objective,
                    const SchemePolicy& policy, Workspace& ws,
                    const EstimateDither& dither = {}) {
  const int tx = net.txCount();
  const int K = net.sources();

  for (int i = 0; i < tx; ++i) policy.nodeRates(i, ws.muHat[idx(i)]);

  const double f = evaluateObjective(net, qos, objective, ws.muHat, ws.grants, ws.rhoStar);
  for (int k = 1; k <= K; ++k) {
    const int src = net.indexOf(NodeId::source(k));
    ws.rho[idx(k - 1)] = ws.rhoStar[idx(src)][idx(k - 1)];
  }

  for (auto& a : ws.arrivals) std::fill(a.begin(), a.end(), 0.0);
  for (auto& a : ws.arrivalsFrom) std::fill(a.begin(), a.end(), 0.0);
  for (auto& fl : ws.flows) std::fill(fl.begin(), fl.end(), 0.0);
  ws.starvedNode = false;
  for (int k = 1; k <= K; ++k) {
    const int src = net.indexOf(NodeId::source(k));
    ws.arrivals[idx(src)][idx(k - 1)] = ws.rho[idx(k - 1)];
  }
  for (int i = 0; i < tx; ++i) {
    for (int k = 1; k <= K; ++k) {
      const double rhoIk = ws.arrivals[idx(i)][idx(k - 1)];
      if (rhoIk <= 0.0) continue;
      double muIk = 0.0;
      for (int li = 0; li < net.linkCount(i); ++li) muIk += effectiveMu(net, ws, i, li, k);
      if (muIk <= 0.0) {
        ws.starvedNode = true;
        continue;
      }
      for (int li = 0; li < net.linkCount(i); ++li) {
        const double mu = effectiveMu(net, ws, i, li, k);
        if (mu <= 0.0) continue;
        const double flowShare = splitRate(rhoIk, mu, muIk);
        ws.flows[idx(i)][idx(net.slot(li, k))] = flowShare;
        const int j = net.links(i)[idx(li)];
        if (j < tx) {
          ws.arrivals[idx(j)][idx(k - 1)] += flowShare;
          const auto pv = net.prevs(j);
          for (std::size_t v = 0; v < pv.size(); ++v) {
            if (pv[v] == i) ws.arrivalsFrom[idx(j)][v * idx(K) + idx(k - 1)] += flowShare;
          }
        }
      }
    }
  }

  for (auto& g : ws.nextGrants) std::fill(g.begin(), g.end(), 0.0);
  for (int i = 0; i < tx; ++i) {
    if (!net.idOf(i).isRelay()) continue;
    const auto pv = net.prevs(i);
    for (int k = 1; k <= K; ++k) {
      double totalArr = 0.0;
      double totalEst = 0.0;
      for (std::size_t v = 0; v < pv.size(); ++v) {
        const double arr = ws.arrivalsFrom[idx(i)][v * idx(K) + idx(k - 1)];
        totalArr += arr;
        totalEst += arr * dither.scale(i, static_cast<int>(v), k);
      }
      const double star = ws.rhoStar[idx(i)][idx(k - 1)];
      for (std::size_t v = 0; v < pv.size(); ++v) {
        const int y = pv[v];
        double share;
        if (totalArr > 0.0) {
          const double est = ws.arrivalsFrom[idx(i)][v * idx(K) + idx(k - 1)] *
                             dither.scale(i, static_cast<int>(v), k);
          share = est / totalEst * star;
        } else if (net.idOf(y).isSource()) {
          share = star;
        } else {
          share = star / net.relaysPerHop();
        }
        const int li = net.linkIndexOf(y, i);
        ws.nextGrants[idx(y)][idx(net.slot(li, k))] = share;
      }
    }
  }
  return f;
}

// Objective sensitivity to each offered rate, encoding the saturation gate,
// the zero clamp and the active min() branch. A source's admission is the
// node's own cap, so its utilization is exactly one; at relays the upstream
// admission control leaves every fully granted flow short of the cap by the
// same factor, so each source's fill ratio is compared against the
// best-filled source at the node rather than against the cap itself.
void fillMuHatSensitivity(const NetIndex& net, const QosSpec& qos,
                          const Objective& objective, const Hyperparams& hp,
                          const Workspace& ws, int i, std::vector<double>& dFdMu) {
  const int K = net.sources();
  const NodeId id = net.idOf(i);
  const bool lastHop = net.isLastHopRelay(i);
  dFdMu.assign(idx(net.slotCount(i)), 0.0);
  double bestFill = 0.0;
  for (int k = 1; k <= K; ++k) {
    const double star = ws.rhoStar[idx(i)][idx(k - 1)];
    if (star > 0.0) {
      bestFill = std::max(bestFill, ws.arrivals[idx(i)][idx(k - 1)] / star);
    }
  }
  for (int k = 1; k <= K; ++k) {
    if (id.isSource() && id.index != k) continue;
    const double fk = objective.weightOf(k);
    if (fk == 0.0) continue;
    const double star = ws.rhoStar[idx(i)][idx(k - 1)];
    const double arr = ws.arrivals[idx(i)][idx(k - 1)];
    if (star <= 0.0) continue;
    if (arr <= 0.0 || arr < (1.0 - hp.saturationTol) * bestFill * star) {
      continue;  // this flow's rate is bound upstream, not here
    }
    const double pen = qos.penalty(id, k);
    if (lastHop) {
      const int li = net.linkIndexOf(i, net.destIndexOf(k));
      if (li < 0) continue;
      const auto s = idx(net.slot(li, k));
      if (ws.muHat[idx(i)][s] - pen > 0.0) dFdMu[s] = fk;
    } else {
      double served = 0.0;
      for (int li = 0; li < net.linkCount(i); ++li) {
        const auto s = idx(net.slot(li, k));
        served += std::min(ws.muHat[idx(i)][s], ws.grants[idx(i)][s]);
      }
      if (served - pen <= 0.0) continue;  // clamped: flat region
      for (int li = 0; li < net.linkCount(i); ++li) {
        const auto s = idx(net.slot(li, k));
        // at an exact tie the offered-rate branch stays active
        if (ws.muHat[idx(i)][s] <= ws.grants[idx(i)][s]) dFdMu[s] = fk;
      }
    }
  }
}

}  // namespace

double evaluateObjective(const NetIndex& net, const QosSpec& qos,
                         const Objective& objective,
                         const std::vector<std::vector<double>>& muHat,
                         const std::vector<std::vector<double>>& grants,
                         std::vector<std::vector<double>>& rhoStarOut) {
  const int K = net.sources();
  rhoStarOut.assign(idx(net.txCount()), std::vector<double>(idx(K), 0.0));
  for (int i = 0; i < net.txCount(); ++i) {
    const NodeId id = net.idOf(i);
    for (int k = 1; k <= K; ++k) {
      if (id.isSource() && id.index != k) continue;
      const QosBudget& budget = qos.at(id, k);
      double star = 0.0;
      if (net.isLastHopRelay(i)) {
        const int li = net.linkIndexOf(i, net.destIndexOf(k));
        if (li < 0) continue;  // destination unreachable in a restricted graph
        star = rhoStarLastHop(muHat[idx(i)][idx(net.slot(li, k))],
                              budget.violationProb, budget.deadline_s);
      } else {
        double served = 0.0;
        for (int li = 0; li < net.linkCount(i); ++li) {
          const auto s = idx(net.slot(li, k));
          served += std::min(muHat[idx(i)][s], grants[idx(i)][s]);
        }
        star = maxAdmissibleRate(served, budget.violationProb, budget.deadline_s);
      }
      rhoStarOut[idx(i)][idx(k - 1)] = star;
    }
  }
  double f = 0.0;
  for (int k = 1; k <= K; ++k) {
    const int src = net.indexOf(NodeId::source(k));
    f += objective.weightOf(k) * rhoStarOut[idx(src)][idx(k - 1)];
  }
  return f;
}

double settledObjective(const NetIndex& net, const QosSpec& qos,
                        const Objective& objective, const SchemePolicy& policy,
                        int maxRounds) {
  Workspace ws(net);
  double f = 0.0;
  int stall = 0;
  for (int round = 0; round < maxRounds; ++round) {
    const double next = computeRound(net, qos, objective, policy, ws);
    if (round > 0 && std::abs(next - f) <= 1e-10 * std::max(next, 1.0)) {
      ++stall;
    } else {
      stall = 0;
    }
    f = next;
    if (stall >= 5) break;
    std::swap(ws.grants, ws.nextGrants);
  }
  return f;
}

double coordinatePolish(const NetIndex& net, const QosSpec& qos,
                        const Objective& objective, SchemePolicy& policy,
                        int passes) {
  static constexpr double kProbes[] = {0.35, 0.6, 1.7, 2.9};
  double best = settledObjective(net, qos, objective, policy);
  for (int pass = 0; pass < passes; ++pass) {
    bool improved = false;
    for (int i = 0; i < net.txCount(); ++i) {
      auto block = policy.paramBlock(i);
      for (std::size_t t = 0; t < block.size(); ++t) {
        if (block[t] <= 0.0) continue;  // structurally inert
        double keep = block[t];
        for (double mult : kProbes) {
          block[t] = keep * mult;
          const double f = settledObjective(net, qos, objective, policy);
          if (f > best * (1.0 + 1e-9)) {
            best = f;
            keep = block[t];
            improved = true;
          }
        }
        block[t] = keep;
      }
    }
    if (!improved) break;
  }
  return best;
}

ControlResult runControlRounds(const NetIndex& net, const QosSpec& qos,
                               const Objective& objective, const Hyperparams& hp,
                               SchemePolicy& policy) {
  hp.validate();
  qos.validate();
  objective.validate(net.sources());

  const int tx = net.txCount();
  const int K = net.sources();
  Workspace ws(net);
  std::vector<double> dFdMu;

  // Gradient steps fire on settled message states: the limit chain needs a
  // round per hop to propagate, so consecutive steps are spaced far enough
  // apart for the objective samples to be meaningful.
  const int stepEvery =
      hp.stepEveryRounds > 0 ? hp.stepEveryRounds : net.hops() + 3;

  double bestF = -1.0;
  std::vector<std::vector<double>> bestParams, bestGrants;
  double prevF = 0.0;
  double prevStepF = 0.0;
  bool anyStep = false;
  long stepCount = 0;
  int stall = 0;
  const int minRounds = hp.patienceRounds + net.hops() + 2;
  bool converged = false;

  ControlResult result;
  result.objectiveTrace.reserve(512);

  EstimateDither dither;
  int round = 1;
  for (; round <= hp.maxRounds; ++round) {
    if (hp.ditherAmplitude > 0.0 && hp.ditherDecaySteps > 0) {
      dither.amplitude = hp.ditherAmplitude *
                         std::pow(0.5, static_cast<double>(stepCount) / hp.ditherDecaySteps);
      dither.phase = 6.283185307179586 * static_cast<double>(stepCount) /
                     std::max(1, hp.ditherPeriodSteps);
    }
    const double f = computeRound(net, qos, objective, policy, ws, dither);
    result.objectiveTrace.push_back(f);
    const bool settled = stepEvery == 1 || (round % stepEvery) == stepEvery - 1;
    if (f > bestF && (settled || round == 1)) {
      bestF = f;
      bestParams = policy.snapshotParams();
      bestGrants = ws.grants;
    }
    if (round > 1 && std::abs(f - prevF) <= hp.convergenceTol * std::max(f, 1.0)) {
      ++stall;
    } else {
      stall = 0;
    }
    prevF = f;
    if (stall >= hp.patienceRounds && round >= minRounds) {
      converged = true;
      break;
    }
    if ((round % stepEvery) == 0) {
      const bool betaRound = (stepCount % hp.betaPeriodRounds) == 0;
      if (anyStep && f < prevStepF * (1.0 - hp.convergenceTol)) {
        policy.onObjectiveDecrease(betaRound);
      }
      for (int i = 0; i < tx; ++i) {
        fillMuHatSensitivity(net, qos, objective, hp, ws, i, dFdMu);
        policy.ascend(i, dFdMu, betaRound);
      }
      ++stepCount;
      prevStepF = f;
      anyStep = true;
    }
    std::swap(ws.grants, ws.nextGrants);
  }

  // Land on the best visited point and let the limit messages settle there
  // before reporting, so the returned tables are a fixed point of the
  // message exchange rather than a transient.
  if (bestF > prevF) {
    policy.restoreParams(bestParams);
    ws.grants = bestGrants;
  }
  double finalF = computeRound(net, qos, objective, policy, ws);
  for (int settle = 0; settle < 50 * (net.hops() + 1); ++settle) {
    std::swap(ws.grants, ws.nextGrants);
    const double f = computeRound(net, qos, objective, policy, ws);
    if (std::abs(f - finalF) <= 1e-12 * std::max(f, 1.0)) {
      finalF = f;
      break;
    }
    finalF = f;
  }

  result.objective = finalF;
  result.sourceRate = ws.rho;
  result.converged = converged;
  result.rounds = std::min(round, hp.maxRounds);
  result.misconfiguredIdle = ws.starvedNode;
  result.params = policy.snapshotParams();
  result.grants = ws.grants;

  for (int i = 0; i < tx; ++i) {
    const NodeId id = net.idOf(i);
    const bool lastHop = net.isLastHopRelay(i);
    for (int k = 1; k <= K; ++k) {
      result.table.rhoStar[{id, k}] = ws.rhoStar[idx(i)][idx(k - 1)];
      result.table.arrival[{id, k}] = ws.arrivals[idx(i)][idx(k - 1)];
      double muIk = 0.0;
      for (int li = 0; li < net.linkCount(i); ++li) {
        const NodeId j = net.idOf(net.links(i)[idx(li)]);
        const auto s = idx(net.slot(li, k));
        const double effective = effectiveMu(net, ws, i, li, k);
        result.table.muHat[{id, j, k}] = ws.muHat[idx(i)][s];
        if (!lastHop) result.table.limit[{id, j, k}] = ws.grants[idx(i)][s];
        result.table.mu[{id, j, k}] = effective;
        result.table.flow[{id, j, k}] = ws.flows[idx(i)][s];
        muIk += effective;
      }
      result.table.muNode[{id, k}] = muIk;
    }
  }
  for (int k = 1; k <= K; ++k) {
    result.table.sourceRate[k] = result.sourceRate[idx(k - 1)];
  }
  return result;
}

}  // namespace xlr
