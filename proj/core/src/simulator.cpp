#include "xlroute/simulator.hpp"

#include <algorithm>
#include <cmath>

#include "xlroute/channel.hpp"
#include "xlroute/errors.hpp"

namespace xlr {

namespace {
std::size_t idx(int i) { return static_cast<std::size_t>(i); }
constexpr double kBitEps = 1e-9;
}  // namespace

WindowedRateEstimator::WindowedRateEstimator(std::size_t streams, double window_s)
    : window_s_(window_s), accumulating_(streams, 0.0), lastRate_(streams, 0.0) {
  if (!(window_s > 0.0)) throw ConfigError("estimator window must be > 0");
}

void WindowedRateEstimator::record(std::size_t stream, double bits) {
  accumulating_[stream] += bits;
}

void WindowedRateEstimator::closeWindow() {
  for (std::size_t s = 0; s < accumulating_.size(); ++s) {
    lastRate_[s] = accumulating_[s] / window_s_;
    accumulating_[s] = 0.0;
  }
}

double WindowedRateEstimator::rate(std::size_t stream) const {
  return lastRate_[stream];
}

namespace {

// Offered service rates per node from the snapshot's fixed parameters.
std::vector<std::vector<double>> offeredRates(const NetIndex& net,
                                              const ControllerSnapshot& snap) {
  std::vector<std::vector<double>> muHat(idx(net.txCount()));
  if (snap.scheme == Scheme::Ocdr) {
    OcdrPolicy policy(net, Hyperparams{});
    policy.setState(snap.ocdr);
    for (int i = 0; i < net.txCount(); ++i) policy.nodeRates(i, muHat[idx(i)]);
  } else if (snap.scheme == Scheme::Tcdr) {
    TcdrPolicy policy(net, Hyperparams{});
    policy.setState(snap.tcdr);
    for (int i = 0; i < net.txCount(); ++i) policy.nodeRates(i, muHat[idx(i)]);
  } else {
    for (int i = 0; i < net.txCount(); ++i) {
      muHat[idx(i)].assign(idx(net.slotCount(i)), 0.0);
      for (int k = 1; k <= net.sources(); ++k) {
        const int target = snap.staticPlan.edgeTarget[idx(i)][idx(k - 1)];
        if (target < 0) continue;
        const int li = net.linkIndexOf(i, target);
        muHat[idx(i)][idx(net.slot(li, k))] =
            snap.staticPlan.share[idx(i)][idx(k - 1)] *
            meanRateSingle(net.gammaBar(i, li), net.params().bandwidth_hz);
      }
    }
  }
  return muHat;
}

struct Slotted {
  int li = -1;
  int k = 0;
  double gamma = 0.0;
  bool idle = true;
};

}  // namespace

SimMetrics runSim(const NetIndex& net, const QosSpec& qos,
                  const ControllerSnapshot& snapshot, const SimConfig& config) {
  const int tx = net.txCount();
  const int K = net.sources();
  const double T = net.params().slot_s;
  const double W = net.params().bandwidth_hz;
  const double B = config.packetBits;
  if (!(B > 0.0)) throw ConfigError("packet size must be > 0");
  const auto slots = static_cast<std::int64_t>(std::llround(config.duration_s / T));
  const auto t1Slots =
      std::max<std::int64_t>(1, std::llround(config.t1_s / T));
  const auto t2Slots =
      std::max<std::int64_t>(t1Slots, std::llround(config.t2_s / T));

  Rng rng(config.seed);

  // scheme parameter access for the per-slot decisions
  OcdrPolicy ocdrPolicy(net, Hyperparams{});
  TcdrPolicy tcdrPolicy(net, Hyperparams{});
  if (snapshot.scheme == Scheme::Ocdr) ocdrPolicy.setState(snapshot.ocdr);
  if (snapshot.scheme == Scheme::Tcdr) tcdrPolicy.setState(snapshot.tcdr);

  std::vector<std::vector<double>> muHat = offeredRates(net, snapshot);

  // live limit tables; static plans need no limit protocol
  std::vector<std::vector<double>> grants = snapshot.grants;
  if (grants.empty()) {
    grants.resize(idx(tx));
    for (int i = 0; i < tx; ++i) grants[idx(i)].assign(idx(net.slotCount(i)), 0.0);
  }
  const bool throttled = snapshot.scheme != Scheme::StaticAssign && !config.saturated;

  // per-(node, link, source) rate caps enforced as token buckets with one
  // control period of burst allowance
  std::vector<std::vector<double>> tokens(idx(tx)), tokenRate(idx(tx));
  for (int i = 0; i < tx; ++i) {
    tokens[idx(i)].assign(idx(net.slotCount(i)), 0.0);
    tokenRate[idx(i)] = grants[idx(i)];
    for (int s = 0; s < net.slotCount(i); ++s) {
      tokens[idx(i)][idx(s)] = tokenRate[idx(i)][idx(s)] * config.t1_s;
    }
  }

  std::vector<std::vector<Buffer>> buffers(idx(tx));
  for (int i = 0; i < tx; ++i) buffers[idx(i)].resize(idx(K));

  std::vector<WindowedRateEstimator> estimators;
  estimators.reserve(idx(tx));
  std::vector<std::vector<int>> prevPos(idx(tx));  // node index -> position in prevs
  for (int i = 0; i < tx; ++i) {
    estimators.emplace_back(net.prevs(i).size() * idx(K), config.t1_s);
    prevPos[idx(i)].assign(idx(net.nodeCount()), -1);
    const auto pv = net.prevs(i);
    for (std::size_t v = 0; v < pv.size(); ++v) prevPos[idx(i)][idx(pv[v])] = static_cast<int>(v);
  }

  SimMetrics metrics;
  metrics.slots = slots;
  metrics.seed = config.seed;
  metrics.saturated = config.saturated;
  metrics.admittedBps.assign(idx(K), 0.0);
  metrics.deliveredBps.assign(idx(K), 0.0);
  metrics.dropFraction.assign(idx(K), 0.0);
  metrics.admittedPackets.assign(idx(K), 0);
  metrics.deliveredPackets.assign(idx(K), 0);
  metrics.droppedPackets.assign(idx(K), 0);

  std::vector<std::vector<std::int64_t>> nodeArrivals(idx(tx)),
      nodeDrops(idx(tx));
  for (int i = 0; i < tx; ++i) {
    nodeArrivals[idx(i)].assign(idx(K), 0);
    nodeDrops[idx(i)].assign(idx(K), 0);
  }
  std::vector<std::vector<double>> servedBits(idx(tx));
  for (int i = 0; i < tx; ++i) servedBits[idx(i)].assign(idx(net.slotCount(i)), 0.0);

  std::vector<double> rho = snapshot.sourceRate;
  if (rho.empty()) rho.assign(idx(K), 0.0);

  struct Handoff {
    int node;
    int k;
    int from;
    Packet packet;
  };
  std::vector<Handoff> staged;
  std::vector<double> draws;

  for (std::int64_t t = 0; t < slots; ++t) {
    if (!config.saturated) {
      // deadline expiry: packets that have not begun service and have waited
      // past the node deadline leave the queue
      for (int i = 0; i < tx; ++i) {
        for (int k = 1; k <= K; ++k) {
          Buffer& buf = buffers[idx(i)][idx(k - 1)];
          const double deadline = qos.at(net.idOf(i), k).deadline_s;
          std::size_t pos = buf.headSentBits > 0.0 ? 1 : 0;
          while (pos < buf.queue.size()) {
            const double age = static_cast<double>(t - buf.queue[pos].arrivalSlot) * T;
            if (age <= deadline) break;
            metrics.droppedBits += buf.queue[pos].bits;
            ++metrics.droppedPackets[idx(k - 1)];
            ++nodeDrops[idx(i)][idx(k - 1)];
            buf.queue.erase(buf.queue.begin() + static_cast<std::ptrdiff_t>(pos));
          }
        }
      }
      // Poisson admissions at the controller's rates
      for (int k = 1; k <= K; ++k) {
        const int src = net.indexOf(NodeId::source(k));
        const int n = rng.poisson(rho[idx(k - 1)] * T / B);
        for (int p = 0; p < n; ++p) {
          buffers[idx(src)][idx(k - 1)].queue.push_back({t, B});
          metrics.admittedBits += B;
          ++metrics.admittedPackets[idx(k - 1)];
          ++nodeArrivals[idx(src)][idx(k - 1)];
        }
      }
    }

    staged.clear();
    for (int i = 0; i < tx; ++i) {
      const int J = net.linkCount(i);
      if (J == 0) continue;
      Slotted pick;
      if (snapshot.scheme == Scheme::Ocdr) {
        const auto gammaBars = net.gammaBarRow(i);
        draws.resize(idx(J));
        for (int li = 0; li < J; ++li) draws[idx(li)] = rng.exponential(gammaBars[idx(li)]);
        const int li = selectLink(ocdrPolicy.betaRow(i), draws, gammaBars, rng);
        const auto alphaLink =
            ocdrPolicy.alphaRow(i).subspan(idx(net.slot(li, 1)), idx(K));
        const int kPick = pickSource(alphaLink, rng);
        if (kPick >= 0) pick = {li, kPick + 1, draws[idx(li)], false};
      } else if (snapshot.scheme == Scheme::Tcdr) {
        const int s = pickLinkAndSource(tcdrPolicy.paramBlock(i), rng);
        if (s >= 0) {
          const int li = s / K;
          pick = {li, s % K + 1, rng.exponential(net.gammaBar(i, li)), false};
        }
      } else {
        const auto& shareRow = snapshot.staticPlan.share[idx(i)];
        double u = rng.uniform01();
        for (int k = 1; k <= K; ++k) {
          u -= shareRow[idx(k - 1)];
          if (u < 0.0) {
            const int target = snapshot.staticPlan.edgeTarget[idx(i)][idx(k - 1)];
            if (target >= 0) {
              const int li = net.linkIndexOf(i, target);
              pick = {li, k, rng.exponential(net.gammaBar(i, li)), false};
            }
            break;
          }
        }
      }
      if (pick.idle) continue;

      double capBits = capacity(pick.gamma, W) * T;
      const auto s = idx(net.slot(pick.li, pick.k));
      if (config.saturated) {
        servedBits[idx(i)][s] += capBits;
        continue;
      }
      if (throttled && !net.isLastHopRelay(i)) {
        capBits = std::min(capBits, tokens[idx(i)][s]);
      }
      Buffer& buf = buffers[idx(i)][idx(pick.k - 1)];
      double sent = 0.0;
      while (capBits > kBitEps && !buf.queue.empty()) {
        Packet& head = buf.queue.front();
        const double need = head.bits - buf.headSentBits;
        const double take = std::min(need, capBits);
        buf.headSentBits += take;
        capBits -= take;
        sent += take;
        if (buf.headSentBits >= head.bits - kBitEps) {
          const Packet done{t + 1, head.bits};
          buf.queue.pop_front();
          buf.headSentBits = 0.0;
          const int j = net.links(i)[idx(pick.li)];
          if (j < tx) {
            staged.push_back({j, pick.k, i, done});
          } else {
            metrics.deliveredBits += done.bits;
            ++metrics.deliveredPackets[idx(pick.k - 1)];
          }
        }
      }
      servedBits[idx(i)][s] += sent;
      if (throttled && !net.isLastHopRelay(i)) tokens[idx(i)][s] -= sent;
    }
    for (const Handoff& h : staged) {
      buffers[idx(h.node)][idx(h.k - 1)].queue.push_back(h.packet);
      ++nodeArrivals[idx(h.node)][idx(h.k - 1)];
      const int v = prevPos[idx(h.node)][idx(h.from)];
      estimators[idx(h.node)].record(idx(v) * idx(K) + idx(h.k - 1), h.packet.bits);
    }

    if (throttled) {
      for (int i = 0; i < tx; ++i) {
        if (net.isLastHopRelay(i)) continue;
        for (int s = 0; s < net.slotCount(i); ++s) {
          const double burst = tokenRate[idx(i)][idx(s)] * config.t1_s;
          tokens[idx(i)][idx(s)] =
              std::min(tokens[idx(i)][idx(s)] + tokenRate[idx(i)][idx(s)] * T, burst);
        }
      }
    }

    // control period: close estimation windows, recompute admissible rates,
    // reissue limits to previous hops
    if (!config.saturated && (t + 1) % t1Slots == 0) {
      for (auto& est : estimators) est.closeWindow();
      if (snapshot.scheme != Scheme::StaticAssign) {
        for (int i = 0; i < tx; ++i) {
          if (!net.idOf(i).isRelay()) continue;
          const NodeId id = net.idOf(i);
          const auto pv = net.prevs(i);
          for (int k = 1; k <= K; ++k) {
            const QosBudget& budget = qos.at(id, k);
            double star = 0.0;
            if (net.isLastHopRelay(i)) {
              const int li = net.linkIndexOf(i, net.destIndexOf(k));
              if (li >= 0) {
                star = rhoStarLastHop(muHat[idx(i)][idx(net.slot(li, k))],
                                      budget.violationProb, budget.deadline_s);
              }
            } else {
              double served = 0.0;
              for (int li = 0; li < net.linkCount(i); ++li) {
                const auto sl = idx(net.slot(li, k));
                served += std::min(muHat[idx(i)][sl], grants[idx(i)][sl]);
              }
              star = maxAdmissibleRate(served, budget.violationProb, budget.deadline_s);
            }
            std::map<NodeId, double> arrivalEst;
            std::vector<NodeId> prevIds;
            for (std::size_t v = 0; v < pv.size(); ++v) {
              prevIds.push_back(net.idOf(pv[v]));
              arrivalEst[net.idOf(pv[v])] =
                  estimators[idx(i)].rate(v * idx(K) + idx(k - 1));
            }
            const auto limits =
                apportionLimits(star, arrivalEst, prevIds, net.relaysPerHop());
            for (std::size_t v = 0; v < pv.size(); ++v) {
              const int y = pv[v];
              const int li = net.linkIndexOf(y, i);
              const auto sl = idx(net.slot(li, k));
              grants[idx(y)][sl] = limits.at(net.idOf(pv[v]));
              tokenRate[idx(y)][sl] = grants[idx(y)][sl];
            }
          }
        }
      }
    }
    // service-table refresh period (parameters are fixed, values unchanged)
    if (!config.saturated && (t + 1) % t2Slots == 0) {
      muHat = offeredRates(net, snapshot);
    }
  }

  const double duration = static_cast<double>(slots) * T;
  for (int k = 1; k <= K; ++k) {
    double adm = 0.0, del = 0.0;
    adm = static_cast<double>(metrics.admittedPackets[idx(k - 1)]) * B;
    del = static_cast<double>(metrics.deliveredPackets[idx(k - 1)]) * B;
    metrics.admittedBps[idx(k - 1)] = adm / duration;
    metrics.deliveredBps[idx(k - 1)] = del / duration;
    metrics.dropFraction[idx(k - 1)] =
        metrics.admittedPackets[idx(k - 1)] > 0
            ? static_cast<double>(metrics.droppedPackets[idx(k - 1)]) /
                  static_cast<double>(metrics.admittedPackets[idx(k - 1)])
            : 0.0;
  }
  for (int i = 0; i < tx; ++i) {
    for (int k = 1; k <= K; ++k) {
      metrics.inFlightBits += buffers[idx(i)][idx(k - 1)].totalBits();
      if (nodeArrivals[idx(i)][idx(k - 1)] > 0) {
        metrics.nodeViolationFreq[{net.idOf(i), k}] =
            static_cast<double>(nodeDrops[idx(i)][idx(k - 1)]) /
            static_cast<double>(nodeArrivals[idx(i)][idx(k - 1)]);
      }
    }
  }
  if (config.saturated) {
    for (int i = 0; i < tx; ++i) {
      for (int li = 0; li < net.linkCount(i); ++li) {
        for (int k = 1; k <= K; ++k) {
          const double bits = servedBits[idx(i)][idx(net.slot(li, k))];
          if (bits > 0.0) {
            metrics.linkThroughputBps[{net.idOf(i),
                                       net.idOf(net.links(i)[idx(li)]), k}] =
                bits / duration;
          }
        }
      }
    }
  }
  metrics.saturationFlagged = !config.saturated &&
                              metrics.admittedPackets.size() > 0 &&
                              metrics.inFlightBits > 0.1 * metrics.admittedBits &&
                              metrics.admittedBits > 100.0 * B;
  return metrics;
}

}  // namespace xlr
