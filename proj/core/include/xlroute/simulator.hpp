#pragma once

#include <cstdint>
#include <deque>
#include <map>
#include <tuple>
#include <vector>

#include "xlroute/snapshot.hpp"

namespace xlr {

// A stored data unit. Packets move between nodes whole: a packet stays in its
// current queue until its last bit has been transmitted, then joins the next
// hop (or counts as delivered at the destination).
struct Packet {
  std::int64_t arrivalSlot = 0;  // at the current node
  double bits = 1.0;
};

// Per-(node, source) FIFO with the transmission progress of the head packet.
struct Buffer {
  std::deque<Packet> queue;
  double headSentBits = 0.0;

  double totalBits() const {
    double b = 0.0;
    for (const Packet& p : queue) b += p.bits;
    return b;
  }
};

// Bits-per-window arrival estimator, one window per control period.
class WindowedRateEstimator {
 public:
  WindowedRateEstimator(std::size_t streams, double window_s);
  void record(std::size_t stream, double bits);
  void closeWindow();  // called every control period
  double rate(std::size_t stream) const;  // bit/s over the last closed window

 private:
  double window_s_;
  std::vector<double> accumulating_, lastRate_;
};

struct SimConfig {
  double duration_s = 1.0;
  std::uint64_t seed = 1;
  bool saturated = false;   // backlogged buffers: measures raw service rates
  double packetBits = 1.0;  // B
  double t1_s = 1e-4;       // limit-message / estimation period
  double t2_s = 1e-2;       // service-table refresh period
};

struct SimMetrics {
  std::int64_t slots = 0;
  std::uint64_t seed = 0;
  bool saturated = false;
  bool saturationFlagged = false;  // backlog kept growing: admitted >> serviceable

  // per source, index k-1
  std::vector<double> admittedBps, deliveredBps, dropFraction;
  std::vector<std::int64_t> admittedPackets, deliveredPackets, droppedPackets;

  // exact bit accounting: admitted == delivered + dropped + inFlight
  double admittedBits = 0.0, deliveredBits = 0.0, droppedBits = 0.0,
         inFlightBits = 0.0;

  // deadline-drop frequency per (node, source): drops / packet arrivals
  std::map<std::pair<NodeId, int>, double> nodeViolationFreq;

  // measured service rate per (node, next hop, source); saturated mode only
  std::map<std::tuple<NodeId, NodeId, int>, double> linkThroughputBps;
};

// Slot-level Monte Carlo run of a converged operating point. Per slot every
// transmitter draws its fading, selects a link and source according to the
// scheme, and forwards bits at the instantaneous capacity; packets whose
// head-of-line wait exceeds the node deadline are dropped. Sources admit
// Poisson traffic at the snapshot's rates; limit messages and arrival
// estimates refresh every t1. Deterministic given (inputs, seed).
SimMetrics runSim(const NetIndex& net, const QosSpec& qos,
                  const ControllerSnapshot& snapshot, const SimConfig& config);

}  // namespace xlr
