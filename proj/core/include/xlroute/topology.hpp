#pragma once

#include <map>
#include <utility>
#include <vector>

#include "xlroute/node.hpp"

namespace xlr {

// Radio constants shared by every link.
struct ChannelParams {
  double bandwidth_hz = 1.0e6;  // per-node bandwidth W
  double snr_scale = 1.0;       // cP / (N0 W)
  double path_loss_exp = 3.0;   // path loss exponent
  double slot_s = 1.0e-7;       // slot duration T

  void validate() const;  // throws ConfigError
};

// Mean received SNR of a link of length d under power-law path loss:
// snr_scale * d^(-path_loss_exp). d must be strictly positive; a zero-length
// active link has no defined path loss and is rejected.
double avgSnr(const ChannelParams& params, double d);

// Layered K-source, L-hop, M-relay-per-hop network on a line. Immutable after
// construction; safe to share read-only across threads.
struct Topology {
  int sources = 0;       // K
  int hops = 0;          // L
  int relaysPerHop = 0;  // M

  std::map<NodeId, double> positions;
  std::map<NodeId, std::vector<NodeId>> nextHops;  // U_i, ordered by hop then index
  std::map<NodeId, std::vector<NodeId>> prevHops;  // V_i, exact inverse of U

  double positionOf(NodeId id) const;
  double distance(NodeId a, NodeId b) const;
  const std::vector<NodeId>& next(NodeId id) const;
  const std::vector<NodeId>& prev(NodeId id) const;

  // Sources and relays in canonical order; destinations never transmit.
  std::vector<NodeId> transmitters() const;
  std::vector<NodeId> allNodes() const;
  int nodeCount() const { return 2 * sources + hops * relaysPerHop; }
};

// Builds the fully connected layered graph: sources feed every hop-1 relay,
// hop-l relays feed every hop-(l+1) relay, last-hop relays reach every
// destination. A position must be supplied for each implied node.
Topology buildLinear(int sources, int hops, int relaysPerHop,
                     const std::map<NodeId, double>& positions);

// Same nodes, but next/previous-hop sets restricted to the given directed
// edges. Each edge must exist in the full layered graph.
Topology restrictToEdges(const Topology& full,
                         const std::vector<std::pair<NodeId, NodeId>>& edges);

}  // namespace xlr
