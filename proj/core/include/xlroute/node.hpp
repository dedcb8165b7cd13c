#pragma once

#include <compare>
#include <cstdint>
#include <string>

namespace xlr {

enum class NodeRole : std::uint8_t { Source = 0, Relay = 1, Destination = 2 };

// One node of the layered network. Sources and destinations carry the flow
// number k in [1,K]; relays carry (hop, index) with hop in [1,L] and in-hop
// index in [1,M]. The default ordering (role, hop, index) is the canonical
// node order used everywhere: sources, then relays hop by hop, then
// destinations.
struct NodeId {
  NodeRole role = NodeRole::Source;
  int hop = 0;    // relays only, 1-based; 0 for sources/destinations
  int index = 0;  // flow k for sources/destinations, in-hop index m for relays

  static constexpr NodeId source(int k) { return {NodeRole::Source, 0, k}; }
  static constexpr NodeId relay(int hop, int m) { return {NodeRole::Relay, hop, m}; }
  static constexpr NodeId destination(int k) { return {NodeRole::Destination, 0, k}; }

  bool isSource() const { return role == NodeRole::Source; }
  bool isRelay() const { return role == NodeRole::Relay; }
  bool isDestination() const { return role == NodeRole::Destination; }

  auto operator<=>(const NodeId&) const = default;
};

// Human-readable label: "s1", "d2", and relays flat-numbered hop-major so the
// three-hop layout reads r1,r2 (hop 1) and r3,r4 (hop 2).
std::string toLabel(const NodeId& id, int relaysPerHop);

}  // namespace xlr
