#include "xlroute/topology.hpp"

#include <algorithm>
#include <cmath>

#include "xlroute/errors.hpp"

namespace xlr {

std::string toLabel(const NodeId& id, int relaysPerHop) {
  switch (id.role) {
    case NodeRole::Source:
      return "s" + std::to_string(id.index);
    case NodeRole::Destination:
      return "d" + std::to_string(id.index);
    case NodeRole::Relay:
      return "r" + std::to_string((id.hop - 1) * relaysPerHop + id.index);
  }
  return "?";
}

void ChannelParams::validate() const {
  if (!(bandwidth_hz > 0.0)) throw ConfigError("bandwidth_hz must be > 0");
  if (!(snr_scale > 0.0)) throw ConfigError("snr_scale must be > 0");
  if (!(path_loss_exp >= 0.0)) throw ConfigError("path_loss_exp must be >= 0");
  if (!(slot_s > 0.0)) throw ConfigError("slot_s must be > 0");
}

double avgSnr(const ChannelParams& params, double d) {
  if (!(d > 0.0)) {
    throw GeometryError("link length must be > 0 (coincident transmitter/receiver)");
  }
  return params.snr_scale * std::pow(d, -params.path_loss_exp);
}

double Topology::positionOf(NodeId id) const {
  auto it = positions.find(id);
  if (it == positions.end()) {
    throw ConfigError("no position for node " + toLabel(id, relaysPerHop));
  }
  return it->second;
}

double Topology::distance(NodeId a, NodeId b) const {
  return std::abs(positionOf(a) - positionOf(b));
}

const std::vector<NodeId>& Topology::next(NodeId id) const {
  auto it = nextHops.find(id);
  if (it == nextHops.end()) throw ConfigError("unknown node in next()");
  return it->second;
}

const std::vector<NodeId>& Topology::prev(NodeId id) const {
  auto it = prevHops.find(id);
  if (it == prevHops.end()) throw ConfigError("unknown node in prev()");
  return it->second;
}

std::vector<NodeId> Topology::transmitters() const {
  std::vector<NodeId> out;
  for (int k = 1; k <= sources; ++k) out.push_back(NodeId::source(k));
  for (int l = 1; l <= hops; ++l)
    for (int m = 1; m <= relaysPerHop; ++m) out.push_back(NodeId::relay(l, m));
  return out;
}

std::vector<NodeId> Topology::allNodes() const {
  std::vector<NodeId> out = transmitters();
  for (int k = 1; k <= sources; ++k) out.push_back(NodeId::destination(k));
  return out;
}

Topology buildLinear(int sources, int hops, int relaysPerHop,
                     const std::map<NodeId, double>& positions) {
  if (sources < 1 || hops < 1 || relaysPerHop < 1) {
    throw ConfigError("need at least one source, one hop stage and one relay per hop");
  }
  Topology t;
  t.sources = sources;
  t.hops = hops;
  t.relaysPerHop = relaysPerHop;

  for (NodeId id : t.allNodes()) {
    auto it = positions.find(id);
    if (it == positions.end()) {
      throw ConfigError("missing position for node " + toLabel(id, relaysPerHop));
    }
    if (!std::isfinite(it->second)) {
      throw ConfigError("non-finite position for node " + toLabel(id, relaysPerHop));
    }
    t.positions[id] = it->second;
  }

  auto relayLayer = [&](int l) {
    std::vector<NodeId> layer;
    for (int m = 1; m <= relaysPerHop; ++m) layer.push_back(NodeId::relay(l, m));
    return layer;
  };
  std::vector<NodeId> dests;
  for (int k = 1; k <= sources; ++k) dests.push_back(NodeId::destination(k));

  for (NodeId id : t.allNodes()) t.nextHops[id] = {};
  for (NodeId id : t.allNodes()) t.prevHops[id] = {};

  for (int k = 1; k <= sources; ++k) t.nextHops[NodeId::source(k)] = relayLayer(1);
  for (int l = 1; l < hops; ++l)
    for (int m = 1; m <= relaysPerHop; ++m)
      t.nextHops[NodeId::relay(l, m)] = relayLayer(l + 1);
  for (int m = 1; m <= relaysPerHop; ++m) t.nextHops[NodeId::relay(hops, m)] = dests;

  for (const auto& [from, us] : t.nextHops)
    for (NodeId to : us) t.prevHops[to].push_back(from);

  return t;
}

Topology restrictToEdges(const Topology& full,
                         const std::vector<std::pair<NodeId, NodeId>>& edges) {
  Topology t = full;
  for (auto& [id, us] : t.nextHops) us.clear();
  for (auto& [id, vs] : t.prevHops) vs.clear();

  for (const auto& [from, to] : edges) {
    const auto& fullNext = full.next(from);
    bool known = false;
    for (NodeId u : fullNext) known = known || u == to;
    if (!known) {
      throw ConfigError("edge " + toLabel(from, full.relaysPerHop) + "->" +
                        toLabel(to, full.relaysPerHop) + " not in the layered graph");
    }
    auto& us = t.nextHops[from];
    bool dup = false;
    for (NodeId u : us) dup = dup || u == to;
    if (!dup) us.push_back(to);
  }
  for (auto& [id, us] : t.nextHops) std::sort(us.begin(), us.end());
  for (const auto& [from, us] : t.nextHops)
    for (NodeId to : us) t.prevHops[to].push_back(from);
  return t;
}

}  // namespace xlr
