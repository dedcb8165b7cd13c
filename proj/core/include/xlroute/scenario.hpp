#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "xlroute/control.hpp"
#include "xlroute/snapshot.hpp"

namespace xlr {

// A fully specified experiment: network geometry, radio constants, QoS
// budgets, objective weights and solver settings. Parsed from the scenario
// file format documented in the README.
struct Scenario {
  std::string name;
  int sources = 1;
  int hops = 1;
  int relaysPerHop = 1;
  std::map<NodeId, double> positions;
  ChannelParams channel;
  QosSpec qos;
  Objective objective;
  Hyperparams optimizer;
  double simPacketBits = 1.0;
  double simDuration_s = 1.0;

  Topology buildTopology() const;
};

Scenario parseScenario(const std::string& path);
Scenario parseScenarioText(const std::string& text, const std::string& name);

// Node label in scenario files: s<k>, d<k>, or r<n> with relays numbered
// hop-major (three-hop: r1, r2 are hop 1 and r3, r4 are hop 2).
NodeId parseNodeLabel(const std::string& label, int sources, int hops,
                      int relaysPerHop);

enum class SweepKind { RelayPositions, Weights };

// A sweep over a scenario template: either a grid of relay positions or a
// weight-ratio scan over random relay placements.
struct SweepSpec {
  SweepKind kind = SweepKind::RelayPositions;
  std::string scenarioPath;
  Scenario scenario;
  std::vector<Scheme> schemes;
  std::string output;

  // relay_positions sweeps
  std::vector<NodeId> vary;  // one or two relays
  std::vector<double> gridMin, gridMax, gridStep;

  // weights sweeps
  std::vector<double> ratios;  // f2/f1 values
  int placements = 100;
  double positionMin = 0.1;
  double positionMax = 0.9;
  std::uint64_t seed = 1;
};

SweepSpec parseSweepSpec(const std::string& path);

// Controller state files (JSON).
void saveSnapshot(const ControllerSnapshot& snapshot, const NetIndex& net,
                  const std::string& path);
ControllerSnapshot loadSnapshot(const std::string& path, const NetIndex& net);

// Writes via a temporary file and rename, so readers never observe partial
// output and failed runs leave nothing behind.
void writeFileAtomic(const std::string& path, const std::string& content);

}  // namespace xlr
