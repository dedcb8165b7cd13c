#pragma once

#include <span>
#include <string>
#include <vector>

#include "xlroute/qos.hpp"
#include "xlroute/rate_table.hpp"
#include "xlroute/topology.hpp"

namespace xlr {

enum class Scheme { Ocdr, Tcdr, StaticAssign };

const char* schemeName(Scheme s);
Scheme schemeFromName(const std::string& name);

// Weighted sum-rate objective F = sum_k f_k rho_k.
struct Objective {
  std::vector<double> weights;  // f_k at index k-1

  void validate(int sources) const;
  double weightOf(int k) const { return weights[static_cast<std::size_t>(k - 1)]; }
};

struct Hyperparams {
  double stepAlpha = 1e-2;       // relative ascent step for time-share weights
  double stepBeta = 1e-2;        // relative ascent step for priority weights
  double stepAlphaPrime = 1e-2;  // relative ascent step for time-division weights
  // control rounds between gradient steps; 0 picks hops+3 so the limit
  // messages settle between consecutive steps. Priority weights update every
  // betaPeriodRounds-th step.
  int stepEveryRounds = 0;
  int betaPeriodRounds = 1;
  double convergenceTol = 1e-5;  // relative objective change considered flat
  int patienceRounds = 20;       // consecutive flat rounds before stopping
  int maxRounds = 10000;
  double betaFloor = 1e-6;
  double alphaFloor = 0.0;
  // a flow counts as bound at a node when its fill ratio rho/rho* is within
  // this tolerance of the node's best-filled flow
  double saturationTol = 0.05;
  // Deterministic annealed dither on the arrival estimates that feed the
  // limit apportionment, standing in for the estimation noise of the slot
  // protocol. Without it the proportional limits lock the route split
  // wherever the transient left it (any split is a fixed point of the
  // limit/flow feedback) and the run can settle on a dominated split.
  // Zero amplitude gives the exact apportionment rule throughout.
  double ditherAmplitude = 0.6;
  int ditherPeriodSteps = 64;
  int ditherDecaySteps = 128;
  // coordinate-refinement passes applied to the converged point (0 disables)
  int polishPasses = 2;
  double t1_s = 1e-4;            // limit-message / admission period (wall time)
  double t2_s = 1e-2;            // priority-weight period (wall time)

  void validate() const;
};

// Dense index over a topology for the controllers and the simulator.
// Transmitters (sources, then relays hop-major) come first; destinations
// last. Per transmitter, outgoing links keep the canonical next-hop order.
class NetIndex {
 public:
  NetIndex(const Topology& topo, const ChannelParams& params);

  const Topology& topo() const { return *topo_; }
  const ChannelParams& params() const { return params_; }
  int sources() const { return K_; }
  int hops() const { return L_; }
  int relaysPerHop() const { return M_; }
  int nodeCount() const { return nodeCount_; }
  int txCount() const { return txCount_; }

  int indexOf(NodeId id) const;
  NodeId idOf(int i) const { return ids_[static_cast<std::size_t>(i)]; }

  std::span<const int> links(int i) const;  // next-hop node indices of tx i
  std::span<const int> prevs(int i) const;  // previous-hop node indices
  int linkCount(int i) const { return static_cast<int>(links(i).size()); }
  int linkIndexOf(int i, int target) const;  // -1 when absent

  bool isSourceNode(int i) const { return idOf(i).isSource(); }
  bool isLastHopRelay(int i) const;
  int destIndexOf(int k) const;  // node index of D_k

  // Whether the link (i, links(i)[li]) may carry source k's data: sources
  // hold only their own flow, last-hop relays forward k only to D_k. An
  // explicit mask (used when a search is constrained to fixed routes) can
  // restrict this further.
  bool allowed(int i, int li, int k) const;
  void setAllowedMask(std::vector<std::vector<char>> mask);

  // Mean SNR of the link (i, links(i)[li]).
  double gammaBar(int i, int li) const;
  std::span<const double> gammaBarRow(int i) const;

  // Flat index of (link li, source k) inside per-node tables.
  int slot(int li, int k) const { return li * K_ + (k - 1); }
  int slotCount(int i) const { return linkCount(i) * K_; }

 private:
  const Topology* topo_;
  ChannelParams params_;
  int K_, L_, M_, nodeCount_, txCount_;
  std::vector<NodeId> ids_;
  std::vector<std::vector<int>> links_, prevs_;
  std::vector<std::vector<double>> gammaBars_;
  std::vector<std::vector<char>> allowedMask_;  // empty unless constrained
};

// A scheme plugs its parameterization into the shared control loop through
// this interface. Everything a node's update touches is local: its own
// parameter block, its own mean-SNR row, and values the loop hands in.
class SchemePolicy {
 public:
  virtual ~SchemePolicy() = default;

  virtual Scheme scheme() const = 0;

  // Offered rate muHat for every (link, source) slot of transmitter i under
  // the current parameters.
  virtual void nodeRates(int i, std::vector<double>& muHat) const = 0;

  // Gradient of the objective w.r.t. node i's parameter block, given the
  // loop-supplied sensitivities dF/dMuHat per slot.
  virtual void paramGradient(int i, std::span<const double> dFdMu,
                             std::vector<double>& grad) const = 0;

  // One ascent application for node i. betaRound gates slow-period parameters.
  virtual void ascend(int i, std::span<const double> dFdMu, bool betaRound) = 0;

  virtual void onObjectiveDecrease(bool betaRound) = 0;

  virtual std::span<double> paramBlock(int i) = 0;
  virtual std::span<const double> paramBlock(int i) const = 0;
  std::vector<std::vector<double>> snapshotParams() const;
  void restoreParams(const std::vector<std::vector<double>>& saved);

  virtual int txCount() const = 0;
};

// Admissible rates for every (node, source) from offered rates and received
// limits: last-hop relays from their destination link alone, sources and
// interior relays from sum_j min(muHat, limit) minus the QoS penalty.
// Returns the weighted sum of the source-node values.
double evaluateObjective(const NetIndex& net, const QosSpec& qos,
                         const Objective& objective,
                         const std::vector<std::vector<double>>& muHat,
                         const std::vector<std::vector<double>>& grants,
                         std::vector<std::vector<double>>& rhoStarOut);

struct ControlResult {
  double objective = 0.0;
  std::vector<double> sourceRate;  // rho_k at index k-1
  bool converged = false;
  bool misconfiguredIdle = false;  // node carried flow with an all-zero share row
  int rounds = 0;
  std::vector<double> objectiveTrace;
  RateTable table;
  // final parameter blocks and grant mailbox (per tx node, slot-indexed)
  std::vector<std::vector<double>> params;
  std::vector<std::vector<double>> grants;
};

// Runs the periodic control rounds until the objective is flat for
// patienceRounds or maxRounds is hit: recompute offered rates, admissible
// rates and admissions from the limits received last round, propagate flows,
// emit fresh limits to previous hops, then take local gradient steps.
ControlResult runControlRounds(const NetIndex& net, const QosSpec& qos,
                               const Objective& objective, const Hyperparams& hp,
                               SchemePolicy& policy);

// Weighted sum rate at the limit-exchange fixed point of the CURRENT
// parameters: message rounds only, no gradient steps.
double settledObjective(const NetIndex& net, const QosSpec& qos,
                        const Objective& objective, const SchemePolicy& policy,
                        int maxRounds = 300);

// Deterministic coordinate refinement of a converged parameter set: probes
// multiplicative changes of each parameter against the settled objective and
// keeps improvements. Returns the settled objective of the refined point.
double coordinatePolish(const NetIndex& net, const QosSpec& qos,
                        const Objective& objective, SchemePolicy& policy,
                        int passes);

}  // namespace xlr
