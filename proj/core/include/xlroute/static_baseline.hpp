#pragma once

#include <cstdint>
#include <vector>

#include "xlroute/control.hpp"

namespace xlr {

// One fixed route per source: the chosen relay index (1..M) for every hop.
struct StaticAssignment {
  int sources = 0;
  int hops = 0;
  std::vector<int> relayOf;  // [(k-1)*hops + (hop-1)] -> m

  int relay(int k, int hop) const {
    return relayOf[static_cast<std::size_t>((k - 1) * hops + (hop - 1))];
  }
  int& relay(int k, int hop) {
    return relayOf[static_cast<std::size_t>((k - 1) * hops + (hop - 1))];
  }
};

// Yields all M^(K*L) assignments exactly once, in lexicographic order.
// Construction fails when the count exceeds the cap.
class AssignmentEnumerator {
 public:
  AssignmentEnumerator(int sources, int hops, int relaysPerHop,
                       std::uint64_t cap = 1'000'000);
  std::uint64_t count() const { return count_; }
  bool next(StaticAssignment& out);  // false once exhausted

 private:
  int sources_, hops_, relaysPerHop_;
  std::uint64_t count_;
  bool done_ = false;
  StaticAssignment current_;
  bool started_ = false;
};

// How a fixed assignment is operated: the outgoing edge and airtime share per
// (transmitter, source), plus the admitted rates. Share rows follow the dense
// NetIndex order.
struct StaticPlan {
  StaticAssignment assignment;
  std::vector<std::vector<double>> share;    // [tx][k-1], 0 when k bypasses the node
  std::vector<std::vector<int>> edgeTarget;  // [tx][k-1] node index, -1 when unused
  std::vector<double> sourceRate;            // rho_k
};

struct StaticEval {
  double bestF = 0.0;        // optimal airtime split on shared nodes
  double equalShareF = 0.0;  // even split on shared nodes, for reference
  StaticPlan plan;           // the plan realizing bestF
};

// Weighted sum rate of one assignment. Every node on a path serves a source
// over its single outgoing link at its airtime share of the single-link
// ergodic rate; a relay shared by several sources splits airtime between
// them. The split is solved exactly for up to two sources (the admissible
// rate is piecewise linear in the split, so scanning segment breakpoints is
// exact); larger instances reuse the time-division optimizer restricted to
// the assignment's edges.
StaticEval evaluateStatic(const StaticAssignment& assignment, const NetIndex& net,
                          const QosSpec& qos, const Objective& objective);

struct BestStatic {
  StaticAssignment assignment;
  StaticEval eval;
};

// Exhaustive search over all assignments; ties keep the first in enumeration
// order.
BestStatic bestStatic(const NetIndex& net, const QosSpec& qos,
                      const Objective& objective,
                      std::uint64_t cap = 1'000'000);

}  // namespace xlr
