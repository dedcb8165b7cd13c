#pragma once

#include <map>
#include <tuple>
#include <utility>

#include "xlroute/node.hpp"

namespace xlr {

// Analytic per-node rate bookkeeping in report-friendly form. Keys follow the
// transmitter's perspective: (i, j, k) is node i's link toward next hop j
// carrying source k's data.
struct RateTable {
  using LinkKey = std::tuple<NodeId, NodeId, int>;
  using NodeKey = std::pair<NodeId, int>;

  std::map<LinkKey, double> muHat;      // offered service rate, bit/s
  std::map<LinkKey, double> mu;         // grant-limited service rate min(muHat, limit)
  std::map<NodeKey, double> muNode;     // mu_ik = sum over links
  std::map<LinkKey, double> limit;      // rhoHat_ijk granted to i by next hop j
  std::map<LinkKey, double> flow;       // rho_ijk forwarded over the link
  std::map<NodeKey, double> arrival;    // rho_ik arriving at node i
  std::map<NodeKey, double> rhoStar;    // admissible arrival rate at node i
  std::map<int, double> sourceRate;     // rho_k admitted at source k
};

}  // namespace xlr
