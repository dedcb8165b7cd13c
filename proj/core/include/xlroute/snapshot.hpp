#pragma once

#include <vector>

#include "xlroute/ocdr.hpp"
#include "xlroute/static_baseline.hpp"
#include "xlroute/tcdr.hpp"

namespace xlr {

// Everything a simulation run needs from a finished optimization: the scheme
// parameters, the limit mailbox and the admitted source rates. Serialized to
// JSON by the scenario module.
struct ControllerSnapshot {
  Scheme scheme = Scheme::Ocdr;
  OcdrState ocdr;            // populated for Scheme::Ocdr
  TcdrState tcdr;            // populated for Scheme::Tcdr
  StaticPlan staticPlan;     // populated for Scheme::StaticAssign
  std::vector<std::vector<double>> grants;  // [tx][slot], limits held by each node
  std::vector<double> sourceRate;           // admitted rho_k
  double objective = 0.0;
  bool converged = false;
};

ControllerSnapshot makeSnapshot(const OcdrRun& run);
ControllerSnapshot makeSnapshot(const TcdrRun& run);
ControllerSnapshot makeSnapshot(const StaticEval& eval, bool converged = true);

}  // namespace xlr
