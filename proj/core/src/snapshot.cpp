#include "xlroute/snapshot.hpp"

namespace xlr {

ControllerSnapshot makeSnapshot(const OcdrRun& run) {
  ControllerSnapshot s;
  s.scheme = Scheme::Ocdr;
  s.ocdr = run.state;
  s.grants = run.result.grants;
  s.sourceRate = run.result.sourceRate;
  s.objective = run.result.objective;
  s.converged = run.result.converged;
  return s;
}

ControllerSnapshot makeSnapshot(const TcdrRun& run) {
  ControllerSnapshot s;
  s.scheme = Scheme::Tcdr;
  s.tcdr = run.state;
  s.grants = run.result.grants;
  s.sourceRate = run.result.sourceRate;
  s.objective = run.result.objective;
  s.converged = run.result.converged;
  return s;
}

ControllerSnapshot makeSnapshot(const StaticEval& eval, bool converged) {
  ControllerSnapshot s;
  s.scheme = Scheme::StaticAssign;
  s.staticPlan = eval.plan;
  s.sourceRate = eval.plan.sourceRate;
  s.objective = eval.bestF;
  s.converged = converged;
  return s;
}

}  // namespace xlr
