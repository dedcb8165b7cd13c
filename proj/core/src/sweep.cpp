#include "xlroute/sweep.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <functional>
#include <thread>

#include "xlroute/errors.hpp"
#include "xlroute/ocdr.hpp"
#include "xlroute/rng.hpp"
#include "xlroute/tcdr.hpp"

namespace xlr {

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void runParallel(std::size_t tasks, int jobs, const std::function<void(std::size_t)>& fn) {
  if (jobs < 1) jobs = 1;
  if (jobs == 1 || tasks <= 1) {
    for (std::size_t t = 0; t < tasks; ++t) fn(t);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::vector<std::thread> pool;
  const int workers =
      static_cast<int>(std::min<std::size_t>(static_cast<std::size_t>(jobs), tasks));
  pool.reserve(static_cast<std::size_t>(workers));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (;;) {
          const std::size_t t = next.fetch_add(1);
          if (t >= tasks) break;
          fn(t);
        }
      } catch (...) {
        errors[static_cast<std::size_t>(w)] = std::current_exception();
      }
    });
  }
  for (auto& th : pool) th.join();
  for (auto& err : errors) {
    if (err) std::rethrow_exception(err);
  }
}

std::vector<double> gridValues(double lo, double hi, double step) {
  const int count = static_cast<int>(std::llround((hi - lo) / step)) + 1;
  std::vector<double> vals;
  for (int i = 0; i < count; ++i) {
    // snap accumulated step error so grid points print and compare cleanly
    vals.push_back(std::round((lo + i * step) * 1e9) / 1e9);
  }
  return vals;
}

}  // namespace

OptimizeReport optimizeScenario(const Scenario& scenario, Scheme scheme) {
  const Topology topo = scenario.buildTopology();
  NetIndex net(topo, scenario.channel);
  OptimizeReport report;
  report.scheme = scheme;
  if (scheme == Scheme::Ocdr) {
    OcdrRun run = runOcdr(net, scenario.qos, scenario.objective, scenario.optimizer);
    report.objective = run.result.objective;
    report.sourceRate = run.result.sourceRate;
    report.converged = run.result.converged;
    report.rounds = run.result.rounds;
    report.table = std::move(run.result.table);
    report.snapshot = makeSnapshot(run);
  } else if (scheme == Scheme::Tcdr) {
    TcdrRun run = runTcdr(net, scenario.qos, scenario.objective, scenario.optimizer);
    report.objective = run.result.objective;
    report.sourceRate = run.result.sourceRate;
    report.converged = run.result.converged;
    report.rounds = run.result.rounds;
    report.table = std::move(run.result.table);
    report.snapshot = makeSnapshot(run);
  } else {
    report.staticResult = bestStatic(net, scenario.qos, scenario.objective);
    report.objective = report.staticResult.eval.bestF;
    report.sourceRate = report.staticResult.eval.plan.sourceRate;
    report.converged = true;
    report.snapshot = makeSnapshot(report.staticResult.eval);
  }
  return report;
}

const OptimizeReport* RelayGridResult::report(std::size_t cell, Scheme s) const {
  for (const OptimizeReport& r : cells[cell].byScheme) {
    if (r.scheme == s) return &r;
  }
  return nullptr;
}

RelayGridResult runRelaySweep(const SweepSpec& spec, int jobs) {
  if (spec.kind != SweepKind::RelayPositions) {
    throw ConfigError("not a relay_positions sweep");
  }
  RelayGridResult result;
  result.aValues = gridValues(spec.gridMin[0], spec.gridMax[0], spec.gridStep[0]);
  const bool twoD = spec.vary.size() == 2;
  if (twoD) {
    result.bValues = gridValues(spec.gridMin[1], spec.gridMax[1], spec.gridStep[1]);
  }
  const std::size_t nA = result.aValues.size();
  const std::size_t nB = twoD ? result.bValues.size() : 1;
  result.cells.resize(nA * nB);

  runParallel(nA * nB, jobs, [&](std::size_t cell) {
    const std::size_t ia = cell / nB;
    const std::size_t ib = cell % nB;
    Scenario sc = spec.scenario;
    sc.positions[spec.vary[0]] = result.aValues[ia];
    if (twoD) sc.positions[spec.vary[1]] = result.bValues[ib];
    for (Scheme s : spec.schemes) {
      // a rejected grid point (e.g. the zero-length-link corner) flags its
      // row; the rest of the sweep proceeds
      try {
        result.cells[cell].byScheme.push_back(optimizeScenario(sc, s));
      } catch (const Error& e) {
        OptimizeReport rep;
        rep.scheme = s;
        rep.failed = true;
        rep.error = e.what();
        rep.sourceRate.assign(static_cast<std::size_t>(spec.scenario.sources), 0.0);
        result.cells[cell].byScheme.push_back(std::move(rep));
      }
    }
  });

  const int K = spec.scenario.sources;
  std::string csv = toLabel(spec.vary[0], spec.scenario.relaysPerHop);
  csv += twoD ? "," + toLabel(spec.vary[1], spec.scenario.relaysPerHop) : std::string();
  csv += ",scheme,F_bps";
  for (int k = 1; k <= K; ++k) csv += ",rho" + std::to_string(k) + "_bps";
  csv += ",converged,gain_vs_static_pct,gain_ocdr_vs_tcdr_pct\n";

  for (std::size_t cell = 0; cell < result.cells.size(); ++cell) {
    const std::size_t ia = cell / nB;
    const std::size_t ib = cell % nB;
    const OptimizeReport* staticRep = result.report(cell, Scheme::StaticAssign);
    const OptimizeReport* tcdrRep = result.report(cell, Scheme::Tcdr);
    const bool staticOk = staticRep && !staticRep->failed && staticRep->objective > 0.0;
    const bool tcdrOk = tcdrRep && !tcdrRep->failed && tcdrRep->objective > 0.0;
    for (const OptimizeReport& rep : result.cells[cell].byScheme) {
      csv += fmt(result.aValues[ia]);
      if (twoD) csv += "," + fmt(result.bValues[ib]);
      csv += ",";
      csv += schemeName(rep.scheme);
      if (rep.failed) {
        csv += ",";  // no objective
        for (int k = 1; k <= K; ++k) csv += ",";
        csv += ",failed,,\n";
        continue;
      }
      csv += "," + fmt(rep.objective);
      for (int k = 1; k <= K; ++k) {
        csv += "," + fmt(rep.sourceRate[static_cast<std::size_t>(k - 1)]);
      }
      csv += rep.converged ? ",1" : ",0";
      if (rep.scheme != Scheme::StaticAssign && staticOk) {
        csv += "," + fmt(100.0 * (rep.objective - staticRep->objective) /
                         staticRep->objective);
      } else {
        csv += ",";
      }
      if (rep.scheme == Scheme::Ocdr && tcdrOk) {
        csv += "," + fmt(100.0 * (rep.objective - tcdrRep->objective) /
                         tcdrRep->objective);
      } else {
        csv += ",";
      }
      csv += "\n";
    }
  }
  result.csv = std::move(csv);
  return result;
}

WeightsResult runWeightsSweep(const SweepSpec& spec, int jobs) {
  if (spec.kind != SweepKind::Weights) throw ConfigError("not a weights sweep");
  if (spec.scenario.sources != 2) {
    throw ConfigError("weights sweeps compare two sources (f2/f1)");
  }
  const int L = spec.scenario.hops;
  const int M = spec.scenario.relaysPerHop;
  const int nRelays = L * M;

  // all placements drawn up front so parallel execution cannot reorder draws
  Rng rng(spec.seed);
  std::vector<std::vector<double>> placements;
  for (int p = 0; p < spec.placements; ++p) {
    std::vector<double> pos;
    for (int r = 0; r < nRelays; ++r) {
      pos.push_back(spec.positionMin +
                    rng.uniform01() * (spec.positionMax - spec.positionMin));
    }
    // relays closest to the sources serve the earliest hop
    std::sort(pos.begin(), pos.end());
    placements.push_back(std::move(pos));
  }

  WeightsResult result;
  result.ratios = spec.ratios;
  const std::size_t nRatios = spec.ratios.size();
  const std::size_t nSchemes = spec.schemes.size();
  result.byScheme.assign(nSchemes, std::vector<WeightsResult::Avg>(nRatios));

  struct TaskOut {
    double r1 = 0.0, r2 = 0.0, wsum = 0.0;
  };
  std::vector<TaskOut> outs(nRatios * static_cast<std::size_t>(spec.placements) * nSchemes);

  runParallel(outs.size(), jobs, [&](std::size_t t) {
    const std::size_t si = t % nSchemes;
    const std::size_t rest = t / nSchemes;
    const std::size_t pi = rest % static_cast<std::size_t>(spec.placements);
    const std::size_t ri = rest / static_cast<std::size_t>(spec.placements);

    Scenario sc = spec.scenario;
    for (int l = 1; l <= L; ++l) {
      for (int m = 1; m <= M; ++m) {
        sc.positions[NodeId::relay(l, m)] =
            placements[pi][static_cast<std::size_t>((l - 1) * M + (m - 1))];
      }
    }
    const double ratio = spec.ratios[ri];
    sc.objective.weights = {1.0, ratio};
    const OptimizeReport rep = optimizeScenario(sc, spec.schemes[si]);
    TaskOut& out = outs[t];
    out.r1 = rep.sourceRate[0];
    out.r2 = rep.sourceRate[1];
    out.wsum = (1.0 * out.r1 + ratio * out.r2) / (1.0 + ratio);
  });

  for (std::size_t ri = 0; ri < nRatios; ++ri) {
    for (std::size_t si = 0; si < nSchemes; ++si) {
      WeightsResult::Avg& avg = result.byScheme[si][ri];
      for (std::size_t pi = 0; pi < static_cast<std::size_t>(spec.placements); ++pi) {
        const TaskOut& out =
            outs[(ri * static_cast<std::size_t>(spec.placements) + pi) * nSchemes + si];
        avg.r1 += out.r1;
        avg.r2 += out.r2;
        avg.weightedSumNorm += out.wsum;
      }
      avg.r1 /= spec.placements;
      avg.r2 /= spec.placements;
      avg.weightedSumNorm /= spec.placements;
    }
  }

  std::string csv = "f2_over_f1,scheme,avg_r1_bps,avg_r2_bps,avg_weighted_sum_norm_bps\n";
  for (std::size_t ri = 0; ri < nRatios; ++ri) {
    for (std::size_t si = 0; si < nSchemes; ++si) {
      const auto& avg = result.byScheme[si][ri];
      csv += fmt(spec.ratios[ri]);
      csv += ",";
      csv += schemeName(spec.schemes[si]);
      csv += "," + fmt(avg.r1) + "," + fmt(avg.r2) + "," + fmt(avg.weightedSumNorm) + "\n";
    }
  }
  result.csv = std::move(csv);
  return result;
}

std::string runSweepToFile(const SweepSpec& spec, int jobs,
                           const std::string& outputOverride) {
  const std::string out = outputOverride.empty() ? spec.output : outputOverride;
  if (out.empty()) throw ConfigError("sweep needs an output path");
  std::string csv;
  if (spec.kind == SweepKind::RelayPositions) {
    csv = runRelaySweep(spec, jobs).csv;
  } else {
    csv = runWeightsSweep(spec, jobs).csv;
  }
  writeFileAtomic(out, csv);
  return out;
}

}  // namespace xlr
