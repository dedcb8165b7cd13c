#include <algorithm>
#include <cstdio>
#include <exception>
#include <iostream>
#include <string>
#include <thread>

#include <CLI11.hpp>

#include "xlroute/errors.hpp"
#include "xlroute/scenario.hpp"
#include "xlroute/simulator.hpp"
#include "xlroute/sweep.hpp"

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

void printReport(const xlr::Scenario& sc, const xlr::OptimizeReport& rep) {
  std::cout << "scenario: " << sc.name << "  scheme: " << xlr::schemeName(rep.scheme)
            << "\n";
  std::cout << "F = " << fmt(rep.objective) << " bit/s";
  if (rep.scheme == xlr::Scheme::StaticAssign) {
    std::cout << "  (exhaustive search)";
  } else {
    std::cout << (rep.converged ? "  (converged" : "  (NOT converged") << " after "
              << rep.rounds << " rounds)";
  }
  std::cout << "\n";
  for (int k = 1; k <= sc.sources; ++k) {
    std::cout << "rho_" << k << " = " << fmt(rep.sourceRate[static_cast<std::size_t>(k - 1)])
              << " bit/s\n";
  }
  if (rep.scheme == xlr::Scheme::StaticAssign) {
    std::cout << "assignment:";
    for (int k = 1; k <= sc.sources; ++k) {
      std::cout << " s" << k << ":";
      for (int l = 1; l <= sc.hops; ++l) {
        if (l > 1) std::cout << "-";
        std::cout << "r" << (l - 1) * sc.relaysPerHop + rep.staticResult.assignment.relay(k, l);
      }
    }
    std::cout << "\nequal-share F = " << fmt(rep.staticResult.eval.equalShareF)
              << " bit/s\n";
    return;
  }
  std::cout << "node tables (bit/s):\n";
  std::cout << "  node source rho*        arrival     | link: muHat / limit / mu / flow\n";
  for (const auto& [key, star] : rep.table.rhoStar) {
    const auto& [node, k] = key;
    std::cout << "  " << xlr::toLabel(node, sc.relaysPerHop) << "    " << k << "     "
              << fmt(star);
    auto arrIt = rep.table.arrival.find(key);
    std::cout << "  " << (arrIt != rep.table.arrival.end() ? fmt(arrIt->second) : "-");
    for (const auto& [lk, muHat] : rep.table.muHat) {
      const auto& [i, j, kk] = lk;
      if (i != node || kk != k) continue;
      std::cout << " | " << xlr::toLabel(j, sc.relaysPerHop) << ": " << fmt(muHat);
      auto limIt = rep.table.limit.find(lk);
      std::cout << " / " << (limIt != rep.table.limit.end() ? fmt(limIt->second) : "inf");
      auto muIt = rep.table.mu.find(lk);
      std::cout << " / " << (muIt != rep.table.mu.end() ? fmt(muIt->second) : "0");
      auto flIt = rep.table.flow.find(lk);
      std::cout << " / " << (flIt != rep.table.flow.end() ? fmt(flIt->second) : "0");
    }
    std::cout << "\n";
  }
}

std::string simCsv(const xlr::Scenario& sc, xlr::Scheme scheme,
                   const xlr::SimMetrics& m) {
  const int K = sc.sources;
  std::string csv = "scenario,scheme,seed,slots,mode";
  for (int k = 1; k <= K; ++k) csv += ",admitted" + std::to_string(k) + "_bps";
  for (int k = 1; k <= K; ++k) csv += ",delivered" + std::to_string(k) + "_bps";
  for (int k = 1; k <= K; ++k) csv += ",dropfrac" + std::to_string(k);
  for (int k = 1; k <= K; ++k) csv += ",max_violation" + std::to_string(k);
  csv += ",conservation_err_bits,saturation_flagged\n";

  csv += sc.name;
  csv += ",";
  csv += xlr::schemeName(scheme);
  csv += "," + std::to_string(m.seed) + "," + std::to_string(m.slots);
  csv += m.saturated ? ",saturated" : ",closedloop";
  for (int k = 1; k <= K; ++k) csv += "," + fmt(m.admittedBps[static_cast<std::size_t>(k - 1)]);
  for (int k = 1; k <= K; ++k) csv += "," + fmt(m.deliveredBps[static_cast<std::size_t>(k - 1)]);
  for (int k = 1; k <= K; ++k) csv += "," + fmt(m.dropFraction[static_cast<std::size_t>(k - 1)]);
  for (int k = 1; k <= K; ++k) {
    double worst = 0.0;
    for (const auto& [key, freq] : m.nodeViolationFreq) {
      if (key.second == k) worst = std::max(worst, freq);
    }
    csv += "," + fmt(worst);
  }
  const double err =
      m.admittedBits - m.deliveredBits - m.droppedBits - m.inFlightBits;
  csv += "," + fmt(err);
  csv += m.saturationFlagged ? ",1" : ",0";
  csv += "\n";
  return csv;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"QoS-constrained dynamic route selection for multihop fading networks"};
  app.require_subcommand(1);

  std::string scenarioPath, statePath, csvPath, specPath, schemeName = "ocdr";
  std::string mode = "closedloop", outPath;
  double durationOverride = -1.0, tolOverride = -1.0;
  int maxRoundsOverride = -1, jobs = static_cast<int>(std::thread::hardware_concurrency());
  std::uint64_t seed = 1, cap = 1'000'000;

  double stepAlpha = -1.0, stepBeta = -1.0, stepAlphaPrime = -1.0;

  auto* opt = app.add_subcommand("optimize", "run one scheme on one scenario");
  opt->add_option("--scenario", scenarioPath, "scenario file")->required();
  opt->add_option("--scheme", schemeName, "ocdr | tcdr | static");
  opt->add_option("--save-state", statePath, "write the converged controller state (JSON)");
  opt->add_option("--csv", csvPath, "also append a summary CSV");
  opt->add_option("--max-rounds", maxRoundsOverride, "override optimizer max rounds");
  opt->add_option("--tol", tolOverride, "override convergence tolerance");
  opt->add_option("--step-alpha", stepAlpha, "override the share-weight ascent step");
  opt->add_option("--step-beta", stepBeta, "override the priority-weight ascent step");
  opt->add_option("--step-alpha-prime", stepAlphaPrime, "override the time-division ascent step");

  auto* sim = app.add_subcommand("simulate", "slot-level run of a saved controller state");
  sim->add_option("--scenario", scenarioPath, "scenario file")->required();
  sim->add_option("--state", statePath, "controller state file from optimize")->required();
  sim->add_option("--mode", mode, "closedloop | saturated");
  sim->add_option("--duration-s", durationOverride, "simulated seconds");
  sim->add_option("--seed", seed, "RNG seed");
  sim->add_option("--csv", csvPath, "write the metrics row to this CSV file");

  auto* swp = app.add_subcommand("sweep", "run a sweep spec and write its CSV");
  swp->add_option("--spec", specPath, "sweep spec file")->required();
  swp->add_option("--out", outPath, "override the spec's output path");
  swp->add_option("--jobs", jobs, "worker threads");

  auto* bench = app.add_subcommand("benchmark", "exhaustive static-assignment baseline");
  bench->add_option("--scenario", scenarioPath, "scenario file")->required();
  bench->add_option("--cap", cap, "assignment enumeration cap");

  CLI11_PARSE(app, argc, argv);

  try {
    if (opt->parsed()) {
      xlr::Scenario sc = xlr::parseScenario(scenarioPath);
      if (maxRoundsOverride > 0) sc.optimizer.maxRounds = maxRoundsOverride;
      if (tolOverride > 0) sc.optimizer.convergenceTol = tolOverride;
      if (stepAlpha > 0) sc.optimizer.stepAlpha = stepAlpha;
      if (stepBeta > 0) sc.optimizer.stepBeta = stepBeta;
      if (stepAlphaPrime > 0) sc.optimizer.stepAlphaPrime = stepAlphaPrime;
      const xlr::Scheme scheme = xlr::schemeFromName(schemeName);
      const xlr::OptimizeReport rep = xlr::optimizeScenario(sc, scheme);
      printReport(sc, rep);
      if (!statePath.empty()) {
        const xlr::Topology topo = sc.buildTopology();
        xlr::NetIndex net(topo, sc.channel);
        xlr::saveSnapshot(rep.snapshot, net, statePath);
        std::cout << "state written to " << statePath << "\n";
      }
      if (!csvPath.empty()) {
        std::string csv = "scenario,scheme,F_bps";
        for (int k = 1; k <= sc.sources; ++k) csv += ",rho" + std::to_string(k) + "_bps";
        csv += ",converged\n";
        csv += sc.name;
        csv += ",";
        csv += xlr::schemeName(scheme);
        csv += "," + fmt(rep.objective);
        for (double r : rep.sourceRate) csv += "," + fmt(r);
        csv += rep.converged ? ",1\n" : ",0\n";
        xlr::writeFileAtomic(csvPath, csv);
      }
    } else if (sim->parsed()) {
      const xlr::Scenario sc = xlr::parseScenario(scenarioPath);
      const xlr::Topology topo = sc.buildTopology();
      xlr::NetIndex net(topo, sc.channel);
      const xlr::ControllerSnapshot snapshot = xlr::loadSnapshot(statePath, net);
      xlr::SimConfig cfg;
      cfg.duration_s = durationOverride > 0 ? durationOverride : sc.simDuration_s;
      cfg.seed = seed;
      cfg.packetBits = sc.simPacketBits;
      cfg.t1_s = sc.optimizer.t1_s;
      cfg.t2_s = sc.optimizer.t2_s;
      if (mode == "saturated") cfg.saturated = true;
      else if (mode != "closedloop") throw xlr::ConfigError("mode is closedloop or saturated");
      const xlr::SimMetrics m = xlr::runSim(net, sc.qos, snapshot, cfg);
      const std::string csv = simCsv(sc, snapshot.scheme, m);
      std::cout << csv;
      if (!csvPath.empty()) xlr::writeFileAtomic(csvPath, csv);
    } else if (swp->parsed()) {
      const xlr::SweepSpec spec = xlr::parseSweepSpec(specPath);
      const std::string written = xlr::runSweepToFile(spec, jobs, outPath);
      std::cout << "wrote " << written << "\n";
    } else if (bench->parsed()) {
      xlr::Scenario sc = xlr::parseScenario(scenarioPath);
      const xlr::OptimizeReport rep = xlr::optimizeScenario(sc, xlr::Scheme::StaticAssign);
      printReport(sc, rep);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
