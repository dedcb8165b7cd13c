#pragma once

#include <string>
#include <vector>

#include "xlroute/scenario.hpp"
#include "xlroute/static_baseline.hpp"

namespace xlr {

// One scheme optimized on one scenario.
struct OptimizeReport {
  Scheme scheme = Scheme::Ocdr;
  double objective = 0.0;
  std::vector<double> sourceRate;
  bool converged = false;
  bool failed = false;      // scenario rejected (e.g. singular geometry)
  std::string error;
  int rounds = 0;           // control rounds; 0 for the static baseline
  RateTable table;          // controller tables; empty for the static baseline
  ControllerSnapshot snapshot;
  BestStatic staticResult;  // populated for the static baseline
};

OptimizeReport optimizeScenario(const Scenario& scenario, Scheme scheme);

// Relay-position sweep: every grid point optimizes every requested scheme
// from a cold start. One CSV row per (grid point, scheme); gain columns
// compare against the static baseline and the time-division scheme where
// those are part of the run.
struct RelayGridResult {
  std::vector<double> aValues, bValues;  // bValues empty for 1-D sweeps
  struct Cell {
    std::vector<OptimizeReport> byScheme;  // order follows the spec's schemes
  };
  std::vector<Cell> cells;  // row-major: a outer, b inner
  std::string csv;

  const OptimizeReport* report(std::size_t cell, Scheme s) const;
};

RelayGridResult runRelaySweep(const SweepSpec& spec, int jobs);

// Weight-ratio sweep over random relay placements: the placements are drawn
// once from the spec seed, relays sorted toward the sources hop by hop, and
// each (ratio, placement, scheme) optimized independently. Rows average over
// placements.
struct WeightsResult {
  std::vector<double> ratios;
  struct Avg {
    double r1 = 0.0, r2 = 0.0, weightedSumNorm = 0.0;
  };
  // [scheme position in spec.schemes][ratio index]
  std::vector<std::vector<Avg>> byScheme;
  std::string csv;
};

WeightsResult runWeightsSweep(const SweepSpec& spec, int jobs);

// Dispatches on the spec kind, writes the CSV atomically to outputPath (or
// the spec's output), and returns the path written.
std::string runSweepToFile(const SweepSpec& spec, int jobs,
                           const std::string& outputOverride = "");

}  // namespace xlr
