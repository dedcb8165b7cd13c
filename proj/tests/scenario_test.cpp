#include <doctest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>

#include "controller_harness.hpp"
#include "xlroute/errors.hpp"
#include "xlroute/ocdr.hpp"
#include "xlroute/scenario.hpp"

using namespace xlr;

namespace {
const std::string kScenarioDir = XLROUTE_SCENARIO_DIR;

std::string minimalScenario() {
  return R"([network]
sources = 2
hops = 1
relays_per_hop = 2

[positions]
s1 = 0.0
s2 = 0.2
r1 = 0.4
r2 = 0.6
d1 = 1.0
d2 = 0.8
)";
}
}  // namespace

TEST_CASE("shipped two-hop scenario parses to the experiment constants") {
  const Scenario sc = parseScenario(kScenarioDir + "/twohop.cfg");
  CHECK(sc.sources == 2);
  CHECK(sc.hops == 1);
  CHECK(sc.relaysPerHop == 2);
  CHECK(sc.positions.at(NodeId::source(2)) == 0.2);
  CHECK(sc.positions.at(NodeId::destination(2)) == 0.8);
  CHECK(sc.channel.bandwidth_hz == 1e6);
  CHECK(sc.channel.path_loss_exp == 3.0);
  CHECK(sc.qos.defaultBudget.deadline_s == 1e-4);
  CHECK(sc.qos.defaultBudget.violationProb == 1e-6);
  CHECK(sc.objective.weights == std::vector<double>{1.0, 1.0});
  CHECK_NOTHROW(sc.buildTopology());
}

TEST_CASE("shipped three-hop scenario wires two relay stages") {
  const Scenario sc = parseScenario(kScenarioDir + "/threehop.cfg");
  CHECK(sc.hops == 2);
  const Topology t = sc.buildTopology();
  CHECK(t.next(NodeId::relay(1, 1)) ==
        std::vector<NodeId>{NodeId::relay(2, 1), NodeId::relay(2, 2)});
}

TEST_CASE("relay labels are hop-major") {
  CHECK(parseNodeLabel("r1", 2, 2, 2) == NodeId::relay(1, 1));
  CHECK(parseNodeLabel("r2", 2, 2, 2) == NodeId::relay(1, 2));
  CHECK(parseNodeLabel("r3", 2, 2, 2) == NodeId::relay(2, 1));
  CHECK(parseNodeLabel("r4", 2, 2, 2) == NodeId::relay(2, 2));
  CHECK(parseNodeLabel("s2", 2, 2, 2) == NodeId::source(2));
  CHECK(parseNodeLabel("d1", 2, 2, 2) == NodeId::destination(1));
  CHECK_THROWS_AS(parseNodeLabel("r5", 2, 2, 2), ConfigError);
  CHECK_THROWS_AS(parseNodeLabel("x1", 2, 2, 2), ConfigError);
  CHECK_THROWS_AS(parseNodeLabel("r", 2, 2, 2), ConfigError);
  CHECK(toLabel(NodeId::relay(2, 1), 2) == "r3");
}

TEST_CASE("defaults fill what the file leaves out") {
  const Scenario sc = parseScenarioText(minimalScenario(), "mini");
  CHECK(sc.objective.weights == std::vector<double>{1.0, 1.0});
  CHECK(sc.qos.defaultBudget.deadline_s == 1e-4);
  CHECK(sc.optimizer.maxRounds == 10000);
}

TEST_CASE("parse errors carry the offending line") {
  const std::string bad = "[network]\nsources = 2\nhops = 1\nrelays_per_hop = two\n";
  try {
    parseScenarioText(bad, "bad.cfg");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 4);
    CHECK(std::string(e.what()).find("bad.cfg:4") != std::string::npos);
  }

  CHECK_THROWS_AS(parseScenarioText("sources = 2\n", "x"), ParseError);
  CHECK_THROWS_AS(parseScenarioText("[network]\nsources 2\n", "x"), ParseError);
  CHECK_THROWS_AS(parseScenarioText("[mystery]\nkey = 1\n", "x"), ParseError);
  CHECK_THROWS_AS(
      parseScenarioText(minimalScenario() + "[qos]\nbogus = 3\n", "x"), ParseError);
}

TEST_CASE("missing positions and bad counts fail") {
  const std::string noRelay = R"([network]
sources = 1
hops = 1
relays_per_hop = 1

[positions]
s1 = 0.0
d1 = 1.0
)";
  CHECK_THROWS_AS(parseScenarioText(noRelay, "x"), ParseError);
}

TEST_CASE("qos overrides and end-to-end budgets") {
  const std::string withOverride = minimalScenario() +
                                   "[qos]\ndeadline_s = 1e-3\nviolation_prob = 1e-4\n"
                                   "override = r1 2 5e-4 1e-5\n";
  const Scenario sc = parseScenarioText(withOverride, "x");
  CHECK(sc.qos.at(NodeId::relay(1, 1), 2).deadline_s == 5e-4);
  CHECK(sc.qos.at(NodeId::relay(1, 1), 1).deadline_s == 1e-3);

  const std::string e2e = minimalScenario() +
                          "[qos]\nend_to_end_deadline_s = 2e-4\n"
                          "end_to_end_violation_prob = 2e-6\n";
  const Scenario sc2 = parseScenarioText(e2e, "x");
  CHECK(sc2.qos.defaultBudget.deadline_s == doctest::Approx(1e-4));  // L+1 = 2 queues
  CHECK(sc2.qos.defaultBudget.violationProb == doctest::Approx(1e-6).epsilon(1e-3));

  const std::string both = e2e + "deadline_s = 1e-4\n";
  CHECK_THROWS_AS(parseScenarioText(both, "x"), ParseError);
  const std::string half = minimalScenario() + "[qos]\nend_to_end_deadline_s = 2e-4\n";
  CHECK_THROWS_AS(parseScenarioText(half, "x"), ParseError);
}

TEST_CASE("missing scenario file fails cleanly") {
  CHECK_THROWS_AS(parseScenario("/nonexistent/nowhere.cfg"), ConfigError);
}

TEST_CASE("sweep specs resolve their scenario and validate their grid") {
  const SweepSpec fig3 = parseSweepSpec(kScenarioDir + "/sweeps/fig3.cfg");
  CHECK(fig3.kind == SweepKind::RelayPositions);
  CHECK(fig3.schemes ==
        std::vector<Scheme>{Scheme::Ocdr, Scheme::Tcdr, Scheme::StaticAssign});
  CHECK(fig3.vary == std::vector<NodeId>{NodeId::relay(1, 1), NodeId::relay(1, 2)});
  CHECK(fig3.gridMin == std::vector<double>{0.3, 0.3});
  CHECK(fig3.gridStep == std::vector<double>{0.05, 0.05});
  CHECK(fig3.scenario.sources == 2);

  const SweepSpec weights = parseSweepSpec(kScenarioDir + "/sweeps/fig5566.cfg");
  CHECK(weights.kind == SweepKind::Weights);
  CHECK(weights.placements == 100);
  CHECK(weights.ratios == std::vector<double>{0.25, 0.5, 1.0, 2.0, 4.0});
  CHECK(weights.scenario.hops == 2);
}

TEST_CASE("controller state files round-trip") {
  auto fix = harness::twoHop(0.45, 0.55);
  const OcdrRun run = runOcdr(fix->net, fix->qos, fix->objective, Hyperparams{});
  const ControllerSnapshot saved = makeSnapshot(run);

  const std::string path = (std::filesystem::temp_directory_path() /
                            "xlroute_state_test.json").string();
  saveSnapshot(saved, fix->net, path);
  const ControllerSnapshot loaded = loadSnapshot(path, fix->net);
  CHECK(loaded.scheme == Scheme::Ocdr);
  CHECK(loaded.objective == doctest::Approx(saved.objective));
  CHECK(loaded.sourceRate == saved.sourceRate);
  CHECK(loaded.ocdr.beta == saved.ocdr.beta);
  CHECK(loaded.ocdr.alpha == saved.ocdr.alpha);
  CHECK(loaded.grants == saved.grants);
  std::filesystem::remove(path);

  // a state saved for one network must not load against another
  auto other = harness::threeHop(0.2, 0.3, 0.7, 0.8);
  saveSnapshot(saved, fix->net, path);
  CHECK_THROWS_AS(loadSnapshot(path, other->net), ConfigError);
  std::filesystem::remove(path);
}

TEST_CASE("atomic writes leave no partial files behind") {
  const std::string dir = (std::filesystem::temp_directory_path() /
                           "xlroute_missing_dir_for_test").string();
  std::filesystem::remove_all(dir);
  const std::string target = dir + "/out.csv";
  CHECK_THROWS_AS(writeFileAtomic(target, "data"), ConfigError);
  CHECK_FALSE(std::filesystem::exists(target));
  CHECK_FALSE(std::filesystem::exists(target + ".tmp"));

  const std::string good = (std::filesystem::temp_directory_path() /
                            "xlroute_atomic_test.csv").string();
  writeFileAtomic(good, "a,b\n1,2\n");
  std::ifstream in(good);
  std::string line;
  std::getline(in, line);
  CHECK(line == "a,b");
  std::filesystem::remove(good);
}
