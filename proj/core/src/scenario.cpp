#include "xlroute/scenario.hpp"

#include <cctype>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "xlroute/errors.hpp"
#include "xlroute/qos.hpp"

namespace xlr {

namespace {

std::string trim(const std::string& s) {
  std::size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

struct Entry {
  std::string section, key, value;
  int line;
};

std::vector<Entry> tokenize(const std::string& text, const std::string& file) {
  std::vector<Entry> entries;
  std::istringstream in(text);
  std::string raw;
  std::string section;
  int lineNo = 0;
  while (std::getline(in, raw)) {
    ++lineNo;
    const auto hash = raw.find('#');
    if (hash != std::string::npos) raw.erase(hash);
    const std::string line = trim(raw);
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ParseError(file, lineNo, "unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      if (section.empty()) throw ParseError(file, lineNo, "empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      throw ParseError(file, lineNo, "expected 'key = value'");
    }
    Entry e;
    e.section = section;
    e.key = trim(line.substr(0, eq));
    e.value = trim(line.substr(eq + 1));
    e.line = lineNo;
    if (e.key.empty()) throw ParseError(file, lineNo, "empty key");
    if (e.section.empty()) throw ParseError(file, lineNo, "key outside any [section]");
    entries.push_back(std::move(e));
  }
  return entries;
}

double toDouble(const Entry& e, const std::string& file) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ParseError(file, e.line, "'" + e.key + "' needs a number, got '" + e.value + "'");
  }
}

int toInt(const Entry& e, const std::string& file) {
  try {
    std::size_t pos = 0;
    const long v = std::stol(e.value, &pos);
    if (pos != e.value.size()) throw std::invalid_argument("trailing characters");
    return static_cast<int>(v);
  } catch (const std::exception&) {
    throw ParseError(file, e.line, "'" + e.key + "' needs an integer, got '" + e.value + "'");
  }
}

std::vector<std::string> splitWords(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> words;
  std::string w;
  while (in >> w) words.push_back(w);
  return words;
}

}  // namespace

NodeId parseNodeLabel(const std::string& label, int sources, int hops,
                      int relaysPerHop) {
  if (label.size() < 2) throw ConfigError("bad node label '" + label + "'");
  const char kind = label.front();
  int n = 0;
  try {
    std::size_t pos = 0;
    n = std::stoi(label.substr(1), &pos);
    if (pos != label.size() - 1) throw std::invalid_argument("");
  } catch (const std::exception&) {
    throw ConfigError("bad node label '" + label + "'");
  }
  switch (kind) {
    case 's':
      if (n < 1 || n > sources) throw ConfigError("source out of range: " + label);
      return NodeId::source(n);
    case 'd':
      if (n < 1 || n > sources) throw ConfigError("destination out of range: " + label);
      return NodeId::destination(n);
    case 'r': {
      if (n < 1 || n > hops * relaysPerHop) {
        throw ConfigError("relay out of range: " + label);
      }
      const int hop = (n - 1) / relaysPerHop + 1;
      const int m = (n - 1) % relaysPerHop + 1;
      return NodeId::relay(hop, m);
    }
    default:
      throw ConfigError("bad node label '" + label + "' (expected s/r/d prefix)");
  }
}

Topology Scenario::buildTopology() const {
  return buildLinear(sources, hops, relaysPerHop, positions);
}

Scenario parseScenarioText(const std::string& text, const std::string& name) {
  const auto entries = tokenize(text, name);
  Scenario sc;
  sc.name = name;

  // network block first: node labels and weight counts depend on it
  bool gotK = false, gotL = false, gotM = false;
  for (const Entry& e : entries) {
    if (e.section != "network") continue;
    if (e.key == "sources") {
      sc.sources = toInt(e, name);
      gotK = true;
    } else if (e.key == "hops") {
      sc.hops = toInt(e, name);
      gotL = true;
    } else if (e.key == "relays_per_hop") {
      sc.relaysPerHop = toInt(e, name);
      gotM = true;
    } else {
      throw ParseError(name, e.line, "unknown [network] key '" + e.key + "'");
    }
  }
  if (!gotK || !gotL || !gotM) {
    throw ParseError(name, 1, "[network] needs sources, hops and relays_per_hop");
  }
  if (sc.sources < 1 || sc.hops < 1 || sc.relaysPerHop < 1) {
    throw ParseError(name, 1, "[network] counts must be >= 1");
  }

  sc.objective.weights.assign(static_cast<std::size_t>(sc.sources), 1.0);
  bool e2eDeadline = false, e2eLoss = false, plainQos = false;
  double e2eDeadlineVal = 0.0, e2eLossVal = 0.0;

  for (const Entry& e : entries) {
    if (e.section == "network") continue;
    if (e.section == "positions") {
      const NodeId id = [&] {
        try {
          return parseNodeLabel(e.key, sc.sources, sc.hops, sc.relaysPerHop);
        } catch (const ConfigError& err) {
          throw ParseError(name, e.line, err.what());
        }
      }();
      sc.positions[id] = toDouble(e, name);
    } else if (e.section == "channel") {
      if (e.key == "bandwidth_hz") sc.channel.bandwidth_hz = toDouble(e, name);
      else if (e.key == "snr_scale") sc.channel.snr_scale = toDouble(e, name);
      else if (e.key == "path_loss_exp") sc.channel.path_loss_exp = toDouble(e, name);
      else if (e.key == "slot_s") sc.channel.slot_s = toDouble(e, name);
      else throw ParseError(name, e.line, "unknown [channel] key '" + e.key + "'");
    } else if (e.section == "qos") {
      if (e.key == "deadline_s") {
        sc.qos.defaultBudget.deadline_s = toDouble(e, name);
        plainQos = true;
      } else if (e.key == "violation_prob") {
        sc.qos.defaultBudget.violationProb = toDouble(e, name);
        plainQos = true;
      } else if (e.key == "end_to_end_deadline_s") {
        e2eDeadlineVal = toDouble(e, name);
        e2eDeadline = true;
      } else if (e.key == "end_to_end_violation_prob") {
        e2eLossVal = toDouble(e, name);
        e2eLoss = true;
      } else if (e.key == "override") {
        const auto words = splitWords(e.value);
        if (words.size() != 4) {
          throw ParseError(name, e.line,
                           "override needs: <node> <source> <deadline_s> <violation_prob>");
        }
        try {
          const NodeId node =
              parseNodeLabel(words[0], sc.sources, sc.hops, sc.relaysPerHop);
          const int k = std::stoi(words[1]);
          if (k < 1 || k > sc.sources) throw ConfigError("override source out of range");
          sc.qos.overrides[{node, k}] =
              QosBudget{std::stod(words[2]), std::stod(words[3])};
        } catch (const std::exception& err) {
          throw ParseError(name, e.line, err.what());
        }
      } else {
        throw ParseError(name, e.line, "unknown [qos] key '" + e.key + "'");
      }
    } else if (e.section == "weights") {
      if (e.key.size() < 2 || e.key.front() != 'f') {
        throw ParseError(name, e.line, "weight keys look like f1, f2, ...");
      }
      int k = 0;
      try {
        k = std::stoi(e.key.substr(1));
      } catch (const std::exception&) {
        throw ParseError(name, e.line, "weight keys look like f1, f2, ...");
      }
      if (k < 1 || k > sc.sources) throw ParseError(name, e.line, "weight index out of range");
      sc.objective.weights[static_cast<std::size_t>(k - 1)] = toDouble(e, name);
    } else if (e.section == "optimizer") {
      if (e.key == "step_alpha") sc.optimizer.stepAlpha = toDouble(e, name);
      else if (e.key == "step_beta") sc.optimizer.stepBeta = toDouble(e, name);
      else if (e.key == "step_alpha_prime") sc.optimizer.stepAlphaPrime = toDouble(e, name);
      else if (e.key == "beta_period_rounds") sc.optimizer.betaPeriodRounds = toInt(e, name);
      else if (e.key == "convergence_tol") sc.optimizer.convergenceTol = toDouble(e, name);
      else if (e.key == "patience_rounds") sc.optimizer.patienceRounds = toInt(e, name);
      else if (e.key == "max_rounds") sc.optimizer.maxRounds = toInt(e, name);
      else if (e.key == "beta_floor") sc.optimizer.betaFloor = toDouble(e, name);
      else if (e.key == "alpha_floor") sc.optimizer.alphaFloor = toDouble(e, name);
      else if (e.key == "saturation_tol") sc.optimizer.saturationTol = toDouble(e, name);
      else if (e.key == "t1_s") sc.optimizer.t1_s = toDouble(e, name);
      else if (e.key == "t2_s") sc.optimizer.t2_s = toDouble(e, name);
      else throw ParseError(name, e.line, "unknown [optimizer] key '" + e.key + "'");
    } else if (e.section == "simulation") {
      if (e.key == "packet_bits") sc.simPacketBits = toDouble(e, name);
      else if (e.key == "duration_s") sc.simDuration_s = toDouble(e, name);
      else throw ParseError(name, e.line, "unknown [simulation] key '" + e.key + "'");
    } else {
      throw ParseError(name, e.line, "unknown section [" + e.section + "]");
    }
  }

  if (e2eDeadline != e2eLoss) {
    throw ParseError(name, 1,
                     "end-to-end QoS needs both end_to_end_deadline_s and "
                     "end_to_end_violation_prob");
  }
  if (e2eDeadline) {
    if (plainQos) {
      throw ParseError(name, 1, "give either per-node or end-to-end QoS, not both");
    }
    sc.qos.defaultBudget = deriveEqualBudgets(sc.hops + 1, e2eDeadlineVal, e2eLossVal);
  }

  // surface bad values now, with the file name attached
  try {
    sc.channel.validate();
    sc.qos.validate();
    sc.objective.validate(sc.sources);
    sc.optimizer.validate();
    sc.buildTopology();
  } catch (const Error& err) {
    throw ParseError(name, 1, err.what());
  }
  return sc;
}

namespace {
std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open file: " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}
}  // namespace

Scenario parseScenario(const std::string& path) {
  Scenario sc = parseScenarioText(readFile(path), path);
  sc.name = std::filesystem::path(path).stem().string();
  return sc;
}

SweepSpec parseSweepSpec(const std::string& path) {
  const auto entries = tokenize(readFile(path), path);
  SweepSpec spec;
  bool haveKind = false;

  for (const Entry& e : entries) {
    if (e.section == "sweep") {
      if (e.key == "kind") {
        if (e.value == "relay_positions") spec.kind = SweepKind::RelayPositions;
        else if (e.value == "weights") spec.kind = SweepKind::Weights;
        else throw ParseError(path, e.line, "kind is relay_positions or weights");
        haveKind = true;
      } else if (e.key == "scenario") {
        spec.scenarioPath = e.value;
      } else if (e.key == "schemes") {
        for (const auto& w : splitWords(e.value)) {
          try {
            spec.schemes.push_back(schemeFromName(w));
          } catch (const ConfigError& err) {
            throw ParseError(path, e.line, err.what());
          }
        }
      } else if (e.key == "output") {
        spec.output = e.value;
      } else {
        throw ParseError(path, e.line, "unknown [sweep] key '" + e.key + "'");
      }
    }
  }
  if (!haveKind) throw ParseError(path, 1, "[sweep] needs a kind");
  if (spec.scenarioPath.empty()) throw ParseError(path, 1, "[sweep] needs a scenario");
  if (spec.schemes.empty()) throw ParseError(path, 1, "[sweep] needs schemes");

  // the scenario path is relative to the sweep file
  const auto base = std::filesystem::path(path).parent_path();
  const auto resolved = base / spec.scenarioPath;
  spec.scenario = parseScenario(resolved.string());

  for (const Entry& e : entries) {
    if (e.section == "grid") {
      if (spec.kind != SweepKind::RelayPositions) {
        throw ParseError(path, e.line, "[grid] only applies to relay_positions sweeps");
      }
      if (e.key == "vary") {
        for (const auto& w : splitWords(e.value)) {
          try {
            spec.vary.push_back(parseNodeLabel(w, spec.scenario.sources,
                                               spec.scenario.hops,
                                               spec.scenario.relaysPerHop));
          } catch (const ConfigError& err) {
            throw ParseError(path, e.line, err.what());
          }
        }
      } else if (e.key == "min" || e.key == "max" || e.key == "step") {
        std::vector<double> vals;
        for (const auto& w : splitWords(e.value)) {
          try {
            vals.push_back(std::stod(w));
          } catch (const std::exception&) {
            throw ParseError(path, e.line, "'" + e.key + "' needs numbers");
          }
        }
        if (e.key == "min") spec.gridMin = vals;
        else if (e.key == "max") spec.gridMax = vals;
        else spec.gridStep = vals;
      } else {
        throw ParseError(path, e.line, "unknown [grid] key '" + e.key + "'");
      }
    } else if (e.section == "weights_grid") {
      if (spec.kind != SweepKind::Weights) {
        throw ParseError(path, e.line, "[weights_grid] only applies to weights sweeps");
      }
      if (e.key == "ratios") {
        for (const auto& w : splitWords(e.value)) {
          try {
            spec.ratios.push_back(std::stod(w));
          } catch (const std::exception&) {
            throw ParseError(path, e.line, "ratios need numbers");
          }
        }
      } else if (e.key == "placements") {
        spec.placements = toInt(e, path);
      } else if (e.key == "position_min") {
        spec.positionMin = toDouble(e, path);
      } else if (e.key == "position_max") {
        spec.positionMax = toDouble(e, path);
      } else if (e.key == "seed") {
        spec.seed = static_cast<std::uint64_t>(toInt(e, path));
      } else {
        throw ParseError(path, e.line, "unknown [weights_grid] key '" + e.key + "'");
      }
    } else if (e.section != "sweep") {
      throw ParseError(path, e.line, "unknown section [" + e.section + "]");
    }
  }

  if (spec.kind == SweepKind::RelayPositions) {
    const std::size_t n = spec.vary.size();
    if (n < 1 || n > 2) throw ParseError(path, 1, "vary one or two relays");
    if (spec.gridMin.size() != n || spec.gridMax.size() != n || spec.gridStep.size() != n) {
      throw ParseError(path, 1, "min/max/step must match the varied relays");
    }
    for (std::size_t d = 0; d < n; ++d) {
      if (!(spec.gridStep[d] > 0.0) || spec.gridMax[d] < spec.gridMin[d]) {
        throw ParseError(path, 1, "need step > 0 and max >= min");
      }
    }
  } else {
    if (spec.ratios.empty()) throw ParseError(path, 1, "weights sweep needs ratios");
    if (spec.placements < 1) throw ParseError(path, 1, "placements must be >= 1");
    if (!(spec.positionMax > spec.positionMin)) {
      throw ParseError(path, 1, "need position_max > position_min");
    }
  }
  return spec;
}

void writeFileAtomic(const std::string& path, const std::string& content) {
  const std::string tmp = path + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw ConfigError("cannot write file: " + tmp);
    out << content;
    if (!out) throw ConfigError("write failed: " + tmp);
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec) {
    std::filesystem::remove(tmp);
    throw ConfigError("cannot rename " + tmp + " to " + path + ": " + ec.message());
  }
}

namespace {
nlohmann::json toJson(const std::vector<std::vector<double>>& m) {
  nlohmann::json j = nlohmann::json::array();
  for (const auto& row : m) j.push_back(row);
  return j;
}

std::vector<std::vector<double>> matrixFromJson(const nlohmann::json& j) {
  std::vector<std::vector<double>> m;
  for (const auto& row : j) m.push_back(row.get<std::vector<double>>());
  return m;
}
}  // namespace

void saveSnapshot(const ControllerSnapshot& snapshot, const NetIndex& net,
                  const std::string& path) {
  nlohmann::json j;
  j["scheme"] = schemeName(snapshot.scheme);
  j["sources"] = net.sources();
  j["hops"] = net.hops();
  j["relays_per_hop"] = net.relaysPerHop();
  j["objective"] = snapshot.objective;
  j["converged"] = snapshot.converged;
  j["source_rate"] = snapshot.sourceRate;
  j["grants"] = toJson(snapshot.grants);
  if (snapshot.scheme == Scheme::Ocdr) {
    j["ocdr"] = {{"beta", toJson(snapshot.ocdr.beta)},
                 {"alpha", toJson(snapshot.ocdr.alpha)},
                 {"alpha_iterations", snapshot.ocdr.alphaIterations},
                 {"beta_iterations", snapshot.ocdr.betaIterations}};
  } else if (snapshot.scheme == Scheme::Tcdr) {
    j["tcdr"] = {{"alpha_prime", toJson(snapshot.tcdr.alphaPrime)},
                 {"iterations", snapshot.tcdr.iterations}};
  } else {
    nlohmann::json edges = nlohmann::json::array();
    for (const auto& row : snapshot.staticPlan.edgeTarget) edges.push_back(row);
    j["static"] = {{"relay_of", snapshot.staticPlan.assignment.relayOf},
                   {"share", toJson(snapshot.staticPlan.share)},
                   {"edge_target", edges},
                   {"source_rate", snapshot.staticPlan.sourceRate}};
  }
  writeFileAtomic(path, j.dump(2) + "\n");
}

ControllerSnapshot loadSnapshot(const std::string& path, const NetIndex& net) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(readFile(path));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad state file " + path + ": " + e.what());
  }
  try {
    if (j.at("sources").get<int>() != net.sources() ||
        j.at("hops").get<int>() != net.hops() ||
        j.at("relays_per_hop").get<int>() != net.relaysPerHop()) {
      throw ConfigError("state file " + path + " does not match the scenario network");
    }
    ControllerSnapshot s;
    s.scheme = schemeFromName(j.at("scheme").get<std::string>());
    s.objective = j.at("objective").get<double>();
    s.converged = j.at("converged").get<bool>();
    s.sourceRate = j.at("source_rate").get<std::vector<double>>();
    s.grants = matrixFromJson(j.at("grants"));
    if (s.scheme == Scheme::Ocdr) {
      const auto& o = j.at("ocdr");
      s.ocdr.beta = matrixFromJson(o.at("beta"));
      s.ocdr.alpha = matrixFromJson(o.at("alpha"));
      s.ocdr.alphaIterations = o.at("alpha_iterations").get<long>();
      s.ocdr.betaIterations = o.at("beta_iterations").get<long>();
    } else if (s.scheme == Scheme::Tcdr) {
      const auto& o = j.at("tcdr");
      s.tcdr.alphaPrime = matrixFromJson(o.at("alpha_prime"));
      s.tcdr.iterations = o.at("iterations").get<long>();
    } else {
      const auto& o = j.at("static");
      s.staticPlan.assignment.sources = net.sources();
      s.staticPlan.assignment.hops = net.hops();
      s.staticPlan.assignment.relayOf = o.at("relay_of").get<std::vector<int>>();
      s.staticPlan.share = matrixFromJson(o.at("share"));
      for (const auto& row : o.at("edge_target")) {
        s.staticPlan.edgeTarget.push_back(row.get<std::vector<int>>());
      }
      s.staticPlan.sourceRate = o.at("source_rate").get<std::vector<double>>();
    }
    // shape checks against the network
    if (static_cast<int>(s.sourceRate.size()) != net.sources()) {
      throw ConfigError("state file source_rate size mismatch");
    }
    if (!s.grants.empty()) {
      if (static_cast<int>(s.grants.size()) != net.txCount()) {
        throw ConfigError("state file grants shape mismatch");
      }
      for (int i = 0; i < net.txCount(); ++i) {
        if (s.grants[static_cast<std::size_t>(i)].size() !=
            static_cast<std::size_t>(net.slotCount(i))) {
          throw ConfigError("state file grants row mismatch");
        }
      }
    }
    return s;
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad state file " + path + ": " + e.what());
  }
}

}  // namespace xlr
