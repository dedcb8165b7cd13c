#include <benchmark/benchmark.h>

#include <map>
#include <vector>

#include "xlroute/channel.hpp"
#include "xlroute/control.hpp"
#include "xlroute/exp_integral.hpp"
#include "xlroute/ocdr.hpp"
#include "xlroute/simulator.hpp"
#include "xlroute/static_baseline.hpp"
#include "xlroute/tcdr.hpp"

namespace {

using namespace xlr;

Topology twoHopTopology() {
  std::map<NodeId, double> pos{
      {NodeId::source(1), 0.0},      {NodeId::source(2), 0.2},
      {NodeId::relay(1, 1), 0.4},    {NodeId::relay(1, 2), 0.6},
      {NodeId::destination(1), 1.0}, {NodeId::destination(2), 0.8}};
  return buildLinear(2, 1, 2, pos);
}

void BM_ExpScaledE1(benchmark::State& state) {
  const double x = state.range(0) == 0 ? 0.125 : 8.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(expScaledE1(x));
  }
}
BENCHMARK(BM_ExpScaledE1)->Arg(0)->Arg(1);

void BM_OpportunisticRates(benchmark::State& state) {
  const int links = static_cast<int>(state.range(0));
  const bool gradient = state.range(1) != 0;
  std::vector<double> g, b;
  for (int j = 0; j < links; ++j) {
    g.push_back(1.0 + j);
    b.push_back(0.5 + 0.25 * j);
  }
  for (auto _ : state) {
    benchmark::DoNotOptimize(opportunisticRates(g, b, 1e6, gradient));
  }
}
BENCHMARK(BM_OpportunisticRates)
    ->Args({2, 0})
    ->Args({2, 1})
    ->Args({4, 1})
    ->Args({8, 1});

void BM_SettledObjective(benchmark::State& state) {
  const Topology topo = twoHopTopology();
  ChannelParams params;
  params.bandwidth_hz = 1e6;
  NetIndex net(topo, params);
  QosSpec qos;
  Objective obj{{1.0, 1.0}};
  TcdrPolicy policy(net, Hyperparams{});
  for (auto _ : state) {
    benchmark::DoNotOptimize(settledObjective(net, qos, obj, policy));
  }
}
BENCHMARK(BM_SettledObjective);

void BM_OptimizeTwoHop(benchmark::State& state) {
  const Topology topo = twoHopTopology();
  ChannelParams params;
  params.bandwidth_hz = 1e6;
  NetIndex net(topo, params);
  QosSpec qos;
  Objective obj{{1.0, 1.0}};
  const bool opportunistic = state.range(0) != 0;
  for (auto _ : state) {
    if (opportunistic) {
      benchmark::DoNotOptimize(runOcdr(net, qos, obj, Hyperparams{}));
    } else {
      benchmark::DoNotOptimize(runTcdr(net, qos, obj, Hyperparams{}));
    }
  }
}
BENCHMARK(BM_OptimizeTwoHop)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

void BM_BestStatic(benchmark::State& state) {
  const Topology topo = twoHopTopology();
  ChannelParams params;
  params.bandwidth_hz = 1e6;
  NetIndex net(topo, params);
  QosSpec qos;
  Objective obj{{1.0, 1.0}};
  for (auto _ : state) {
    benchmark::DoNotOptimize(bestStatic(net, qos, obj));
  }
}
BENCHMARK(BM_BestStatic);

void BM_SimulatorSlots(benchmark::State& state) {
  const Topology topo = twoHopTopology();
  ChannelParams params;
  params.bandwidth_hz = 1e6;
  params.slot_s = 1e-5;
  NetIndex net(topo, params);
  QosSpec qos;
  Objective obj{{1.0, 1.0}};
  const OcdrRun run = runOcdr(net, qos, obj, Hyperparams{});
  const ControllerSnapshot snap = makeSnapshot(run);
  SimConfig cfg;
  cfg.duration_s = 1.0;  // 1e5 slots per iteration
  cfg.seed = 7;
  cfg.packetBits = 100.0;
  cfg.t1_s = 1e-2;
  cfg.t2_s = 1.0;
  for (auto _ : state) {
    benchmark::DoNotOptimize(runSim(net, qos, snap, cfg));
  }
  state.SetItemsProcessed(state.iterations() * 100000);
}
BENCHMARK(BM_SimulatorSlots)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
