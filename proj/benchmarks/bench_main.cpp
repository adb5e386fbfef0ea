#include <benchmark/benchmark.h>

#include "dqa/quantkit.hpp"
#include "dqa/simkit.hpp"

using namespace dqa;

static void BM_LloydMaxDesign(benchmark::State& state) {
  const int bits = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(quantkit::design_lloyd_max(bits));
}
BENCHMARK(BM_LloydMaxDesign)->DenseRange(1, 8)->Unit(benchmark::kMicrosecond);

static void BM_QuantizeVector(benchmark::State& state) {
  const auto design = quantkit::design_quantizer(static_cast<int>(state.range(0)));
  const CVector x = CVector::Random(4096);
  for (auto _ : state) benchmark::DoNotOptimize(quantkit::quantize(x, design, 1.0 / 3.0));
  state.SetItemsProcessed(state.iterations() * x.size());
}
BENCHMARK(BM_QuantizeVector)->Arg(1)->Arg(3)->Arg(8);

static void BM_SingleTrial(benchmark::State& state) {
  simkit::ScenarioConfig cfg;
  cfg.trials = 1;
  cfg.iterations = 500;
  const auto sc = simkit::build_scenario(cfg);
  const auto sig = simkit::generate_trial_signals(sc, 0);
  const simkit::RunSpec spec{state.range(0) == 0 ? simkit::Algorithm::kDlmsFull : simkit::Algorithm::kDqaLms,
                             static_cast<int>(state.range(0)), false};
  for (auto _ : state) benchmark::DoNotOptimize(simkit::run_trial(sc, sig, spec));
}
BENCHMARK(BM_SingleTrial)->Arg(0)->Arg(1)->Arg(3)->Unit(benchmark::kMillisecond);

BENCHMARK_MAIN();
