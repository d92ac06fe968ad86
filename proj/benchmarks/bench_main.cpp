#include <benchmark/benchmark.h>

#include <filesystem>

#include "swarmguide/impedance.hpp"
#include "swarmguide/scenario.hpp"
#include "swarmguide/sim.hpp"

namespace sg = swarmguide;

namespace {

std::filesystem::path preset(const char* name) {
  return std::filesystem::path(SWARMGUIDE_SOURCE_ROOT) / "scenarios" / (std::string(name) + ".json");
}

void BM_Discretize(benchmark::State& state) {
  // Complex, critical and real-root branches.
  const sg::ImpedanceParams params[] = {sg::make_impedance_params(1.9, 12.6, 21.0),
                                        sg::make_impedance_params(1.0, 2.0, 1.0),
                                        sg::make_impedance_params(1.0, 5.0, 1.0)};
  const auto& p = params[state.range(0)];
  for (auto _ : state) benchmark::DoNotOptimize(sg::discretize(p, 1.0 / 60));
}
BENCHMARK(BM_Discretize)->DenseRange(0, 2);

void BM_ImpedanceStep(benchmark::State& state) {
  const auto tr = sg::discretize(sg::make_impedance_params(1.9, 12.6, 21.0), 1.0 / 60);
  sg::ImpedanceState s;
  double force = -3.5;
  for (auto _ : state) {
    s = sg::step(s, force, tr);
    benchmark::DoNotOptimize(s);
  }
}
BENCHMARK(BM_ImpedanceStep);

void BM_SimulatorTick(benchmark::State& state) {
  const auto s = sg::load_scenario(preset("triangle-3-labyrinth"));
  const auto hand = sg::read_hand_trace(*s.hand_trace_path());
  sg::Simulator sim(s);
  long k = 0;
  for (auto _ : state) {
    // Wrap around well before the trace ends so the trace buffer stays bounded.
    if (++k > 1500) {
      state.PauseTiming();
      sim = sg::Simulator(s);
      k = 1;
      state.ResumeTiming();
    }
    benchmark::DoNotOptimize(sim.step(*hand.at(static_cast<double>(k) * s.sample_time)));
  }
}
BENCHMARK(BM_SimulatorTick);

void BM_RunLabyrinth(benchmark::State& state) {
  const auto s = sg::load_scenario(preset("triangle-3-labyrinth"));
  const auto hand = sg::read_hand_trace(*s.hand_trace_path());
  for (auto _ : state) benchmark::DoNotOptimize(sg::run_scenario(s, hand));
  state.SetLabel("full recorded trace");
}
BENCHMARK(BM_RunLabyrinth)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
