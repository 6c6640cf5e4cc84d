#include "salflow/conditioning.hpp"
#include "salflow/eval.hpp"
#include "salflow/saliency.hpp"
#include "salflow/solver.hpp"
#include "salflow/synth.hpp"

#include <benchmark/benchmark.h>

#include <random>

using namespace salflow;

namespace {

ComplementedSequence complemented_scene(int size) {
  SceneSpec spec = translation_scene(1);
  spec.width = spec.height = size;
  spec.objects[0].size = size / 3;
  spec.objects[0].x = size / 5;
  spec.objects[0].y = size / 3;
  const RenderedScene r = render(spec);
  return complement(r.sequence, compute_sequence_saliency(r.sequence, SaliencyProvider{}));
}

void BM_Sweep(benchmark::State& state) {
  const ComplementedSequence seq = complemented_scene(static_cast<int>(state.range(0)));
  const SolverConfig c;
  const LevelData d = make_level_data(seq, c);
  FlowField f = FlowField::zeros(seq.width(), seq.height(), seq.frame_count() - 1);
  for (auto _ : state) {
    f = fixed_point_sweep(d, f, c);
    benchmark::DoNotOptimize(f.frames.front().u1.values().data());
  }
  state.SetItemsProcessed(state.iterations() * d.width * d.height * d.samples);
}
BENCHMARK(BM_Sweep)->Arg(32)->Arg(64)->Arg(128);

void BM_SolveLevel(benchmark::State& state) {
  const ComplementedSequence seq = complemented_scene(64);
  SolverConfig c;
  c.max_iterations = static_cast<int>(state.range(0));
  const LevelData d = make_level_data(seq, c);
  const FlowField init = FlowField::zeros(64, 64, seq.frame_count() - 1);
  for (auto _ : state) benchmark::DoNotOptimize(solve_level(d, init, c).log.iterations);
}
BENCHMARK(BM_SolveLevel)->Arg(50)->Unit(benchmark::kMillisecond);

void BM_SolveSequence(benchmark::State& state) {
  const ComplementedSequence seq = complemented_scene(64);
  for (auto _ : state) benchmark::DoNotOptimize(solve_sequence(seq, SolverConfig{}).log.size());
}
BENCHMARK(BM_SolveSequence)->Unit(benchmark::kMillisecond)->Iterations(2);

void BM_SpectralResidual(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  SceneSpec spec = static_scene(2, 2);
  spec.width = spec.height = size;
  const RenderedScene r = render(spec);
  const SaliencyProvider p;
  for (auto _ : state)
    benchmark::DoNotOptimize(compute_static_saliency(r.sequence.frame(0), 1, p, 0).values.size());
}
BENCHMARK(BM_SpectralResidual)->Arg(64)->Arg(256);

void BM_Auc(benchmark::State& state) {
  const int size = static_cast<int>(state.range(0));
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Plane map(size, size), mask(size, size);
  for (double& v : map.values()) v = u(rng);
  for (std::size_t k = 0; k < mask.size(); k += 97) mask.values()[k] = 1.0;
  for (auto _ : state) benchmark::DoNotOptimize(auc(map, mask));
}
BENCHMARK(BM_Auc)->Arg(64)->Arg(256);

void BM_ConditionMap(benchmark::State& state) {
  const ComplementedSequence seq = complemented_scene(128);
  for (auto _ : state) benchmark::DoNotOptimize(condition_map(jacobian(seq.frame(0))).fraction_below);
}
BENCHMARK(BM_ConditionMap);

}  // namespace

BENCHMARK_MAIN();
