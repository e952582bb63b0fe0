// Serial reference vs OpenMP/optimised kernels.

#include <benchmark/benchmark.h>

#include <random>

#include "pinaudio/batch.hpp"
#include "pinaudio/dsp.hpp"
#include "pinaudio/synth.hpp"

using namespace pinaudio;

namespace {

std::vector<double> noise(std::size_t n) {
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = u(rng);
  return x;
}

const std::vector<AudioClip>& clips() {
  static const std::vector<AudioClip> c = [] {
    GeneratorConfig cfg;
    std::vector<AudioClip> out;
    for (std::size_t i = 0; i < 32; ++i) out.push_back(generate_entry(cfg, Pin::from_number(static_cast<int>(i * 311)), i).clip);
    return out;
  }();
  return c;
}

const std::vector<AttackJob>& jobs() {
  static const std::vector<AttackJob> j = [] {
    GeneratorConfig cfg;
    std::vector<AttackJob> out;
    for (std::size_t i = 0; i < 256; ++i) {
      Rng rng = trace_rng(cfg.seed, std::to_string(i));
      const Pin pin = Pin::from_number(static_cast<int>((i * 7919) % kPinSpace));
      KnowledgeSpec k;
      k.typist_mode = TypistMode::single_finger;
      out.push_back({sample_trace(pin, cfg, rng).gaps(), k, pin});
    }
    return out;
  }();
  return j;
}

const ModelBank& bank() {
  static const ModelBank b{{TypistMode::single_finger,
                            TimingModel::from_class_params(default_single_finger_gaps(), TypistMode::single_finger,
                                                           "bench")}};
  return b;
}

void BM_SlidingMaxReference(benchmark::State& state) {
  const auto x = noise(48000);
  const auto w = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sliding_max_reference(x, w));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(x.size()));
}
BENCHMARK(BM_SlidingMaxReference)->Arg(48)->Arg(480)->Arg(4800)->Unit(benchmark::kMillisecond);

void BM_SlidingMaxDeque(benchmark::State& state) {
  const auto x = noise(48000);
  const auto w = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(sliding_max(x, w));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(x.size()));
}
BENCHMARK(BM_SlidingMaxDeque)->Arg(48)->Arg(480)->Arg(4800)->Unit(benchmark::kMillisecond);

void BM_DetectBatch(benchmark::State& state) {
  const auto exec = state.range(0) ? Execution::parallel : Execution::serial;
  const PipelineConfig cfg;
  for (auto _ : state) benchmark::DoNotOptimize(detect_batch(clips(), cfg, exec));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(clips().size()));
  state.SetLabel(exec == Execution::parallel ? "parallel" : "serial");
}
BENCHMARK(BM_DetectBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

void BM_AttackBatch(benchmark::State& state) {
  const auto exec = state.range(0) ? Execution::parallel : Execution::serial;
  for (auto _ : state) benchmark::DoNotOptimize(rank_batch(bank(), jobs(), exec));
  state.SetItemsProcessed(state.iterations() * static_cast<long>(jobs().size()));
  state.SetLabel(exec == Execution::parallel ? "parallel" : "serial");
}
BENCHMARK(BM_AttackBatch)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond)->UseRealTime();

}  // namespace

BENCHMARK_MAIN();
