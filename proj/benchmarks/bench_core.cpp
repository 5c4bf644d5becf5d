#include <benchmark/benchmark.h>

#include <random>

#include "pgptycho/field.hpp"
#include "pgptycho/forward.hpp"
#include "pgptycho/loss.hpp"
#include "pgptycho/propagation.hpp"
#include "pgptycho/solver.hpp"

using namespace pgptycho;

namespace {

constexpr double kPitch = 6.9e-6;

ComplexField noise_field(Shape shape, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n;
  ComplexField f(shape, kPitch);
  for (auto& z : f) z = {n(rng), n(rng)};
  return f;
}

Shape square(const benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  return {n, n};
}

void BM_Fft2(benchmark::State& state) {
  const auto f = noise_field(square(state), 1);
  for (auto _ : state) benchmark::DoNotOptimize(fft2(f));
  state.SetItemsProcessed(state.iterations() * static_cast<std::int64_t>(f.size()));
}
BENCHMARK(BM_Fft2)->RangeMultiplier(2)->Range(64, 1024);

void BM_Propagate(benchmark::State& state) {
  const auto prop = build_propagator({561e-9, 5e-3, square(state), kPitch});
  const auto f = noise_field(square(state), 2);
  for (auto _ : state) benchmark::DoNotOptimize(prop.propagate(f));
}
BENCHMARK(BM_Propagate)->RangeMultiplier(2)->Range(64, 1024);

void BM_ForwardBackward(benchmark::State& state) {
  const Shape win = square(state);
  const Shape obj{2 * win.height, 2 * win.width};
  const PropagatorSpec spec{561e-9, 5e-3, win, kPitch};
  const Scenario s(noise_field(obj, 3), noise_field(win, 4), {{static_cast<std::ptrdiff_t>(win.height / 2), static_cast<std::ptrdiff_t>(win.width / 2)}},
                   spec);
  const RealField dL(win, kPitch, 1.0);
  for (auto _ : state) {
    benchmark::DoNotOptimize(predict_intensity(s, 0));
    benchmark::DoNotOptimize(gradient_object(s, 0, dL));
  }
}
BENCHMARK(BM_ForwardBackward)->RangeMultiplier(2)->Range(64, 512);

// One epoch over 20 positions of the default desk geometry.
void BM_Epoch(benchmark::State& state) {
  const Shape win{64, 64}, obj{128, 128};
  DiffractionDataset d;
  d.propagator = {561e-9, 5e-3, win, kPitch};
  d.object_shape = obj;
  std::mt19937_64 rng(5);
  std::uniform_int_distribution<std::ptrdiff_t> pos(0, 64);
  const auto probe = disc_probe(win, kPitch, 7 * kPitch, 1e6);
  for (int i = 0; i < 20; ++i) d.positions.push_back({pos(rng), pos(rng)});
  const Scenario truth(noise_field(obj, 6), probe, d.positions, d.propagator);
  for (std::size_t i = 0; i < d.positions.size(); ++i) d.frames.push_back(predict_intensity(truth, i));
  d.variance = RealField(win, kPitch, 2.25);
  ReconstructionConfig c;
  c.initial_probe = probe;
  c.schedule.epochs = 1;
  c.loss.variant = static_cast<LossVariant>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(reconstruct(d, c));
}
BENCHMARK(BM_Epoch)->DenseRange(0, 2)->Unit(benchmark::kMillisecond);

}  // namespace
BENCHMARK_MAIN();
