#include <benchmark/benchmark.h>

#include <vector>

#include "bench_data.hpp"
#include "capfade/cnn.hpp"
#include "capfade/gpr.hpp"
#include "capfade/interpolate.hpp"
#include "capfade/landmarks.hpp"
#include "capfade/sdg.hpp"

using namespace capfade;

namespace {

const Dataset& cells() {
  static const Dataset d = [] {
    testing::BenchmarkSpec spec;
    spec.seed = derive_stream(1, "bench.cells");
    return testing::make_benchmark_dataset(spec);
  }();
  return d;
}

const sdg::ParamRanges& ranges() {
  static const sdg::ParamRanges r = sdg::derive_ranges(sdg::pairwise_stats(cells(), 500), 0.25);
  return r;
}

void BM_ApplyParams(benchmark::State& state) {
  const auto& seed = cells().curves.front();
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdg::apply_params(seed, {0.01, -0.02, 1.1}));
  }
  state.SetItemsProcessed(state.iterations());
}
BENCHMARK(BM_ApplyParams);

void BM_GenerateBatch(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  for (auto _ : state) {
    benchmark::DoNotOptimize(sdg::generate_batch(cells().curves, ranges(), n, 3));
  }
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_GenerateBatch)->Arg(100)->Arg(1000)->Unit(benchmark::kMillisecond);

void BM_PairwiseStats(benchmark::State& state) {
  for (auto _ : state) benchmark::DoNotOptimize(sdg::pairwise_stats(cells(), 500));
}
BENCHMARK(BM_PairwiseStats)->Unit(benchmark::kMillisecond);

void BM_DetectKnee(benchmark::State& state) {
  const auto& c = cells().curves.front();
  for (auto _ : state) benchmark::DoNotOptimize(landmarks::detect_knee(c));
  state.counters["points"] = static_cast<double>(c.size());
}
BENCHMARK(BM_DetectKnee);

void BM_Pchip(benchmark::State& state) {
  const auto& c = cells().curves.front();
  auto x = c.cycle_axis();
  std::vector<double> q;
  for (double v = x.front(); v <= x.back(); v += 0.5) q.push_back(v);
  for (auto _ : state) benchmark::DoNotOptimize(interp::pchip(x, c.capacities, q));
}
BENCHMARK(BM_Pchip);

void BM_GprFit(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  Rng rng(5);
  std::vector<gpr::Row> rows(n, gpr::Row(50));
  std::vector<double> t(n);
  for (std::size_t i = 0; i < n; ++i) {
    for (double& v : rows[i]) v = rng.uniform(1.6, 1.9);
    t[i] = rng.uniform(800, 1600);
  }
  for (auto _ : state) benchmark::DoNotOptimize(gpr::GprModel::fit(rows, t, {0.5, 1e4, 1e-3}));
}
BENCHMARK(BM_GprFit)->Arg(16)->Arg(64)->Arg(256);

void BM_CnnForwardBackward(benchmark::State& state) {
  cnn::Network net(cnn::CnnArch::standard(200));
  Rng rng(2);
  net.initialize(rng);
  std::vector<double> x(200), grad(net.param_count());
  for (double& v : x) v = rng.uniform(0.9, 1.0);
  cnn::ForwardCache cache;
  for (auto _ : state) {
    double y = net.forward(x, cnn::Mode::Infer, nullptr, &cache);
    net.backward(cache, y - 1.0, grad);
    benchmark::DoNotOptimize(grad.data());
  }
}
BENCHMARK(BM_CnnForwardBackward);

}  // namespace

BENCHMARK_MAIN();
