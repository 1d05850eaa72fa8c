// Micro benchmarks for the hot loops: DSM loss/gradient, closed-form mixture
// scores, epsilon-neighbour counts and one sampler run.

#include <benchmark/benchmark.h>

#include "collapse/mog.hpp"
#include "collapse/samplers.hpp"
#include "collapse/score_model.hpp"
#include "collapse/score_source.hpp"
#include "collapse/tid.hpp"

using namespace collapse;

namespace {

ScoreModel make_model(int width, Precision p) {
  ModelArch arch;
  arch.hidden = {width, width};
  arch.precision = p;
  return ScoreModel::create(arch, 10, NoiseSchedule::vp(), Seed{1});
}

void BM_LossAndGrad(benchmark::State& state) {
  const auto model = make_model(static_cast<int>(state.range(0)), Precision::Float32);
  Rng rng(Seed{2});
  const Matrix x0 = rng.normal_matrix(2000, 10);
  const Matrix eps = rng.normal_matrix(2000, 10);
  Vector t(2000);
  for (Eigen::Index i = 0; i < t.size(); ++i) t[i] = rng.uniform(1e-3, 1.0);
  for (auto _ : state) benchmark::DoNotOptimize(loss_and_grad(model, x0, t, eps).loss);
  state.SetItemsProcessed(state.iterations() * 2000);
}
BENCHMARK(BM_LossAndGrad)->Arg(10)->Arg(100)->Arg(500)->Unit(benchmark::kMillisecond);

void BM_MogScore(benchmark::State& state) {
  const auto spec = MogSpec::symmetric_pair(10, 0.2);
  const auto vp = NoiseSchedule::vp();
  const Matrix x = Rng(Seed{3}).normal_matrix(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(mog_score(spec, vp, x, 0.5).data());
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_MogScore)->Arg(1000)->Arg(10000);

void BM_NeighborCounts(benchmark::State& state) {
  const Matrix x = Rng(Seed{4}).normal_matrix(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(neighbor_counts(x, 0.02, 0).data());
  state.SetComplexityN(state.range(0));
}
BENCHMARK(BM_NeighborCounts)->Arg(2000)->Arg(20000)->Complexity();

void BM_NeighborCountsFull(benchmark::State& state) {
  const Matrix x = Rng(Seed{5}).normal_matrix(state.range(0), 10);
  for (auto _ : state) benchmark::DoNotOptimize(neighbor_counts(x, 1.0).data());
}
BENCHMARK(BM_NeighborCountsFull)->Arg(2000)->Unit(benchmark::kMillisecond);

void BM_OdeSampler(benchmark::State& state) {
  const auto src = ScoreSource::model(make_model(500, Precision::Float32));
  const auto cfg = SamplerConfig::defaults(SamplerKind::ODE);
  for (auto _ : state) benchmark::DoNotOptimize(run_sampler(src, cfg, 2000, Seed{6}).samples.points.data());
}
BENCHMARK(BM_OdeSampler)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
