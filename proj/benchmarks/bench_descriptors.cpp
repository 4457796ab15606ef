#include <benchmark/benchmark.h>

#include "openrec/descriptors.hpp"
#include "openrec/synthgen.hpp"

using namespace openrec;

namespace {

PointCloud object(int points) {
  ShapeSpec s;
  s.kind = ShapeKind::Cylinder;
  s.dimensions = {0.04, 0.12};
  s.points = points;
  s.noise_sigma = 0.002;
  s.seed = 3;
  return generate_view(s);
}

void BM_Good(benchmark::State& state) {
  const auto cloud = object(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_good(cloud, 15));
  state.SetItemsProcessed(state.iterations() * state.range(0));
}
BENCHMARK(BM_Good)->Arg(500)->Arg(2000)->Arg(8000);

void BM_SpinFeatureSet(benchmark::State& state) {
  const auto cloud = object(static_cast<int>(state.range(0)));
  for (auto _ : state) benchmark::DoNotOptimize(compute_feature_set(cloud));
}
BENCHMARK(BM_SpinFeatureSet)->Arg(500)->Arg(2000);

void BM_Normals(benchmark::State& state) {
  const auto cloud = object(2000);
  for (auto _ : state) benchmark::DoNotOptimize(estimate_normals(cloud, 10));
}
BENCHMARK(BM_Normals);

}  // namespace

BENCHMARK_MAIN();
