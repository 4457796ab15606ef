#include <benchmark/benchmark.h>

#include "openrec/nbv.hpp"
#include "openrec/segmentation.hpp"
#include "openrec/synthgen.hpp"

using namespace openrec;

namespace {

Scene desk() {
  TableSpec table;
  std::vector<ShapeSpec> objects;
  for (int i = 0; i < 3; ++i) {
    ShapeSpec s;
    s.dimensions = {0.08, 0.06, 0.1};
    s.points = 500;
    s.seed = static_cast<std::uint64_t>(i);
    s.pose = on_table_pose(s, table, -0.3 + 0.3 * i, 0.0, 0.4 * i);
    objects.push_back(s);
  }
  return generate_scene(objects, table, 1);
}

void BM_Detect(benchmark::State& state) {
  const Scene scene = desk();
  for (auto _ : state) benchmark::DoNotOptimize(detect(scene.cloud, DetectionParams{}));
}
BENCHMARK(BM_Detect);

void BM_RenderVirtual(benchmark::State& state) {
  const Scene scene = desk();
  const auto pose = CameraPose::look_at({0.0, -1.0, 1.4}, {0.0, 0.0, 0.75});
  RenderParams params;
  params.resolution = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(render_virtual_indices(scene.cloud, pose, params));
}
BENCHMARK(BM_RenderVirtual)->Arg(64)->Arg(128)->Arg(256);

}  // namespace

BENCHMARK_MAIN();
