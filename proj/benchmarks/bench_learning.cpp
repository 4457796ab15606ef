#include <benchmark/benchmark.h>

#include <random>

#include "openrec/learning.hpp"
#include "openrec/representations.hpp"

using namespace openrec;

namespace {

FeatureMatrix random_set(std::mt19937_64& rng, int count, int dim) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  FeatureMatrix m(dim, count);
  for (int c = 0; c < count; ++c)
    for (int r = 0; r < dim; ++r) m(r, c) = u(rng);
  return m;
}

void BM_SetDistance(benchmark::State& state) {
  std::mt19937_64 rng(1);
  const int count = static_cast<int>(state.range(0));
  const auto u = random_set(rng, count, 45);
  const auto v = random_set(rng, count, 45);
  for (auto _ : state) benchmark::DoNotOptimize(set_distance(u, v));
}
BENCHMARK(BM_SetDistance)->Arg(20)->Arg(80)->Arg(200);

void BM_LdaUpdate(benchmark::State& state) {
  std::mt19937_64 rng(2);
  std::uniform_int_distribution<int> word(0, 89);
  std::vector<int> doc(static_cast<std::size_t>(state.range(0)));
  for (auto& w : doc) w = word(rng);
  for (auto _ : state) {
    state.PauseTiming();
    auto model = TopicModel::create(90, 30, 1.0, 0.1, 5);
    state.ResumeTiming();
    benchmark::DoNotOptimize(lda_update(model, doc, 30));
  }
}
BENCHMARK(BM_LdaUpdate)->Arg(50)->Arg(200);

void BM_BayesClassify(benchmark::State& state) {
  std::mt19937_64 rng(3);
  std::uniform_int_distribution<int> count(0, 9);
  BayesMemory memory;
  for (int c = 0; c < 20; ++c)
    for (int i = 0; i < 10; ++i) {
      Eigen::VectorXd x(90);
      for (int k = 0; k < 90; ++k) x(k) = count(rng);
      bayes_teach(memory, "c" + std::to_string(c), x);
    }
  Eigen::VectorXd probe(90);
  for (int k = 0; k < 90; ++k) probe(k) = count(rng);
  for (auto _ : state) benchmark::DoNotOptimize(bayes_classify(memory, probe));
}
BENCHMARK(BM_BayesClassify);

}  // namespace

BENCHMARK_MAIN();
