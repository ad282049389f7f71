#include <benchmark/benchmark.h>

#include "groundplan/exploration.hpp"
#include "groundplan/random.hpp"
#include "groundplan/scene.hpp"

using namespace groundplan;

namespace {

Scene bench_scene(RoomType type, std::uint64_t seed) {
  SceneGenSpec spec;
  spec.room_type = type;
  spec.catalog = load_catalog(std::filesystem::path(GROUNDPLAN_BENCH_DATA_DIR) / "catalog.json");
  return generate_synthetic_scene(spec, seed);
}

void BM_KMeans(benchmark::State& state) {
  Rng rng(1);
  std::vector<Point> pts;
  for (int i = 0; i < state.range(0); ++i) pts.push_back({rng.uniform(0, 8), rng.uniform(0, 8)});
  const int k = static_cast<int>(state.range(1));
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(kmeans_wcss(pts, k, ++seed).wcss);
}
BENCHMARK(BM_KMeans)->Args({64, 4})->Args({400, 4})->Args({1000, 8});

void BM_PlanPoses(benchmark::State& state) {
  const auto scene = bench_scene(RoomType::LivingRoom, 3);
  CollectionStrategy strategy;
  switch (state.range(0)) {
    case 0: strategy = CollectionStrategy::from_degrees(Traversal{0.25}, 60); break;
    case 1: strategy = CollectionStrategy::from_degrees(OverallCenter{0.75}, 60); break;
    default: strategy = CollectionStrategy::from_degrees(BlockwiseCenter{}, 120); break;
  }
  state.SetLabel(strategy.criterion_name());
  std::uint64_t seed = 0;
  for (auto _ : state) benchmark::DoNotOptimize(plan_poses(scene, strategy, ++seed).size());
}
BENCHMARK(BM_PlanPoses)->DenseRange(0, 2);

}  // namespace
