#include <benchmark/benchmark.h>

#include "groundplan/dataset.hpp"
#include "groundplan/plan.hpp"
#include "groundplan/validator.hpp"

using namespace groundplan;

namespace {

const std::filesystem::path kData = GROUNDPLAN_BENCH_DATA_DIR;

void BM_ExpandScenes(benchmark::State& state) {
  SceneGenSpec spec;
  spec.catalog = load_catalog(kData / "catalog.json");
  std::vector<Scene> scenes;
  for (std::uint64_t i = 0; i < 8; ++i) {
    spec.room_type = kAllRoomTypes[i % 4];
    auto s = generate_synthetic_scene(spec, i);
    s.id = "b" + std::to_string(i);
    scenes.push_back(std::move(s));
  }
  const int factor = static_cast<int>(state.range(0));
  for (auto _ : state) benchmark::DoNotOptimize(expand_scenes(scenes, factor, 0.5, 7).size());
  state.SetItemsProcessed(state.iterations() * factor * 8);
}
BENCHMARK(BM_ExpandScenes)->Arg(10)->Arg(80);

void BM_Validate(benchmark::State& state) {
  const auto syn = SynonymTable::load(kData / "synonyms.txt");
  Plan plan;
  plan.steps = parse_plan_text(
      "Step 1. Move to the counter\nStep 2. Grasp the knife\nStep 3. Slice the bread\n"
      "Step 4. Place the knife on the counter\nStep 5. Grasp the bread\nStep 6. Place the bread on the plate\n"
      "Step 7. Move to the fridge\nStep 8. Open the fridge\nStep 9. Grasp the tomato\nStep 10. Place it on the plate");
  const auto objects = ObjectList::from_names({"counter", "knife", "bread", "plate", "fridge", "tomato", "cup"});
  const auto rules = state.range(0) ? RuleSet::strict() : RuleSet::lenient();
  for (auto _ : state) benchmark::DoNotOptimize(validate(plan, objects, syn, rules).verdict);
}
BENCHMARK(BM_Validate)->Arg(0)->Arg(1);

void BM_ParsePlan(benchmark::State& state) {
  std::string text;
  for (int i = 1; i <= 20; ++i) text += "Step " + std::to_string(i) + ". Pick up the red cup and put it in the sink\n";
  for (auto _ : state) benchmark::DoNotOptimize(parse_plan_text(text).size());
}
BENCHMARK(BM_ParsePlan);

}  // namespace
BENCHMARK_MAIN();
