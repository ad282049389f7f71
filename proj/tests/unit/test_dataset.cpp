#include <doctest.h>

#include <algorithm>
#include <map>
#include <set>

#include "example_plans.hpp"
#include "fixtures.hpp"
#include "groundplan/dataset.hpp"
#include "groundplan/errors.hpp"
#include "groundplan/random.hpp"

using namespace groundplan;

namespace {

Scene room(const std::string& id, RoomType type, std::initializer_list<std::pair<const char*, Point>> objects) {
  auto s = gp_test::with_objects(gp_test::empty_room(5, 5, type), objects);
  s.id = id;
  return s;
}

std::vector<Scene> generated(std::size_t per_type, std::uint64_t seed) {
  std::vector<Scene> out;
  for (RoomType t : kAllRoomTypes) {
    const auto spec = gp_test::default_spec(t);
    for (std::size_t i = 0; i < per_type; ++i) {
      auto s = generate_synthetic_scene(spec, derive_seed(seed, out.size()));
      s.id = std::string(to_string(t)) + std::to_string(i);
      out.push_back(std::move(s));
    }
  }
  return out;
}

std::set<std::string> ids(const std::vector<Scene>& scenes) {
  std::set<std::string> out;
  for (const auto& s : scenes) out.insert(s.id);
  return out;
}

}  // namespace

TEST_CASE("room_type_vocabulary: examples") {
  const std::vector<Scene> scenes{
      room("b1", RoomType::Bathroom, {{"sink", {1, 1}}, {"towel", {2, 2}}}),
      room("b2", RoomType::Bathroom, {{"sink", {1, 1}}, {"toilet", {3, 3}}}),
      room("k1", RoomType::Kitchen, {{"fridge", {1, 1}}}),
  };
  CHECK(room_type_vocabulary(scenes, RoomType::Bathroom).names == std::vector<std::string>{"sink", "toilet", "towel"});
  CHECK(room_type_vocabulary(std::span(scenes).subspan(0, 1), RoomType::Bathroom).names ==
        std::vector<std::string>{"sink", "towel"});
  CHECK(room_type_vocabulary(scenes, RoomType::Kitchen).names == std::vector<std::string>{"fridge"});
  CHECK_THROWS_AS(room_type_vocabulary(scenes, RoomType::Bedroom), Error);
  CHECK(all_room_vocabularies(scenes).size() == 2);
}

TEST_CASE("augment_scene: examples") {
  const auto bath = room("b1", RoomType::Bathroom, {{"sink", {1, 1}}, {"towel", {2, 2}}, {"towel", {3, 1}}});
  const RoomVocabulary own{RoomType::Bathroom, {"sink", "towel"}};

  const auto none = augment_scene(bath, own, 0.0, 9);
  CHECK(none.scene.id != bath.id);
  CHECK(none.substitutions == 0);
  CHECK(none.scene.objects == bath.objects);

  const auto stuck = augment_scene(bath, own, 1.0, 9);
  CHECK(stuck.substitutions == 0);
  CHECK(stuck.skipped == bath.objects.size());

  const RoomVocabulary wide{RoomType::Bathroom, {"bathtub", "mirror", "sink", "soap", "toilet", "towel"}};
  const auto full = augment_scene(bath, wide, 1.0, 9);
  CHECK(full.substitutions + full.skipped == bath.objects.size());
  for (std::size_t i = 0; i < bath.objects.size(); ++i) {
    const auto& name = full.scene.objects[i].class_name;
    CHECK(std::find(wide.names.begin(), wide.names.end(), name) != wide.names.end());
    CHECK(name != "sink");
    CHECK(name != "towel");
    CHECK(full.scene.objects[i].position == bath.objects[i].position);
  }
  // Replacements are also distinct from each other: none was present when drawn.
  std::set<std::string> names;
  for (const auto& o : full.scene.objects) names.insert(o.class_name);
  CHECK(names.size() == bath.objects.size());

  CHECK(augment_scene(bath, wide, 0.5, 3).scene.objects == augment_scene(bath, wide, 0.5, 3).scene.objects);
  CHECK(augment_scene(bath, wide, 0.5, 3).scene.id == augment_scene(bath, wide, 0.5, 3).scene.id);
  CHECK(augment_scene(bath, wide, 0.5, 3).scene.id != augment_scene(bath, wide, 0.5, 4).scene.id);
  CHECK_THROWS_AS(augment_scene(bath, wide, 1.5, 3), Error);
  CHECK_THROWS_AS(augment_scene(bath, RoomVocabulary{RoomType::Kitchen, {"fridge"}}, 0.5, 3), Error);
}

TEST_CASE("expand_scenes: counts") {
  const auto scenes = generated(1, 7);
  const auto x3 = expand_scenes(scenes, 3, 0.5, 11);
  CHECK(x3.size() == 12);
  std::size_t unmodified = 0;
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    CHECK(x3[i * 3].objects == scenes[i].objects);
    for (std::size_t v = 0; v < 3; ++v) {
      CHECK(x3[i * 3 + v].room_type == scenes[i].room_type);
      if (x3[i * 3 + v].objects == scenes[i].objects) ++unmodified;
    }
  }
  CHECK(unmodified >= 4);
  CHECK(ids(x3).size() == 12);

  const auto x1 = expand_scenes(scenes, 1, 0.5, 11);
  REQUIRE(x1.size() == scenes.size());
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    CHECK(x1[i].objects == scenes[i].objects);
    CHECK(x1[i].id != scenes[i].id);
  }
  CHECK_THROWS_AS(expand_scenes(scenes, 0, 0.5, 11), Error);
  CHECK(expand_scenes(scenes, 5, 0.5, 11).size() == 20);
}

TEST_CASE("property: expansion keeps counts, histograms and plausibility") {
  Rng rng(12);
  for (int trial = 0; trial < 6; ++trial) {
    const auto scenes = generated(1 + rng.below(3), rng.next_u64());
    const int factor = 1 + static_cast<int>(rng.below(6));
    const auto out = expand_scenes(scenes, factor, rng.uniform(), rng.next_u64());
    CHECK(out.size() == scenes.size() * static_cast<std::size_t>(factor));
    std::map<RoomType, std::size_t> before, after;
    for (const auto& s : scenes) ++before[s.room_type];
    for (const auto& s : out) ++after[s.room_type];
    for (const auto& [t, n] : before) CHECK(after[t] == n * static_cast<std::size_t>(factor));
    for (const auto& s : out) {
      const auto vocab = room_type_vocabulary(scenes, s.room_type);
      for (const auto& o : s.objects)
        CHECK(std::binary_search(vocab.names.begin(), vocab.names.end(), o.class_name));
    }
    CHECK(ids(out).size() == out.size());
  }
}

TEST_CASE("filter_generated_sample: examples") {
  const auto syn = SynonymTable::load(gp_test::data_dir() / "synonyms.txt");
  const auto objs = gp_test::kitchen_objects();

  const auto ok = filter_generated_sample("k1", "Make a sandwich", gp_test::kSandwichPlan, objs, syn);
  REQUIRE(std::holds_alternative<Triplet>(ok));
  const auto& t = std::get<Triplet>(ok);
  CHECK(t.steps.size() == 11);
  CHECK(t.object_list == objs);

  const auto micro = filter_generated_sample("k1", "Heat it", "Step 1. Grasp the plate\nStep 2. Open the microwave",
                                             objs, syn);
  REQUIRE(std::holds_alternative<Rejection>(micro));
  CHECK(std::get<Rejection>(micro).reason == RejectionReason::Hallucination);
  CHECK(std::get<Rejection>(micro).step == 2);
  CHECK(std::get<Rejection>(micro).describe() == "hallucination(step 2)");

  const auto prose = filter_generated_sample("k1", "Chat", "Happy to help with that!", objs, syn);
  REQUIRE(std::holds_alternative<Rejection>(prose));
  CHECK(std::get<Rejection>(prose).describe() == "parse_failure");
}

TEST_CASE("property: accepted triplets revalidate and round-trip") {
  const auto syn = SynonymTable::load(gp_test::data_dir() / "synonyms.txt");
  const std::vector<std::string> pool{"plate", "knife", "bread", "microwave", "cup", "sink", "fridge"};
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    std::string text;
    const auto n = 1 + rng.below(5);
    for (std::uint64_t i = 0; i < n; ++i)
      text += "Step " + std::to_string(i + 1) + ". Grasp the " + pool[rng.below(pool.size())] + "\n";
    std::vector<std::string> names;
    for (const auto& p : pool)
      if (rng.bernoulli(0.6)) names.push_back(p);
    const auto objs = ObjectList::from_names(names);
    const auto outcome = filter_generated_sample("s", "task", text, objs, syn);
    if (!std::holds_alternative<Triplet>(outcome)) continue;
    const auto& t = std::get<Triplet>(outcome);
    const auto again = filter_generated_sample("s", "task", render_steps(t.steps), t.object_list, syn);
    CHECK(std::holds_alternative<Triplet>(again));
    const auto round = triplet_from_json(triplet_to_json(t));
    CHECK(round.scene_id == t.scene_id);
    CHECK(round.object_list == t.object_list);
    REQUIRE(round.steps.size() == t.steps.size());
    for (std::size_t i = 0; i < t.steps.size(); ++i) CHECK(round.steps[i].object_phrases == t.steps[i].object_phrases);
  }
  CHECK_THROWS_AS(triplet_from_json(nlohmann::json{{"scene_id", "x"}}), Error);
}

TEST_CASE("split_scenes: examples") {
  const auto hundred = generated(25, 1);
  const auto split = split_scenes(hundred, 0.8, 3);
  CHECK(split.train.size() == 80);
  CHECK(split.eval.size() == 20);
  std::map<RoomType, std::size_t> train_by_type, eval_by_type;
  for (const auto& s : split.train) ++train_by_type[s.room_type];
  for (const auto& s : split.eval) ++eval_by_type[s.room_type];
  for (RoomType t : kAllRoomTypes) {
    CHECK(train_by_type[t] == 20);
    CHECK(eval_by_type[t] == 5);
  }

  const std::vector<Scene> two{room("a", RoomType::Bedroom, {}), room("b", RoomType::Bedroom, {})};
  const auto halves = split_scenes(two, 0.5, 1);
  CHECK(halves.train.size() == 1);
  CHECK(halves.eval.size() == 1);

  CHECK(ids(split_scenes(hundred, 0.8, 3).eval) == ids(split.eval));
  CHECK(ids(split_scenes(hundred, 0.8, 4).eval) != ids(split.eval));

  CHECK_THROWS_AS(split_scenes(std::span(two).subspan(0, 1), 0.5, 1), Error);
  CHECK_THROWS_AS(split_scenes(two, 1.0, 1), Error);
  CHECK_THROWS_AS(split_scenes(two, 0.0, 1), Error);
}

TEST_CASE("property: split is a partition") {
  Rng rng(77);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<Scene> scenes;
    const auto n = 2 + rng.below(30);
    for (std::uint64_t i = 0; i < n; ++i)
      scenes.push_back(room("s" + std::to_string(i), kAllRoomTypes[rng.below(4)], {}));
    const auto split = split_scenes(scenes, rng.uniform(0.05, 0.95), rng.next_u64());
    CHECK(split.train.size() + split.eval.size() == scenes.size());
    auto all = ids(split.train);
    const auto ev = ids(split.eval);
    for (const auto& e : ev) CHECK_FALSE(all.count(e));
    all.insert(ev.begin(), ev.end());
    CHECK(all == ids(scenes));
  }
}
