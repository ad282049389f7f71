#include <doctest.h>

#include <algorithm>

#include "example_plans.hpp"
#include "fixtures.hpp"
#include "groundplan/errors.hpp"
#include "groundplan/random.hpp"
#include "groundplan/validator.hpp"

using namespace groundplan;
using gp_test::make_plan;

namespace {

SynonymTable shipped_synonyms() { return SynonymTable::load(gp_test::data_dir() / "synonyms.txt"); }

std::size_t hallucinated_steps(const Plan& plan, const ObjectList& objects, const SynonymTable& syn) {
  const auto res = check_hallucination(plan, objects, syn);
  return static_cast<std::size_t>(std::count_if(res.begin(), res.end(), [](const auto& s) { return s.hallucinated; }));
}

std::vector<int> flagged(const std::vector<StepSimulation>& sim) {
  std::vector<int> out;
  for (const auto& s : sim)
    if (s.violated_rule) out.push_back(s.step_index);
  return out;
}

}  // namespace

TEST_CASE("synonym table") {
  auto t = SynonymTable::parse("# comment\nmug = cup\n\nTV = Television_Set  # trailing\n");
  CHECK(t.are_synonyms("mug", "cup"));
  CHECK(t.are_synonyms("cup", "mug"));
  CHECK(t.are_synonyms("tv", "television set"));
  CHECK_FALSE(t.are_synonyms("mug", "tv"));
  CHECK_FALSE(t.are_synonyms("mug", "mug"));
  CHECK(t.pair_count() == 2);
  t.add("cup", "beaker");
  CHECK(t.synonyms_of("mug") == std::vector<std::string>{"beaker", "cup"});
  CHECK(t.synonyms_of("unknown").empty());
  CHECK_THROWS_AS(SynonymTable::parse("mug cup"), Error);
  CHECK_THROWS_AS(t.add("", "x"), Error);
  CHECK_THROWS_AS(SynonymTable::load("/nonexistent/syn.txt"), Error);

  const auto shipped = shipped_synonyms();
  CHECK(shipped.are_synonyms("mug", "cup"));
  CHECK(shipped.are_synonyms("television", "television set"));
  CHECK(shipped.are_synonyms("garbage can", "bin"));
}

TEST_CASE("synonym closure does not depend on insertion order") {
  const std::vector<std::pair<std::string, std::string>> pairs{{"a", "b"}, {"c", "d"}, {"b", "c"}, {"e", "f"}, {"f", "a"}};
  Rng rng(4);
  SynonymTable reference;
  for (const auto& [x, y] : pairs) reference.add(x, y);
  for (int trial = 0; trial < 20; ++trial) {
    auto shuffled = pairs;
    for (std::size_t i = shuffled.size(); i > 1; --i) std::swap(shuffled[i - 1], shuffled[rng.below(i)]);
    SynonymTable t;
    for (const auto& [x, y] : shuffled) rng.bernoulli(0.5) ? t.add(x, y) : t.add(y, x);
    for (const auto* n : {"a", "b", "c", "d", "e", "f"}) CHECK(t.synonyms_of(n) == reference.synonyms_of(n));
  }
}

TEST_CASE("match_object: examples") {
  const auto syn = shipped_synonyms();
  CHECK(match_object("trash can lid", ObjectList::from_names({"trash can"}), syn) ==
        MatchResult{MatchKind::PartOf, "trash can"});
  CHECK(match_object("mug", ObjectList::from_names({"cup"}), syn) == MatchResult{MatchKind::Synonym, "cup"});
  CHECK(match_object("apple", ObjectList::from_names({"sink", "towel"}), syn) == MatchResult{});
  CHECK(match_object("sink", ObjectList::from_names({"sink", "kitchen sink"}), syn).kind == MatchKind::Exact);
  // Word boundaries: "pan" is not part of "panel".
  CHECK(match_object("pan", ObjectList::from_names({"panel"}), SynonymTable{}).kind == MatchKind::None);
  CHECK(match_object("bowl", ObjectList::from_names({"toilet bowl"}), SynonymTable{}) ==
        MatchResult{MatchKind::PartOf, "toilet bowl"});
  CHECK(match_object("", ObjectList::from_names({"sink"}), syn).kind == MatchKind::None);
}

TEST_CASE("match_object: precedence and tie-breaks") {
  SynonymTable syn;
  syn.add("couch", "sofa");
  syn.add("couch", "settee");
  // Synonym beats PartOf.
  CHECK(match_object("couch", ObjectList::from_names({"couch cushion", "sofa"}), syn) ==
        MatchResult{MatchKind::Synonym, "sofa"});
  // Two synonyms present: smallest name wins.
  CHECK(match_object("couch", ObjectList::from_names({"sofa", "settee"}), syn) ==
        MatchResult{MatchKind::Synonym, "settee"});
  // Two part-of candidates: smallest name wins.
  CHECK(match_object("table lamp", ObjectList::from_names({"table", "lamp"}), SynonymTable{}) ==
        MatchResult{MatchKind::PartOf, "lamp"});
}

TEST_CASE("property: matched_scene_name present iff kind is not None") {
  const auto syn = shipped_synonyms();
  const auto objects = ObjectList::from_names({"cup", "trash can", "toilet bowl", "tv", "table"});
  for (const auto* p : {"mug", "cup", "trash can lid", "bowl", "television", "apple", "", "dining table", "lid"}) {
    const auto m = match_object(p, objects, syn);
    CHECK((m.kind == MatchKind::None) == !m.matched_scene_name.has_value());
    if (m.matched_scene_name) CHECK(objects.contains(*m.matched_scene_name));
  }
}

TEST_CASE("check_hallucination: examples") {
  const auto syn = shipped_synonyms();
  CHECK(hallucinated_steps(make_plan(gp_test::kSandwichPlan), gp_test::kitchen_objects(), syn) == 0);
  CHECK(hallucinated_steps(make_plan(gp_test::kBathroomPlan), gp_test::bathroom_objects(), syn) == 0);
  const auto remote = check_hallucination(make_plan("Step 1. Grasp the remote control"),
                                          ObjectList::from_names({"sofa", "lamp"}), syn);
  CHECK(remote[0].hallucinated);
  const auto bare = check_hallucination(make_plan("Step 1. Wait"), ObjectList{}, syn);
  CHECK(bare[0].matches.empty());
  CHECK_FALSE(bare[0].hallucinated);
}

TEST_CASE("simulate_plan: examples") {
  const auto syn = shipped_synonyms();
  const auto door = ObjectList::from_names({"door", "doorknob"});
  const auto doorknob = make_plan("Step 1. Grasp the doorknob\nStep 2. Move to the door");
  const auto strict = simulate_plan(doorknob, door, syn, RuleSet::strict());
  CHECK(flagged(strict) == std::vector<int>{1});
  CHECK(*strict[0].violated_rule == "require_move_before_interact");
  CHECK(flagged(simulate_plan(doorknob, door, syn, RuleSet::lenient())).empty());

  const auto sponge = make_plan("Step 1. Grasp the sponge\nStep 2. Move to the sink\nStep 3. Wet the sponge\nStep 4. Scrub the sink");
  const auto objs = gp_test::bathroom_objects();
  const auto lenient = simulate_plan(sponge, objs, syn, RuleSet::lenient());
  CHECK(flagged(lenient).empty());
  CHECK(lenient.back().state_after.agent_location == std::optional<std::string>("sink"));
  CHECK(lenient.back().state_after.holding == std::set<std::string>{"sponge"});

  const auto place = simulate_plan(make_plan("Step 1. Place the plate on the table"),
                                   ObjectList::from_names({"plate", "table"}), syn, RuleSet::lenient());
  CHECK(flagged(place) == std::vector<int>{1});
  CHECK(*place[0].violated_rule == "forbid_place_without_grasp");
}

TEST_CASE("simulate_plan: individual rules") {
  const SynonymTable syn;
  const auto objs = ObjectList::from_names({"knife", "bread", "cup", "plate", "table"});

  SUBCASE("double grasp, and the 'another' exemption") {
    const auto twice = make_plan("Step 1. Grasp the cup\nStep 2. Grasp the cup");
    CHECK(flagged(simulate_plan(twice, objs, syn, RuleSet::lenient())) == std::vector<int>{2});
    const auto another = make_plan("Step 1. Grasp the bread\nStep 2. Grasp another piece of bread");
    CHECK(flagged(simulate_plan(another, objs, syn, RuleSet::lenient())).empty());
    auto off = RuleSet::lenient();
    off.forbid_double_grasp = false;
    CHECK(flagged(simulate_plan(twice, objs, syn, off)).empty());
  }
  SUBCASE("slicing needs a knife in hand") {
    const auto bare = make_plan("Step 1. Slice the bread");
    CHECK(flagged(simulate_plan(bare, objs, syn, RuleSet::lenient())) == std::vector<int>{1});
    const auto tooled = make_plan("Step 1. Grasp the knife\nStep 2. Slice the bread");
    CHECK(flagged(simulate_plan(tooled, objs, syn, RuleSet::lenient())).empty());
    auto off = RuleSet::lenient();
    off.require_tool_for_slice = false;
    CHECK(flagged(simulate_plan(bare, objs, syn, off)).empty());
  }
  SUBCASE("hand capacity is off by default") {
    const auto three = make_plan("Step 1. Grasp the cup\nStep 2. Grasp the plate\nStep 3. Grasp the knife");
    CHECK(flagged(simulate_plan(three, objs, syn, RuleSet::lenient())).empty());
    auto cap = RuleSet::lenient();
    cap.hand_capacity = 2;
    CHECK(flagged(simulate_plan(three, objs, syn, cap)) == std::vector<int>{3});
  }
  SUBCASE("move-first only applies in strict mode") {
    const auto plan = make_plan("Step 1. Open the cup");
    auto lenient = RuleSet::lenient();
    lenient.require_move_before_interact = true;
    CHECK(flagged(simulate_plan(plan, objs, syn, lenient)).empty());
    CHECK(flagged(simulate_plan(plan, objs, syn, RuleSet::strict())) == std::vector<int>{1});
    // Holding the object satisfies the precondition too.
    const auto held = make_plan("Step 1. Move to the cup\nStep 2. Grasp the cup\nStep 3. Move to the table\nStep 4. Wipe the cup");
    CHECK(flagged(simulate_plan(held, objs, syn, RuleSet::strict())).empty());
  }
  SUBCASE("placing releases the object") {
    const auto plan = make_plan("Step 1. Grasp the cup\nStep 2. Place the cup on the table\nStep 3. Place the cup on the table");
    const auto sim = simulate_plan(plan, objs, syn, RuleSet::lenient());
    CHECK(sim[1].state_after.holding.empty());
    CHECK(flagged(sim) == std::vector<int>{3});
  }
}

TEST_CASE("rule mode parsing") {
  CHECK(parse_rule_mode("strict") == RuleMode::Strict);
  CHECK(parse_rule_mode("lenient") == RuleMode::Lenient);
  CHECK_THROWS_AS(parse_rule_mode("loose"), Error);
  CHECK(to_string(RuleMode::Strict) == "strict");
  const auto l = RuleSet::lenient();
  CHECK_FALSE(l.require_move_before_interact);
  CHECK(l.forbid_place_without_grasp);
  CHECK(l.forbid_double_grasp);
  CHECK(l.require_tool_for_slice);
  CHECK_FALSE(l.hand_capacity.has_value());
}

TEST_CASE("validate: examples") {
  const auto syn = shipped_synonyms();
  const auto objs = ObjectList::from_names({"sink", "sponge", "towel"});
  CHECK(validate(make_plan("Step 1. Grasp the sponge\nStep 2. Move to the sink"), objs, syn, RuleSet::lenient()).verdict ==
        Verdict::Success);

  const auto h = validate(make_plan("Step 1. Grasp the sponge\nStep 2. Move to the sink\nStep 3. Grasp the microwave"),
                          objs, syn, RuleSet::lenient());
  CHECK(h.verdict == Verdict::Hallucination);
  CHECK(h.first_failure_step == 3);

  const auto c = validate(make_plan("Step 1. Grasp the doorknob\nStep 2. Move to the door"),
                          ObjectList::from_names({"door", "doorknob"}), syn, RuleSet::strict());
  CHECK(c.verdict == Verdict::Counterfactual);
  CHECK(c.first_failure_step == 1);

  // Hallucination wins on the same step.
  const auto both = validate(make_plan("Step 1. Place the unicorn on the sink"), objs, syn, RuleSet::lenient());
  CHECK(both.verdict == Verdict::Hallucination);
  CHECK(both.steps[0].violated_rule.has_value());

  // Earliest flagged step decides.
  const auto early = validate(make_plan("Step 1. Place the towel\nStep 2. Grasp the unicorn"), objs, syn, RuleSet::lenient());
  CHECK(early.verdict == Verdict::Counterfactual);
  CHECK(early.first_failure_step == 1);
}

TEST_CASE("example plans validate as success under lenient rules") {
  const auto syn = shipped_synonyms();
  const auto bath = validate(make_plan(gp_test::kBathroomPlan), gp_test::bathroom_objects(), syn, RuleSet::lenient());
  CHECK(bath.verdict == Verdict::Success);
  const auto kit = validate(make_plan(gp_test::kSandwichPlan), gp_test::kitchen_objects(), syn, RuleSet::lenient());
  CHECK(kit.verdict == Verdict::Success);
  // The bathroom plan grasps before moving.
  CHECK(validate(make_plan(gp_test::kBathroomPlan), gp_test::bathroom_objects(), syn, RuleSet::strict()).verdict ==
        Verdict::Counterfactual);
}

TEST_CASE("report json") {
  const auto report = validate(make_plan("Step 1. Grasp the doorknob\nStep 2. Move to the door"),
                               ObjectList::from_names({"door", "doorknob"}), SynonymTable{}, RuleSet::strict());
  const auto j = report_to_json(report, "p1");
  CHECK(j.at("plan_id") == "p1");
  CHECK(j.at("verdict") == "counterfactual");
  CHECK(j.at("first_failure_step") == 1);
  REQUIRE(j.at("steps").size() == 2);
  CHECK(j.at("steps")[0].at("counterfactual") == true);
  CHECK(j.at("steps")[0].at("violated_rule") == "require_move_before_interact");
  CHECK(j.at("steps")[0].at("matches")[0].at("kind") == "exact");
  CHECK(j.at("steps")[1].at("violated_rule").is_null());
  const auto ok = report_to_json(ValidationReport{}, "p2");
  CHECK(ok.at("first_failure_step").is_null());
  CHECK(ok.at("verdict") == "success");
}

namespace {

struct RandomPlanCase {
  Plan plan;
  ObjectList small;
  ObjectList large;
};

RandomPlanCase random_case(Rng& rng) {
  const std::vector<std::string> pool{"cup", "mug", "knife", "bread", "plate", "sink", "sponge", "trash can",
                                      "tv", "sofa", "couch", "lamp", "toilet", "towel", "remote"};
  const std::vector<std::string> verbs{"Grasp the", "Move to the", "Place the", "Slice the", "Open the",
                                       "Wipe the", "Turn on the", "Grasp another"};
  std::string text;
  const auto n = 1 + rng.below(8);
  for (std::uint64_t i = 0; i < n; ++i) {
    text += "Step " + std::to_string(i + 1) + ". " + verbs[rng.below(verbs.size())] + " " +
            pool[rng.below(pool.size())];
    if (rng.bernoulli(0.3)) text += " on the " + pool[rng.below(pool.size())];
    text += "\n";
  }
  std::vector<std::string> small, large;
  for (const auto& p : pool) {
    const bool in_small = rng.bernoulli(0.4);
    if (in_small) small.push_back(p);
    if (in_small || rng.bernoulli(0.4)) large.push_back(p);
  }
  return {make_plan(text), ObjectList::from_names(small), ObjectList::from_names(large)};
}

}  // namespace

TEST_CASE("property: enlarging the object list never loses a match") {
  Rng rng(17);
  const auto syn = shipped_synonyms();
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = random_case(rng);
    const auto a = check_hallucination(c.plan, c.small, syn);
    const auto b = check_hallucination(c.plan, c.large, syn);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t k = 0; k < a[i].matches.size(); ++k)
        if (a[i].matches[k].second.kind != MatchKind::None) CHECK(b[i].matches[k].second.kind != MatchKind::None);
  }
}

TEST_CASE("property: adding synonym pairs never adds hallucinations") {
  Rng rng(18);
  SynonymTable none;
  const auto syn = shipped_synonyms();
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = random_case(rng);
    CHECK(hallucinated_steps(c.plan, c.small, syn) <= hallucinated_steps(c.plan, c.small, none));
  }
}

TEST_CASE("property: lenient flags are a subset of strict flags, and runs are deterministic") {
  Rng rng(19);
  const auto syn = shipped_synonyms();
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = random_case(rng);
    const auto lenient = flagged(simulate_plan(c.plan, c.large, syn, RuleSet::lenient()));
    const auto strict = flagged(simulate_plan(c.plan, c.large, syn, RuleSet::strict()));
    for (int s : lenient) CHECK(std::find(strict.begin(), strict.end(), s) != strict.end());
    CHECK(flagged(simulate_plan(c.plan, c.large, syn, RuleSet::strict())) == strict);
  }
}

TEST_CASE("property: unmatched names only enter the state on hallucinated steps") {
  Rng rng(20);
  const auto syn = shipped_synonyms();
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = random_case(rng);
    const auto sim = simulate_plan(c.plan, c.small, syn, RuleSet::lenient());
    const auto hall = check_hallucination(c.plan, c.small, syn);
    bool any_hallucinated = false;
    for (std::size_t i = 0; i < sim.size(); ++i) {
      any_hallucinated = any_hallucinated || hall[i].hallucinated;
      if (any_hallucinated) continue;
      const auto& st = sim[i].state_after;
      for (const auto& h : st.holding) CHECK(c.small.contains(h));
      if (st.agent_location) CHECK(c.small.contains(*st.agent_location));
    }
  }
}

TEST_CASE("property: verdict matches the earliest flagged step") {
  Rng rng(21);
  const auto syn = shipped_synonyms();
  for (int trial = 0; trial < 300; ++trial) {
    const auto c = random_case(rng);
    const auto r = validate(c.plan, c.small, syn, rng.bernoulli(0.5) ? RuleSet::strict() : RuleSet::lenient());
    const auto first = std::find_if(r.steps.begin(), r.steps.end(),
                                    [](const StepReport& s) { return s.hallucinated || s.violated_rule; });
    if (first == r.steps.end()) {
      CHECK(r.verdict == Verdict::Success);
      CHECK_FALSE(r.first_failure_step.has_value());
    } else {
      CHECK(r.first_failure_step == first->step_index);
      CHECK(r.verdict == (first->hallucinated ? Verdict::Hallucination : Verdict::Counterfactual));
    }
  }
}
