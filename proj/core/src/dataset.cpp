#include "groundplan/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "groundplan/errors.hpp"
#include "groundplan/random.hpp"

namespace groundplan {

using nlohmann::json;

json triplet_to_json(const Triplet& t) {
  json steps = json::array();
  for (const auto& s : t.steps) steps.push_back(json{{"index", s.index}, {"raw", s.raw}});
  return json{{"scene_id", t.scene_id},
              {"object_list", t.object_list.names()},
              {"instruction", t.instruction},
              {"steps", std::move(steps)}};
}

Triplet triplet_from_json(const json& doc) {
  try {
    Triplet t;
    t.scene_id = doc.at("scene_id").get<std::string>();
    t.object_list = ObjectList::from_names(doc.at("object_list").get<std::vector<std::string>>());
    t.instruction = doc.at("instruction").get<std::string>();
    std::string text;
    for (const auto& s : doc.at("steps")) text += s.at("raw").get<std::string>() + "\n";
    t.steps = parse_plan_text(text);
    return t;
  } catch (const json::exception& e) {
    throw Error(ErrorCode::Parse, std::string("triplet: ") + e.what());
  }
}

RoomVocabulary room_type_vocabulary(std::span<const Scene> scenes, RoomType room_type) {
  ObjectList merged;
  bool any = false;
  for (const auto& s : scenes) {
    if (s.room_type != room_type) continue;
    merged = merged.merged(ground_truth_object_list(s));
    any = true;
  }
  if (!any)
    throw Error(ErrorCode::InvalidArgument,
                "no scenes of type " + std::string(to_string(room_type)) + " to build a vocabulary");
  return RoomVocabulary{room_type, merged.names()};
}

std::vector<RoomVocabulary> all_room_vocabularies(std::span<const Scene> scenes) {
  std::vector<RoomVocabulary> out;
  for (RoomType t : kAllRoomTypes) {
    if (std::any_of(scenes.begin(), scenes.end(), [&](const Scene& s) { return s.room_type == t; }))
      out.push_back(room_type_vocabulary(scenes, t));
  }
  return out;
}

AugmentResult augment_scene(const Scene& scene, const RoomVocabulary& vocab, double substitution_prob,
                            std::uint64_t seed) {
  if (!(substitution_prob >= 0.0 && substitution_prob <= 1.0))
    throw Error(ErrorCode::InvalidArgument, "substitution probability must be in [0, 1]");
  if (vocab.room_type != scene.room_type)
    throw Error(ErrorCode::InvalidArgument, "vocabulary room type does not match scene '" + scene.id + "'");
  AugmentResult result{scene, 0, 0};
  result.scene.id = scene.id + ".s" + hex64(seed).substr(4);
  Rng rng(seed);

  std::set<std::string> present;
  for (const auto& o : scene.objects) present.insert(o.class_name);

  for (auto& obj : result.scene.objects) {
    if (!rng.bernoulli(substitution_prob)) continue;
    std::vector<const std::string*> eligible;
    for (const auto& name : vocab.names) {
      if (name != obj.class_name && !present.count(name)) eligible.push_back(&name);
    }
    if (eligible.empty()) {
      ++result.skipped;
      continue;
    }
    obj.class_name = *eligible[rng.below(eligible.size())];
    present.insert(obj.class_name);
    ++result.substitutions;
  }
  return result;
}

std::vector<Scene> expand_scenes(std::span<const Scene> scenes, int factor, double substitution_prob,
                                 std::uint64_t seed) {
  if (factor < 1) throw Error(ErrorCode::InvalidArgument, "expansion factor must be at least 1");
  const auto vocabs = all_room_vocabularies(scenes);
  auto vocab_for = [&](RoomType t) -> const RoomVocabulary& {
    return *std::find_if(vocabs.begin(), vocabs.end(), [&](const RoomVocabulary& v) { return v.room_type == t; });
  };
  std::vector<Scene> out;
  out.reserve(scenes.size() * static_cast<std::size_t>(factor));
  for (std::size_t i = 0; i < scenes.size(); ++i) {
    Scene original = scenes[i];
    original.id += ".v0";
    out.push_back(std::move(original));
    const auto& vocab = vocab_for(scenes[i].room_type);
    for (int v = 1; v < factor; ++v) {
      const auto s = derive_seed(derive_seed(seed, i), static_cast<std::uint64_t>(v));
      out.push_back(augment_scene(scenes[i], vocab, substitution_prob, s).scene);
    }
  }
  return out;
}

std::string Rejection::describe() const {
  if (reason == RejectionReason::ParseFailure) return "parse_failure";
  return "hallucination(step " + std::to_string(step.value_or(0)) + ")";
}

FilterOutcome filter_generated_sample(const std::string& scene_id, const std::string& instruction,
                                      const std::string& raw_plan, const ObjectList& object_list,
                                      const SynonymTable& synonyms) {
  Plan plan;
  plan.instruction = instruction;
  plan.raw_text = raw_plan;
  try {
    plan.steps = parse_plan_text(raw_plan);
  } catch (const PlanParseError&) {
    return Rejection{RejectionReason::ParseFailure, std::nullopt};
  }
  for (const auto& sm : check_hallucination(plan, object_list, synonyms)) {
    if (sm.hallucinated) return Rejection{RejectionReason::Hallucination, sm.step_index};
  }
  return Triplet{scene_id, object_list, instruction, std::move(plan.steps)};
}

SceneSplit split_scenes(std::span<const Scene> scenes, double train_fraction, std::uint64_t seed) {
  if (scenes.size() < 2) throw Error(ErrorCode::InvalidArgument, "need at least 2 scenes to split");
  if (!(train_fraction > 0.0 && train_fraction < 1.0))
    throw Error(ErrorCode::InvalidArgument, "train fraction must be in (0, 1)");
  SceneSplit split;
  for (RoomType t : kAllRoomTypes) {
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < scenes.size(); ++i) {
      if (scenes[i].room_type == t) idx.push_back(i);
    }
    Rng rng(derive_seed(seed, static_cast<std::uint64_t>(t)));
    for (std::size_t i = idx.size(); i > 1; --i) std::swap(idx[i - 1], idx[rng.below(i)]);
    const auto n_eval = static_cast<std::size_t>(
        std::floor(static_cast<double>(idx.size()) * (1.0 - train_fraction) + 1e-9));
    for (std::size_t k = 0; k < idx.size(); ++k) {
      (k < n_eval ? split.eval : split.train).push_back(scenes[idx[k]]);
    }
  }
  return split;
}

}  // namespace groundplan
