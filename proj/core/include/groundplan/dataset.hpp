#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundplan/plan.hpp"
#include "groundplan/scene.hpp"
#include "groundplan/validator.hpp"

namespace groundplan {

/// One dataset sample: scene reference, instruction and plan steps.
struct Triplet {
  std::string scene_id;
  ObjectList object_list;
  std::string instruction;
  std::vector<ActionStep> steps;
};

nlohmann::json triplet_to_json(const Triplet& triplet);
Triplet triplet_from_json(const nlohmann::json& doc);

struct RoomVocabulary {
  RoomType room_type = RoomType::Kitchen;
  std::vector<std::string> names;
};

/// Union of the ground-truth lists of every scene of the given type.
RoomVocabulary room_type_vocabulary(std::span<const Scene> scenes, RoomType room_type);

struct AugmentResult {
  Scene scene;
  std::size_t substitutions = 0;
  /// Substitutions drawn but skipped because no eligible class remained.
  std::size_t skipped = 0;
};

/// Each object is re-labelled with probability substitution_prob by a class
/// from vocab that is neither its current class nor already in the scene.
AugmentResult augment_scene(const Scene& scene, const RoomVocabulary& vocab, double substitution_prob,
                            std::uint64_t seed);

/// Each source scene followed by factor-1 augmented variants.
std::vector<Scene> expand_scenes(std::span<const Scene> scenes, int factor, double substitution_prob,
                                 std::uint64_t seed);

/// Vocabularies for every room type present in scenes.
std::vector<RoomVocabulary> all_room_vocabularies(std::span<const Scene> scenes);

enum class RejectionReason { ParseFailure, Hallucination };

struct Rejection {
  RejectionReason reason = RejectionReason::ParseFailure;
  /// First hallucinated step for Hallucination rejections.
  std::optional<int> step;

  std::string describe() const;
};

using FilterOutcome = std::variant<Triplet, Rejection>;

/// Accepts a generated (instruction, plan text) pair only when the text parses
/// and no step mentions an object missing from object_list.
FilterOutcome filter_generated_sample(const std::string& scene_id, const std::string& instruction,
                                      const std::string& raw_plan, const ObjectList& object_list,
                                      const SynonymTable& synonyms);

struct SceneSplit {
  std::vector<Scene> train;
  std::vector<Scene> eval;
};

/// Seeded shuffle stratified by room type; per type floor(n*(1-f)) scenes go
/// to eval and the rest to train.
SceneSplit split_scenes(std::span<const Scene> scenes, double train_fraction, std::uint64_t seed);

}  // namespace groundplan
