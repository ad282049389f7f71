#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "groundplan/plan.hpp"
#include "groundplan/scene.hpp"

namespace groundplan {

/// Equivalence classes of normalized names. Pairs are closed symmetrically
/// and transitively as they are added.
class SynonymTable {
 public:
  void add(std::string_view a, std::string_view b);

  /// Every name equivalent to `name`, excluding itself. Sorted.
  std::vector<std::string> synonyms_of(std::string_view name) const;
  bool are_synonyms(std::string_view a, std::string_view b) const;
  std::size_t pair_count() const { return pairs_; }

  /// Plain text, one "name = name" per line; '#' starts a comment.
  static SynonymTable load(const std::filesystem::path& path);
  static SynonymTable parse(std::string_view text);

 private:
  std::string find(const std::string& name) const;

  std::map<std::string, std::string> parent_;
  std::size_t pairs_ = 0;
};

enum class MatchKind { Exact, Synonym, PartOf, None };

std::string_view to_string(MatchKind kind);

struct MatchResult {
  MatchKind kind = MatchKind::None;
  std::optional<std::string> matched_scene_name;

  friend bool operator==(const MatchResult&, const MatchResult&) = default;
};

/// Exact > Synonym > PartOf (word-boundary containment, either direction).
/// Ties inside a kind resolve to the lexicographically smallest scene name.
MatchResult match_object(std::string_view phrase, const ObjectList& objects,
                         const SynonymTable& synonyms);

enum class RuleMode { Strict, Lenient };

struct RuleSet {
  RuleMode mode = RuleMode::Lenient;
  bool require_move_before_interact = false;
  bool forbid_place_without_grasp = true;
  bool forbid_double_grasp = true;
  bool require_tool_for_slice = true;
  /// Disabled when empty.
  std::optional<std::size_t> hand_capacity;

  static RuleSet strict();
  static RuleSet lenient();
};

RuleMode parse_rule_mode(std::string_view text);
std::string_view to_string(RuleMode mode);

struct StepMatches {
  int step_index = 0;
  std::vector<std::pair<std::string, MatchResult>> matches;
  bool hallucinated = false;
};

std::vector<StepMatches> check_hallucination(const Plan& plan, const ObjectList& objects,
                                             const SynonymTable& synonyms);

struct WorldState {
  std::optional<std::string> agent_location;
  std::set<std::string> holding;
};

struct StepSimulation {
  int step_index = 0;
  WorldState state_after;
  /// Name of the violated rule, if any.
  std::optional<std::string> violated_rule;
};

/// Walks the plan through a small location/holding state machine and flags
/// steps whose preconditions fail under the enabled rules.
std::vector<StepSimulation> simulate_plan(const Plan& plan, const ObjectList& objects,
                                          const SynonymTable& synonyms, const RuleSet& rules);

enum class Verdict { Success, Hallucination, Counterfactual };

std::string_view to_string(Verdict verdict);

struct StepReport {
  int step_index = 0;
  std::string raw;
  Verb verb = Verb::Other;
  std::vector<std::pair<std::string, MatchResult>> matches;
  bool hallucinated = false;
  std::optional<std::string> violated_rule;
};

struct ValidationReport {
  std::vector<StepReport> steps;
  Verdict verdict = Verdict::Success;
  std::optional<int> first_failure_step;
};

ValidationReport validate(const Plan& plan, const ObjectList& objects, const SynonymTable& synonyms,
                          const RuleSet& rules);

/// {plan_id, verdict, first_failure_step, steps: [...]}
nlohmann::json report_to_json(const ValidationReport& report, std::string_view plan_id);

}  // namespace groundplan
