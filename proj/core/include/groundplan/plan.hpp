#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace groundplan {

enum class Verb {
  Move,
  Grasp,
  Place,
  Open,
  Close,
  TurnOn,
  TurnOff,
  Slice,
  Pour,
  Wipe,
  Scrub,
  Rinse,
  Wet,
  Dry,
  Tear,
  Press,
  Adjust,
  Watch,
  Other,
};

/// Upper-case lexicon name, e.g. "TURN_ON".
std::string_view to_string(Verb verb);

struct ObjectPhrase {
  std::string text;
  /// Introduced with "another": refers to a second instance of the class.
  bool new_instance = false;

  friend bool operator==(const ObjectPhrase&, const ObjectPhrase&) = default;
};

struct ActionStep {
  int index = 0;
  Verb verb = Verb::Other;
  std::vector<ObjectPhrase> object_phrases;
  /// Step body without the "Step n." prefix.
  std::string text;
  /// The line as it appeared in the completion.
  std::string raw;

  std::vector<std::string> phrase_texts() const;
};

struct Plan {
  std::string instruction;
  std::vector<ActionStep> steps;
  std::string raw_text;
  std::string source;
};

/// Parses one step body (prefix already removed). `antecedent` is the most
/// recent object phrase of the plan so far; pronouns resolve to it.
ActionStep parse_step(std::string_view body, const std::optional<std::string>& antecedent = {});

/// Extracts "Step <n>." / "Step <n>:" lines, renumbering 1..n in order of
/// appearance. Throws PlanParseError when no step line exists.
std::vector<ActionStep> parse_plan_text(std::string_view text);

/// Canonical rendering, one "Step n. <text>" line per step.
std::string render_steps(const std::vector<ActionStep>& steps);

}  // namespace groundplan
