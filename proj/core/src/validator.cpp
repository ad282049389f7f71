#include "groundplan/validator.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "groundplan/errors.hpp"

namespace groundplan {

using nlohmann::json;

// ---------------------------------------------------------------------------
// SynonymTable

std::string SynonymTable::find(const std::string& name) const {
  std::string cur = name;
  for (auto it = parent_.find(cur); it != parent_.end() && it->second != cur; it = parent_.find(cur))
    cur = it->second;
  return cur;
}

void SynonymTable::add(std::string_view a_raw, std::string_view b_raw) {
  const auto a = normalize_class_name(a_raw);
  const auto b = normalize_class_name(b_raw);
  if (a.empty() || b.empty()) throw Error(ErrorCode::InvalidArgument, "synonym names must be non-empty");
  parent_.try_emplace(a, a);
  parent_.try_emplace(b, b);
  ++pairs_;
  auto ra = find(a);
  auto rb = find(b);
  if (ra == rb) return;
  // Smaller name becomes the root so the structure is order-independent.
  if (rb < ra) std::swap(ra, rb);
  parent_[rb] = ra;
}

std::vector<std::string> SynonymTable::synonyms_of(std::string_view name_raw) const {
  const auto name = normalize_class_name(name_raw);
  std::vector<std::string> out;
  if (!parent_.count(name)) return out;
  const auto root = find(name);
  for (const auto& [n, _] : parent_) {
    if (n != name && find(n) == root) out.push_back(n);
  }
  return out;
}

bool SynonymTable::are_synonyms(std::string_view a, std::string_view b) const {
  const auto na = normalize_class_name(a);
  const auto nb = normalize_class_name(b);
  if (na == nb) return false;
  return parent_.count(na) && parent_.count(nb) && find(na) == find(nb);
}

SynonymTable SynonymTable::parse(std::string_view text) {
  SynonymTable table;
  std::istringstream in{std::string(text)};
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    if (normalize_class_name(line).empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::Parse, "synonyms line " + std::to_string(lineno) + ": expected 'name = name'");
    table.add(line.substr(0, eq), line.substr(eq + 1));
  }
  return table;
}

SynonymTable SynonymTable::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open synonym table " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse(ss.str());
}

// ---------------------------------------------------------------------------
// Matching

std::string_view to_string(MatchKind kind) {
  switch (kind) {
    case MatchKind::Exact: return "exact";
    case MatchKind::Synonym: return "synonym";
    case MatchKind::PartOf: return "part_of";
    case MatchKind::None: return "none";
  }
  return "none";
}

namespace {

std::vector<std::string> words(std::string_view s) {
  std::vector<std::string> out;
  std::istringstream in{std::string(s)};
  for (std::string w; in >> w;) out.push_back(w);
  return out;
}

bool contains_run(const std::vector<std::string>& outer, const std::vector<std::string>& inner) {
  if (inner.empty() || inner.size() > outer.size()) return false;
  return std::search(outer.begin(), outer.end(), inner.begin(), inner.end()) != outer.end();
}

}  // namespace

MatchResult match_object(std::string_view phrase, const ObjectList& objects,
                         const SynonymTable& synonyms) {
  const std::string p(phrase);
  if (p.empty()) return {};
  if (objects.contains(p)) return {MatchKind::Exact, p};
  for (const auto& s : synonyms.synonyms_of(p)) {
    if (objects.contains(s)) return {MatchKind::Synonym, s};
  }
  const auto pw = words(p);
  for (const auto& name : objects.names()) {
    const auto nw = words(name);
    if (contains_run(pw, nw) || contains_run(nw, pw)) return {MatchKind::PartOf, name};
  }
  return {};
}

std::vector<StepMatches> check_hallucination(const Plan& plan, const ObjectList& objects,
                                             const SynonymTable& synonyms) {
  std::vector<StepMatches> out;
  out.reserve(plan.steps.size());
  for (const auto& step : plan.steps) {
    StepMatches sm;
    sm.step_index = step.index;
    for (const auto& phrase : step.object_phrases) {
      auto m = match_object(phrase.text, objects, synonyms);
      if (m.kind == MatchKind::None) sm.hallucinated = true;
      sm.matches.emplace_back(phrase.text, std::move(m));
    }
    out.push_back(std::move(sm));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Rules and simulation

RuleSet RuleSet::strict() {
  RuleSet r;
  r.mode = RuleMode::Strict;
  r.require_move_before_interact = true;
  return r;
}

RuleSet RuleSet::lenient() { return RuleSet{}; }

RuleMode parse_rule_mode(std::string_view text) {
  if (text == "strict") return RuleMode::Strict;
  if (text == "lenient") return RuleMode::Lenient;
  throw Error(ErrorCode::InvalidArgument, "unknown rule mode '" + std::string(text) + "'");
}

std::string_view to_string(RuleMode mode) { return mode == RuleMode::Strict ? "strict" : "lenient"; }

namespace {

bool is_interaction(Verb v) {
  switch (v) {
    case Verb::Move:
    case Verb::Place:
    case Verb::Watch:
    case Verb::Other:
      return false;
    default:
      return true;
  }
}

bool is_cutting_tool(const std::string& name) {
  const auto w = words(name);
  return std::any_of(w.begin(), w.end(),
                     [](const std::string& t) { return t == "knife" || t == "cleaver"; });
}

}  // namespace

std::vector<StepSimulation> simulate_plan(const Plan& plan, const ObjectList& objects,
                                          const SynonymTable& synonyms, const RuleSet& rules) {
  const bool move_first = rules.mode == RuleMode::Strict && rules.require_move_before_interact;
  WorldState state;
  std::vector<StepSimulation> out;
  out.reserve(plan.steps.size());

  for (const auto& step : plan.steps) {
    std::vector<std::string> keys;
    for (const auto& phrase : step.object_phrases) {
      auto m = match_object(phrase.text, objects, synonyms);
      keys.push_back(m.matched_scene_name.value_or(phrase.text));
    }

    std::optional<std::string> violation;
    auto flag = [&](const char* rule) {
      if (!violation) violation = rule;
    };

    if (move_first && is_interaction(step.verb) && !keys.empty()) {
      const auto& target = keys.front();
      if (state.agent_location != target && !state.holding.count(target))
        flag("require_move_before_interact");
    }
    if (rules.forbid_place_without_grasp && step.verb == Verb::Place && !keys.empty() &&
        !state.holding.count(keys.front()))
      flag("forbid_place_without_grasp");
    if (step.verb == Verb::Grasp) {
      for (std::size_t i = 0; i < keys.size(); ++i) {
        if (rules.forbid_double_grasp && !step.object_phrases[i].new_instance &&
            state.holding.count(keys[i]))
          flag("forbid_double_grasp");
      }
      if (rules.hand_capacity && !keys.empty() && state.holding.size() >= *rules.hand_capacity)
        flag("hand_capacity");
    }
    if (rules.require_tool_for_slice && step.verb == Verb::Slice &&
        std::none_of(state.holding.begin(), state.holding.end(), is_cutting_tool))
      flag("require_tool_for_slice");

    switch (step.verb) {
      case Verb::Move:
        if (!keys.empty()) state.agent_location = keys.back();
        break;
      case Verb::Grasp:
        state.holding.insert(keys.begin(), keys.end());
        break;
      case Verb::Place:
        if (!keys.empty()) state.holding.erase(keys.front());
        break;
      default:
        break;
    }
    out.push_back(StepSimulation{step.index, state, violation});
  }
  return out;
}

// ---------------------------------------------------------------------------

std::string_view to_string(Verdict verdict) {
  switch (verdict) {
    case Verdict::Success: return "success";
    case Verdict::Hallucination: return "hallucination";
    case Verdict::Counterfactual: return "counterfactual";
  }
  return "success";
}

ValidationReport validate(const Plan& plan, const ObjectList& objects, const SynonymTable& synonyms,
                          const RuleSet& rules) {
  auto matched = check_hallucination(plan, objects, synonyms);
  auto simulated = simulate_plan(plan, objects, synonyms, rules);
  ValidationReport report;
  for (std::size_t i = 0; i < plan.steps.size(); ++i) {
    StepReport sr;
    sr.step_index = plan.steps[i].index;
    sr.raw = plan.steps[i].raw;
    sr.verb = plan.steps[i].verb;
    sr.matches = std::move(matched[i].matches);
    sr.hallucinated = matched[i].hallucinated;
    sr.violated_rule = simulated[i].violated_rule;
    if (!report.first_failure_step && (sr.hallucinated || sr.violated_rule)) {
      report.first_failure_step = sr.step_index;
      report.verdict = sr.hallucinated ? Verdict::Hallucination : Verdict::Counterfactual;
    }
    report.steps.push_back(std::move(sr));
  }
  return report;
}

json report_to_json(const ValidationReport& report, std::string_view plan_id) {
  json steps = json::array();
  for (const auto& s : report.steps) {
    json matches = json::array();
    for (const auto& [phrase, m] : s.matches) {
      matches.push_back(json{{"phrase", phrase},
                             {"kind", std::string(to_string(m.kind))},
                             {"scene_name", m.matched_scene_name ? json(*m.matched_scene_name) : json(nullptr)}});
    }
    steps.push_back(json{{"index", s.step_index},
                         {"raw", s.raw},
                         {"verb", std::string(to_string(s.verb))},
                         {"matches", std::move(matches)},
                         {"hallucinated", s.hallucinated},
                         {"counterfactual", !s.hallucinated && s.violated_rule.has_value()},
                         {"violated_rule", s.violated_rule ? json(*s.violated_rule) : json(nullptr)}});
  }
  return json{{"plan_id", std::string(plan_id)},
              {"verdict", std::string(to_string(report.verdict))},
              {"first_failure_step", report.first_failure_step ? json(*report.first_failure_step) : json(nullptr)},
              {"steps", std::move(steps)}};
}

}  // namespace groundplan
