#include <algorithm>
#include <cctype>
#include <regex>
#include <sstream>
#include <unordered_map>
#include <unordered_set>

#include "groundplan/errors.hpp"
#include "groundplan/plan.hpp"
#include "groundplan/scene.hpp"

namespace groundplan {

std::string_view to_string(Verb verb) {
  switch (verb) {
    case Verb::Move: return "MOVE";
    case Verb::Grasp: return "GRASP";
    case Verb::Place: return "PLACE";
    case Verb::Open: return "OPEN";
    case Verb::Close: return "CLOSE";
    case Verb::TurnOn: return "TURN_ON";
    case Verb::TurnOff: return "TURN_OFF";
    case Verb::Slice: return "SLICE";
    case Verb::Pour: return "POUR";
    case Verb::Wipe: return "WIPE";
    case Verb::Scrub: return "SCRUB";
    case Verb::Rinse: return "RINSE";
    case Verb::Wet: return "WET";
    case Verb::Dry: return "DRY";
    case Verb::Tear: return "TEAR";
    case Verb::Press: return "PRESS";
    case Verb::Adjust: return "ADJUST";
    case Verb::Watch: return "WATCH";
    case Verb::Other: return "OTHER";
  }
  return "OTHER";
}

std::vector<std::string> ActionStep::phrase_texts() const {
  std::vector<std::string> out;
  out.reserve(object_phrases.size());
  for (const auto& p : object_phrases) out.push_back(p.text);
  return out;
}

namespace {

const std::unordered_map<std::string, Verb>& single_word_verbs() {
  static const std::unordered_map<std::string, Verb> m = {
      {"move", Verb::Move},      {"go", Verb::Move},        {"walk", Verb::Move},
      {"navigate", Verb::Move},  {"approach", Verb::Move},  {"grasp", Verb::Grasp},
      {"grab", Verb::Grasp},     {"take", Verb::Grasp},     {"pick", Verb::Grasp},
      {"get", Verb::Grasp},      {"hold", Verb::Grasp},     {"place", Verb::Place},
      {"put", Verb::Place},      {"set", Verb::Place},      {"lay", Verb::Place},
      {"return", Verb::Place},   {"open", Verb::Open},      {"close", Verb::Close},
      {"shut", Verb::Close},     {"slice", Verb::Slice},    {"cut", Verb::Slice},
      {"chop", Verb::Slice},     {"pour", Verb::Pour},      {"wipe", Verb::Wipe},
      {"clean", Verb::Wipe},     {"scrub", Verb::Scrub},    {"rinse", Verb::Rinse},
      {"wash", Verb::Rinse},     {"wet", Verb::Wet},        {"dry", Verb::Dry},
      {"tear", Verb::Tear},      {"press", Verb::Press},    {"push", Verb::Press},
      {"adjust", Verb::Adjust},  {"watch", Verb::Watch},
  };
  return m;
}

const std::unordered_set<std::string> kPrepositions = {"to", "on", "in", "into", "onto",
                                                      "from", "with", "at"};
const std::unordered_set<std::string> kConjunctions = {"and", "then"};
const std::unordered_set<std::string> kDeterminers = {
    "a", "an", "the", "another", "its", "their", "his", "her", "your", "my", "some",
    "two", "three", "four", "both", "other"};
const std::unordered_set<std::string> kFillers = {"closer", "back", "away", "up", "down", "out",
                                                 "over", "together", "properly", "carefully",
                                                 "thoroughly", "again", "off"};
const std::unordered_set<std::string> kQuantities = {"piece", "pieces", "slice", "slices",
                                                    "bit", "bits"};
// Nouns naming a location relative to something else, not an object.
const std::unordered_set<std::string> kLocationNouns = {"place", "position", "spot", "side"};
const std::unordered_set<std::string> kPronouns = {"it", "them"};

std::vector<std::string> tokenize(std::string_view text) {
  std::string cleaned;
  cleaned.reserve(text.size());
  for (char c : text) {
    const auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) || c == '\'' || c == '-' || c == '_' || c == '(' || c == ')') {
      cleaned.push_back(static_cast<char>(std::tolower(uc)));
    } else {
      cleaned.push_back(' ');
    }
  }
  std::istringstream is(cleaned);
  std::vector<std::string> tokens;
  for (std::string tok; is >> tok;) tokens.push_back(tok);
  return tokens;
}

// Returns the verb and how many tokens it spans, or {Other, 0}.
std::pair<Verb, std::size_t> match_verb(const std::vector<std::string>& t, std::size_t at) {
  if (at >= t.size()) return {Verb::Other, 0};
  const std::string& w = t[at];
  const std::string next = at + 1 < t.size() ? t[at + 1] : std::string();
  if (w == "turn" || w == "switch") {
    if (next == "on") return {Verb::TurnOn, 2};
    if (next == "off") return {Verb::TurnOff, 2};
    return {Verb::Other, 1};
  }
  const auto& lex = single_word_verbs();
  auto it = lex.find(w);
  if (it == lex.end()) return {Verb::Other, 0};
  if (it->second == Verb::Move && next == "to") return {Verb::Move, 2};
  if (w == "pick" && next == "up") return {Verb::Grasp, 2};
  return {it->second, 1};
}

}  // namespace

ActionStep parse_step(std::string_view body, const std::optional<std::string>& antecedent) {
  ActionStep step;
  step.text = std::string(body);
  step.raw = step.text;
  const auto tokens = tokenize(body);
  if (tokens.empty()) return step;

  auto [verb, span] = match_verb(tokens, 0);
  step.verb = verb;
  // Unknown leading words are kept out of the phrases.
  std::size_t pos = span == 0 ? 1 : span;

  std::optional<std::string> last = antecedent;
  std::vector<std::string> chunk;
  bool chunk_new_instance = false;
  bool clause_start = false;

  auto flush = [&] {
    std::vector<std::string> words;
    std::size_t i = 0;
    while (i < chunk.size() && kDeterminers.count(chunk[i])) ++i;
    // "piece of bread" -> "bread"
    if (i + 1 < chunk.size() && kQuantities.count(chunk[i]) && chunk[i + 1] == "of") i += 2;
    while (i < chunk.size() && kDeterminers.count(chunk[i])) ++i;
    for (; i < chunk.size(); ++i) {
      if (!kFillers.count(chunk[i])) words.push_back(chunk[i]);
    }
    chunk.clear();
    const bool fresh = chunk_new_instance;
    chunk_new_instance = false;
    if (words.empty()) return;
    std::string phrase;
    if (words.size() == 1 && kPronouns.count(words[0])) {
      if (!last) return;
      phrase = *last;
    } else {
      std::string joined;
      for (const auto& w : words) {
        if (!joined.empty()) joined += ' ';
        joined += w;
      }
      phrase = normalize_class_name(joined);
      if (kLocationNouns.count(phrase)) return;
    }
    if (phrase.empty()) return;
    last = phrase;
    auto existing = std::find_if(step.object_phrases.begin(), step.object_phrases.end(),
                                 [&](const ObjectPhrase& p) { return p.text == phrase; });
    if (existing == step.object_phrases.end()) step.object_phrases.push_back({phrase, fresh});
  };

  for (; pos < tokens.size(); ++pos) {
    const auto& tok = tokens[pos];
    if (clause_start) {
      clause_start = false;
      auto [v, n] = match_verb(tokens, pos);
      if (n > 0) {
        pos += n - 1;
        continue;
      }
    }
    if (kConjunctions.count(tok)) {
      flush();
      clause_start = true;
      continue;
    }
    if (kPrepositions.count(tok)) {
      flush();
      continue;
    }
    if (tok == "another") chunk_new_instance = true;
    chunk.push_back(tok);
  }
  flush();
  return step;
}

std::vector<ActionStep> parse_plan_text(std::string_view text) {
  static const std::regex kStepLine(R"(^\s*step\s*(\d+)\s*[.:]\s*(.*?)\s*$)",
                                    std::regex::icase | std::regex::ECMAScript);
  std::vector<ActionStep> steps;
  std::optional<std::string> antecedent;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto end = text.find('\n', start);
    if (end == std::string_view::npos) end = text.size();
    std::string line(text.substr(start, end - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::smatch m;
    if (std::regex_match(line, m, kStepLine)) {
      ActionStep step = parse_step(m[2].str(), antecedent);
      step.index = static_cast<int>(steps.size()) + 1;
      step.raw = line;
      if (!step.object_phrases.empty()) antecedent = step.object_phrases.back().text;
      steps.push_back(std::move(step));
    }
    start = end + 1;
  }
  if (steps.empty()) throw PlanParseError(std::string(text));
  return steps;
}

std::string render_steps(const std::vector<ActionStep>& steps) {
  std::string out;
  for (const auto& s : steps) {
    out += "Step " + std::to_string(s.index) + ". " + s.text + "\n";
  }
  return out;
}

}  // namespace groundplan
