#include "groundplan/prompt.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "groundplan/errors.hpp"

namespace groundplan {

std::string_view to_string(PromptMode mode) {
  return mode == PromptMode::Inference ? "inference" : "generation";
}

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size()))
    ++n;
  return n;
}

}  // namespace

void PromptTemplate::validate() const {
  const auto lists = count_occurrences(body, kObjectListPlaceholder);
  const auto instructions = count_occurrences(body, kInstructionPlaceholder);
  if (lists != 1)
    throw Error(ErrorCode::InvalidArgument,
                "template '" + name + "' must contain {OBJECT_LIST} exactly once");
  if (mode == PromptMode::Inference && instructions != 1)
    throw Error(ErrorCode::InvalidArgument,
                "inference template '" + name + "' must contain {INSTRUCTION} exactly once");
  if (mode == PromptMode::Generation && instructions != 0)
    throw Error(ErrorCode::InvalidArgument,
                "generation template '" + name + "' must not contain {INSTRUCTION}");
}

PromptTemplate load_template(const std::filesystem::path& path, PromptMode mode) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open template " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  PromptTemplate t{path.stem().string(), ss.str(), mode};
  t.validate();
  return t;
}

std::string build_prompt(const PromptTemplate& tmpl, const ObjectList& objects,
                         const std::optional<std::string>& instruction) {
  tmpl.validate();
  if (tmpl.mode == PromptMode::Inference && !instruction)
    throw Error(ErrorCode::InvalidArgument, "inference prompt requires an instruction");
  if (tmpl.mode == PromptMode::Generation && instruction)
    throw Error(ErrorCode::InvalidArgument, "generation prompt takes no instruction");

  const std::string list = objects.render();
  std::string out;
  out.reserve(tmpl.body.size() + list.size() + (instruction ? instruction->size() : 0));
  std::string_view rest = tmpl.body;
  while (!rest.empty()) {
    const auto a = rest.find(kObjectListPlaceholder);
    const auto b = rest.find(kInstructionPlaceholder);
    const auto next = std::min(a, b);
    if (next == std::string_view::npos) {
      out.append(rest);
      break;
    }
    out.append(rest.substr(0, next));
    if (next == a) {
      out.append(list);
      rest.remove_prefix(next + kObjectListPlaceholder.size());
    } else {
      out.append(*instruction);
      rest.remove_prefix(next + kInstructionPlaceholder.size());
    }
  }
  return out;
}

}  // namespace groundplan
