#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>

#include "groundplan/scene.hpp"

namespace groundplan {

inline constexpr std::string_view kObjectListPlaceholder = "{OBJECT_LIST}";
inline constexpr std::string_view kInstructionPlaceholder = "{INSTRUCTION}";

enum class PromptMode { Generation, Inference };

std::string_view to_string(PromptMode mode);

struct PromptTemplate {
  std::string name;
  std::string body;
  PromptMode mode = PromptMode::Inference;

  /// {OBJECT_LIST} must occur exactly once; Inference templates also need
  /// exactly one {INSTRUCTION}, Generation templates none.
  void validate() const;
};

/// Reads a plain-text template; the name is the file stem.
PromptTemplate load_template(const std::filesystem::path& path, PromptMode mode);

/// Substitutes both placeholders in a single left-to-right pass, so text
/// inside the instruction is never re-expanded. The instruction must be
/// present exactly when the template is an Inference template.
std::string build_prompt(const PromptTemplate& tmpl, const ObjectList& objects,
                         const std::optional<std::string>& instruction);

}  // namespace groundplan
