#pragma once

#include <string>
#include <string_view>

#include "rise/config.hpp"

namespace rise::prompts {

/// System/user halves of one chat request; the image rides as a separate
/// content part of the user message.
struct ChatPrompt {
    std::string system;
    std::string user;
};

ChatPrompt questioner_prompt();
ChatPrompt solver_prompt(std::string_view question);
ChatPrompt validity_prompt(std::string_view question, SkillCategory declared_skill);
ChatPrompt verification_prompt(std::string_view question, std::string_view candidate_answer);

/// Skill definition and restriction text substituted for {SKILL_CONTEXT}.
std::string skill_context(SkillCategory k);

}  // namespace rise::prompts
