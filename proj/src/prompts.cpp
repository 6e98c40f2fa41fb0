#include "rise/prompts.hpp"

namespace rise::prompts {

namespace {

constexpr std::string_view kQuestionerSystem =
    R"(You are an intelligent Question Generator. Given an image, generate exactly
one difficult visual reasoning question that is directly grounded in the image.

The question must:
1. require visual analysis or reasoning rather than simple description;
2. belong to exactly one skill category:
coarse perception, fine-grained perception, instance reasoning,
logical reasoning, math & counting, or science & technology;
3. belong to exactly one question type:
multiple choice, numerical, or regression;
4. have a short, unique, and verifiable answer.

Output strictly in the following format:
<skill>...</skill>
<type>...</type>
<question>...</question>)";

constexpr std::string_view kQuestionerUser =
    "Generate one new challenging reasoning question based on this image.";

constexpr std::string_view kSolverSystem = "You are a helpful visual reasoning assistant.";

constexpr std::string_view kSolverUser =
    R"(Please reason step by step carefully based on the image for the following
question:
{QUESTION}

After completing your reasoning, output the final clean and concise answer
strictly inside \boxed{}.)";

constexpr std::string_view kValiditySystem =
    R"(You are a strict visual question validity judge. Decide whether the question
can be answered solely from the provided image and whether the declared skill
matches the question.

Use the following skill definition and restriction:
{SKILL_CONTEXT}

Output \boxed{1} only if the question is image-grounded, well-posed,
answerable from the image alone, and consistent with the declared skill.
Otherwise, output \boxed{0}.)";

constexpr std::string_view kValidityUser =
    R"(Question: {QUESTION}
Declared Skill: {DECLARED_SKILL}

Judge whether the question is valid and whether the declared skill is correct.
Do not solve the question. End with \boxed{1} or \boxed{0}.)";

constexpr std::string_view kVerificationSystem =
    R"(You are a strict visual question answering verifier. Given an image, a question,
and a candidate answer, decide whether the candidate answer is correct.
Output \boxed{1} only if the candidate answer is correct.)";

constexpr std::string_view kVerificationUser =
    R"(Question: {QUESTION}
Candidate Answer: {CANDIDATE_ANSWER}

Briefly judge the answer correctness and end with \boxed{1} or \boxed{0}.)";

std::string replace_all(std::string text, std::string_view placeholder, std::string_view value) {
    size_t pos = 0;
    while ((pos = text.find(placeholder, pos)) != std::string::npos) {
        text.replace(pos, placeholder.size(), value);
        pos += value.size();
    }
    return text;
}

constexpr std::string_view kNonMathRestriction =
    " Restriction: the main solution path of the question must not depend on "
    "counting or numerical estimation.";

}  // namespace

std::string skill_context(SkillCategory k) {
    std::string out;
    switch (k) {
        case SkillCategory::coarse_perception:
            out = "Coarse perception: questions about the overall scene, its global layout, "
                  "dominant colors, style, or other holistic properties that can be judged "
                  "without inspecting small details.";
            out += kNonMathRestriction;
            break;
        case SkillCategory::fine_grained_perception:
            out = "Fine-grained perception: questions about small details, attributes of a "
                  "specific object, fine textures, or subtle visual differences that require "
                  "close inspection of the image.";
            out += kNonMathRestriction;
            break;
        case SkillCategory::instance_reasoning:
            out = "Instance reasoning: questions about relations among specific object "
                  "instances, such as spatial arrangement, comparisons, or interactions "
                  "between identified objects.";
            out += kNonMathRestriction;
            break;
        case SkillCategory::logical_reasoning:
            out = "Logical reasoning: questions that require multi-step inference over the "
                  "visual evidence, such as conditionals, exclusions, or deductions grounded "
                  "in what the image shows.";
            out += kNonMathRestriction;
            break;
        case SkillCategory::math_and_counting:
            out = "Math & counting: questions whose solution requires counting objects or "
                  "performing arithmetic over quantities that are visible in the image.";
            break;
        case SkillCategory::science_and_technology:
            out = "Science & technology: questions about physical, scientific, or "
                  "technological properties and behaviors of the objects shown in the image.";
            out += kNonMathRestriction;
            break;
    }
    return out;
}

ChatPrompt questioner_prompt() {
    return {std::string(kQuestionerSystem), std::string(kQuestionerUser)};
}

ChatPrompt solver_prompt(std::string_view question) {
    return {std::string(kSolverSystem), replace_all(std::string(kSolverUser), "{QUESTION}", question)};
}

ChatPrompt validity_prompt(std::string_view question, SkillCategory declared_skill) {
    ChatPrompt p;
    p.system = replace_all(std::string(kValiditySystem), "{SKILL_CONTEXT}", skill_context(declared_skill));
    p.user = replace_all(std::string(kValidityUser), "{QUESTION}", question);
    p.user = replace_all(std::move(p.user), "{DECLARED_SKILL}", skill_label(declared_skill));
    return p;
}

ChatPrompt verification_prompt(std::string_view question, std::string_view candidate_answer) {
    ChatPrompt p;
    p.system = std::string(kVerificationSystem);
    p.user = replace_all(std::string(kVerificationUser), "{QUESTION}", question);
    p.user = replace_all(std::move(p.user), "{CANDIDATE_ANSWER}", candidate_answer);
    return p;
}

}  // namespace rise::prompts
