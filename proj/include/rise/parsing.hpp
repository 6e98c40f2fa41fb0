#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "rise/config.hpp"

namespace rise {

/// Reserved sentinel for responses that carry no extractable answer.
/// normalize_answer output is always fully lowercased, so a value with
/// uppercase letters can never collide with a real normalized answer.
inline constexpr std::string_view kUnparseable = "\x01UNPARSEABLE";

/// A parsed questioner output.
struct QuestionRecord {
    SkillCategory skill = SkillCategory::coarse_perception;
    QuestionType qtype = QuestionType::multiple_choice;
    std::string text;
    std::string raw;

    bool operator==(const QuestionRecord&) const = default;
};

/// Answer pulled out of a solver/supervisor response.
struct ExtractedAnswer {
    std::string normalized;
    std::string raw_span;
    bool parseable = false;

    static ExtractedAnswer unparseable() { return {std::string(kUnparseable), "", false}; }

    bool operator==(const ExtractedAnswer&) const = default;
};

/// Binary supervisor verdict.
enum class Verdict : int {
    no = 0,
    yes = 1,
    unparseable = -1,
};

/// Parses the tagged questioner format: exactly one <skill>, <type> and
/// <question> block each, in that order, with recognized labels. Anything
/// else is format-invalid and yields nullopt (invalidity is a value; this
/// never throws, whatever the input bytes).
std::optional<QuestionRecord> parse_question_output(std::string_view raw);

/// Extracts the contents of the last "\boxed{...}" via character-level
/// balanced-brace matching; absent or unbalanced input gives the
/// unparseable sentinel.
ExtractedAnswer extract_boxed_answer(std::string_view raw);

/// Canonicalizes an answer string: trim, lowercase, collapse internal
/// whitespace, strip trailing periods, and reduce plain decimal numerals
/// ("3.0" -> "3", "+5" -> "5"). Idempotent.
std::string normalize_answer(std::string_view raw_span);

/// Reads the final boxed digit; only an exact "1" or "0" (modulo
/// surrounding whitespace) counts.
Verdict parse_binary_verdict(std::string_view raw);

}  // namespace rise
