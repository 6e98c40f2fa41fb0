#include "rise/parsing.hpp"

#include <cctype>

namespace rise {

namespace {

struct TagBlock {
    size_t open_begin;   // index of '<'
    size_t content_begin;
    size_t content_end;  // index of "</"
    size_t close_end;    // one past '>'
};

// Locates <tag>...</tag> requiring exactly one occurrence of both the
// opening and closing token anywhere in the input.
std::optional<TagBlock> find_unique_block(std::string_view raw, std::string_view tag) {
    const std::string open = "<" + std::string(tag) + ">";
    const std::string close = "</" + std::string(tag) + ">";

    size_t open_pos = raw.find(open);
    if (open_pos == std::string_view::npos) return std::nullopt;
    if (raw.find(open, open_pos + 1) != std::string_view::npos) return std::nullopt;

    size_t close_pos = raw.find(close);
    if (close_pos == std::string_view::npos) return std::nullopt;
    if (raw.find(close, close_pos + 1) != std::string_view::npos) return std::nullopt;

    if (close_pos < open_pos + open.size()) return std::nullopt;
    return TagBlock{open_pos, open_pos + open.size(), close_pos, close_pos + close.size()};
}

}  // namespace

std::optional<QuestionRecord> parse_question_output(std::string_view raw) {
    auto skill_block = find_unique_block(raw, "skill");
    auto type_block = find_unique_block(raw, "type");
    auto question_block = find_unique_block(raw, "question");
    if (!skill_block || !type_block || !question_block) return std::nullopt;

    // Enforced order: skill, then type, then question.
    if (!(skill_block->close_end <= type_block->open_begin &&
          type_block->close_end <= question_block->open_begin))
        return std::nullopt;

    auto content = [&raw](const TagBlock& b) {
        return raw.substr(b.content_begin, b.content_end - b.content_begin);
    };

    auto skill = parse_skill(content(*skill_block));
    auto qtype = parse_question_type(content(*type_block));
    if (!skill || !qtype) return std::nullopt;

    std::string text = trim_copy(content(*question_block));
    if (text.empty()) return std::nullopt;

    QuestionRecord rec;
    rec.skill = *skill;
    rec.qtype = *qtype;
    rec.text = std::move(text);
    rec.raw = std::string(raw);
    return rec;
}

ExtractedAnswer extract_boxed_answer(std::string_view raw) {
    constexpr std::string_view kBoxed = "\\boxed{";
    size_t pos = raw.rfind(kBoxed);
    if (pos == std::string_view::npos) return ExtractedAnswer::unparseable();

    size_t start = pos + kBoxed.size();
    int depth = 1;
    for (size_t i = start; i < raw.size(); ++i) {
        if (raw[i] == '{') {
            ++depth;
        } else if (raw[i] == '}') {
            --depth;
            if (depth == 0) {
                std::string span(raw.substr(start, i - start));
                return ExtractedAnswer{normalize_answer(span), std::move(span), true};
            }
        }
    }
    return ExtractedAnswer::unparseable();  // unbalanced
}

namespace {

// Canonical form of a plain decimal numeral, or nullopt when `s` is not one.
std::optional<std::string> canonical_decimal(const std::string& s) {
    size_t i = 0;
    bool negative = false;
    if (i < s.size() && (s[i] == '+' || s[i] == '-')) {
        negative = (s[i] == '-');
        ++i;
    }
    std::string int_part, frac_part;
    while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) int_part.push_back(s[i++]);
    if (i < s.size() && s[i] == '.') {
        ++i;
        while (i < s.size() && std::isdigit(static_cast<unsigned char>(s[i]))) frac_part.push_back(s[i++]);
    }
    if (i != s.size()) return std::nullopt;
    if (int_part.empty() && frac_part.empty()) return std::nullopt;

    size_t nz = int_part.find_first_not_of('0');
    int_part = (nz == std::string::npos) ? "0" : int_part.substr(nz);
    size_t last = frac_part.find_last_not_of('0');
    frac_part = (last == std::string::npos) ? "" : frac_part.substr(0, last + 1);

    std::string out;
    if (negative && !(int_part == "0" && frac_part.empty())) out.push_back('-');
    out += int_part;
    if (!frac_part.empty()) {
        out.push_back('.');
        out += frac_part;
    }
    return out;
}

}  // namespace

std::string normalize_answer(std::string_view raw_span) {
    std::string s = collapse_spaces(ascii_lower(trim_copy(raw_span)));
    // Alternating trailing periods and spaces ("x . .") need repeated
    // stripping to reach a fixed point.
    for (;;) {
        const std::string before = s;
        while (!s.empty() && s.back() == '.') s.pop_back();
        s = trim_copy(s);
        if (s == before) break;
    }
    if (auto num = canonical_decimal(s)) return *num;
    return s;
}

Verdict parse_binary_verdict(std::string_view raw) {
    ExtractedAnswer boxed = extract_boxed_answer(raw);
    if (!boxed.parseable) return Verdict::unparseable;
    const std::string digit = trim_copy(boxed.raw_span);
    if (digit == "1") return Verdict::yes;
    if (digit == "0") return Verdict::no;
    return Verdict::unparseable;
}

}  // namespace rise
