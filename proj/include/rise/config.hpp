#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace rise {

// ============================================================================
// Domain enums
// ============================================================================

enum class SkillCategory {
    coarse_perception = 0,
    fine_grained_perception,
    instance_reasoning,
    logical_reasoning,
    math_and_counting,
    science_and_technology,
};

inline constexpr int kNumSkills = 6;

inline constexpr std::array<SkillCategory, kNumSkills> all_skills() {
    return {SkillCategory::coarse_perception,    SkillCategory::fine_grained_perception,
            SkillCategory::instance_reasoning,   SkillCategory::logical_reasoning,
            SkillCategory::math_and_counting,    SkillCategory::science_and_technology};
}

/// Canonical slug, e.g. "math-and-counting". Used in shard files and CSVs.
std::string_view skill_slug(SkillCategory k);

/// Label as it appears in prompt text, e.g. "math & counting".
std::string_view skill_label(SkillCategory k);

/// Parses a skill label tolerating case, surrounding whitespace and the
/// "&"/"and" spelling variants. Returns nullopt for anything else.
std::optional<SkillCategory> parse_skill(std::string_view text);

enum class QuestionType {
    multiple_choice = 0,
    numerical,
    regression,
};

inline constexpr int kNumQuestionTypes = 3;

std::string_view question_type_slug(QuestionType t);
std::string_view question_type_label(QuestionType t);
std::optional<QuestionType> parse_question_type(std::string_view text);

// ============================================================================
// ImageRef
// ============================================================================

/// Either a filesystem image or a synthetic toy-world scene id.
struct ImageRef {
    enum class Kind { file, synthetic };

    Kind kind = Kind::synthetic;
    std::string value;  // path or scene id

    static ImageRef file(std::string path) { return {Kind::file, std::move(path)}; }
    static ImageRef synthetic(std::string scene_id) { return {Kind::synthetic, std::move(scene_id)}; }

    std::string to_string() const;
    static std::optional<ImageRef> from_string(std::string_view s);

    bool operator==(const ImageRef&) const = default;
};

// ============================================================================
// ScheduleConfig
// ============================================================================

/// Knobs of the synthetic toy world. Loaded from the same flat config file
/// under toy_-prefixed keys.
struct ToyParams {
    double theta0 = 0.5;               // initial per-skill solver competence
    double eta = 0.02;                 // competence gain per correct-label exposure
    double eta_bad = 0.04;             // competence loss per mislabeled exposure
    double invalid_rate = 0.1;         // prob. of emitting an invalid-by-construction question
    double format_corrupt_rate = 0.0;  // prob. of corrupting the tagged output format
    double judge_recall = 0.9;         // P(flag | problematic)
    double judge_false_reject = 0.165; // P(flag | clean)
    bool biased_knobs = false;         // restrict non-math skills to the easiest difficulty knob
    double logistic_slope = 4.0;       // knob slope of the solver accuracy curve
    int knob_levels = 5;               // difficulty knob levels per template
    int scene_pool = 64;               // scenes available per run

    bool operator==(const ToyParams&) const = default;
};

/// Run configuration; drives the alternation state machine.
/// Immutable after load; safe to share across workers.
struct ScheduleConfig {
    int total_budget_B = 20;   // per-role update steps over the whole run
    int cycles_n = 4;          // alternation cycles
    int phase_len_b = 5;       // update steps per role per cycle
    int batch_size = 256;      // images (or shard samples) per update step
    int rollouts_G = 8;        // group size per prompt
    int samples_M = 10;        // solver samples per question
    double tau_min = 0.3;      // self-consistency retention range, inclusive
    double tau_max = 0.8;
    double lambda_v = 0.2;     // validity term weight
    double lambda_s = 0.2;     // skill bonus weight
    double eps_norm = 1e-6;    // advantage normalizer
    double eps_clip = 0.2;     // surrogate clip half-width
    double temperature = 1.0;  // sampling controls forwarded to backends
    double top_p = 0.99;
    int max_concurrency = 8;
    uint64_t seed = 0;

    int max_tokens = 1024;                // generation cap forwarded to backends
    int candidates_per_construct = 256;   // images consumed by one construct phase
    int shard_target = 256;               // stratified-sample target per construct
    bool supervisor_enabled = true;       // v/u judging on or off
    bool drop_ties = false;               // drop tie-flagged candidates during curation
    double step_size = 0.1;               // toy-policy gradient step
    std::string remote_model;             // model name for the remote backend

    ToyParams toy;

    bool operator==(const ScheduleConfig&) const = default;
};

class ConfigError : public std::runtime_error {
public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Parses a flat key-value document ("key = value" lines, '#' comments) into
/// a fully populated config. Absent keys take the defaults above. Unknown
/// keys, parse failures and invariant violations raise ConfigError; all
/// invariant violations are reported together.
ScheduleConfig load_config(std::string_view source);

/// Returns one message per violated invariant; empty means valid.
std::vector<std::string> validate_config(const ScheduleConfig& cfg);

/// Flat key-value rendering; load_config(serialize_config(c)) == c.
std::string serialize_config(const ScheduleConfig& cfg);

// ----------------------------------------------------------------------------
// Small string helpers shared by parsing and config code.
// ----------------------------------------------------------------------------

std::string trim_copy(std::string_view s);
std::string ascii_lower(std::string_view s);
std::string collapse_spaces(std::string_view s);

}  // namespace rise
