#pragma once

#include <array>
#include <optional>
#include <string>
#include <vector>

#include "rise/config.hpp"
#include "rise/grpo.hpp"
#include "rise/parsing.hpp"
#include "rise/rng.hpp"

namespace rise::toy {

// ============================================================================
// Scenes
// ============================================================================

struct ToyObject {
    std::string shape;
    std::string color;
    std::string size;
};

/// One answerable question template instantiated against a scene.
struct TemplateInstance {
    SkillCategory skill;
    QuestionType qtype = QuestionType::multiple_choice;
    std::string question;                  // base text, no difficulty suffix
    std::string answer;                    // ground truth
    std::vector<std::string> distractors;  // normalized-distinct from answer
};

/// A synthetic stand-in for one unlabeled image: an object table plus one
/// ground-truthed template per skill.
struct SceneSpec {
    std::string id;
    std::vector<ToyObject> objects;
    std::array<TemplateInstance, kNumSkills> templates;
};

/// Deterministic per stream. Object counts stay in [1, 9] per shape
/// category; exactly one pyramid; cube and sphere counts never tie; one
/// strictly dominant color.
SceneSpec sample_scene(RngStream rng);

/// What a question text resolves to on a given scene.
struct QuestionResolution {
    SkillCategory template_skill;
    int knob_level = 1;   // 1-based difficulty level parsed from the text
    std::string answer;   // ground truth ("0" for an absent-color count)
    std::vector<std::string> distractors;
    bool grounded = true;  // false when the question references off-scene content
};

/// Matches a toy question text against the scene's templates. nullopt when
/// the text is not a toy question for this scene.
std::optional<QuestionResolution> resolve_question(const SceneSpec& scene, std::string_view question_text);

/// True validity of a declared-skill question on a scene: it must resolve,
/// be grounded, and declare the skill of the template it instantiates.
bool true_validity(const SceneSpec& scene, std::string_view question_text, SkillCategory declared_skill);

/// Ground-truth answer of a resolvable question (normalized form).
std::optional<std::string> true_answer(const SceneSpec& scene, std::string_view question_text);

// ============================================================================
// Toy agents
// ============================================================================

/// One (skill, difficulty-knob) generation choice of the toy questioner.
struct QuestionerTuple {
    SkillCategory skill;
    int knob_level;  // 1-based
};

/// Learnable questioner: a softmax policy over (skill, knob) tuples.
/// Biased-knob mode restricts every skill except math & counting to the
/// easiest knob, which makes mid-range difficulty reachable only through
/// math questions.
struct ToyQuestionerState {
    std::vector<QuestionerTuple> tuples;
    ToyPolicy policy;

    static ToyQuestionerState make(const ToyParams& params);
    int tuple_index(SkillCategory skill, int knob_level) const;
};

/// Per-skill scalar competence solver.
struct ToySolverState {
    std::array<double, kNumSkills> theta{};

    static ToySolverState make(const ToyParams& params);
    double competence(SkillCategory k) const { return theta[static_cast<int>(k)]; }
    double mean_competence() const;
};

/// P(correct answer) for competence theta at knob fraction kappa in [0,1]:
/// sigmoid(logit(theta) + slope * (0.5 - kappa)). Equals theta at the
/// middle knob; increasing in theta, decreasing in kappa.
double solver_accuracy(double theta, double kappa, double slope);

/// Knob level -> kappa fraction in [0,1].
double knob_fraction(int knob_level, int knob_levels);

/// Samples a (skill, knob) tuple index from the questioner policy.
int sample_tuple_index(const ToyQuestionerState& state, RngStream& rng);

/// Emits the tagged output for one already-chosen tuple. With probability
/// invalid_rate the question is invalid by construction (skill-mismatched
/// declaration or an off-scene reference); with probability
/// format_corrupt_rate the tagged format itself is broken.
std::string questioner_emit_tuple(const ToyQuestionerState& state, int tuple_index,
                                  const SceneSpec& scene, const ToyParams& params, RngStream& rng);

/// sample_tuple_index followed by questioner_emit_tuple.
std::string questioner_emit(const ToyQuestionerState& state, const SceneSpec& scene,
                            const ToyParams& params, RngStream& rng);

/// One sampled solver response ("... \boxed{answer}").
/// Throws std::invalid_argument when the question resolves to no template.
std::string solver_answer(const ToySolverState& state, const SceneSpec& scene,
                          std::string_view question_text, const ToyParams& params, RngStream& rng);

/// One curated training record consumed by solver training.
struct PseudoExposure {
    std::string scene_id;
    SkillCategory declared_skill;
    std::string question_text;
    std::string pseudo_label;  // normalized
};

/// Scalar competence update: +eta per exposure whose pseudo-label matches
/// the scene ground truth, -eta_bad per mislabeled exposure, clamped to
/// [0,1] per skill. Returns the updated state.
ToySolverState solver_train(const ToySolverState& state, const std::vector<PseudoExposure>& batch,
                            const std::vector<const SceneSpec*>& scenes, const ToyParams& params);

/// Judge confusion behavior: flips the ground-truth verdict with the
/// configured recall / false-reject rates, deterministically per input.
struct SupervisorConfusion {
    double recall_on_problematic = 1.0;
    double false_reject_rate = 0.0;

    /// verdict 1 (accept) or 0 (flag); pure function of the arguments.
    int decide(bool truly_problematic, uint64_t judge_seed, std::string_view input_key) const;
};

}  // namespace rise::toy
