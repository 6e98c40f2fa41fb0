#include "rise/toyworld.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace rise::toy {

namespace {

constexpr std::array<std::string_view, 4> kColors = {"red", "blue", "green", "yellow"};
constexpr std::array<std::string_view, 2> kOffSceneColors = {"purple", "orange"};

std::string count_question(std::string_view color) {
    return "How many " + std::string(color) + " objects are in this scene?";
}

constexpr std::string_view kCoarseQuestion =
    "Considering every object in this scene, which color appears most often?";
constexpr std::string_view kFineQuestion = "What is the color of the pyramid in this scene?";
constexpr std::string_view kInstanceQuestion = "Are there more cubes than spheres in this scene?";
constexpr std::string_view kLogicalQuestion =
    "If every red object were removed from this scene, would at least one cube remain?";
constexpr std::string_view kSciQuestion =
    "Which shape present in this scene would roll in every orientation on a flat surface?";

std::map<std::string, int> color_counts(const std::vector<ToyObject>& objects) {
    std::map<std::string, int> counts;
    for (const auto& o : objects) ++counts[o.color];
    return counts;
}

std::string dominant_color(const std::vector<ToyObject>& objects) {
    auto counts = color_counts(objects);
    int best = 0;
    std::string winner;
    for (std::string_view c : kColors) {
        auto it = counts.find(std::string(c));
        int n = it == counts.end() ? 0 : it->second;
        if (n > best) {
            best = n;
            winner = c;
        }
    }
    return winner;
}

std::vector<std::string> other_colors(std::string_view truth) {
    std::vector<std::string> out;
    for (std::string_view c : kColors)
        if (c != truth) out.emplace_back(c);
    return out;
}

std::vector<std::string> count_distractors(int truth) {
    std::vector<std::string> out;
    for (int delta : {-2, -1, 1, 2}) {
        int v = truth + delta;
        if (v >= 0) out.push_back(std::to_string(v));
    }
    return out;
}

}  // namespace

SceneSpec sample_scene(RngStream rng) {
    SceneSpec scene;
    scene.id = "scene-" + std::to_string(rng.split("id").next_u64() % 1000000000ull);

    RngStream counts_rng = rng.split("counts");
    const int cubes = 1 + static_cast<int>(counts_rng.next_below(9));
    int spheres = 1 + static_cast<int>(counts_rng.next_below(8));
    if (spheres >= cubes) ++spheres;  // never tie with cubes
    const int cylinders = 1 + static_cast<int>(counts_rng.next_below(9));
    const int pyramids = 1;

    RngStream color_rng = rng.split("colors");
    auto add_objects = [&](std::string_view shape, int n) {
        for (int i = 0; i < n; ++i) {
            ToyObject o;
            o.shape = shape;
            o.color = kColors[color_rng.next_below(kColors.size())];
            o.size = color_rng.next_bernoulli(0.5) ? "large" : "small";
            scene.objects.push_back(std::move(o));
        }
    };
    add_objects("cube", cubes);
    add_objects("sphere", spheres);
    add_objects("cylinder", cylinders);
    add_objects("pyramid", pyramids);

    // Enforce a strictly dominant color by recoloring ties toward the
    // first tied palette entry.
    for (;;) {
        auto counts = color_counts(scene.objects);
        int best = 0;
        for (const auto& [c, n] : counts) best = std::max(best, n);
        std::vector<std::string> tied;
        for (std::string_view c : kColors) {
            auto it = counts.find(std::string(c));
            if (it != counts.end() && it->second == best) tied.emplace_back(c);
        }
        if (tied.size() <= 1) break;
        for (auto& o : scene.objects) {
            if (o.color == tied[1]) {
                o.color = tied[0];
                break;
            }
        }
    }

    const std::string dominant = dominant_color(scene.objects);
    const int total_cubes = cubes;
    int nonred_cubes = 0;
    std::string pyramid_color;
    for (const auto& o : scene.objects) {
        if (o.shape == "cube" && o.color != "red") ++nonred_cubes;
        if (o.shape == "pyramid") pyramid_color = o.color;
    }

    auto& t = scene.templates;
    t[0] = {SkillCategory::coarse_perception, QuestionType::multiple_choice, std::string(kCoarseQuestion),
            dominant, other_colors(dominant)};
    t[1] = {SkillCategory::fine_grained_perception, QuestionType::multiple_choice, std::string(kFineQuestion),
            pyramid_color, other_colors(pyramid_color)};
    const std::string more_cubes = total_cubes > spheres ? "yes" : "no";
    t[2] = {SkillCategory::instance_reasoning, QuestionType::multiple_choice, std::string(kInstanceQuestion),
            more_cubes, {more_cubes == "yes" ? "no" : "yes"}};
    const std::string cubes_remain = nonred_cubes > 0 ? "yes" : "no";
    t[3] = {SkillCategory::logical_reasoning, QuestionType::multiple_choice, std::string(kLogicalQuestion),
            cubes_remain, {cubes_remain == "yes" ? "no" : "yes"}};
    // The math template is parameterized by color at emission time; the
    // stored instance uses the dominant color (always present).
    auto counts = color_counts(scene.objects);
    const int dom_count = counts[dominant];
    t[4] = {SkillCategory::math_and_counting, QuestionType::numerical, count_question(dominant),
            std::to_string(dom_count), count_distractors(dom_count)};
    t[5] = {SkillCategory::science_and_technology, QuestionType::multiple_choice, std::string(kSciQuestion),
            "sphere", {"cube", "pyramid", "cylinder"}};
    return scene;
}

// ----------------------------------------------------------------------------
// Question text <-> template resolution
// ----------------------------------------------------------------------------

namespace {

constexpr std::string_view kDifficultyPrefix = " (difficulty ";

struct SplitQuestion {
    std::string base;
    int knob_level = 1;
};

std::optional<SplitQuestion> split_difficulty_suffix(std::string_view text) {
    size_t pos = text.rfind(kDifficultyPrefix);
    if (pos == std::string_view::npos || !text.ends_with(")")) return std::nullopt;
    std::string_view inner = text.substr(pos + kDifficultyPrefix.size(),
                                         text.size() - 1 - pos - kDifficultyPrefix.size());
    size_t slash = inner.find('/');
    if (slash == std::string_view::npos) return std::nullopt;
    int level = 0;
    for (char c : inner.substr(0, slash)) {
        if (c < '0' || c > '9') return std::nullopt;
        if (level > 100000000) return std::nullopt;  // keep adversarial inputs in int range
        level = level * 10 + (c - '0');
    }
    if (level < 1) return std::nullopt;
    return SplitQuestion{std::string(text.substr(0, pos)), level};
}

}  // namespace

std::optional<QuestionResolution> resolve_question(const SceneSpec& scene, std::string_view question_text) {
    auto split = split_difficulty_suffix(question_text);
    if (!split) return std::nullopt;

    QuestionResolution res;
    res.knob_level = split->knob_level;

    // Parameterless templates first.
    for (const auto& tmpl : scene.templates) {
        if (tmpl.skill == SkillCategory::math_and_counting) continue;
        if (split->base == tmpl.question) {
            res.template_skill = tmpl.skill;
            res.answer = tmpl.answer;
            res.distractors = tmpl.distractors;
            return res;
        }
    }

    // Count template: "How many <color> objects are in this scene?"
    constexpr std::string_view prefix = "How many ";
    constexpr std::string_view suffix = " objects are in this scene?";
    if (split->base.starts_with(prefix) && split->base.ends_with(suffix) &&
        split->base.size() > prefix.size() + suffix.size()) {
        const std::string color =
            split->base.substr(prefix.size(), split->base.size() - prefix.size() - suffix.size());
        auto counts = color_counts(scene.objects);
        auto it = counts.find(color);
        const int truth = it == counts.end() ? 0 : it->second;
        const bool known_color = std::find(kColors.begin(), kColors.end(), color) != kColors.end();
        res.template_skill = SkillCategory::math_and_counting;
        res.answer = std::to_string(truth);
        res.distractors = count_distractors(truth);
        res.grounded = known_color && truth > 0;
        return res;
    }
    return std::nullopt;
}

bool true_validity(const SceneSpec& scene, std::string_view question_text, SkillCategory declared_skill) {
    auto res = resolve_question(scene, question_text);
    return res && res->grounded && res->template_skill == declared_skill;
}

std::optional<std::string> true_answer(const SceneSpec& scene, std::string_view question_text) {
    auto res = resolve_question(scene, question_text);
    if (!res) return std::nullopt;
    return normalize_answer(res->answer);
}

// ----------------------------------------------------------------------------
// Toy agents
// ----------------------------------------------------------------------------

ToyQuestionerState ToyQuestionerState::make(const ToyParams& params) {
    ToyQuestionerState state;
    for (SkillCategory skill : all_skills()) {
        const bool full_grid =
            !params.biased_knobs || skill == SkillCategory::math_and_counting;
        const int levels = full_grid ? params.knob_levels : 1;
        for (int level = 1; level <= levels; ++level) state.tuples.push_back({skill, level});
    }
    state.policy = ToyPolicy(std::vector<double>(state.tuples.size(), 0.0));
    return state;
}

int ToyQuestionerState::tuple_index(SkillCategory skill, int knob_level) const {
    for (size_t i = 0; i < tuples.size(); ++i)
        if (tuples[i].skill == skill && tuples[i].knob_level == knob_level) return static_cast<int>(i);
    return -1;
}

ToySolverState ToySolverState::make(const ToyParams& params) {
    ToySolverState state;
    state.theta.fill(params.theta0);
    return state;
}

double ToySolverState::mean_competence() const {
    double sum = 0.0;
    for (double t : theta) sum += t;
    return sum / kNumSkills;
}

double knob_fraction(int knob_level, int knob_levels) {
    if (knob_levels <= 1) return 0.5;
    return static_cast<double>(knob_level - 1) / static_cast<double>(knob_levels - 1);
}

double solver_accuracy(double theta, double kappa, double slope) {
    const double t = std::clamp(theta, 1e-9, 1.0 - 1e-9);
    const double z = std::log(t / (1.0 - t)) + slope * (0.5 - kappa);
    return 1.0 / (1.0 + std::exp(-z));
}

namespace {

std::string tagged_output(SkillCategory skill, QuestionType qtype, std::string_view question) {
    std::string out;
    out += "<skill>";
    out += skill_label(skill);
    out += "</skill>\n<type>";
    out += question_type_label(qtype);
    out += "</type>\n<question>";
    out += question;
    out += "</question>";
    return out;
}

std::string present_color(const SceneSpec& scene, RngStream& rng) {
    auto counts = color_counts(scene.objects);
    std::vector<std::string> present;
    for (std::string_view c : kColors) {
        auto it = counts.find(std::string(c));
        if (it != counts.end() && it->second > 0) present.emplace_back(c);
    }
    return present[rng.next_below(present.size())];
}

}  // namespace

int sample_tuple_index(const ToyQuestionerState& state, RngStream& rng) {
    const std::vector<double> probs = state.policy.probs();
    double u = rng.next_unit();
    size_t idx = 0;
    for (; idx + 1 < probs.size(); ++idx) {
        if (u < probs[idx]) break;
        u -= probs[idx];
    }
    return static_cast<int>(idx);
}

std::string questioner_emit_tuple(const ToyQuestionerState& state, int tuple_index,
                                  const SceneSpec& scene, const ToyParams& params, RngStream& rng) {
    const QuestionerTuple tuple = state.tuples.at(tuple_index);
    const std::string suffix = " (difficulty " + std::to_string(tuple.knob_level) + "/" +
                               std::to_string(params.knob_levels) + ")";

    const TemplateInstance& tmpl = scene.templates[static_cast<int>(tuple.skill)];
    SkillCategory declared = tuple.skill;
    std::string base = tmpl.question;
    QuestionType qtype = tmpl.qtype;
    if (tuple.skill == SkillCategory::math_and_counting)
        base = count_question(present_color(scene, rng));

    if (rng.next_bernoulli(params.invalid_rate)) {
        if (rng.next_bernoulli(0.5)) {
            // Skill-mismatched declaration.
            declared = all_skills()[(static_cast<int>(tuple.skill) + 1 + rng.next_below(kNumSkills - 1)) %
                                    kNumSkills];
        } else {
            // Off-scene reference: a count question about an absent color.
            base = count_question(kOffSceneColors[rng.next_below(kOffSceneColors.size())]);
            declared = SkillCategory::math_and_counting;
            qtype = QuestionType::numerical;
        }
    }

    std::string out = tagged_output(declared, qtype, base + suffix);
    if (rng.next_bernoulli(params.format_corrupt_rate)) {
        const size_t cut = out.rfind("</question>");
        out = out.substr(0, cut);  // drop the closing tag
    }
    return out;
}

std::string questioner_emit(const ToyQuestionerState& state, const SceneSpec& scene,
                            const ToyParams& params, RngStream& rng) {
    const int idx = sample_tuple_index(state, rng);
    return questioner_emit_tuple(state, idx, scene, params, rng);
}

std::string solver_answer(const ToySolverState& state, const SceneSpec& scene,
                          std::string_view question_text, const ToyParams& params, RngStream& rng) {
    auto res = resolve_question(scene, question_text);
    if (!res) throw std::invalid_argument("solver_answer: question matches no toy template");

    const double kappa = knob_fraction(res->knob_level, params.knob_levels);
    const double theta = state.competence(res->template_skill);
    const double accuracy = solver_accuracy(theta, kappa, params.logistic_slope);

    std::string answer;
    if (rng.next_bernoulli(accuracy) || res->distractors.empty()) {
        answer = res->answer;
    } else {
        answer = res->distractors[rng.next_below(res->distractors.size())];
    }
    return "Looking at the scene objects step by step. \\boxed{" + answer + "}";
}

ToySolverState solver_train(const ToySolverState& state, const std::vector<PseudoExposure>& batch,
                            const std::vector<const SceneSpec*>& scenes, const ToyParams& params) {
    if (batch.size() != scenes.size())
        throw std::invalid_argument("solver_train: batch/scenes length mismatch");

    ToySolverState updated = state;
    for (size_t i = 0; i < batch.size(); ++i) {
        const auto& sample = batch[i];
        auto truth = scenes[i] ? true_answer(*scenes[i], sample.question_text) : std::nullopt;
        const bool correct = truth && *truth == sample.pseudo_label;
        double& theta = updated.theta[static_cast<int>(sample.declared_skill)];
        theta += correct ? params.eta : -params.eta_bad;
        theta = std::clamp(theta, 0.0, 1.0);
    }
    return updated;
}

int SupervisorConfusion::decide(bool truly_problematic, uint64_t judge_seed,
                                std::string_view input_key) const {
    RngStream stream = RngStream(judge_seed).split("judge").split(input_key);
    const double flip = stream.next_unit();
    if (truly_problematic) return flip < recall_on_problematic ? 0 : 1;
    return flip < false_reject_rate ? 0 : 1;
}

}  // namespace rise::toy
