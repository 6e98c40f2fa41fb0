#include "rise/agents.hpp"

#include <stdexcept>

namespace rise {

namespace {

void require_role(const AgentHandle& h, Role role, const char* op) {
    if (h.role != role) throw std::invalid_argument(std::string(op) + ": handle has the wrong role");
    if (!h.backend) throw std::invalid_argument(std::string(op) + ": handle has no backend");
}

}  // namespace

std::string generate_question(const AgentHandle& h, const ImageRef& image, RngStream& rng) {
    require_role(h, Role::questioner, "generate_question");
    return h.backend->generate_question(image, rng);
}

std::string solve(const AgentHandle& h, const ImageRef& image, const std::string& question, RngStream& rng) {
    require_role(h, Role::solver, "solve");
    return h.backend->solve(image, question, rng);
}

JudgeVerdict judge_validity(const AgentHandle& h, const ImageRef& image, const QuestionRecord& question) {
    require_role(h, Role::supervisor, "judge_validity");
    JudgeVerdict out;
    out.kind = JudgeVerdict::Kind::validity;
    out.raw = h.backend->judge_validity_raw(image, question);
    out.verdict = parse_binary_verdict(out.raw);
    return out;
}

JudgeVerdict verify_answer(const AgentHandle& h, const ImageRef& image, const std::string& question,
                           const ExtractedAnswer& candidate) {
    require_role(h, Role::supervisor, "verify_answer");
    JudgeVerdict out;
    out.kind = JudgeVerdict::Kind::verification;
    out.raw = h.backend->verify_answer_raw(image, question, candidate);
    out.verdict = parse_binary_verdict(out.raw);
    return out;
}

// ============================================================================
// Toy world registry
// ============================================================================

ToyWorld::ToyWorld(const ToyParams& params, uint64_t seed) : seed_(seed) {
    RngStream root(seed);
    scenes_.reserve(params.scene_pool);
    for (int i = 0; i < params.scene_pool; ++i) {
        toy::SceneSpec scene = toy::sample_scene(root.split("scene").split(static_cast<uint64_t>(i)));
        scene.id = "scene-" + std::to_string(i);
        scenes_.push_back(std::move(scene));
    }
}

const toy::SceneSpec& ToyWorld::scene(const ImageRef& image) const {
    if (image.kind != ImageRef::Kind::synthetic)
        throw std::invalid_argument("ToyWorld: expected a synthetic image ref");
    for (const auto& s : scenes_)
        if (s.id == image.value) return s;
    throw std::invalid_argument("ToyWorld: unknown scene id '" + image.value + "'");
}

ImageRef ToyWorld::image_for(size_t index) const { return ImageRef::synthetic(scenes_.at(index).id); }

// ============================================================================
// Toy backends
// ============================================================================

std::string ToyQuestionerBackend::generate_question(const ImageRef& image, RngStream& rng) {
    return toy::questioner_emit(state_, world_->scene(image), params_, rng);
}

std::string ToyQuestionerBackend::solve(const ImageRef&, const std::string&, RngStream&) {
    throw std::logic_error("toy questioner backend cannot solve");
}

std::string ToyQuestionerBackend::judge_validity_raw(const ImageRef&, const QuestionRecord&) {
    throw std::logic_error("toy questioner backend cannot judge");
}

std::string ToyQuestionerBackend::verify_answer_raw(const ImageRef&, const std::string&,
                                                    const ExtractedAnswer&) {
    throw std::logic_error("toy questioner backend cannot judge");
}

std::string ToySolverBackend::generate_question(const ImageRef&, RngStream&) {
    throw std::logic_error("toy solver backend cannot generate questions");
}

std::string ToySolverBackend::solve(const ImageRef& image, const std::string& question, RngStream& rng) {
    return toy::solver_answer(state_, world_->scene(image), question, params_, rng);
}

std::string ToySolverBackend::judge_validity_raw(const ImageRef& image, const QuestionRecord& question) {
    const auto& scene = world_->scene(image);
    const bool problematic = !toy::true_validity(scene, question.text, question.skill);
    toy::SupervisorConfusion confusion{params_.judge_recall, params_.judge_false_reject};
    const std::string key = scene.id + "|v|" + std::string(skill_slug(question.skill)) + "|" + question.text;
    const int verdict = confusion.decide(problematic, world_->seed(), key);
    return verdict == 1 ? "The question is well-posed and image-grounded. \\boxed{1}"
                        : "The question is not a valid grounded question. \\boxed{0}";
}

std::string ToySolverBackend::verify_answer_raw(const ImageRef& image, const std::string& question,
                                                const ExtractedAnswer& candidate) {
    const auto& scene = world_->scene(image);
    auto truth = toy::true_answer(scene, question);
    const bool problematic = !truth || *truth != candidate.normalized;
    toy::SupervisorConfusion confusion{params_.judge_recall, params_.judge_false_reject};
    const std::string key = scene.id + "|u|" + question + "|" + candidate.normalized;
    const int verdict = confusion.decide(problematic, world_->seed(), key);
    return verdict == 1 ? "The candidate answer matches the image. \\boxed{1}"
                        : "The candidate answer is not correct. \\boxed{0}";
}

AgentSet make_toy_agents(const ScheduleConfig& cfg, std::shared_ptr<const ToyWorld> world) {
    SamplingParams sampling{cfg.temperature, cfg.top_p, cfg.max_tokens};
    AgentSet agents;
    agents.questioner = {Role::questioner, std::make_shared<ToyQuestionerBackend>(world, cfg.toy), sampling};
    agents.solver = {Role::solver, std::make_shared<ToySolverBackend>(world, cfg.toy), sampling};
    agents.supervisor = {Role::supervisor, agents.solver.backend, SamplingParams{0.0, cfg.top_p, cfg.max_tokens}};
    return agents;
}

}  // namespace rise
