#pragma once

#include <memory>
#include <string>

#include "rise/config.hpp"
#include "rise/parsing.hpp"
#include "rise/rng.hpp"
#include "rise/toyworld.hpp"

namespace rise {

enum class Role { questioner, solver, supervisor };

struct SamplingParams {
    double temperature = 1.0;
    double top_p = 0.99;
    int max_tokens = 1024;
};

/// Transport-level failure after the retry budget is exhausted.
class BackendError : public std::runtime_error {
public:
    explicit BackendError(const std::string& what) : std::runtime_error(what) {}
};

/// The four role operations every backend provides. Generation is sampled
/// through the caller-owned RNG stream; judging is greedy and stream-free.
class Backend {
public:
    virtual ~Backend() = default;

    virtual std::string generate_question(const ImageRef& image, RngStream& rng) = 0;
    virtual std::string solve(const ImageRef& image, const std::string& question, RngStream& rng) = 0;
    virtual std::string judge_validity_raw(const ImageRef& image, const QuestionRecord& question) = 0;
    virtual std::string verify_answer_raw(const ImageRef& image, const std::string& question,
                                          const ExtractedAnswer& candidate) = 0;
};

/// A role bound to a backend. The supervisor handle aliases the solver
/// backend object; refresh re-points it after each solver phase.
struct AgentHandle {
    Role role = Role::solver;
    std::shared_ptr<Backend> backend;
    SamplingParams sampling;
};

struct JudgeVerdict {
    enum class Kind { validity, verification };
    Verdict verdict = Verdict::unparseable;
    Kind kind = Kind::validity;
    std::string raw;
};

/// Raw questioner output for one image.
std::string generate_question(const AgentHandle& h, const ImageRef& image, RngStream& rng);

/// One sampled solver response; M independent calls with distinct streams
/// make up a consistency sample set.
std::string solve(const AgentHandle& h, const ImageRef& image, const std::string& question, RngStream& rng);

/// Greedy validity judgment v(x,q,k); unparseable verdicts map to v=0 downstream.
JudgeVerdict judge_validity(const AgentHandle& h, const ImageRef& image, const QuestionRecord& question);

/// Greedy answer verification u(x,q,y).
JudgeVerdict verify_answer(const AgentHandle& h, const ImageRef& image, const std::string& question,
                           const ExtractedAnswer& candidate);

// ============================================================================
// Toy backends
// ============================================================================

/// Scene registry shared by the toy backends.
class ToyWorld {
public:
    ToyWorld(const ToyParams& params, uint64_t seed);

    const toy::SceneSpec& scene(const ImageRef& image) const;  // throws on unknown id
    const std::vector<toy::SceneSpec>& scenes() const { return scenes_; }
    ImageRef image_for(size_t index) const;
    size_t size() const { return scenes_.size(); }
    uint64_t seed() const { return seed_; }

private:
    std::vector<toy::SceneSpec> scenes_;
    uint64_t seed_;
};

class ToyQuestionerBackend : public Backend {
public:
    ToyQuestionerBackend(std::shared_ptr<const ToyWorld> world, ToyParams params)
        : world_(std::move(world)), params_(params), state_(toy::ToyQuestionerState::make(params_)) {}

    std::string generate_question(const ImageRef& image, RngStream& rng) override;
    std::string solve(const ImageRef&, const std::string&, RngStream&) override;
    std::string judge_validity_raw(const ImageRef&, const QuestionRecord&) override;
    std::string verify_answer_raw(const ImageRef&, const std::string&, const ExtractedAnswer&) override;

    toy::ToyQuestionerState& state() { return state_; }
    const toy::ToyQuestionerState& state() const { return state_; }

private:
    std::shared_ptr<const ToyWorld> world_;
    ToyParams params_;
    toy::ToyQuestionerState state_;
};

/// Solver and supervisor in one object: the supervisor role is the same
/// backend judged with confusion parameters against scene ground truth.
class ToySolverBackend : public Backend {
public:
    ToySolverBackend(std::shared_ptr<const ToyWorld> world, ToyParams params)
        : world_(std::move(world)), params_(params), state_(toy::ToySolverState::make(params_)) {}

    std::string generate_question(const ImageRef&, RngStream&) override;
    std::string solve(const ImageRef& image, const std::string& question, RngStream& rng) override;
    std::string judge_validity_raw(const ImageRef& image, const QuestionRecord& question) override;
    std::string verify_answer_raw(const ImageRef& image, const std::string& question,
                                  const ExtractedAnswer& candidate) override;

    toy::ToySolverState& state() { return state_; }
    const toy::ToySolverState& state() const { return state_; }
    const ToyWorld& world() const { return *world_; }

private:
    std::shared_ptr<const ToyWorld> world_;
    ToyParams params_;
    toy::ToySolverState state_;
};

/// The three role handles of one run. make_toy_agents wires the supervisor
/// to the solver backend object.
struct AgentSet {
    AgentHandle questioner;
    AgentHandle solver;
    AgentHandle supervisor;

    /// Re-points the supervisor at the current solver backend.
    void refresh_supervisor() { supervisor.backend = solver.backend; }
};

AgentSet make_toy_agents(const ScheduleConfig& cfg, std::shared_ptr<const ToyWorld> world);

}  // namespace rise
