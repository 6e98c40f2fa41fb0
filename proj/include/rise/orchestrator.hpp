#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rise/agents.hpp"
#include "rise/config.hpp"
#include "rise/curation.hpp"
#include "rise/rewards.hpp"
#include "rise/telemetry.hpp"

namespace rise {

enum class PhaseKind { questioner_update, construct, solver_update, supervisor_refresh };

std::string_view phase_kind_name(PhaseKind kind);

struct PhaseEvent {
    PhaseKind kind = PhaseKind::questioner_update;
    int cycle = 0;                           // 1-based
    int step = 0;                            // 1-based within the phase; 0 for construct/refresh
    std::map<std::string, double> counters;  // ordered for byte-stable serialization
};

struct PhaseTrace {
    std::vector<PhaseEvent> events;

    std::string to_jsonl() const;
    int count(PhaseKind kind) const;
    int count(PhaseKind kind, int cycle) const;
};

/// Incremental persistence of one run directory: config snapshot first,
/// then trace events as they happen, shards per cycle, reports at the end.
/// An aborted run leaves a readable partial trace behind.
class RunWriter {
public:
    explicit RunWriter(std::filesystem::path dir);

    void write_config_snapshot(const ScheduleConfig& cfg);
    void append_event(const PhaseEvent& event);
    void write_shard_file(int cycle, const std::vector<PseudoSample>& samples);
    void write_reports(const std::vector<CycleReport>& reports);
    void write_scene_registry(const ToyWorld& world);

    const std::filesystem::path& dir() const { return dir_; }
    static std::filesystem::path shard_path(const std::filesystem::path& dir, int cycle);

private:
    std::filesystem::path dir_;
};

/// Mutable loop state threaded through the phases.
struct EvolutionState {
    AgentSet agents;
    std::shared_ptr<const ToyWorld> world;  // set in toy mode
    std::vector<ImageRef> images;           // image pool (toy scenes or ingested files)
    SkillStats skill_window;
    int cycle = 0;
    std::vector<double> competence_by_step;  // toy: mean solver competence after each solver step
};

struct EvolutionResult {
    PhaseTrace trace;
    std::vector<CycleReport> reports;
    std::vector<std::vector<PseudoSample>> shards;  // one per cycle
    SkillStats final_skill_window;
    std::optional<toy::ToySolverState> final_solver;          // toy mode
    std::optional<std::vector<double>> final_questioner_probs;  // toy mode
    std::vector<double> competence_by_step;                     // toy mode
};

/// b questioner update steps: batched question generation, difficulty
/// scoring via M solver samples, validity verdicts, r_q rewards, and (toy
/// mode) one GRPO step per update step on the questioner policy.
void questioner_phase(EvolutionState& state, const ScheduleConfig& cfg, RngStream rng,
                      PhaseTrace& trace, RunWriter* writer);

/// One construct stage: build candidates, filter, stratify, and record the
/// cycle report. Returns the curated shard.
std::vector<PseudoSample> construct_stage(EvolutionState& state, const ScheduleConfig& cfg,
                                          RngStream rng, PhaseTrace& trace, CycleReport& report,
                                          RunWriter* writer);

/// b solver update steps over the shard: G rollouts per sample, r_s
/// rewards, and (toy mode) the scalar competence update. An empty shard
/// skips the phase with a warning event.
void solver_phase(EvolutionState& state, const std::vector<PseudoSample>& shard,
                  const ScheduleConfig& cfg, RngStream rng, PhaseTrace& trace, RunWriter* writer);

/// Replaces the window with the declared-skill histogram of the
/// just-constructed cycle's generated questions.
SkillStats update_skill_window(const SkillStats& stats, const std::array<int, kNumSkills>& constructed);

/// Runs cycles_n cycles of (questioner phase, construct, solver phase,
/// supervisor refresh). With cycles_n = 1 the trace reproduces the
/// coarse-grained three-stage pipeline.
EvolutionResult run_evolution(const ScheduleConfig& cfg, EvolutionState state, RunWriter* writer = nullptr);

/// Toy-mode state for a config (world, agents, scene image pool).
EvolutionState make_toy_state(const ScheduleConfig& cfg);

}  // namespace rise
