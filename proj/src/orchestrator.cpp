#include "rise/orchestrator.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>

#include <json.hpp>

#include "rise/grpo.hpp"

namespace rise {

namespace {

std::string fmt6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

}  // namespace

std::string_view phase_kind_name(PhaseKind kind) {
    switch (kind) {
        case PhaseKind::questioner_update: return "questioner-update";
        case PhaseKind::construct: return "construct";
        case PhaseKind::solver_update: return "solver-update";
        case PhaseKind::supervisor_refresh: return "supervisor-refresh";
    }
    return "unknown";
}

std::string PhaseTrace::to_jsonl() const {
    std::string out;
    for (const auto& e : events) {
        out += "{\"phase\":\"";
        out += phase_kind_name(e.kind);
        out += "\",\"cycle\":" + std::to_string(e.cycle);
        out += ",\"step\":" + std::to_string(e.step);
        out += ",\"counters\":{";
        bool first = true;
        for (const auto& [key, value] : e.counters) {
            if (!first) out += ",";
            first = false;
            out += "\"" + key + "\":" + fmt6(value);
        }
        out += "}}\n";
    }
    return out;
}

int PhaseTrace::count(PhaseKind kind) const {
    int n = 0;
    for (const auto& e : events) n += e.kind == kind ? 1 : 0;
    return n;
}

int PhaseTrace::count(PhaseKind kind, int cycle) const {
    int n = 0;
    for (const auto& e : events) n += (e.kind == kind && e.cycle == cycle) ? 1 : 0;
    return n;
}

// ============================================================================
// RunWriter
// ============================================================================

RunWriter::RunWriter(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
    std::filesystem::create_directories(dir_ / "shards");
    // Truncate the trace so appends start clean.
    std::ofstream(dir_ / "trace.jsonl", std::ios::binary | std::ios::trunc);
}

void RunWriter::write_config_snapshot(const ScheduleConfig& cfg) {
    std::ofstream f(dir_ / "config.snapshot.toml", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write config snapshot");
    f << serialize_config(cfg);
}

void RunWriter::append_event(const PhaseEvent& event) {
    std::ofstream f(dir_ / "trace.jsonl", std::ios::binary | std::ios::app);
    PhaseTrace one;
    one.events.push_back(event);
    f << one.to_jsonl();
}

std::filesystem::path RunWriter::shard_path(const std::filesystem::path& dir, int cycle) {
    char name[32];
    std::snprintf(name, sizeof(name), "cycle_%03d.jsonl", cycle);
    return dir / "shards" / name;
}

void RunWriter::write_shard_file(int cycle, const std::vector<PseudoSample>& samples) {
    write_shard(samples, shard_path(dir_, cycle));
}

void RunWriter::write_reports(const std::vector<CycleReport>& reports) { emit_reports(reports, dir_); }

void RunWriter::write_scene_registry(const ToyWorld& world) {
    std::ofstream f(dir_ / "scenes.jsonl", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write scenes.jsonl");
    for (const auto& scene : world.scenes()) {
        nlohmann::ordered_json line;
        line["id"] = scene.id;
        line["objects"] = nlohmann::ordered_json::array();
        for (const auto& o : scene.objects)
            line["objects"].push_back({{"shape", o.shape}, {"color", o.color}, {"size", o.size}});
        line["templates"] = nlohmann::ordered_json::array();
        for (const auto& t : scene.templates) {
            nlohmann::ordered_json tmpl;
            tmpl["skill"] = std::string(skill_slug(t.skill));
            tmpl["qtype"] = std::string(question_type_slug(t.qtype));
            tmpl["question"] = t.question;
            tmpl["answer"] = t.answer;
            tmpl["distractors"] = t.distractors;
            line["templates"].push_back(std::move(tmpl));
        }
        f << line.dump() << "\n";
    }
}

// ============================================================================
// Shared phase helpers
// ============================================================================

namespace {

void record_event(PhaseTrace& trace, RunWriter* writer, PhaseEvent event) {
    if (writer) writer->append_event(event);
    trace.events.push_back(std::move(event));
}

std::vector<ImageRef> sample_batch(const std::vector<ImageRef>& pool, int batch_size, RngStream& rng) {
    std::vector<ImageRef> batch;
    batch.reserve(batch_size);
    for (int i = 0; i < batch_size; ++i) batch.push_back(pool[rng.next_below(pool.size())]);
    return batch;
}

ToyQuestionerBackend* toy_questioner(const EvolutionState& state) {
    return dynamic_cast<ToyQuestionerBackend*>(state.agents.questioner.backend.get());
}

ToySolverBackend* toy_solver(const EvolutionState& state) {
    return dynamic_cast<ToySolverBackend*>(state.agents.solver.backend.get());
}

}  // namespace

// ============================================================================
// Questioner phase
// ============================================================================

void questioner_phase(EvolutionState& state, const ScheduleConfig& cfg, RngStream rng,
                      PhaseTrace& trace, RunWriter* writer) {
    auto* toy_q = toy_questioner(state);
    const SkillStats stats = state.skill_window;  // immutable snapshot for the phase

    for (int step = 1; step <= cfg.phase_len_b; ++step) {
        RngStream step_rng = rng.split("qstep").split(static_cast<uint64_t>(step));
        RngStream batch_rng = step_rng.split("images");
        const std::vector<ImageRef> batch = sample_batch(state.images, cfg.batch_size, batch_rng);

        if (toy_q) toy_q->state().policy.snapshot();  // freeze pi_old for this update step

        std::vector<ActionGroup> groups;
        groups.reserve(batch.size());
        int questions = 0, parsed = 0, invalid = 0;
        double reward_sum = 0.0;

        for (size_t i = 0; i < batch.size(); ++i) {
            const ImageRef& image = batch[i];
            RngStream image_rng = step_rng.split("image").split(static_cast<uint64_t>(i));

            ActionGroup group;
            group.rewards.prompt_id = image.to_string();
            for (int g = 0; g < cfg.rollouts_G; ++g) {
                RngStream rollout_rng = image_rng.split("rollout").split(static_cast<uint64_t>(g));
                std::string raw;
                int action = -1;
                if (toy_q) {
                    action = toy::sample_tuple_index(toy_q->state(), rollout_rng);
                    raw = toy::questioner_emit_tuple(toy_q->state(), action,
                                                     state.world->scene(image), cfg.toy, rollout_rng);
                } else {
                    raw = generate_question(state.agents.questioner, image, rollout_rng);
                }
                ++questions;

                auto record = parse_question_output(raw);
                double d = 0.0;
                int v = 0;
                if (record) {
                    ++parsed;
                    std::vector<ExtractedAnswer> answers;
                    answers.reserve(cfg.samples_M);
                    for (int j = 0; j < cfg.samples_M; ++j) {
                        RngStream solve_rng = rollout_rng.split("solve").split(static_cast<uint64_t>(j));
                        answers.push_back(extract_boxed_answer(
                            solve(state.agents.solver, image, record->text, solve_rng)));
                    }
                    const ConsistencyReport report = consistency_score(answers, cfg.samples_M);
                    d = report.difficulty_d;
                    if (cfg.supervisor_enabled) {
                        const JudgeVerdict verdict =
                            judge_validity(state.agents.supervisor, image, *record);
                        v = verdict.verdict == Verdict::yes ? 1 : 0;  // unparseable counts as 0
                    } else {
                        v = 1;
                    }
                } else {
                    ++invalid;
                }

                const RewardOutcome reward = questioner_reward(record, d, v, stats, cfg);
                reward_sum += reward.value;
                group.rewards.rewards.push_back(reward.value);
                group.actions.push_back(action);
            }
            groups.push_back(std::move(group));
        }

        if (toy_q) {
            toy_q->state().policy =
                grpo_update(toy_q->state().policy, groups, cfg, cfg.step_size);
        }

        PhaseEvent event;
        event.kind = PhaseKind::questioner_update;
        event.cycle = state.cycle;
        event.step = step;
        event.counters["questions"] = questions;
        event.counters["parsed"] = parsed;
        event.counters["format_invalid"] = invalid;
        event.counters["mean_reward"] = questions > 0 ? reward_sum / questions : 0.0;
        record_event(trace, writer, std::move(event));
    }
}

// ============================================================================
// Construct stage
// ============================================================================

std::vector<PseudoSample> construct_stage(EvolutionState& state, const ScheduleConfig& cfg,
                                          RngStream rng, PhaseTrace& trace, CycleReport& report,
                                          RunWriter* writer) {
    RngStream batch_rng = rng.split("images");
    std::vector<ImageRef> images;
    images.reserve(cfg.candidates_per_construct);
    for (int i = 0; i < cfg.candidates_per_construct; ++i)
        images.push_back(state.images[batch_rng.next_below(state.images.size())]);

    const int provenance_step = state.cycle * cfg.phase_len_b;
    BuildOutcome built =
        build_candidates(images, state.agents.questioner, state.agents.solver, state.agents.supervisor,
                         cfg, rng.split("build"), state.cycle, provenance_step);

    const CandidatePool tau_passed = confidence_filter(built.pool, cfg.tau_min, cfg.tau_max);
    CandidatePool judged = judge_filter(tau_passed);
    if (cfg.drop_ties) {
        CandidatePool kept;
        for (const auto& c : judged)
            if (!c.report.tie) kept.push_back(c);
        judged = std::move(kept);
    }
    std::vector<PseudoSample> shard = stratified_sample(judged, cfg.shard_target, rng.split("sample"));

    // Cycle report: skill histogram of this construct's parsed questions,
    // plus ground-truth quality stats in toy mode.
    report.cycle = state.cycle;
    report.skill_histogram = built.parsed_skill_histogram;
    int histogram_total = 0;
    for (int n : report.skill_histogram) histogram_total += n;
    report.skill_entropy_nats = histogram_total > 0 ? skill_entropy(report.skill_histogram) : 0.0;
    report.funnel_generated = built.generated;
    report.funnel_parsed = built.parsed;
    report.funnel_tau_passed = static_cast<int>(tau_passed.size());
    report.funnel_judge_passed = static_cast<int>(judged.size());
    report.funnel_sampled = static_cast<int>(shard.size());

    if (state.world) {
        ConfusionCounts confusions;
        for (const auto& cand : built.pool) {
            const auto& scene = state.world->scene(cand.image);
            const bool valid = toy::true_validity(scene, cand.question.text, cand.question.skill);
            const auto truth = toy::true_answer(scene, cand.question.text);
            const bool label_correct = truth && *truth == cand.report.majority.normalized;
            const bool problematic = !(valid && label_correct);
            const bool flagged = !(cand.v == Verdict::yes && cand.u == Verdict::yes);
            if (problematic && flagged) ++confusions.tp;
            if (!problematic && flagged) ++confusions.fp;
            if (problematic && !flagged) ++confusions.fn;
            if (!problematic && !flagged) ++confusions.tn;
        }
        if (cfg.supervisor_enabled) report.confusions = confusions;

        int valid_and_correct = 0;
        for (const auto& sample : shard) {
            const auto& scene = state.world->scene(sample.image);
            const bool valid = [&] {
                auto skill = sample.skill;
                return toy::true_validity(scene, sample.question, skill);
            }();
            const auto truth = toy::true_answer(scene, sample.question);
            if (valid && truth && *truth == sample.pseudo_label) ++valid_and_correct;
        }
        if (!shard.empty())
            report.valid_and_correct_rate = static_cast<double>(valid_and_correct) / shard.size();
    }

    // Skill window replacement happens at construct time.
    state.skill_window = update_skill_window(state.skill_window, report.skill_histogram);

    // The construct event carries the whole cycle report so telemetry can
    // be rebuilt from the trace alone.
    PhaseEvent event;
    event.kind = PhaseKind::construct;
    event.cycle = state.cycle;
    event.step = 0;
    event.counters["generated"] = built.generated;
    event.counters["parsed"] = built.parsed;
    event.counters["degenerate_dropped"] = built.degenerate_dropped;
    event.counters["tau_passed"] = static_cast<double>(tau_passed.size());
    event.counters["judge_passed"] = static_cast<double>(judged.size());
    event.counters["sampled"] = static_cast<double>(shard.size());
    event.counters["transport_errors"] = static_cast<double>(built.errors.size());
    for (SkillCategory k : all_skills())
        event.counters["skill_" + std::string(skill_slug(k))] =
            report.skill_histogram[static_cast<int>(k)];
    if (report.confusions) {
        event.counters["sup_tp"] = report.confusions->tp;
        event.counters["sup_fp"] = report.confusions->fp;
        event.counters["sup_fn"] = report.confusions->fn;
        event.counters["sup_tn"] = report.confusions->tn;
    }
    if (report.valid_and_correct_rate)
        event.counters["valid_and_correct_rate"] = *report.valid_and_correct_rate;
    record_event(trace, writer, std::move(event));

    if (writer) writer->write_shard_file(state.cycle, shard);
    return shard;
}

// ============================================================================
// Solver phase
// ============================================================================

void solver_phase(EvolutionState& state, const std::vector<PseudoSample>& shard,
                  const ScheduleConfig& cfg, RngStream rng, PhaseTrace& trace, RunWriter* writer) {
    auto* toy_s = toy_solver(state);

    if (shard.empty()) {
        PhaseEvent event;
        event.kind = PhaseKind::solver_update;
        event.cycle = state.cycle;
        event.step = 0;
        event.counters["skipped_empty_shard"] = 1;
        record_event(trace, writer, std::move(event));
        return;
    }

    for (int step = 1; step <= cfg.phase_len_b; ++step) {
        RngStream step_rng = rng.split("sstep").split(static_cast<uint64_t>(step));
        RngStream pick_rng = step_rng.split("picks");

        std::vector<const PseudoSample*> batch;
        batch.reserve(cfg.batch_size);
        for (int i = 0; i < cfg.batch_size; ++i)
            batch.push_back(&shard[pick_rng.next_below(shard.size())]);

        double reward_sum = 0.0;
        int rollouts = 0;
        for (size_t i = 0; i < batch.size(); ++i) {
            const PseudoSample& sample = *batch[i];
            const ExtractedAnswer label{sample.pseudo_label, sample.pseudo_label, true};
            RngStream sample_rng = step_rng.split("sample").split(static_cast<uint64_t>(i));
            RewardGroup group;
            group.prompt_id = sample.image.to_string();
            for (int g = 0; g < cfg.rollouts_G; ++g) {
                RngStream rollout_rng = sample_rng.split("rollout").split(static_cast<uint64_t>(g));
                const std::string response =
                    solve(state.agents.solver, sample.image, sample.question, rollout_rng);
                const RewardOutcome reward = solver_reward(response, label);
                group.rewards.push_back(reward.value);
                reward_sum += reward.value;
                ++rollouts;
            }
        }

        PhaseEvent event;
        event.kind = PhaseKind::solver_update;
        event.cycle = state.cycle;
        event.step = step;
        event.counters["samples"] = static_cast<double>(batch.size());
        event.counters["mean_reward"] = rollouts > 0 ? reward_sum / rollouts : 0.0;

        if (toy_s) {
            std::vector<toy::PseudoExposure> exposures;
            std::vector<const toy::SceneSpec*> scenes;
            exposures.reserve(batch.size());
            scenes.reserve(batch.size());
            for (const PseudoSample* sample : batch) {
                exposures.push_back({sample->image.value, sample->skill, sample->question,
                                     sample->pseudo_label});
                scenes.push_back(&state.world->scene(sample->image));
            }
            toy_s->state() = toy::solver_train(toy_s->state(), exposures, scenes, cfg.toy);
            const double mean = toy_s->state().mean_competence();
            state.competence_by_step.push_back(mean);
            event.counters["mean_competence"] = mean;
        }
        record_event(trace, writer, std::move(event));
    }
}

SkillStats update_skill_window(const SkillStats&, const std::array<int, kNumSkills>& constructed) {
    SkillStats next;
    next.window_counts = constructed;  // replacement, not accumulation
    return next;
}

// ============================================================================
// Full loop
// ============================================================================

EvolutionResult run_evolution(const ScheduleConfig& cfg, EvolutionState state, RunWriter* writer) {
    if (auto errors = validate_config(cfg); !errors.empty())
        throw ConfigError("run_evolution: invalid config: " + errors.front());
    if (state.images.empty()) throw std::invalid_argument("run_evolution: empty image pool");

    if (writer) {
        writer->write_config_snapshot(cfg);
        if (state.world) writer->write_scene_registry(*state.world);
    }

    RngStream root(cfg.seed);
    EvolutionResult result;

    for (int cycle = 1; cycle <= cfg.cycles_n; ++cycle) {
        state.cycle = cycle;
        RngStream cycle_rng = root.split("cycle").split(static_cast<uint64_t>(cycle));

        questioner_phase(state, cfg, cycle_rng.split("questioner"), result.trace, writer);

        CycleReport report;
        std::vector<PseudoSample> shard =
            construct_stage(state, cfg, cycle_rng.split("construct"), result.trace, report, writer);

        solver_phase(state, shard, cfg, cycle_rng.split("solver"), result.trace, writer);

        state.agents.refresh_supervisor();
        PhaseEvent refresh;
        refresh.kind = PhaseKind::supervisor_refresh;
        refresh.cycle = cycle;
        refresh.step = 0;
        refresh.counters["aliased"] =
            state.agents.supervisor.backend == state.agents.solver.backend ? 1.0 : 0.0;
        record_event(result.trace, writer, std::move(refresh));

        result.reports.push_back(std::move(report));
        result.shards.push_back(std::move(shard));
    }

    result.final_skill_window = state.skill_window;
    if (auto* toy_s = toy_solver(state)) result.final_solver = toy_s->state();
    if (auto* toy_q = toy_questioner(state)) result.final_questioner_probs = toy_q->state().policy.probs();
    result.competence_by_step = state.competence_by_step;

    if (writer) writer->write_reports(result.reports);
    return result;
}

EvolutionState make_toy_state(const ScheduleConfig& cfg) {
    EvolutionState state;
    auto world = std::make_shared<const ToyWorld>(cfg.toy, cfg.seed);
    state.agents = make_toy_agents(cfg, world);
    state.images.reserve(world->size());
    for (size_t i = 0; i < world->size(); ++i) state.images.push_back(world->image_for(i));
    state.world = std::move(world);
    return state;
}

}  // namespace rise
