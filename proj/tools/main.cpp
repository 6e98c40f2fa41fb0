/// rise — dual-role self-evolving loop runner.
///
/// Subcommands: evolve, construct, judge, stats, grpo-demo, ablate.
/// Exit codes: 0 ok, 1 config error, 2 backend error, 3 I/O error.

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rise/curation.hpp"
#include "rise/grpo.hpp"
#include "rise/orchestrator.hpp"
#include "rise/remote.hpp"
#include "rise/telemetry.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

struct CommonFlags {
    std::string config_path;
    std::string backend = "toy";
    std::string out_dir;
    std::string images_dir;
    int64_t seed = -1;  // <0 means "use the config seed"
};

void add_common(CLI::App* cmd, CommonFlags& flags, bool need_out) {
    cmd->add_option("--config", flags.config_path, "Path to the flat key-value config file");
    cmd->add_option("--seed", flags.seed, "Override the config seed");
    cmd->add_option("--backend", flags.backend, "Model backend")
        ->check(CLI::IsMember({"toy", "remote"}));
    auto* out = cmd->add_option("--out", flags.out_dir, "Output directory");
    if (need_out) out->required();
    cmd->add_option("--images", flags.images_dir, "Image directory (remote mode)");
}

rise::ScheduleConfig load_config_from_flags(const CommonFlags& flags) {
    std::string path = flags.config_path;
    if (path.empty()) {
        if (const char* env = std::getenv("RISE_CONFIG")) path = env;
    }
    if (path.empty())
        throw rise::ConfigError("no config file: pass --config or set RISE_CONFIG");

    std::ifstream in(path, std::ios::binary);
    if (!in) throw rise::ConfigError("cannot read config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();

    rise::ScheduleConfig cfg = rise::load_config(buffer.str());
    if (flags.seed >= 0) cfg.seed = static_cast<uint64_t>(flags.seed);
    return cfg;
}

std::vector<rise::ImageRef> ingest_images(const std::string& dir) {
    if (dir.empty()) throw rise::ConfigError("remote mode requires --images DIR");
    if (!fs::is_directory(dir)) throw rise::ConfigError("--images is not a directory: " + dir);

    std::vector<std::string> paths;
    for (const auto& entry : fs::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = rise::ascii_lower(entry.path().extension().string());
        if (ext == ".png" || ext == ".jpg" || ext == ".jpeg" || ext == ".webp" || ext == ".gif")
            paths.push_back(entry.path().string());
    }
    std::sort(paths.begin(), paths.end());
    if (paths.empty()) throw rise::ConfigError("no image files found under " + dir);

    std::vector<rise::ImageRef> images;
    images.reserve(paths.size());
    for (auto& p : paths) images.push_back(rise::ImageRef::file(std::move(p)));
    return images;
}

rise::EvolutionState make_state(const rise::ScheduleConfig& cfg, const CommonFlags& flags) {
    if (flags.backend == "toy") return rise::make_toy_state(cfg);

    rise::EvolutionState state;
    state.agents = rise::make_remote_agents(cfg, rise::RemoteEndpoint::from_env(cfg));
    state.images = ingest_images(flags.images_dir);
    return state;
}

void write_snapshot(const rise::ScheduleConfig& cfg, const std::string& out_dir) {
    fs::create_directories(out_dir);
    std::ofstream f(fs::path(out_dir) / "config.snapshot.toml", std::ios::binary);
    if (!f) throw std::runtime_error("cannot write config snapshot under " + out_dir);
    f << rise::serialize_config(cfg);
}

std::string fmt6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

// ----------------------------------------------------------------------------
// evolve
// ----------------------------------------------------------------------------

int cmd_evolve(const CommonFlags& flags) {
    rise::ScheduleConfig cfg = load_config_from_flags(flags);
    rise::EvolutionState state = make_state(cfg, flags);
    rise::RunWriter writer{fs::path(flags.out_dir)};
    rise::run_evolution(cfg, std::move(state), &writer);
    return 0;
}

// ----------------------------------------------------------------------------
// construct — one-shot candidate building + curation
// ----------------------------------------------------------------------------

int cmd_construct(const CommonFlags& flags) {
    rise::ScheduleConfig cfg = load_config_from_flags(flags);
    rise::EvolutionState state = make_state(cfg, flags);
    write_snapshot(cfg, flags.out_dir);

    rise::RngStream rng(cfg.seed);
    rise::RngStream batch_rng = rng.split("images");
    std::vector<rise::ImageRef> images;
    for (int i = 0; i < cfg.candidates_per_construct; ++i)
        images.push_back(state.images[batch_rng.next_below(state.images.size())]);

    rise::BuildOutcome built =
        rise::build_candidates(images, state.agents.questioner, state.agents.solver,
                               state.agents.supervisor, cfg, rng.split("build"));
    for (const auto& err : built.errors) std::cerr << "warning: " << err << "\n";

    std::vector<rise::PseudoSample> shard = rise::curate(built.pool, cfg, rng.split("sample"));
    rise::write_shard(shard, fs::path(flags.out_dir) / "shard.jsonl");
    std::cerr << "construct: " << built.generated << " generated, " << built.parsed << " parsed, "
              << shard.size() << " curated\n";
    return 0;
}

// ----------------------------------------------------------------------------
// judge — re-judge an existing shard
// ----------------------------------------------------------------------------

int cmd_judge(const CommonFlags& flags, const std::string& shard_path) {
    rise::ScheduleConfig cfg = load_config_from_flags(flags);
    rise::EvolutionState state = make_state(cfg, flags);
    write_snapshot(cfg, flags.out_dir);

    std::vector<rise::PseudoSample> samples = rise::read_shard(shard_path);
    std::string csv = "index,image,skill,v,u\n";
    for (size_t i = 0; i < samples.size(); ++i) {
        const auto& s = samples[i];
        rise::QuestionRecord record;
        record.skill = s.skill;
        record.qtype = s.qtype;
        record.text = s.question;
        const rise::JudgeVerdict v = rise::judge_validity(state.agents.supervisor, s.image, record);
        const rise::ExtractedAnswer label{s.pseudo_label, s.pseudo_label, true};
        const rise::JudgeVerdict u =
            rise::verify_answer(state.agents.supervisor, s.image, s.question, label);
        csv += std::to_string(i) + "," + s.image.to_string() + "," + std::string(rise::skill_slug(s.skill)) +
               "," + std::to_string(static_cast<int>(v.verdict)) + "," +
               std::to_string(static_cast<int>(u.verdict)) + "\n";
    }
    std::ofstream out(fs::path(flags.out_dir) / "judged.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write judged.csv");
    out << csv;
    return 0;
}

// ----------------------------------------------------------------------------
// stats — rebuild telemetry CSVs from a run directory
// ----------------------------------------------------------------------------

int cmd_stats(const CommonFlags& flags, const std::string& run_dir) {
    const fs::path trace_path = fs::path(run_dir) / "trace.jsonl";
    std::ifstream in(trace_path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot read " + trace_path.string());

    std::vector<rise::CycleReport> reports;
    std::string line;
    while (std::getline(in, line)) {
        if (rise::trim_copy(line).empty()) continue;
        json event = json::parse(line, nullptr, false);
        if (event.is_discarded() || event.value("phase", "") != "construct") continue;

        rise::CycleReport report;
        report.cycle = event.value("cycle", 0);
        const auto& counters = event["counters"];
        auto counter = [&counters](const std::string& key) -> double {
            return counters.contains(key) ? counters[key].get<double>() : 0.0;
        };
        for (rise::SkillCategory k : rise::all_skills())
            report.skill_histogram[static_cast<int>(k)] =
                static_cast<int>(counter("skill_" + std::string(rise::skill_slug(k))));
        int total = 0;
        for (int n : report.skill_histogram) total += n;
        report.skill_entropy_nats = total > 0 ? rise::skill_entropy(report.skill_histogram) : 0.0;
        report.funnel_generated = static_cast<int>(counter("generated"));
        report.funnel_parsed = static_cast<int>(counter("parsed"));
        report.funnel_tau_passed = static_cast<int>(counter("tau_passed"));
        report.funnel_judge_passed = static_cast<int>(counter("judge_passed"));
        report.funnel_sampled = static_cast<int>(counter("sampled"));
        if (counters.contains("sup_tp")) {
            rise::ConfusionCounts c;
            c.tp = static_cast<int>(counter("sup_tp"));
            c.fp = static_cast<int>(counter("sup_fp"));
            c.fn = static_cast<int>(counter("sup_fn"));
            c.tn = static_cast<int>(counter("sup_tn"));
            report.confusions = c;
        }
        if (counters.contains("valid_and_correct_rate"))
            report.valid_and_correct_rate = counter("valid_and_correct_rate");
        reports.push_back(std::move(report));
    }

    const fs::path out_dir = flags.out_dir.empty() ? fs::path(run_dir) : fs::path(flags.out_dir);
    rise::emit_reports(reports, out_dir);
    std::cerr << "stats: " << reports.size() << " cycles -> " << out_dir.string() << "\n";
    return 0;
}

// ----------------------------------------------------------------------------
// grpo-demo — toy convergence run
// ----------------------------------------------------------------------------

int cmd_grpo_demo(const CommonFlags& flags, int steps, int num_actions) {
    rise::ScheduleConfig cfg = load_config_from_flags(flags);
    write_snapshot(cfg, flags.out_dir);

    rise::ToyPolicy policy(std::vector<double>(num_actions, 0.0));
    rise::RngStream rng(cfg.seed);

    std::string csv = "step,loss,prob_best_action\n";
    for (int step = 1; step <= steps; ++step) {
        policy.snapshot();
        rise::RngStream step_rng = rng.split(static_cast<uint64_t>(step));

        rise::ActionGroup group;
        const std::vector<double> probs = policy.probs();
        for (int g = 0; g < cfg.rollouts_G; ++g) {
            double u = step_rng.next_unit();
            int action = 0;
            for (; action + 1 < num_actions; ++action) {
                if (u < probs[action]) break;
                u -= probs[action];
            }
            group.actions.push_back(action);
            group.rewards.rewards.push_back(action == 0 ? 1.0 : 0.0);
        }

        policy = rise::grpo_update(policy, {group}, cfg, cfg.step_size);
        const double loss = rise::grpo_loss(policy, {group}, cfg);  // post-update surrogate
        csv += std::to_string(step) + "," + fmt6(loss) + "," + fmt6(policy.probs()[0]) + "\n";
    }

    std::ofstream out(fs::path(flags.out_dir) / "grpo_demo.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write grpo_demo.csv");
    out << csv;
    return 0;
}

// ----------------------------------------------------------------------------
// ablate — alternation-granularity sweep in the toy world
// ----------------------------------------------------------------------------

int cmd_ablate(const CommonFlags& flags, int replicates) {
    rise::ScheduleConfig base = load_config_from_flags(flags);
    write_snapshot(base, flags.out_dir);

    const std::vector<int> granularity = {1, 5, 10, 20};
    std::string csv = "b,seed,cycle,skill_entropy_nats,mean_competence,sampled,valid_and_correct_rate\n";

    for (int b : granularity) {
        if (base.total_budget_B % b != 0)
            throw rise::ConfigError("ablate: total_budget_B must be divisible by " + std::to_string(b));
        rise::ScheduleConfig cfg = base;
        cfg.phase_len_b = b;
        cfg.cycles_n = base.total_budget_B / b;

        for (int r = 0; r < replicates; ++r) {
            cfg.seed = base.seed + static_cast<uint64_t>(r);
            rise::EvolutionResult result = rise::run_evolution(cfg, rise::make_toy_state(cfg));
            for (size_t c = 0; c < result.reports.size(); ++c) {
                const auto& report = result.reports[c];
                const size_t steps_done = (c + 1) * static_cast<size_t>(b);
                const double competence =
                    steps_done <= result.competence_by_step.size() && steps_done > 0
                        ? result.competence_by_step[steps_done - 1]
                        : 0.0;
                csv += std::to_string(b) + "," + std::to_string(cfg.seed) + "," +
                       std::to_string(report.cycle) + "," + fmt6(report.skill_entropy_nats) + "," +
                       fmt6(competence) + "," + std::to_string(report.funnel_sampled) + "," +
                       (report.valid_and_correct_rate ? fmt6(*report.valid_and_correct_rate) : "") + "\n";
            }
        }
    }

    std::ofstream out(fs::path(flags.out_dir) / "ablate.csv", std::ios::binary);
    if (!out) throw std::runtime_error("cannot write ablate.csv");
    out << csv;
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Dual-role self-evolving loop engine"};
    app.require_subcommand(1);

    CommonFlags flags;
    std::string shard_path, run_dir;
    int demo_steps = 60, demo_actions = 6, replicates = 5;

    auto* evolve = app.add_subcommand("evolve", "Run the full alternation loop");
    add_common(evolve, flags, true);

    auto* construct = app.add_subcommand("construct", "One-shot pseudo-label construction");
    add_common(construct, flags, true);

    auto* judge = app.add_subcommand("judge", "Apply validity/verification judging to a shard");
    add_common(judge, flags, true);
    judge->add_option("--shard", shard_path, "Input shard file")->required();

    auto* stats = app.add_subcommand("stats", "Recompute telemetry CSVs from a run directory");
    add_common(stats, flags, false);
    stats->add_option("--run", run_dir, "Run directory to read")->required();

    auto* demo = app.add_subcommand("grpo-demo", "Toy policy-optimization convergence run");
    add_common(demo, flags, true);
    demo->add_option("--steps", demo_steps, "Demo update steps");
    demo->add_option("--actions", demo_actions, "Action count of the demo policy");

    auto* ablate = app.add_subcommand("ablate", "Alternation-granularity sweep (toy world)");
    add_common(ablate, flags, true);
    ablate->add_option("--replicates", replicates, "Seeds per granularity");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;  // bad arguments are config errors
    }

    try {
        if (evolve->parsed()) return cmd_evolve(flags);
        if (construct->parsed()) return cmd_construct(flags);
        if (judge->parsed()) return cmd_judge(flags, shard_path);
        if (stats->parsed()) return cmd_stats(flags, run_dir);
        if (demo->parsed()) return cmd_grpo_demo(flags, demo_steps, demo_actions);
        if (ablate->parsed()) return cmd_ablate(flags, replicates);
    } catch (const rise::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 1;
    } catch (const rise::BackendError& e) {
        std::cerr << "backend error: " << e.what() << "\n";
        return 2;
    } catch (const rise::ShardError& e) {
        std::cerr << "shard error: " << e.what() << "\n";
        return 3;
    } catch (const std::filesystem::filesystem_error& e) {
        std::cerr << "I/O error: " << e.what() << "\n";
        return 3;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 3;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
