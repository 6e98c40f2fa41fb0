#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "rise/agents.hpp"
#include "rise/config.hpp"
#include "rise/rng.hpp"
#include "rise/scoring.hpp"

namespace rise {

/// One generated question with everything needed to decide retention.
struct Candidate {
    ImageRef image;
    QuestionRecord question;
    ConsistencyReport report;
    Verdict v = Verdict::unparseable;
    Verdict u = Verdict::unparseable;
    int cycle = 0;
    int step = 0;
};

using CandidatePool = std::vector<Candidate>;

/// One curated training record as persisted to a shard.
struct PseudoSample {
    ImageRef image;
    SkillCategory skill = SkillCategory::coarse_perception;
    QuestionType qtype = QuestionType::multiple_choice;
    std::string question;
    std::string pseudo_label;  // normalized majority answer
    double c = 0.0;            // quantized to 6 decimals at creation
    int v = 0;
    int u = 0;
    bool tie = false;
    int cycle = 0;
    int step = 0;

    bool operator==(const PseudoSample&) const = default;
};

struct BuildOutcome {
    CandidatePool pool;
    int generated = 0;          // questions attempted
    int parsed = 0;             // format-valid
    int degenerate_dropped = 0; // all-M-unparseable candidates
    std::array<int, kNumSkills> parsed_skill_histogram{};  // declared skills of parsed questions
    std::vector<std::string> errors;
};

/// Generates one question per image, samples M solver responses, scores
/// consistency, and obtains v/u verdicts. Format-invalid questions and
/// degenerate (fully unparseable) candidates never enter the pool. Fans
/// out per image up to cfg.max_concurrency; per-image RNG streams keep the
/// result independent of completion order.
BuildOutcome build_candidates(const std::vector<ImageRef>& images, const AgentHandle& questioner,
                              const AgentHandle& solver, const AgentHandle& supervisor,
                              const ScheduleConfig& cfg, RngStream rng, int cycle = 0, int step = 0);

/// Keeps candidates with tau_min <= c <= tau_max (closed interval).
CandidatePool confidence_filter(const CandidatePool& pool, double tau_min, double tau_max);

/// Keeps candidates with v = 1 and u = 1; unparseable verdicts count as 0.
CandidatePool judge_filter(const CandidatePool& pool);

/// Skill-stratified draw without replacement: quota = floor(target/6) per
/// skill, skills short of quota contribute everything, leftover quota is
/// redistributed round-robin in fixed skill order to skills with surplus.
std::vector<PseudoSample> stratified_sample(const CandidatePool& pool, int target_total, RngStream rng);

/// confidence_filter, judge_filter, optional tie drop, stratified_sample.
std::vector<PseudoSample> curate(const CandidatePool& pool, const ScheduleConfig& cfg, RngStream rng);

class ShardError : public std::runtime_error {
public:
    explicit ShardError(const std::string& what) : std::runtime_error(what) {}
};

inline constexpr int kShardSchemaVersion = 1;

/// JSON Lines, one sample per line after a version header record.
/// Byte-deterministic: fixed key order, c with 6 fractional digits.
void write_shard(const std::vector<PseudoSample>& samples, const std::filesystem::path& path);
std::string shard_to_string(const std::vector<PseudoSample>& samples);

/// Throws ShardError naming the offending line on schema violations.
std::vector<PseudoSample> read_shard(const std::filesystem::path& path);
std::vector<PseudoSample> shard_from_string(std::string_view text);

}  // namespace rise
