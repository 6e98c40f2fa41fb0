#include "rise/curation.hpp"

#include <atomic>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <future>
#include <sstream>

#include <json.hpp>

namespace rise {

using nlohmann::json;

namespace {

double quantize6(double x) { return std::round(x * 1e6) / 1e6; }

std::string fmt6(double x) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", x);
    return buf;
}

}  // namespace

BuildOutcome build_candidates(const std::vector<ImageRef>& images, const AgentHandle& questioner,
                              const AgentHandle& solver, const AgentHandle& supervisor,
                              const ScheduleConfig& cfg, RngStream rng, int cycle, int step) {
    struct ItemResult {
        std::optional<Candidate> candidate;
        bool generated = false;
        std::optional<SkillCategory> parsed_skill;
        bool degenerate = false;
        std::string error;
    };

    auto process = [&](size_t index) -> ItemResult {
        ItemResult result;
        const ImageRef& image = images[index];
        RngStream item_rng = rng.split("candidate").split(static_cast<uint64_t>(index));
        try {
            RngStream gen_rng = item_rng.split("question");
            const std::string raw = generate_question(questioner, image, gen_rng);
            result.generated = true;

            auto record = parse_question_output(raw);
            if (!record) return result;  // reward accounting only; never pooled
            result.parsed_skill = record->skill;

            std::vector<ExtractedAnswer> answers;
            answers.reserve(cfg.samples_M);
            for (int j = 0; j < cfg.samples_M; ++j) {
                RngStream sample_rng = item_rng.split("solve").split(static_cast<uint64_t>(j));
                answers.push_back(extract_boxed_answer(solve(solver, image, record->text, sample_rng)));
            }
            ConsistencyReport report = consistency_score(answers, cfg.samples_M);
            if (report.degenerate) {
                result.degenerate = true;
                return result;
            }

            Candidate cand;
            cand.image = image;
            cand.question = *record;
            cand.report = std::move(report);
            cand.cycle = cycle;
            cand.step = step;
            if (cfg.supervisor_enabled) {
                cand.v = judge_validity(supervisor, image, cand.question).verdict;
                cand.u = verify_answer(supervisor, image, cand.question.text, cand.report.majority).verdict;
            } else {
                cand.v = Verdict::yes;
                cand.u = Verdict::yes;
            }
            result.candidate = std::move(cand);
        } catch (const BackendError& e) {
            result.error = image.to_string() + ": " + e.what();
        }
        return result;
    };

    std::vector<ItemResult> results(images.size());
    const size_t workers = std::min<size_t>(std::max(cfg.max_concurrency, 1), std::max<size_t>(images.size(), 1));
    if (workers <= 1) {
        for (size_t i = 0; i < images.size(); ++i) results[i] = process(i);
    } else {
        std::atomic<size_t> next{0};
        std::vector<std::future<void>> futures;
        futures.reserve(workers);
        for (size_t w = 0; w < workers; ++w) {
            futures.push_back(std::async(std::launch::async, [&] {
                for (size_t i = next.fetch_add(1); i < images.size(); i = next.fetch_add(1))
                    results[i] = process(i);
            }));
        }
        for (auto& f : futures) f.get();
    }

    BuildOutcome out;
    for (auto& r : results) {
        out.generated += r.generated ? 1 : 0;
        if (r.parsed_skill) {
            ++out.parsed;
            ++out.parsed_skill_histogram[static_cast<int>(*r.parsed_skill)];
        }
        out.degenerate_dropped += r.degenerate ? 1 : 0;
        if (!r.error.empty()) out.errors.push_back(std::move(r.error));
        if (r.candidate) out.pool.push_back(std::move(*r.candidate));
    }
    return out;
}

CandidatePool confidence_filter(const CandidatePool& pool, double tau_min, double tau_max) {
    if (tau_min < 0.0 || tau_max > 1.0 || tau_min > tau_max)
        throw std::invalid_argument("confidence_filter: bad tau range");
    CandidatePool out;
    for (const auto& c : pool)
        if (c.report.consistency_c >= tau_min && c.report.consistency_c <= tau_max) out.push_back(c);
    return out;
}

CandidatePool judge_filter(const CandidatePool& pool) {
    CandidatePool out;
    for (const auto& c : pool)
        if (c.v == Verdict::yes && c.u == Verdict::yes) out.push_back(c);
    return out;
}

namespace {

PseudoSample to_sample(const Candidate& c) {
    PseudoSample s;
    s.image = c.image;
    s.skill = c.question.skill;
    s.qtype = c.question.qtype;
    s.question = c.question.text;
    s.pseudo_label = c.report.majority.normalized;
    s.c = quantize6(c.report.consistency_c);
    s.v = c.v == Verdict::yes ? 1 : 0;
    s.u = c.u == Verdict::yes ? 1 : 0;
    s.tie = c.report.tie;
    s.cycle = c.cycle;
    s.step = c.step;
    return s;
}

}  // namespace

std::vector<PseudoSample> stratified_sample(const CandidatePool& pool, int target_total, RngStream rng) {
    if (target_total < 0) throw std::invalid_argument("stratified_sample: negative target");

    std::array<std::vector<size_t>, kNumSkills> buckets;
    for (size_t i = 0; i < pool.size(); ++i)
        buckets[static_cast<int>(pool[i].question.skill)].push_back(i);

    const int quota = target_total / kNumSkills;
    std::array<int, kNumSkills> take{};
    int assigned = 0;
    for (int k = 0; k < kNumSkills; ++k) {
        take[k] = std::min<int>(quota, static_cast<int>(buckets[k].size()));
        assigned += take[k];
    }

    // Round-robin redistribution of leftover quota, fixed skill order.
    int leftover = std::min<int>(target_total, [&] {
        int total = 0;
        for (const auto& b : buckets) total += static_cast<int>(b.size());
        return total;
    }()) - assigned;
    while (leftover > 0) {
        bool progressed = false;
        for (int k = 0; k < kNumSkills && leftover > 0; ++k) {
            if (take[k] < static_cast<int>(buckets[k].size())) {
                ++take[k];
                --leftover;
                progressed = true;
            }
        }
        if (!progressed) break;
    }

    // Seeded draw without replacement: shuffle each bucket with its own
    // split stream, then take the head.
    std::vector<PseudoSample> out;
    for (int k = 0; k < kNumSkills; ++k) {
        RngStream bucket_rng = rng.split("skill").split(static_cast<uint64_t>(k));
        bucket_rng.shuffle(buckets[k]);
        for (int i = 0; i < take[k]; ++i) out.push_back(to_sample(pool[buckets[k][i]]));
    }
    return out;
}

std::vector<PseudoSample> curate(const CandidatePool& pool, const ScheduleConfig& cfg, RngStream rng) {
    CandidatePool filtered = judge_filter(confidence_filter(pool, cfg.tau_min, cfg.tau_max));
    if (cfg.drop_ties) {
        CandidatePool kept;
        for (const auto& c : filtered)
            if (!c.report.tie) kept.push_back(c);
        filtered = std::move(kept);
    }
    return stratified_sample(filtered, cfg.shard_target, rng);
}

// ============================================================================
// Shard I/O
// ============================================================================

std::string shard_to_string(const std::vector<PseudoSample>& samples) {
    std::string out = "{\"kind\":\"header\",\"schema_version\":" + std::to_string(kShardSchemaVersion) + "}\n";
    for (const auto& s : samples) {
        out += "{\"image\":" + json(s.image.to_string()).dump();
        out += ",\"skill\":" + json(std::string(skill_slug(s.skill))).dump();
        out += ",\"qtype\":" + json(std::string(question_type_slug(s.qtype))).dump();
        out += ",\"question\":" + json(s.question).dump();
        out += ",\"pseudo_label\":" + json(s.pseudo_label).dump();
        out += ",\"c\":" + fmt6(s.c);
        out += ",\"v\":" + std::to_string(s.v);
        out += ",\"u\":" + std::to_string(s.u);
        out += std::string(",\"tie\":") + (s.tie ? "true" : "false");
        out += ",\"cycle\":" + std::to_string(s.cycle);
        out += ",\"step\":" + std::to_string(s.step);
        out += "}\n";
    }
    return out;
}

void write_shard(const std::vector<PseudoSample>& samples, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ShardError("cannot open shard for writing: " + path.string());
    out << shard_to_string(samples);
    if (!out) throw ShardError("failed writing shard: " + path.string());
}

std::vector<PseudoSample> shard_from_string(std::string_view text) {
    std::vector<PseudoSample> samples;
    size_t pos = 0;
    int line_no = 0;
    bool header_seen = false;

    while (pos < text.size()) {
        size_t nl = text.find('\n', pos);
        if (nl == std::string_view::npos) nl = text.size();
        std::string line(text.substr(pos, nl - pos));
        pos = nl + 1;
        ++line_no;
        if (trim_copy(line).empty()) continue;

        json parsed = json::parse(line, nullptr, false);
        if (parsed.is_discarded())
            throw ShardError("line " + std::to_string(line_no) + ": not valid JSON");

        if (!header_seen) {
            if (!parsed.contains("schema_version"))
                throw ShardError("line " + std::to_string(line_no) + ": missing shard header");
            if (parsed["schema_version"].get<int>() != kShardSchemaVersion)
                throw ShardError("line " + std::to_string(line_no) + ": unsupported schema_version");
            header_seen = true;
            continue;
        }

        auto field = [&](const char* name) -> const json& {
            if (!parsed.contains(name))
                throw ShardError("line " + std::to_string(line_no) + ": missing field '" + name + "'");
            return parsed[name];
        };

        PseudoSample s;
        auto image = ImageRef::from_string(field("image").get<std::string>());
        if (!image) throw ShardError("line " + std::to_string(line_no) + ": bad image ref");
        s.image = *image;
        auto skill = parse_skill(field("skill").get<std::string>());
        if (!skill) throw ShardError("line " + std::to_string(line_no) + ": bad skill label");
        s.skill = *skill;
        auto qtype = parse_question_type(field("qtype").get<std::string>());
        if (!qtype) throw ShardError("line " + std::to_string(line_no) + ": bad qtype label");
        s.qtype = *qtype;
        s.question = field("question").get<std::string>();
        s.pseudo_label = field("pseudo_label").get<std::string>();
        s.c = field("c").get<double>();
        s.v = field("v").get<int>();
        s.u = field("u").get<int>();
        s.tie = field("tie").get<bool>();
        s.cycle = field("cycle").get<int>();
        s.step = field("step").get<int>();
        samples.push_back(std::move(s));
    }
    if (!header_seen) throw ShardError("shard has no header record");
    return samples;
}

std::vector<PseudoSample> read_shard(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ShardError("cannot open shard: " + path.string());
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return shard_from_string(buffer.str());
}

}  // namespace rise
