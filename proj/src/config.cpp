#include "rise/config.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <functional>
#include <map>

namespace rise {

// ============================================================================
// String helpers
// ============================================================================

std::string trim_copy(std::string_view s) {
    size_t b = 0, e = s.size();
    while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
    while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
    return std::string(s.substr(b, e - b));
}

std::string ascii_lower(std::string_view s) {
    std::string out(s);
    for (char& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    return out;
}

std::string collapse_spaces(std::string_view s) {
    std::string out;
    out.reserve(s.size());
    bool in_space = false;
    for (char c : s) {
        if (std::isspace(static_cast<unsigned char>(c))) {
            in_space = true;
            continue;
        }
        if (in_space && !out.empty()) out.push_back(' ');
        in_space = false;
        out.push_back(c);
    }
    return out;
}

// ============================================================================
// Skill / question-type labels
// ============================================================================

namespace {

constexpr std::string_view kSkillSlugs[kNumSkills] = {
    "coarse-perception",    "fine-grained-perception", "instance-reasoning",
    "logical-reasoning",    "math-and-counting",       "science-and-technology",
};

constexpr std::string_view kSkillLabels[kNumSkills] = {
    "coarse perception",    "fine-grained perception", "instance reasoning",
    "logical reasoning",    "math & counting",         "science & technology",
};

// Label folded to a canonical comparison key: lowercase, '&' -> "and",
// separators collapsed to single spaces.
std::string fold_label(std::string_view text) {
    std::string s = ascii_lower(text);
    std::string expanded;
    expanded.reserve(s.size() + 8);
    for (char c : s) {
        if (c == '&') {
            expanded += " and ";
        } else if (c == '-' || c == '_') {
            expanded.push_back(' ');
        } else {
            expanded.push_back(c);
        }
    }
    return collapse_spaces(trim_copy(expanded));
}

}  // namespace

std::string_view skill_slug(SkillCategory k) { return kSkillSlugs[static_cast<int>(k)]; }
std::string_view skill_label(SkillCategory k) { return kSkillLabels[static_cast<int>(k)]; }

std::optional<SkillCategory> parse_skill(std::string_view text) {
    const std::string key = fold_label(text);
    for (SkillCategory k : all_skills()) {
        if (key == fold_label(skill_slug(k))) return k;
    }
    return std::nullopt;
}

namespace {
constexpr std::string_view kTypeSlugs[kNumQuestionTypes] = {"multiple-choice", "numerical", "regression"};
constexpr std::string_view kTypeLabels[kNumQuestionTypes] = {"multiple choice", "numerical", "regression"};
}  // namespace

std::string_view question_type_slug(QuestionType t) { return kTypeSlugs[static_cast<int>(t)]; }
std::string_view question_type_label(QuestionType t) { return kTypeLabels[static_cast<int>(t)]; }

std::optional<QuestionType> parse_question_type(std::string_view text) {
    const std::string key = fold_label(text);
    for (int i = 0; i < kNumQuestionTypes; ++i) {
        if (key == fold_label(kTypeSlugs[i])) return static_cast<QuestionType>(i);
    }
    return std::nullopt;
}

// ============================================================================
// ImageRef
// ============================================================================

std::string ImageRef::to_string() const {
    return (kind == Kind::file ? "file:" : "synthetic:") + value;
}

std::optional<ImageRef> ImageRef::from_string(std::string_view s) {
    if (s.starts_with("file:")) return ImageRef::file(std::string(s.substr(5)));
    if (s.starts_with("synthetic:")) return ImageRef::synthetic(std::string(s.substr(10)));
    return std::nullopt;
}

// ============================================================================
// Config parsing
// ============================================================================

namespace {

struct KeyBinding {
    std::function<void(ScheduleConfig&, const std::string&)> set;
    std::function<std::string(const ScheduleConfig&)> get;
};

long long parse_int(const std::string& key, const std::string& v) {
    long long out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("key '" + key + "': expected integer, got '" + v + "'");
    return out;
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
    // Accept negative literals as two's-complement 64-bit seeds.
    if (!v.empty() && v[0] == '-') return static_cast<uint64_t>(parse_int(key, v));
    uint64_t out = 0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("key '" + key + "': expected integer, got '" + v + "'");
    return out;
}

double parse_double(const std::string& key, const std::string& v) {
    double out = 0.0;
    auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
    if (ec != std::errc() || p != v.data() + v.size())
        throw ConfigError("key '" + key + "': expected number, got '" + v + "'");
    return out;
}

bool parse_bool(const std::string& key, const std::string& v) {
    const std::string s = ascii_lower(v);
    if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
    if (s == "false" || s == "0" || s == "no" || s == "off") return false;
    throw ConfigError("key '" + key + "': expected boolean, got '" + v + "'");
}

// Shortest decimal form that round-trips exactly.
std::string fmt_double(double x) {
    char buf[64];
    auto [p, ec] = std::to_chars(buf, buf + sizeof(buf), x);
    (void)ec;
    return std::string(buf, p);
}

const std::map<std::string, KeyBinding>& key_table() {
    static const std::map<std::string, KeyBinding> table = [] {
        std::map<std::string, KeyBinding> t;
        auto add_int = [&t](const std::string& key, int ScheduleConfig::* field) {
            t[key] = {[key, field](ScheduleConfig& c, const std::string& v) {
                          c.*field = static_cast<int>(parse_int(key, v));
                      },
                      [field](const ScheduleConfig& c) { return std::to_string(c.*field); }};
        };
        auto add_double = [&t](const std::string& key, double ScheduleConfig::* field) {
            t[key] = {[key, field](ScheduleConfig& c, const std::string& v) { c.*field = parse_double(key, v); },
                      [field](const ScheduleConfig& c) { return fmt_double(c.*field); }};
        };
        auto add_bool = [&t](const std::string& key, bool ScheduleConfig::* field) {
            t[key] = {[key, field](ScheduleConfig& c, const std::string& v) { c.*field = parse_bool(key, v); },
                      [field](const ScheduleConfig& c) { return (c.*field) ? "true" : "false"; }};
        };
        auto add_toy_double = [&t](const std::string& key, double ToyParams::* field) {
            t[key] = {[key, field](ScheduleConfig& c, const std::string& v) { c.toy.*field = parse_double(key, v); },
                      [field](const ScheduleConfig& c) { return fmt_double(c.toy.*field); }};
        };
        auto add_toy_int = [&t](const std::string& key, int ToyParams::* field) {
            t[key] = {[key, field](ScheduleConfig& c, const std::string& v) {
                          c.toy.*field = static_cast<int>(parse_int(key, v));
                      },
                      [field](const ScheduleConfig& c) { return std::to_string(c.toy.*field); }};
        };

        add_int("total_budget_B", &ScheduleConfig::total_budget_B);
        add_int("cycles_n", &ScheduleConfig::cycles_n);
        add_int("phase_len_b", &ScheduleConfig::phase_len_b);
        add_int("batch_size", &ScheduleConfig::batch_size);
        add_int("rollouts_G", &ScheduleConfig::rollouts_G);
        add_int("samples_M", &ScheduleConfig::samples_M);
        add_double("tau_min", &ScheduleConfig::tau_min);
        add_double("tau_max", &ScheduleConfig::tau_max);
        add_double("lambda_v", &ScheduleConfig::lambda_v);
        add_double("lambda_s", &ScheduleConfig::lambda_s);
        add_double("eps_norm", &ScheduleConfig::eps_norm);
        add_double("eps_clip", &ScheduleConfig::eps_clip);
        add_double("temperature", &ScheduleConfig::temperature);
        add_double("top_p", &ScheduleConfig::top_p);
        add_int("max_concurrency", &ScheduleConfig::max_concurrency);
        t["seed"] = {[](ScheduleConfig& c, const std::string& v) { c.seed = parse_u64("seed", v); },
                     [](const ScheduleConfig& c) { return std::to_string(c.seed); }};
        add_int("max_tokens", &ScheduleConfig::max_tokens);
        add_int("candidates_per_construct", &ScheduleConfig::candidates_per_construct);
        add_int("shard_target", &ScheduleConfig::shard_target);
        add_bool("supervisor_enabled", &ScheduleConfig::supervisor_enabled);
        add_bool("drop_ties", &ScheduleConfig::drop_ties);
        add_double("step_size", &ScheduleConfig::step_size);
        t["remote_model"] = {[](ScheduleConfig& c, const std::string& v) { c.remote_model = v; },
                             [](const ScheduleConfig& c) { return c.remote_model; }};

        add_toy_double("toy_theta0", &ToyParams::theta0);
        add_toy_double("toy_eta", &ToyParams::eta);
        add_toy_double("toy_eta_bad", &ToyParams::eta_bad);
        add_toy_double("toy_invalid_rate", &ToyParams::invalid_rate);
        add_toy_double("toy_format_corrupt_rate", &ToyParams::format_corrupt_rate);
        add_toy_double("toy_judge_recall", &ToyParams::judge_recall);
        add_toy_double("toy_judge_false_reject", &ToyParams::judge_false_reject);
        t["toy_biased_knobs"] = {
            [](ScheduleConfig& c, const std::string& v) { c.toy.biased_knobs = parse_bool("toy_biased_knobs", v); },
            [](const ScheduleConfig& c) { return c.toy.biased_knobs ? "true" : "false"; }};
        add_toy_double("toy_logistic_slope", &ToyParams::logistic_slope);
        add_toy_int("toy_knob_levels", &ToyParams::knob_levels);
        add_toy_int("toy_scene_pool", &ToyParams::scene_pool);
        return t;
    }();
    return table;
}

}  // namespace

ScheduleConfig load_config(std::string_view source) {
    ScheduleConfig cfg;
    const auto& table = key_table();

    size_t line_no = 0;
    size_t pos = 0;
    while (pos <= source.size()) {
        size_t nl = source.find('\n', pos);
        std::string_view line_view = source.substr(pos, nl == std::string_view::npos ? std::string_view::npos : nl - pos);
        pos = (nl == std::string_view::npos) ? source.size() + 1 : nl + 1;
        ++line_no;

        std::string line = trim_copy(line_view);
        if (auto hash = line.find('#'); hash != std::string::npos) line = trim_copy(line.substr(0, hash));
        if (line.empty()) continue;

        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("line " + std::to_string(line_no) + ": expected 'key = value', got '" + line + "'");
        const std::string key = trim_copy(line.substr(0, eq));
        const std::string value = trim_copy(line.substr(eq + 1));

        auto it = table.find(key);
        if (it == table.end()) throw ConfigError("unknown config key '" + key + "'");
        it->second.set(cfg, value);
    }

    if (auto errors = validate_config(cfg); !errors.empty()) {
        std::string msg = "invalid config:";
        for (const auto& e : errors) msg += "\n  - " + e;
        throw ConfigError(msg);
    }
    return cfg;
}

std::vector<std::string> validate_config(const ScheduleConfig& cfg) {
    std::vector<std::string> errors;
    auto require = [&errors](bool ok, const std::string& msg) {
        if (!ok) errors.push_back(msg);
    };

    require(cfg.total_budget_B > 0, "total_budget_B must be positive");
    require(cfg.cycles_n > 0, "cycles_n must be positive");
    require(cfg.phase_len_b > 0, "phase_len_b must be positive");
    if (cfg.cycles_n > 0 && cfg.phase_len_b > 0)
        require(cfg.total_budget_B == cfg.cycles_n * cfg.phase_len_b,
                "total_budget_B != cycles_n * phase_len_b");
    require(cfg.batch_size > 0, "batch_size must be positive");
    require(cfg.rollouts_G >= 2, "rollouts_G must be >= 2");
    require(cfg.samples_M >= 2, "samples_M must be >= 2");
    require(cfg.tau_min >= 0.0, "tau_min must be >= 0");
    require(cfg.tau_max <= 1.0, "tau_max must be <= 1");
    require(cfg.tau_min <= cfg.tau_max, "tau_min > tau_max");
    require(cfg.lambda_v >= 0.0, "lambda_v must be nonnegative");
    require(cfg.lambda_s >= 0.0, "lambda_s must be nonnegative");
    require(cfg.eps_norm > 0.0, "eps_norm must be positive");
    require(cfg.eps_clip > 0.0 && cfg.eps_clip < 1.0, "eps_clip must lie in (0,1)");
    require(cfg.max_concurrency > 0, "max_concurrency must be positive");
    require(cfg.max_tokens > 0, "max_tokens must be positive");
    require(cfg.candidates_per_construct > 0, "candidates_per_construct must be positive");
    require(cfg.shard_target >= 0, "shard_target must be nonnegative");
    require(cfg.step_size > 0.0, "step_size must be positive");

    require(cfg.toy.theta0 >= 0.0 && cfg.toy.theta0 <= 1.0, "toy_theta0 must lie in [0,1]");
    require(cfg.toy.eta >= 0.0, "toy_eta must be nonnegative");
    require(cfg.toy.eta_bad >= 0.0, "toy_eta_bad must be nonnegative");
    require(cfg.toy.invalid_rate >= 0.0 && cfg.toy.invalid_rate <= 1.0, "toy_invalid_rate must lie in [0,1]");
    require(cfg.toy.format_corrupt_rate >= 0.0 && cfg.toy.format_corrupt_rate <= 1.0,
            "toy_format_corrupt_rate must lie in [0,1]");
    require(cfg.toy.judge_recall >= 0.0 && cfg.toy.judge_recall <= 1.0, "toy_judge_recall must lie in [0,1]");
    require(cfg.toy.judge_false_reject >= 0.0 && cfg.toy.judge_false_reject <= 1.0,
            "toy_judge_false_reject must lie in [0,1]");
    require(cfg.toy.logistic_slope > 0.0, "toy_logistic_slope must be positive");
    require(cfg.toy.knob_levels >= 1, "toy_knob_levels must be >= 1");
    require(cfg.toy.scene_pool >= 1, "toy_scene_pool must be >= 1");

    return errors;
}

std::string serialize_config(const ScheduleConfig& cfg) {
    std::string out;
    for (const auto& [key, binding] : key_table()) {
        out += key;
        out += " = ";
        out += binding.get(cfg);
        out += "\n";
    }
    return out;
}

}  // namespace rise
