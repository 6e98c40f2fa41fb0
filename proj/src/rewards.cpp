#include "rise/rewards.hpp"

#include <algorithm>
#include <stdexcept>

namespace rise {

double skill_bonus(SkillCategory k, const SkillStats& stats) {
    const double nbar = stats.mean_nbar();
    if (nbar <= 0.0) return 0.0;
    const double bonus = (nbar - stats.count(k)) / nbar;
    return std::max(bonus, 0.0);
}

RewardOutcome questioner_reward(const std::optional<QuestionRecord>& parse, double d, int v,
                                const SkillStats& stats, const ScheduleConfig& cfg) {
    if (!parse) {
        RewardOutcome out;
        out.value = -1.0;
        out.format_invalid = true;
        return out;
    }
    if (d < 0.0 || d > 0.5) throw std::out_of_range("questioner_reward: d outside [0,0.5]");
    if (v != 0 && v != 1) throw std::out_of_range("questioner_reward: v must be 0 or 1");

    RewardOutcome out;
    out.difficulty_d = d;
    out.validity_v = v;
    out.skill_bonus_b = skill_bonus(parse->skill, stats);
    out.value = d + cfg.lambda_v * v + cfg.lambda_s * out.skill_bonus_b;
    return out;
}

RewardOutcome solver_reward(std::string_view response, const ExtractedAnswer& pseudo_label) {
    if (!pseudo_label.parseable)
        throw std::invalid_argument("solver_reward: pseudo label must be a real answer");

    const ExtractedAnswer extracted = extract_boxed_answer(response);
    RewardOutcome out;
    if (!extracted.parseable) {
        out.value = -1.0;
        out.format_invalid = true;
        return out;
    }
    out.value = (extracted.normalized == pseudo_label.normalized) ? 1.0 : 0.0;
    return out;
}

}  // namespace rise
