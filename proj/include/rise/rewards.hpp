#pragma once

#include <array>
#include <optional>

#include "rise/config.hpp"
#include "rise/parsing.hpp"
#include "rise/scoring.hpp"

namespace rise {

/// Per-skill question counts from the previous alternation cycle.
struct SkillStats {
    std::array<int, kNumSkills> window_counts{};

    double mean_nbar() const {
        int sum = 0;
        for (int n : window_counts) sum += n;
        return static_cast<double>(sum) / kNumSkills;
    }

    int count(SkillCategory k) const { return window_counts[static_cast<int>(k)]; }
};

/// A computed reward with its components. format_invalid implies value = -1
/// and no components; otherwise value = d + lambda_v * v + lambda_s * b.
struct RewardOutcome {
    double value = 0.0;
    bool format_invalid = false;
    double difficulty_d = 0.0;
    double validity_v = 0.0;
    double skill_bonus_b = 0.0;
};

/// max((nbar - n_k) / nbar, 0); zero everywhere on an empty window.
double skill_bonus(SkillCategory k, const SkillStats& stats);

/// Questioner reward: -1 for a format-invalid generation, otherwise
/// d + lambda_v * v + lambda_s * skill_bonus(k).
RewardOutcome questioner_reward(const std::optional<QuestionRecord>& parse, double d, int v,
                                const SkillStats& stats, const ScheduleConfig& cfg);

/// Solver reward: -1 when the response carries no extractable answer,
/// else 1 iff the normalized extraction matches the pseudo-label.
RewardOutcome solver_reward(std::string_view response, const ExtractedAnswer& pseudo_label);

}  // namespace rise
