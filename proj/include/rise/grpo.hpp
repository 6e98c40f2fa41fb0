#pragma once

#include <string>
#include <vector>

#include "rise/config.hpp"

namespace rise {

/// Scalar rewards of the G rollouts produced for one prompt.
struct RewardGroup {
    std::vector<double> rewards;
    std::string prompt_id;
};

/// Group-normalized advantages; mean-centered by construction.
struct AdvantageGroup {
    std::vector<double> advantages;
};

/// A_i = (r_i - mean) / (std + eps_norm), population standard deviation.
/// Throws std::invalid_argument when the group has fewer than 2 rewards.
AdvantageGroup group_advantages(const RewardGroup& group, double eps_norm);

/// -(1/G) * sum_i min(ratio_i * A_i, clip(ratio_i, 1-eps, 1+eps) * A_i).
/// Throws std::invalid_argument on length mismatch.
double clipped_objective(const std::vector<double>& ratios, const AdvantageGroup& adv, double eps_clip);

/// Softmax-parameterized categorical policy with a frozen old-policy
/// snapshot; the likelihood-ratio carrier for the clipped surrogate.
struct ToyPolicy {
    std::vector<double> logits;
    std::vector<double> snapshot_old;

    explicit ToyPolicy(std::vector<double> init_logits)
        : logits(init_logits), snapshot_old(std::move(init_logits)) {}
    ToyPolicy() = default;

    int num_actions() const { return static_cast<int>(logits.size()); }

    /// Freezes the current logits as the old policy for the next round.
    void snapshot() { snapshot_old = logits; }

    std::vector<double> probs() const;
    std::vector<double> old_probs() const;
};

struct LogProbPair {
    double new_logprob;
    double old_logprob;
};

/// Log-probability of one action under the current and snapshot logits.
/// Throws std::out_of_range for an out-of-range action.
LogProbPair toy_policy_logprob(const ToyPolicy& policy, int action);

/// One prompt's rollouts: sampled actions paired with their rewards.
struct ActionGroup {
    std::vector<int> actions;
    RewardGroup rewards;
};

/// Mean clipped-surrogate loss over groups, evaluated at the policy's
/// current logits against its snapshot.
double grpo_loss(const ToyPolicy& policy, const std::vector<ActionGroup>& groups,
                 const ScheduleConfig& cfg);

/// Analytic gradient of grpo_loss with respect to the logits.
std::vector<double> grpo_loss_gradient(const ToyPolicy& policy, const std::vector<ActionGroup>& groups,
                                       const ScheduleConfig& cfg);

/// One plain gradient step against the clipped objective. The snapshot is
/// left untouched; callers freeze it once per update round.
/// Throws std::invalid_argument on empty groups.
ToyPolicy grpo_update(const ToyPolicy& policy, const std::vector<ActionGroup>& groups,
                      const ScheduleConfig& cfg, double step_size);

}  // namespace rise
