#include "rise/grpo.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace rise {

AdvantageGroup group_advantages(const RewardGroup& group, double eps_norm) {
    const size_t g = group.rewards.size();
    if (g < 2) throw std::invalid_argument("group_advantages: group size must be >= 2");
    if (eps_norm <= 0.0) throw std::invalid_argument("group_advantages: eps_norm must be positive");

    double mean = 0.0;
    for (double r : group.rewards) mean += r;
    mean /= static_cast<double>(g);

    // Center, then remove the tiny floating-point residual of the mean so
    // the numerators are mean-centered as exactly as doubles allow.
    std::vector<double> centered(g);
    for (size_t i = 0; i < g; ++i) centered[i] = group.rewards[i] - mean;
    double residual = 0.0;
    for (double t : centered) residual += t;
    residual /= static_cast<double>(g);
    for (double& t : centered) t -= residual;

    double var = 0.0;
    for (double t : centered) var += t * t;
    var /= static_cast<double>(g);  // population variance
    const double denom = std::sqrt(var) + eps_norm;

    AdvantageGroup out;
    out.advantages.resize(g);
    for (size_t i = 0; i < g; ++i) out.advantages[i] = centered[i] / denom;
    return out;
}

double clipped_objective(const std::vector<double>& ratios, const AdvantageGroup& adv, double eps_clip) {
    const size_t g = ratios.size();
    if (g != adv.advantages.size()) throw std::invalid_argument("clipped_objective: length mismatch");
    if (g == 0) throw std::invalid_argument("clipped_objective: empty group");

    double sum = 0.0;
    for (size_t i = 0; i < g; ++i) {
        const double a = adv.advantages[i];
        const double clipped = std::clamp(ratios[i], 1.0 - eps_clip, 1.0 + eps_clip);
        sum += std::min(ratios[i] * a, clipped * a);
    }
    return -sum / static_cast<double>(g);
}

namespace {

std::vector<double> softmax(const std::vector<double>& logits) {
    double max_logit = *std::max_element(logits.begin(), logits.end());
    std::vector<double> out(logits.size());
    double z = 0.0;
    for (size_t i = 0; i < logits.size(); ++i) {
        out[i] = std::exp(logits[i] - max_logit);
        z += out[i];
    }
    for (double& p : out) p /= z;
    return out;
}

double log_softmax_at(const std::vector<double>& logits, int action) {
    double max_logit = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - max_logit);
    return logits[action] - max_logit - std::log(z);
}

}  // namespace

std::vector<double> ToyPolicy::probs() const { return softmax(logits); }
std::vector<double> ToyPolicy::old_probs() const { return softmax(snapshot_old); }

LogProbPair toy_policy_logprob(const ToyPolicy& policy, int action) {
    if (action < 0 || action >= policy.num_actions())
        throw std::out_of_range("toy_policy_logprob: action index out of range");
    return {log_softmax_at(policy.logits, action), log_softmax_at(policy.snapshot_old, action)};
}

double grpo_loss(const ToyPolicy& policy, const std::vector<ActionGroup>& groups,
                 const ScheduleConfig& cfg) {
    if (groups.empty()) throw std::invalid_argument("grpo_loss: empty groups");

    double total = 0.0;
    for (const auto& group : groups) {
        if (group.actions.size() != group.rewards.rewards.size())
            throw std::invalid_argument("grpo_loss: actions/rewards length mismatch");
        const AdvantageGroup adv = group_advantages(group.rewards, cfg.eps_norm);
        std::vector<double> ratios(group.actions.size());
        for (size_t i = 0; i < group.actions.size(); ++i) {
            const auto lp = toy_policy_logprob(policy, group.actions[i]);
            ratios[i] = std::exp(lp.new_logprob - lp.old_logprob);
        }
        total += clipped_objective(ratios, adv, cfg.eps_clip);
    }
    return total / static_cast<double>(groups.size());
}

std::vector<double> grpo_loss_gradient(const ToyPolicy& policy, const std::vector<ActionGroup>& groups,
                                       const ScheduleConfig& cfg) {
    if (groups.empty()) throw std::invalid_argument("grpo_loss_gradient: empty groups");

    const std::vector<double> pi = policy.probs();
    const int n = policy.num_actions();
    std::vector<double> grad(n, 0.0);

    for (const auto& group : groups) {
        if (group.actions.size() != group.rewards.rewards.size())
            throw std::invalid_argument("grpo_loss_gradient: actions/rewards length mismatch");
        const AdvantageGroup adv = group_advantages(group.rewards, cfg.eps_norm);
        const size_t g = group.actions.size();

        for (size_t i = 0; i < g; ++i) {
            const int action = group.actions[i];
            if (action < 0 || action >= n)
                throw std::out_of_range("grpo_loss_gradient: action index out of range");
            const auto lp = toy_policy_logprob(policy, action);
            const double ratio = std::exp(lp.new_logprob - lp.old_logprob);
            const double a = adv.advantages[i];
            const double clipped = std::clamp(ratio, 1.0 - cfg.eps_clip, 1.0 + cfg.eps_clip);

            // min() picks the unclipped branch on ties; the saturated
            // clipped branch has zero derivative in theta.
            if (ratio * a > clipped * a) continue;

            const double coeff = a * ratio / (static_cast<double>(g) * groups.size());
            for (int j = 0; j < n; ++j) {
                const double dlogp = (j == action ? 1.0 : 0.0) - pi[j];
                grad[j] -= coeff * dlogp;  // loss is the negated surrogate
            }
        }
    }
    return grad;
}

ToyPolicy grpo_update(const ToyPolicy& policy, const std::vector<ActionGroup>& groups,
                      const ScheduleConfig& cfg, double step_size) {
    const std::vector<double> grad = grpo_loss_gradient(policy, groups, cfg);
    ToyPolicy updated = policy;
    for (int j = 0; j < policy.num_actions(); ++j) updated.logits[j] -= step_size * grad[j];
    return updated;
}

}  // namespace rise
