#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "currl/policy.hpp"
#include "currl/reward.hpp"

namespace currl {

struct RlConfig {
    double clip_epsilon = 0.2;
    double kl_beta = 0.01;
    double learning_rate = 2e-6;
    std::size_t rollouts_per_prompt = 8;
    std::size_t batch_size = 16;  // prompts per update step
    double temperature = 1.0;
    std::size_t max_prompt_len = 1024;
    std::size_t max_response_len = 4096;
    bool kl_in_reward = true;
    bool kl_in_loss = true;
    // Per-token tail sums of the KL penalty instead of one sequence-level sum.
    bool kl_tail_sum = false;
    double std_floor = 1e-6;

    void validate() const;
};

// The N rollouts of one prompt plus their scores and normalized advantages.
struct RolloutGroup {
    std::string prompt_id;
    std::vector<Trajectory> trajectories;
    std::vector<RewardBreakdown> rewards;  // optional; feeds the step statistics
    std::vector<double> shaped_rewards;
    std::vector<std::vector<double>> advantages;  // [trajectory][token]
};

// Non-negative per-token KL estimate rho - ln(rho) - 1 with
// rho = pi_ref / pi_theta = exp(logp_ref - logp_cur).
double kl_term(double logp_cur, double logp_ref);

// r_i = terminal_i - beta * sum_t KL_{i,t} when cfg.kl_in_reward, else terminal_i.
std::vector<double> shaped_rewards(const RolloutGroup& group, const RlConfig& cfg);

// (r_i - mean) / std with the population std; all zeros below std_floor.
std::vector<double> group_advantages(const std::vector<double>& shaped, double std_floor);

// Fills shaped_rewards and advantages (sequence scalars broadcast to tokens,
// or normalized per-token tail returns when cfg.kl_tail_sum).
void compute_advantages(RolloutGroup& group, const RlConfig& cfg);

struct ObjectiveValue {
    double objective = 0.0;
    std::vector<double> gradient;  // ascent direction
};

// Clipped surrogate of one group evaluated at `params`, with an optional
// -beta * KL term inside the loss. Tokens whose clipped branch binds
// contribute no gradient.
ObjectiveValue surrogate_loss(const RolloutGroup& group, const PolicyParams& params,
                              const RlConfig& cfg);

// Mean of surrogate_loss over the batch.
ObjectiveValue batch_objective(const std::vector<RolloutGroup>& groups, const PolicyParams& params,
                               const RlConfig& cfg);

struct StepStats {
    double mean_shaped_reward = 0.0;
    double mean_terminal_reward = 0.0;
    double mean_response_length = 0.0;
    double mean_kl = 0.0;  // per token
    double format_valid_rate = 0.0;
    double objective = 0.0;
    double grad_norm = 0.0;
};

StepStats batch_stats(const std::vector<RolloutGroup>& groups);

// One gradient-ascent step on the batch objective. A non-finite gradient
// raises NumericError and leaves the caller's parameters untouched.
std::pair<PolicyParams, StepStats> policy_update(const PolicyParams& params,
                                                 const std::vector<RolloutGroup>& groups,
                                                 const RlConfig& cfg);

// Fills logp_old (from the sampling-time values), logp_ref under `ref` and the
// per-token KL terms of a freshly sampled trajectory.
void annotate_trajectory(Trajectory& traj, const PolicyParams& ref);

}  // namespace currl
